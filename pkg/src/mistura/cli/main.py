import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import List, Optional

import typer
from pydantic import ValidationError

from mistura import __version__
from mistura.cli import output
from mistura.core.arena import (
    ConfigParseError,
    certify_traces,
    export_trace,
    load_game_config,
    play_batch,
)
from mistura.core.config import apply_config, config, load_config_from_env
from mistura.core.entropies import (
    DualSolverError,
    bregman,
    closed_form_regret,
    legendre_probe,
    printed_quadratic_regret,
    validate_dual_solver,
)
from mistura.core.mixability import MixabilitySearch, analyze, row_notes, table_presets
from mistura.core.models.entropy import EntropySpec
from mistura.core.models.loss import LossSpec
from mistura.core.models.manifest import RunManifest
from mistura.core.models.mixability import MixSearchConfig
from mistura.core.simplex import dirac, uniform

app = typer.Typer(help="Generalized mixability: entropies, mixability constants and games")

EXIT_OK = 0
EXIT_CERTIFICATION_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

DEFAULT_REGRET_ENTROPIES = [
    '{"kind":"shannon"}',
    '{"kind":"quadratic"}',
    '{"kind":"tsallis","alpha":-0.5}',
    '{"kind":"renyi","alpha":-0.5}',
]


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log debug detail"),
    env_file: Optional[Path] = typer.Option(
        None, "--env-file", help="dotenv file with MISTURA_* settings"
    ),
):
    """Configure logging and load MISTURA_* settings for every command."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler(sys.stderr)],
    )
    try:
        apply_config(load_config_from_env(env_file))
    except ValueError as e:
        _fail(f"Invalid MISTURA_* settings: {e}", EXIT_USAGE)


def _fail(message: str, code: int):
    typer.echo(f"❌ {message}", err=True)
    raise typer.Exit(code)


def _parse_spec(text: str) -> dict:
    """A JSON spec, or a bare kind name such as ``shannon`` or ``log``."""
    text = text.strip()
    if not text.startswith("{"):
        return {"kind": text}
    return json.loads(text)


def parse_entropy(text: str) -> EntropySpec:
    try:
        return EntropySpec.from_dict(_parse_spec(text))
    except (json.JSONDecodeError, ValidationError, TypeError, AttributeError) as e:
        _fail(f"Invalid entropy spec {text!r}: {e}", EXIT_USAGE)


def parse_loss(text: str, outcomes: int) -> LossSpec:
    try:
        data = _parse_spec(text)
        data.setdefault("outcomes", outcomes)
        return LossSpec.from_dict(data)
    except (json.JSONDecodeError, ValidationError, TypeError, AttributeError) as e:
        _fail(f"Invalid loss spec {text!r}: {e}", EXIT_USAGE)


def _search_config(grid, eta_lo, eta_hi, eta_tol, workers) -> MixSearchConfig:
    settings = {}
    if grid is not None:
        settings["coarse_resolution"] = grid
    if eta_lo is not None:
        settings["eta_lo"] = eta_lo
    if eta_hi is not None:
        settings["eta_hi"] = eta_hi
    if eta_tol is not None:
        settings["eta_tolerance"] = eta_tol
    if workers is not None:
        settings["workers"] = workers
    try:
        return MixSearchConfig(**settings)
    except ValidationError as e:
        _fail(f"Invalid search settings: {e}", EXIT_USAGE)


def _check_format(fmt: str) -> str:
    if fmt not in ("csv", "json"):
        _fail(f"--format must be csv or json, got {fmt!r}", EXIT_USAGE)
    return fmt


@app.command()
def table(
    entropy: Optional[List[str]] = typer.Option(
        None, "--entropy", help="Column entropy as JSON, repeatable"
    ),
    loss: Optional[List[str]] = typer.Option(None, "--loss", help="Row loss as JSON, repeatable"),
    experts: int = typer.Option(2, "--experts", help="Number of experts K"),
    outcomes: int = typer.Option(2, "--outcomes", help="Number of outcomes |X|"),
    grid: Optional[int] = typer.Option(None, "--grid", help="Coarse grid resolution"),
    eta_lo: Optional[float] = typer.Option(None, "--eta-lo", help="Lower end of the eta bracket"),
    eta_hi: Optional[float] = typer.Option(None, "--eta-hi", help="Upper end of the eta bracket"),
    eta_tol: Optional[float] = typer.Option(None, "--eta-tol", help="Relative eta tolerance"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Threads per search"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write <out>.csv and <out>.json"),
    fmt: str = typer.Option("csv", "--format", help="Stdout format: csv or json"),
):
    """Mixability constants and optimal regret bounds for every (loss, entropy) pair."""
    started = time.perf_counter()
    _check_format(fmt)
    default_entropies, default_losses, _ = table_presets()
    if entropy:
        columns = [parse_entropy(e) for e in entropy]
    else:
        columns = default_entropies
    if loss:
        losses = {}
        for text in loss:
            spec = parse_loss(text, outcomes)
            losses[spec.label] = spec
    else:
        losses = {name: spec.with_outcomes(outcomes) for name, spec in default_losses.items()}
    cfg = _search_config(grid, eta_lo, eta_hi, eta_tol, workers)

    labels = [phi.label for phi in columns]
    reports = {}
    try:
        for row, spec in losses.items():
            for phi, label in zip(columns, labels):
                reports[(row, label)] = analyze(phi, spec, cfg, experts, notes=row_notes(row))
    except DualSolverError as e:
        _fail(f"Dual solver failed: {e}", EXIT_NUMERICAL)

    header = ["loss"] + labels
    rows = output.table_grid(list(losses), labels, reports)
    document = {
        "experts": experts,
        "outcomes": outcomes,
        "columns": labels,
        "rows": list(losses),
        "table": rows,
        "reports": [report.to_dict() for report in reports.values()],
    }
    if fmt == "csv":
        output.emit_csv(header, rows)
    else:
        output.emit_json(document)

    if out is not None:
        csv_path = output.write_csv(Path(f"{out}.csv"), header, rows)
        json_path = output.write_json(Path(f"{out}.json"), document)
        manifest = RunManifest(
            command="table",
            config={
                "entropies": [phi.to_dict() for phi in columns],
                "losses": {row: spec.to_dict() for row, spec in losses.items()},
                "experts": experts,
                "outcomes": outcomes,
                "search": cfg.metadata(),
            },
            seconds=time.perf_counter() - started,
            outputs=[str(csv_path), str(json_path)],
        )
        typer.echo(f"✅ Table written to {csv_path} (manifest {manifest.write(out)})", err=True)


@app.command()
def eta(
    entropy: str = typer.Option('{"kind":"shannon"}', "--entropy", help="Entropy as JSON"),
    loss: str = typer.Option('{"kind":"log"}', "--loss", help="Loss as JSON"),
    experts: int = typer.Option(2, "--experts", help="Number of experts K"),
    outcomes: int = typer.Option(2, "--outcomes", help="Number of outcomes |X|"),
    grid: Optional[int] = typer.Option(None, "--grid", help="Coarse grid resolution"),
    eta_lo: Optional[float] = typer.Option(None, "--eta-lo", help="Lower end of the eta bracket"),
    eta_hi: Optional[float] = typer.Option(None, "--eta-hi", help="Upper end of the eta bracket"),
    eta_tol: Optional[float] = typer.Option(None, "--eta-tol", help="Relative eta tolerance"),
    scan: int = typer.Option(0, "--scan", help="Also print M at this many log-spaced etas"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Threads per search"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write <out>.json"),
    fmt: str = typer.Option("csv", "--format", help="Stdout format: csv or json"),
):
    """Mixability constant and optimal regret of one (loss, entropy) pair."""
    started = time.perf_counter()
    _check_format(fmt)
    phi = parse_entropy(entropy)
    spec = parse_loss(loss, outcomes)
    cfg = _search_config(grid, eta_lo, eta_hi, eta_tol, workers)
    try:
        report = analyze(phi, spec, cfg, experts)
        sweep = []
        if scan > 0:
            etas = [
                cfg.eta_lo * (cfg.eta_hi / cfg.eta_lo) ** (i / max(scan - 1, 1))
                for i in range(scan)
            ]
            values = MixabilitySearch(phi, spec, experts, cfg).scan(etas)
            sweep = list(zip(etas, values))
    except DualSolverError as e:
        _fail(f"Dual solver failed: {e}", EXIT_NUMERICAL)

    document = report.to_dict() | {"scan": sweep}
    if fmt == "json":
        output.emit_json(document)
    else:
        typer.echo(f"pair      ({spec.label}, {phi.label})")
        typer.echo(f"eta*      {output.sig4(report.eta_star)} [{report.status}]")
        typer.echo(f"regret    {output.sig4(report.regret)}")
        typer.echo(f"uniform   {output.sig4(report.regret_uniform)}")
        for e, m in sweep:
            typer.echo(f"M({output.sig4(e)}) = {output.sig4(m)}")

    if out is not None:
        json_path = output.write_json(Path(f"{out}.json"), document)
        RunManifest(
            command="eta",
            config={
                "entropy": phi.to_dict(),
                "loss": spec.to_dict(),
                "experts": experts,
                "search": cfg.metadata(),
                "scan": scan,
            },
            seconds=time.perf_counter() - started,
            outputs=[str(json_path)],
        ).write(out)


@app.command("regret-bounds")
def regret_bounds(
    entropy: Optional[List[str]] = typer.Option(
        None, "--entropy", help="Entropy as JSON, repeatable"
    ),
    k_min: int = typer.Option(2, "--k-min", help="Smallest number of experts"),
    k_max: int = typer.Option(8, "--k-max", help="Largest number of experts"),
    out: Optional[Path] = typer.Option(None, "--out", help="Write <out>.csv"),
    fmt: str = typer.Option("csv", "--format", help="Stdout format: csv or json"),
):
    """Closed-form constant-regret bounds against numerical Bregman divergences."""
    _check_format(fmt)
    if k_min < 2 or k_max < k_min:
        _fail("need 2 <= --k-min <= --k-max", EXIT_USAGE)
    specs = [parse_entropy(e) for e in (entropy or DEFAULT_REGRET_ENTROPIES)]
    header = ["entropy", "K", "closed_form", "bregman", "difference", "printed"]
    rows, records = [], []
    for phi in specs:
        for K in range(k_min, k_max + 1):
            closed = closed_form_regret(phi, K)
            numeric = bregman(phi, dirac(K, 0), uniform(K))
            printed = printed_quadratic_regret(K) / phi.eta if phi.kind == "quadratic" else None
            records.append(
                {
                    "entropy": phi.label,
                    "K": K,
                    "closed_form": closed,
                    "bregman": numeric,
                    "difference": closed - numeric,
                    "printed": printed,
                }
            )
            rows.append(
                [
                    phi.label,
                    str(K),
                    output.sig4(closed),
                    output.sig4(numeric),
                    f"{closed - numeric:.2e}",
                    output.sig4(printed),
                ]
            )
    if fmt == "csv":
        output.emit_csv(header, rows)
    else:
        output.emit_json(records)
    if out is not None:
        csv_path = output.write_csv(Path(f"{out}.csv"), header, rows)
        RunManifest(
            command="regret-bounds",
            config={"entropies": [phi.to_dict() for phi in specs], "k_min": k_min, "k_max": k_max},
            outputs=[str(csv_path)],
        ).write(out)


@app.command()
def simulate(
    game_config: Path = typer.Argument(..., help="Game config file (.cfg, JSON)"),
    out: Optional[Path] = typer.Option(None, "--out", help="Trace prefix for CSV and summary"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Override the config seed"),
    games: int = typer.Option(1, "--games", help="Play this many games with consecutive seeds"),
    workers: Optional[int] = typer.Option(None, "--workers", help="Games played in parallel"),
    fmt: str = typer.Option("csv", "--format", help="Stdout format: csv or json"),
):
    """Play games from a config file and certify the constant-regret bound."""
    started = time.perf_counter()
    _check_format(fmt)
    if games < 1:
        _fail("--games must be at least 1", EXIT_USAGE)
    try:
        game = load_game_config(game_config)
    except ConfigParseError as e:
        _fail(str(e), EXIT_USAGE)
    if seed is not None:
        game = game.model_copy(update={"seed": seed})
    batch = [
        game.model_copy(update={"seed": game.seed + i, "name": f"{game.label}-{i}"})
        if games > 1
        else game
        for i in range(games)
    ]

    traces = play_batch(batch, workers=workers)
    report = certify_traces(traces)
    if out is not None:
        outputs = []
        for i, trace in enumerate(traces):
            prefix = Path(f"{out}-{i}") if games > 1 else Path(out)
            outputs.extend(str(p) for p in export_trace(trace, prefix))
        RunManifest(
            command="simulate",
            config={"game": game.to_dict(), "games": games, "workers": workers},
            seed=game.seed,
            seconds=time.perf_counter() - started,
            outputs=outputs,
        ).write(out)

    if fmt == "json":
        output.emit_json(report.to_dict())
    else:
        header = ["game", "rounds", "regret", "bound", "min_slack", "flagged", "certified"]
        rows = [
            [
                s["game"],
                str(s["rounds"]),
                output.sig4(s["regret"]),
                output.sig4(min(s["bound"]) if s["bound"] else math.nan),
                output.sig4(min(s["bound_slack"]) if s["bound_slack"] else math.nan),
                str(len(s["flagged_rounds"])),
                "yes" if s["certified"] else "NO",
            ]
            for s in report.summaries
        ]
        output.emit_csv(header, rows)
    if any(s["error"] for s in report.summaries):
        _fail("A dual solver failed during play", EXIT_NUMERICAL)
    if not report.all_certified:
        for i in report.failures:
            s = report.summaries[i]
            typer.echo(
                f"❌ {s['game']}: flagged rounds {s['flagged_rounds']}, "
                f"bound slack {[output.sig4(v) for v in s['bound_slack']]}",
                err=True,
            )
        raise typer.Exit(EXIT_CERTIFICATION_FAILED)
    typer.echo(f"✅ {report.certified}/{report.games} games certified")


@app.command("entropy-info")
def entropy_info(
    entropy: str = typer.Option('{"kind":"shannon"}', "--entropy", help="Entropy as JSON"),
    experts: int = typer.Option(2, "--experts", help="Simplex dimension K for the probes"),
    samples: int = typer.Option(1000, "--samples", help="Dual validation samples"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Random seed"),
    fmt: str = typer.Option("csv", "--format", help="Stdout format: csv or json"),
):
    """Legendre probe, dual-solver validation and closed-form regrets of an entropy."""
    _check_format(fmt)
    phi = parse_entropy(entropy)
    seed = config.default_seed if seed is None else seed
    probe = legendre_probe(phi, experts, seed=seed)
    try:
        validation = validate_dual_solver(phi, experts, samples=samples, seed=seed)
    except DualSolverError as e:
        _fail(f"Dual solver failed: {e}", EXIT_NUMERICAL)
    regrets = {K: closed_form_regret(phi, K) for K in range(2, 9)}

    if fmt == "json":
        output.emit_json(
            {
                "entropy": phi.to_dict(),
                "legendre_probe": probe.model_dump() | {"is_legendre": probe.is_legendre},
                "dual_validation": validation.model_dump(),
                "closed_form_regret": regrets,
            }
        )
        return
    typer.echo(f"Entropy {phi.label}  {phi.to_json()}")
    typer.echo(f"  strictly convex:      {'yes' if probe.strictly_convex else 'no'}")
    if probe.boundary_gradient_unbounded:
        norm = output.sig4(probe.max_gradient_norm)
        typer.echo(f"  boundary gradient:    unbounded (|grad| {norm})")
    else:
        typer.echo("  boundary gradient:    bounded: not Legendre")
    typer.echo(f"  Legendre:             {'yes' if probe.is_legendre else 'no'}")
    typer.echo(
        f"  dual solver:          max error {validation.max_reference_error:.2e} "
        f"vs {validation.reference}, grid shortfall {validation.max_grid_shortfall:.2e}"
    )
    closed = ", ".join(f"K={K}: {output.sig4(r)}" for K, r in regrets.items())
    typer.echo(f"  closed-form regret:   {closed}")


@app.command("help")
def help_command():
    """Show all available commands and usage."""
    typer.echo(
        f"""
    mistura {__version__} – generalized mixability

    Available commands:

    table              Mixability constants and regret bounds, one cell per (loss, entropy)
    eta                eta* and the optimal regret of one pair, optionally an M(eta) scan
    regret-bounds      Closed-form regret bounds next to numerical Bregman divergences
    simulate           Play games from a config file and certify the regret bound
    entropy-info       Legendre probe, dual-solver validation and closed forms
    help               Show this help message

    Specs are JSON, or a bare kind name:
      --entropy '{{"kind":"tsallis","alpha":-0.5}}'    --loss log
      --loss '{{"kind":"proper","entropy":{{"kind":"renyi","alpha":-0.5}}}}'

    Exit codes: 0 success, 1 certification failure, 2 usage or config error,
    3 numerical failure.

    Examples:

    mistura table --out runs/mixability_table
    mistura table --entropy shannon --entropy quadratic --loss log --loss squared
    mistura eta --entropy '{{"kind":"renyi","alpha":-0.9}}' --loss log --scan 13
    mistura regret-bounds --k-max 8
    mistura simulate configs/shannon_log_2x2.cfg --out runs/shannon_log
    mistura entropy-info --entropy quadratic
    mistura --verbose simulate configs/tsallis_matched_2x2.cfg --games 10
    """
    )


if __name__ == "__main__":
    app()
