#!/usr/bin/env python3
"""
Reproduce the 2x2 mixability table.

Computes every (loss, entropy) cell of the preset table, prints it next to
the published values and writes CSV, JSON and a run manifest.

Usage:
    python scripts/reproduce_table.py [--out runs/mixability_table] [--grid N] [--env-file .env]
"""

import argparse
import logging
import sys
import time
from pathlib import Path

# Add the project source to the path
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mistura.cli import output
from mistura.core.config import load_config_from_env
from mistura.core.mixability import analyze, row_notes, table_presets
from mistura.core.models.manifest import RunManifest
from mistura.core.models.mixability import MixSearchConfig

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger("mistura-table")


def parse_args():
    parser = argparse.ArgumentParser(description="Reproduce the 2x2 mixability table")
    parser.add_argument("--out", type=str, default="runs/mixability_table",
                        help="Output prefix (default: runs/mixability_table)")
    parser.add_argument("--grid", type=int, default=None,
                        help="Coarse grid resolution (default: from configuration)")
    parser.add_argument("--workers", type=int, default=None,
                        help="Threads per search (default: sequential)")
    parser.add_argument("--env-file", type=str, default=None,
                        help="dotenv file with MISTURA_* settings")
    parser.add_argument("--tolerance", type=float, default=0.02,
                        help="Relative deviation from the published values that is reported")
    return parser.parse_args()


def main():
    args = parse_args()
    settings = load_config_from_env(Path(args.env_file) if args.env_file else None)
    search = MixSearchConfig(
        coarse_resolution=args.grid or settings.coarse_resolution,
        fine_resolution=settings.fine_resolution,
        eta_lo=settings.eta_lo,
        eta_hi=settings.eta_hi,
        eta_tolerance=settings.eta_tolerance,
        mixable_tolerance=settings.mixable_tolerance,
        workers=args.workers,
    )
    entropies, losses, expected = table_presets()
    labels = [phi.label for phi in entropies]

    started = time.perf_counter()
    reports = {}
    deviations = []
    for row, loss in losses.items():
        for phi, label in zip(entropies, labels):
            report = analyze(phi, loss, search, experts=2, notes=row_notes(row))
            reports[(row, label)] = report
            logger.info(f"{row:>10} {label:>8}: {report.cell} [{report.status}]")
            published = expected.get((row, label))
            if published is None or report.regret is None:
                continue
            regret, eta = published
            checks = (("regret", report.regret, regret), ("eta", report.eta_star, eta))
            for name, got, want in checks:
                if abs(got - want) > args.tolerance * max(abs(want), 1e-12):
                    deviations.append(f"{row}/{label} {name}: {got:.4g} vs published {want:.4g}")

    header = ["loss"] + labels
    rows = output.table_grid(list(losses), labels, reports)
    print(output.render_rows(header, rows))

    out = Path(args.out)
    csv_path = output.write_csv(Path(f"{out}.csv"), header, rows)
    json_path = output.write_json(
        Path(f"{out}.json"),
        {"columns": labels, "rows": list(losses), "table": rows,
         "reports": [r.to_dict() for r in reports.values()]},
    )
    RunManifest(
        command="reproduce_table",
        config={"search": search.metadata(), "tolerance": args.tolerance},
        argv=sys.argv,
        seconds=time.perf_counter() - started,
        outputs=[str(csv_path), str(json_path)],
    ).write(out)

    for deviation in deviations:
        logger.warning(deviation)
    logger.info(f"Table written to {csv_path} in {time.perf_counter() - started:.1f}s, "
                f"{len(deviations)} deviations above {args.tolerance:.0%}")


if __name__ == "__main__":
    main()
