#!/usr/bin/env python3
"""
Certify the constant-regret bound over a randomized batch of games.

Draws games over K in {2, 3, 5}, T in {1..max-rounds}, the iid_random and
greedy_adversary scenarios and two matched (entropy, loss) pairs, plays
them all and reports every game whose regret exceeds the Bregman bound.

Usage:
    python scripts/certify_games.py [--games 1000] [--workers 8] [--out runs/certify]
"""

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

# Add the project source to the path
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mistura.cli import output
from mistura.core.arena import certify_traces, export_trace, play_batch
from mistura.core.config import config
from mistura.core.models.entropy import EntropySpec
from mistura.core.models.game import GameConfig
from mistura.core.models.loss import LossSpec
from mistura.core.models.manifest import RunManifest

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger("mistura-certify")

EXPERT_COUNTS = (2, 3, 5)
SCENARIOS = ("iid_random", "greedy_adversary")
PAIRS = (
    (EntropySpec(kind="shannon"), LossSpec(kind="log")),
    (
        EntropySpec(kind="tsallis", alpha=-0.5),
        LossSpec(kind="proper", entropy=EntropySpec(kind="tsallis", alpha=-0.5)),
    ),
)


def parse_args():
    parser = argparse.ArgumentParser(description="Certify the regret bound over random games")
    parser.add_argument("--games", type=int, default=1000, help="Number of games (default: 1000)")
    parser.add_argument("--max-rounds", type=int, default=200,
                        help="Largest number of rounds per game (default: 200)")
    parser.add_argument("--seed", type=int, default=config.default_seed,
                        help="Seed of the batch draw")
    parser.add_argument("--workers", type=int, default=None, help="Games played in parallel")
    parser.add_argument("--tolerance", type=float, default=config.bound_tolerance,
                        help="Allowed bound slack below zero")
    parser.add_argument("--out", type=str, default=None,
                        help="Write a summary and the traces of failed games under this prefix")
    return parser.parse_args()


def draw_batch(games: int, max_rounds: int, seed: int):
    """Random game configurations, one seed per game."""
    rng = np.random.default_rng(seed)
    batch = []
    for i in range(games):
        entropy, loss = PAIRS[int(rng.integers(len(PAIRS)))]
        batch.append(
            GameConfig(
                name=f"game-{i:04d}",
                experts=int(rng.choice(EXPERT_COUNTS)),
                rounds=int(rng.integers(1, max_rounds + 1)),
                loss=loss,
                entropy=entropy,
                scenario=SCENARIOS[int(rng.integers(len(SCENARIOS)))],
                seed=int(rng.integers(2**31)),
            )
        )
    return batch


def main():
    args = parse_args()
    started = time.perf_counter()
    batch = draw_batch(args.games, args.max_rounds, args.seed)
    logger.info(f"Playing {len(batch)} games with {args.workers or 1} workers")
    traces = play_batch(batch, workers=args.workers)
    report = certify_traces(traces, tolerance=args.tolerance)

    for i in report.failures:
        summary = report.summaries[i]
        logger.error(
            f"{summary['game']}: regret {summary['regret']:.6g}, "
            f"slack {min(summary['bound_slack'], default=float('nan')):.3e}, "
            f"flagged {summary['flagged_rounds']}, error {summary['error']}"
        )

    if args.out:
        out = Path(args.out)
        outputs = [str(output.write_json(Path(f"{out}.json"), report.to_dict()))]
        for i in report.failures:
            prefix = Path(f"{out}-{traces[i].config.label}")
            outputs.extend(str(p) for p in export_trace(traces[i], prefix))
        RunManifest(
            command="certify_games",
            config={"games": args.games, "max_rounds": args.max_rounds,
                    "workers": args.workers, "tolerance": args.tolerance},
            seed=args.seed,
            seconds=time.perf_counter() - started,
            outputs=outputs,
        ).write(out)

    logger.info(
        f"{report.certified}/{report.games} games certified, min slack {report.min_slack:.3e}, "
        f"{report.flagged_rounds} flagged rounds, {time.perf_counter() - started:.1f}s"
    )
    sys.exit(0 if report.all_certified else 1)


if __name__ == "__main__":
    main()
