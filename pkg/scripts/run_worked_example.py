#!/usr/bin/env python3
"""Run the full workflow on the bundled example data.

Scores the three-model influenza-hospitalization example with both
algorithms, aggregates under every NA policy and both subset-weight
schemes, and prints the summary report. Outputs land in --outdir.
"""

import argparse
import sys
from pathlib import Path

from ensemble_importance.cli import main as cli_main

REPO = Path(__file__).resolve().parent.parent
FORECASTS = REPO / "data" / "example_forecasts.csv"
ORACLE = REPO / "data" / "example_oracle.csv"


def run(argv):
    print(f"$ ensemble-importance {' '.join(argv)}", file=sys.stderr)
    code = cli_main(argv)
    if code != 0:
        sys.exit(code)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="out", help="output directory")
    args = parser.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    base = ["--forecasts", str(FORECASTS), "--oracle", str(ORACLE)]

    lomo = outdir / "scores_lomo.csv"
    run(["score", *base, "--output", str(lomo)])
    for na_action in ("drop", "worst", "average"):
        run([
            "aggregate", "--scores", str(lomo), "--na-action", na_action,
            "--output", str(outdir / f"aggregate_lomo_{na_action}.csv"),
        ])

    for scheme in ("equal", "perm_based"):
        scores = outdir / f"scores_lasomo_{scheme}.csv"
        run(["score", *base, "--algorithm", "lasomo", "--subset-wt", scheme,
             "--output", str(scores)])
        run(["aggregate", "--scores", str(scores),
             "--output", str(outdir / f"aggregate_lasomo_{scheme}.csv")])

    run(["summary", "--scores", str(lomo),
         "--output", str(outdir / "summary_lomo.txt")])
    print(f"\nwrote results to {outdir}/", file=sys.stderr)
    print((outdir / "summary_lomo.txt").read_text())


if __name__ == "__main__":
    main()
