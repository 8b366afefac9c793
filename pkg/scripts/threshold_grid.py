#!/usr/bin/env python3
"""Sweep the quadratic-mean boundedness threshold for backward shift
sections against the closed-form law, writing one CSV row per grid point.

Usage: python scripts/threshold_grid.py [--d 4096] [--nmax 4000] [--out grid.csv]
"""

import argparse
import sys
import time

from herop.ergodic import MOVING_BASIS, OracleKind, cesaro_probe, default_n_grid, shift_threshold_oracle
from herop.operators import Direction, shift_section
from herop.series import PowSign, binomial_series


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=4096, help="section dimension")
    parser.add_argument("--nmax", type=int, default=4000)
    parser.add_argument("--out", default=None)
    args = parser.parse_args()
    if args.nmax >= args.d:
        parser.error("nmax must stay below the section dimension")

    grid = default_n_grid(args.nmax)
    rows = ["s,a,oracle_bounded,trend,statistic,agree"]
    started = time.time()
    mismatches = 0
    for s in (0.25, 0.5, 0.75):
        section = shift_section(
            binomial_series(s, PowSign.MINUS, args.d), Direction.BACKWARD, args.d
        )
        for a10 in range(1, 13):
            a = a10 / 10.0
            if abs(a - (1.0 - s)) < 0.1 - 1e-9:
                continue
            oracle = shift_threshold_oracle(s, a, None, OracleKind.QUADRATIC_MEANS)
            probe = cesaro_probe(section, MOVING_BASIS, a, 2.0, grid)
            trend = probe.trends[0]
            agree = trend.bounded == oracle.bounded
            mismatches += int(not agree)
            rows.append(
                f"{s},{a},{int(oracle.bounded)},{trend.kind},{trend.statistic:.6g},{int(agree)}"
            )
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(
        f"# {len(rows) - 1} points, {mismatches} mismatches, {time.time() - started:.1f}s",
        file=sys.stderr,
    )
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
