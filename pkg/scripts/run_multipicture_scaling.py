#!/usr/bin/env python3
"""Tabulate how indexed-picture sealing gets safer as the collection grows.

For each picture count n the best acceptance any reader can reach after
collapsing the index register is 1/n, so detection climbs as (n-1)/n.
"""

import argparse
import sys

from qseal.harness import emit_report, rows_to_csv, run_multipicture_scaling


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--counts",
        default="2,3,4,6,10,20,50,100",
        help="comma-separated picture counts",
    )
    parser.add_argument("--out", help="report path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    args = parser.parse_args()

    counts = [int(v) for v in args.counts.split(",")]
    rows = run_multipicture_scaling(counts)
    if args.out:
        emit_report(rows, args.format, args.out)
        print(f"{len(rows)} rows -> {args.out}")
    else:
        sys.stdout.write(rows_to_csv(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
