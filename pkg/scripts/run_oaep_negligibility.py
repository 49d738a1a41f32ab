#!/usr/bin/env python3
"""Chart how fast the full-pad test converges on the useless-pad test.

The divergence between the two rank-1 projectors is |R| / 2**k0, where R is
the set of pads whose encodings the reader ever showed to a human. The column
halves with every extra pad bit, which is the negligibility the token-sealing
protocol leans on.
"""

import argparse
import sys

from qseal.harness import emit_report, rows_to_csv, run_oaep_negligibility


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--k0", default="6,8,10,12", help="comma-separated pad widths")
    parser.add_argument("--r-sizes", default="0,1,4,16", help="comma-separated |R| values")
    parser.add_argument("--out", help="report path (default: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    args = parser.parse_args()

    k0_values = [int(v) for v in args.k0.split(",")]
    r_sizes = [int(v) for v in args.r_sizes.split(",")]
    rows = run_oaep_negligibility(k0_values, r_sizes)
    if args.out:
        emit_report(rows, args.format, args.out)
        print(f"{len(rows)} rows -> {args.out}")
    else:
        sys.stdout.write(rows_to_csv(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
