#!/usr/bin/env python3
"""Single-threaded time of one objective-plus-gradient evaluation, M=256, L_K=64, over strides."""

import argparse
from pathlib import Path

from framealias.cli import BENCH_COLUMNS, bench_rows, write_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, default=256)
    ap.add_argument("--LK", type=int, default=64)
    ap.add_argument("--strides", default="1,2,4,8,16,32,64")
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--outdir", default="results")
    args = ap.parse_args()

    rows = []
    for d in (int(s) for s in args.strides.split(",")):
        part = bench_rows(args.M, args.LK, d, args.repeats)
        rows += part
        print("  ".join(f"d={d:<3d} {r[0]:6s} {r[4] / 1e6:8.2f} ms ({r[6]:5.1f}x)" for r in part))
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(out / "bench.csv", BENCH_COLUMNS, rows)


if __name__ == "__main__":
    main()
