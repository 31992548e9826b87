"""Rotor aggregation cluster: write the P2 pattern and report circularity as n grows.

    python3 scripts/rotor_aggregation_pattern.py --sizes 100 1000 5000 -o out/
"""
import argparse
import time
from pathlib import Path

from abelnet.aggregate import rotor_aggregation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 1000, 5000])
    ap.add_argument("--order", default="NESW")
    ap.add_argument("-o", "--outdir", default="aggregation")
    args = ap.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    print(f"{'n':>7}{'sites':>8}{'r_out':>9}{'r_in':>9}{'ratio':>8}{'steps':>11}{'sec':>7}")
    for n in args.sizes:
        t0 = time.perf_counter()
        agg = rotor_aggregation(n, order=args.order)
        dt = time.perf_counter() - t0
        (outdir / f"rotor_{args.order}_{n}.pgm").write_text(agg.pgm(), encoding="ascii")
        ratio = agg.ratio() if agg.visited else float("nan")
        print(f"{n:>7}{len(agg.visited):>8}{agg.outradius:>9.3f}{agg.inradius:>9.3f}{ratio:>8.4f}{agg.steps:>11}{dt:>7.2f}")
    print(f"patterns written to {outdir}/")


if __name__ == "__main__":
    main()
