"""Solve random monotone integer programs with the network and compare with brute force.

Also solves a handful of toppling systems and prints v, L v and b.

    python3 scripts/monotone_ip_demo.py --count 50 --seed 1
"""
import argparse
import random
import time

import numpy as np

from abelnet.generators import random_monotone_program, random_toppling_system
from abelnet.optimize import brute_force_least, solve_monotone, solve_toppling_ip


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--toppling", type=int, default=5, help="number of toppling systems to show")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    agree = 0
    t_net = t_brute = 0.0
    statuses = {}
    for _ in range(args.count):
        prog = random_monotone_program(rng)
        t0 = time.perf_counter()
        sol = solve_monotone(prog)
        t1 = time.perf_counter()
        best = brute_force_least(prog)
        t2 = time.perf_counter()
        t_net += t1 - t0
        t_brute += t2 - t1
        statuses[sol.status] = statuses.get(sol.status, 0) + 1
        agree += sol.u == best
    print(f"monotone programs: {args.count}, statuses {statuses}")
    print(f"agreement with brute force: {agree}/{args.count}")
    print(f"time: network {t_net:.3f}s, brute force {t_brute:.3f}s")

    prng = random.Random(args.seed)
    for k in range(args.toppling):
        sys = random_toppling_system(prng)
        sol = solve_toppling_ip(sys)
        print(f"\ntoppling system {k}: n={sys.n}, r={sys.r.tolist()}, x={sys.x.tolist()}")
        print(f"  v = {list(sol.v)}  L v = {list(sol.check['Lv'])}  b = {list(sol.check['b'])}")


if __name__ == "__main__":
    main()
