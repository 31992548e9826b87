"""Run every scheduler policy on random networks and tabulate agreement by family.

    python3 scripts/scheduler_sweep.py --count 400 --closed-fraction 0.3
"""
import argparse
import random
import time
from collections import Counter, defaultdict

from abelnet.engine import DEFAULT_POLICIES, run_all_schedulers
from abelnet.generators import FAMILIES, random_network


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=400)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--closed-fraction", type=float, default=0.3, help="share of networks with no path to the sink")
    ap.add_argument("--budget", type=int, default=100_000)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    table = defaultdict(Counter)
    t0 = time.perf_counter()
    for k in range(args.count):
        family = FAMILIES[k % len(FAMILIES)]
        inst = random_network(rng, family, closed=rng.random() < args.closed_fraction)
        comp = run_all_schedulers(inst.net, inst.x, inst.q, args.budget, DEFAULT_POLICIES)
        status = comp.outcomes[DEFAULT_POLICIES[0]].status
        table[family][status] += 1
        table[family]["disagree"] += not comp.agree
    print(f"{'family':<14}{'halted':>8}{'non-halting':>13}{'budget':>8}{'disagree':>10}")
    for family in FAMILIES:
        row = table[family]
        print(
            f"{family:<14}{row['halted']:>8}{row['non-halting']:>13}"
            f"{row['budget-exhausted']:>8}{row['disagree']:>10}"
        )
    print(f"{args.count} networks, {len(DEFAULT_POLICIES)} policies, {time.perf_counter() - t0:.1f}s")


if __name__ == "__main__":
    main()
