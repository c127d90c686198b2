"""Solver versus brute-force oracle on seeded random instances.

    python scripts/oracle_sweep.py --seeds 2000 --max-features 12
"""

from __future__ import annotations

import argparse
import random
import time

from fmdeploy.generate import GenConfig, random_instance
from fmdeploy.matcher import augment
from fmdeploy.oracle import brute_force_enumerate
from fmdeploy.solver import encode, enumerate_solutions


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seeds", type=int, default=500)
    ap.add_argument("--start", type=int, default=0)
    ap.add_argument("--max-features", type=int, default=GenConfig.max_features)
    ap.add_argument("--max-space", type=int, default=GenConfig.max_space)
    args = ap.parse_args()
    cfg = GenConfig(max_features=args.max_features, max_space=args.max_space)

    t_solver = t_oracle = 0.0
    sizes, bad = [], []
    for seed in range(args.start, args.start + args.seeds):
        inst = random_instance(random.Random(seed), cfg)
        aug = augment(inst.app, inst.nodes, inst.spec)
        t0 = time.perf_counter()
        got = enumerate_solutions(encode(aug, inst.nodes)).configurations
        t1 = time.perf_counter()
        want = brute_force_enumerate(aug, inst.nodes)
        t2 = time.perf_counter()
        t_solver += t1 - t0
        t_oracle += t2 - t1
        sizes.append(len(want))
        if len(got) != len(set(got)) or set(got) != set(want):
            bad.append(seed)
    print(f"instances   {args.seeds}")
    print(f"mismatches  {len(bad)} {bad[:20]}")
    print(f"empty       {sum(s == 0 for s in sizes)}")
    print(f"max count   {max(sizes)}")
    print(f"solver s    {t_solver:.2f}")
    print(f"oracle s    {t_oracle:.2f}")
    return 1 if bad else 0


if __name__ == "__main__":
    raise SystemExit(main())
