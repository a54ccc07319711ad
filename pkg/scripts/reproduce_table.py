"""Solve the four bundled obstacle-free comparison poses and print a summary table."""
import argparse
import time
from dataclasses import replace

import numpy as np

from arcik import scenario_io
from arcik.solver import solve


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=None)
    args = parser.parse_args()
    print(f"{'setting':>7} {'outcome':>21} {'iters':>5} {'time_ms':>8} {'pos_err':>7} {'ori_err':>8}")
    for i in range(1, 5):
        sc = scenario_io.bundled(f"table_set{i}").scenario
        if args.seed is not None:
            sc = replace(sc, seed=args.seed)
        t0 = time.perf_counter()
        spline, status = solve(sc)
        ms = (time.perf_counter() - t0) * 1e3
        pos = float(np.linalg.norm(spline.end_point - sc.target))
        print(f"{i:>7} {status.outcome.value:>21} {status.iterations:>5} {ms:>8.1f} {pos:>7.3g} "
              f"{status.check.ori_error:>8.4f}")


if __name__ == "__main__":
    main()
