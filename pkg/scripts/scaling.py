"""Per-iteration time against segment count at constant total robot length."""
import argparse

from arcik import scenario_io
from arcik.solver import scaling_experiment


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20)
    parser.add_argument("--n-min", type=int, default=5)
    parser.add_argument("--n-max", type=int, default=10)
    args = parser.parse_args()
    base = scenario_io.bundled("bench").scenario
    rows = scaling_experiment(base, range(args.n_min, args.n_max + 1), args.repeats)
    print(f"{'n':>3} {'us/iter':>9} {'iters':>6} {'total_ms':>9}")
    for r in rows:
        print(f"{r.n:>3} {r.mean_time_per_iteration * 1e6:>9.0f} {r.mean_iterations:>6.2f} "
              f"{r.mean_total_time * 1e3:>9.2f}")
    ratio = rows[-1].mean_time_per_iteration / rows[0].mean_time_per_iteration
    print(f"t({rows[-1].n})/t({rows[0].n}) = {ratio:.2f}")


if __name__ == "__main__":
    main()
