"""Track the bundled 180-waypoint sphere world, warm and cold, and summarize per-waypoint cost."""
import argparse

import numpy as np

from arcik import scenario_io
from arcik.optimizer import Outcome
from arcik.solver import TrackingRun, track


def summarize(label, run):
    its = np.array([s.iterations for s in run.per_waypoint])
    ms = np.array([s.wall_time for s in run.per_waypoint]) * 1e3
    ok = sum(s.outcome is Outcome.CONSTRAINTS_SATISFIED for s in run.per_waypoint)
    clear = min(s.check.min_clearance for s in run.per_waypoint if s.check is not None)
    print(f"{label:>5}: solved {ok}/{len(its)}  iterations median {np.median(its):.0f} max {its.max()}  "
          f"ms median {np.median(ms):.2f} max {ms.max():.2f}  min clearance {clear:.2f} mm")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--cold-every", type=int, default=10,
                        help="cold-start every k-th waypoint for comparison (0 to skip)")
    args = parser.parse_args()
    sf = scenario_io.bundled("track_180")
    warm = track(TrackingRun(sf.scenario, sf.waypoints))
    summarize("warm", warm)
    if args.cold_every:
        cold = track(TrackingRun(sf.scenario, sf.waypoints[::args.cold_every]), warm_start=False)
        summarize("cold", cold)


if __name__ == "__main__":
    main()
