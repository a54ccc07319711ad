"""Regenerate the scenario fixtures shipped in src/arcik/data."""
from __future__ import annotations

from dataclasses import replace
from pathlib import Path

from arcik import scenario_io
from arcik.cli import main as cli_main
from arcik.costs import LengthSpec
from arcik.field import Box
from arcik.scenario_io import ScenarioFile
from arcik.solver import Scenario

DATA = Path(__file__).resolve().parents[1] / "src" / "arcik" / "data"

# start (0,0,0), base orientation (0,0,-1), 5 segments of 45-70 mm, no obstacles
TABLE = [
    ((-0.7071, 0.0, -0.7071), (-60.0, 150.0, -230.0)),
    ((0.0, 0.2169, -0.9762), (-10.0, 40.0, -260.0)),
    ((0.5661, 0.2665, -0.7926), (150.0, -90.0, -220.0)),
    ((0.0, 0.0, 1.0), (40.0, -60.0, -180.0)),
]
WORKSPACE = Box((-300.0, -300.0, -320.0), (300.0, 300.0, 60.0))


def table_sets():
    for i, (ori, pos) in enumerate(TABLE, start=1):
        sc = Scenario(
            start=(0.0, 0.0, 0.0),
            base_orientation=(0.0, 0.0, -1.0),
            target=pos,
            target_orientation=ori,
            n_segments=5,
            length_spec=LengthSpec(45.0, 70.0),
            workspace_bounds=WORKSPACE,
        )
        sf = ScenarioFile(sc, f"table_set{i}",
                          f"obstacle-free comparison pose {i}: orientation {ori}, position {pos}")
        scenario_io.save(sf, DATA / f"table_set{i}.json")


def tracking():
    out = DATA / "track_180.json"
    cli_main([
        "gen", "--spheres", "60", "--seed", "8", "--radius-range", "10,25",
        "--bounds=-150,-40,-260,150,160,-30", "--waypoints", "180",
        "--waypoints-from=-120,80,-200", "--waypoints-to", "120,80,-200",
        "--name", "track_180", "--out", str(out),
    ])
    sf = scenario_io.load(out)
    sf = replace(sf, description="60 random spheres (seed 8); 180 waypoints on a line across "
                                 "the far side of the workspace")
    scenario_io.save(sf, out)

    # scaling base: same world, cold solve to the middle of the tracked line
    mid = sf.waypoints[len(sf.waypoints) // 2]
    bench = ScenarioFile(replace(sf.scenario, target=mid, max_iterations=60), "bench",
                         "segment-count scaling base: track_180 world, mid-line target")
    scenario_io.save(bench, DATA / "bench.json")


if __name__ == "__main__":
    DATA.mkdir(parents=True, exist_ok=True)
    table_sets()
    tracking()
    for p in sorted(DATA.glob("*.json")):
        print(p.name)
