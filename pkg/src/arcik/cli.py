"""``arcik`` command line: solve, track, bench, grid, gen.

Exit codes: 0 success, 1 malformed input or invalid arguments, 2 unreachable
target, 3 a solve ended with violated constraints.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import scenario_io
from .costs import LengthSpec
from .field import Box, FieldParams, GridTooLarge, build_grid, save_grid, DEFAULT_MAX_NODES
from .geometry import build_spline, eval_arcs
from .optimizer import Outcome
from .scenario_io import ResultRecord, ScenarioFile, ScenarioFormatError, records_to_csv
from .solver import Scenario, TrackingRun, UnreachableTarget, scaling_experiment, solve, track
from .worlds import GenerationFailed, line_waypoints, random_spheres

EXIT_OK, EXIT_INPUT, EXIT_UNREACHABLE, EXIT_UNSOLVED = 0, 1, 2, 3
SPLINE_SAMPLES = 33

log = logging.getLogger("arcik")


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage, which would read as "unreachable target"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _floats(text: str, count: int, what: str):
    try:
        values = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"{what}: expected {count} comma-separated numbers") from None
    if len(values) != count:
        raise UsageError(f"{what}: expected {count} comma-separated numbers")
    return values


def _load(path) -> ScenarioFile:
    try:
        return scenario_io.load(path)
    except OSError as exc:
        raise ScenarioFormatError("<file>", str(exc)) from None


def spline_rows(spline, samples: int = SPLINE_SAMPLES):
    u = np.linspace(0.0, 1.0, samples)
    pts = eval_arcs(spline.starts, spline.points, spline.controls, spline.omega, u)
    for seg in range(spline.n):
        for j, uj in enumerate(u):
            x, y, z = pts[seg, j]
            yield [seg, repr(float(uj)), repr(float(x)), repr(float(y)), repr(float(z))]


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _emit(text: str, output):
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    sf = _load(args.scenario)
    scenario = sf.scenario
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    try:
        spline, status = solve(scenario)
    except UnreachableTarget as exc:
        log.error("%s", exc)
        return EXIT_UNREACHABLE
    record = ResultRecord.from_status(sf.name, scenario.seed, status, timing=not args.no_timing)
    _emit(record.to_json() if args.out == "json" else records_to_csv([record]), args.output)
    if args.emit_spline and spline is not None:
        _write_csv(args.emit_spline, ["segment", "u", "x", "y", "z"], spline_rows(spline))
    return EXIT_OK if status.outcome is Outcome.CONSTRAINTS_SATISFIED else EXIT_UNSOLVED


def cmd_track(args) -> int:
    sf = _load(args.scenario)
    if sf.waypoints is None or len(sf.waypoints) == 0:
        log.error("scenario has no waypoints")
        return EXIT_INPUT
    scenario = sf.scenario
    if args.seed is not None:
        scenario = replace(scenario, seed=args.seed)
    try:
        run = track(TrackingRun(scenario, sf.waypoints), warm_start=not args.cold)
    except UnreachableTarget as exc:
        log.error("%s", exc)
        return EXIT_UNREACHABLE
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows, spline_out = [], []
    for i, (wp, status, cfg) in enumerate(zip(run.waypoints, run.per_waypoint, run.configurations)):
        chk = status.check
        wall = int(round(status.wall_time * 1e6)) if not args.no_timing else 0
        rows.append([
            i, repr(float(wp[0])), repr(float(wp[1])), repr(float(wp[2])), status.outcome.value,
            status.iterations, wall,
            "" if chk is None else repr(chk.max_length_dev),
            "" if chk is None or not np.isfinite(chk.min_clearance) else repr(chk.min_clearance),
        ])
        if cfg is not None:
            spline = build_spline(scenario.start, scenario.base_orientation, cfg)
            spline_out.extend([i] + r for r in spline_rows(spline, 9))
    _write_csv(out / "waypoints.csv",
               ["index", "x", "y", "z", "outcome", "iterations", "wall_time_us",
                "max_length_dev_mm", "min_clearance_mm"], rows)
    _write_csv(out / "splines.csv", ["index", "segment", "u", "x", "y", "z"], spline_out)
    ok = all(s.outcome is Outcome.CONSTRAINTS_SATISFIED for s in run.per_waypoint)
    solved = sum(s.outcome is Outcome.CONSTRAINTS_SATISFIED for s in run.per_waypoint)
    print(f"{solved}/{len(run.per_waypoint)} waypoints solved", file=sys.stderr)
    return EXIT_OK if ok else EXIT_UNSOLVED


def _segment_range(text: str):
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split(".."))
            values = list(range(lo, hi + 1))
        else:
            values = [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"invalid segment range {text!r}") from None
    if not values or min(values) < 1:
        raise UsageError(f"invalid segment range {text!r}")
    return values


def cmd_bench(args) -> int:
    n_values = _segment_range(args.segments)
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    sf = _load(args.scenario) if args.scenario else scenario_io.bundled("bench")
    base = sf.scenario
    if args.seed is not None:
        base = replace(base, seed=args.seed)
    rows = scaling_experiment(base, n_values, args.repeats)
    lines = [["n", "mean_time_per_iteration_us", "mean_iterations", "mean_total_time_us"]]
    for r in rows:
        lines.append([r.n, f"{r.mean_time_per_iteration * 1e6:.3f}", f"{r.mean_iterations:.3f}",
                      f"{r.mean_total_time * 1e6:.3f}"])
    text = "".join(",".join(str(x) for x in line) + "\n" for line in lines)
    _emit(text, args.output)
    return EXIT_OK


def cmd_grid(args) -> int:
    sf = _load(args.scenario)
    sc = sf.scenario
    spacing = args.spacing or sc.solver.grid_spacing or sc.field_params.epsilon / 4.0
    t0 = time.perf_counter()
    try:
        grid = build_grid(sc.obstacles, sc.workspace_bounds, spacing, sc.field_params,
                          max_nodes=args.max_nodes)
    except GridTooLarge as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    elapsed = time.perf_counter() - t0
    save_grid(grid, args.out)
    nodes = grid.dims[0] * grid.dims[1] * grid.dims[2]
    print(f"nodes {nodes} dims {grid.dims[0]}x{grid.dims[1]}x{grid.dims[2]} "
          f"build {elapsed * 1e3:.1f} ms")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.spheres < 0:
        raise UsageError("--spheres must be >= 0")
    b = _floats(args.bounds, 6, "--bounds")
    w = _floats(args.workspace, 6, "--workspace") if args.workspace else b
    lengths = _floats(args.lengths, 2, "--lengths")
    start = _floats(args.start, 3, "--start")
    target = _floats(args.target, 3, "--target")
    waypoints = None
    if args.waypoints:
        if not (args.waypoints_from and args.waypoints_to):
            raise UsageError("--waypoints needs --waypoints-from and --waypoints-to")
        waypoints = line_waypoints(_floats(args.waypoints_from, 3, "--waypoints-from"),
                                   _floats(args.waypoints_to, 3, "--waypoints-to"), args.waypoints)
        target = waypoints[0].tolist()
    params = FieldParams(args.epsilon, args.k_o)
    keep = [start, target] + ([] if waypoints is None else waypoints.tolist())
    try:
        spheres = random_spheres(args.spheres, _floats(args.radius_range, 2, "--radius-range"),
                                 Box(b[:3], b[3:]), args.seed, keep, params.epsilon)
    except GenerationFailed as exc:
        log.error("%s", exc)
        return EXIT_INPUT
    try:
        scenario = Scenario(
            start=start,
            base_orientation=_floats(args.base_orientation, 3, "--base-orientation"),
            target=target,
            target_orientation=(_floats(args.target_orientation, 3, "--target-orientation")
                                if args.target_orientation else None),
            n_segments=args.n_segments,
            length_spec=LengthSpec(*lengths),
            workspace_bounds=Box(w[:3], w[3:]),
            obstacles=spheres,
            field_params=params,
            seed=args.seed,
            max_iterations=args.max_iterations,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    name = args.name or f"gen-{args.spheres}-spheres-seed{args.seed}"
    sf = ScenarioFile(scenario, name, f"{args.spheres} random spheres, seed {args.seed}", waypoints)
    _emit(scenario_io.dumps(sf), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arcik", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one scenario")
    p.add_argument("scenario")
    p.add_argument("--out", choices=("json", "csv"), default="json")
    p.add_argument("--output", help="write the record here instead of stdout")
    p.add_argument("--seed", type=int)
    p.add_argument("--emit-spline", metavar="PATH", help="CSV of u-sweep samples of the spline")
    p.add_argument("--no-timing", action="store_true", help="report wall time as 0")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("track", help="track the scenario's waypoints")
    p.add_argument("scenario")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--cold", action="store_true", help="cold-start every waypoint")
    p.add_argument("--no-timing", action="store_true", help="report wall time as 0")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("bench", help="per-iteration time versus segment count")
    p.add_argument("--segments", default="5..10")
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--seed", type=int)
    p.add_argument("--scenario", help="base scenario (default: bundled bench fixture)")
    p.add_argument("--output")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("grid", help="precompute the potential grid")
    p.add_argument("scenario")
    p.add_argument("--spacing", type=float)
    p.add_argument("--out", required=True)
    p.add_argument("--max-nodes", type=int, default=DEFAULT_MAX_NODES)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("gen", help="generate a random sphere-world scenario")
    p.add_argument("--spheres", type=int, default=0)
    p.add_argument("--radius-range", default="10,25")
    p.add_argument("--bounds", default="-150,-40,-260,150,160,-30",
                   help="box the sphere centres are drawn from")
    p.add_argument("--workspace", default="-300,-300,-320,300,300,60")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--start", default="0,0,0")
    p.add_argument("--base-orientation", default="0,0,-1")
    p.add_argument("--target", default="-60,150,-230")
    p.add_argument("--target-orientation")
    p.add_argument("--n-segments", type=int, default=5)
    p.add_argument("--lengths", default="45,70")
    p.add_argument("--epsilon", type=float, default=20.0)
    p.add_argument("--k-o", type=float, default=1.0)
    p.add_argument("--max-iterations", type=int, default=150)
    p.add_argument("--waypoints", type=int, default=0, help="number of line waypoints")
    p.add_argument("--waypoints-from")
    p.add_argument("--waypoints-to")
    p.add_argument("--name")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="arcik: %(message)s")
    try:
        return args.func(args)
    except ScenarioFormatError as exc:
        print(f"arcik: malformed scenario: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except UsageError as exc:
        print(f"arcik: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
