"""Scenario JSON files (schema_version 1) and result records."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, fields
from importlib import resources
from typing import Optional

import numpy as np

from .costs import CostWeights, LengthSpec
from .field import Box, FieldParams, Obstacle
from .optimizer import SolverConfig, SolveStatus
from .solver import DEFAULT_WEIGHTS, Scenario

SCHEMA_VERSION = 1

_REQUIRED = ("schema_version", "name", "start", "base_orientation", "target", "n_segments",
             "length_spec", "workspace_bounds")
_OPTIONAL = ("description", "target_orientation", "obstacles", "field_params", "weights", "seed",
             "max_iterations", "solver", "waypoints")
_WEIGHT_KEYS = {"alpha1": "alpha1", "alpha2": "alpha2", "alpha3": "alpha3", "beta": "beta",
                "alpha_decay": "alpha_decay", "delta_p": "delta_p", "lambda": "lam"}


class ScenarioFormatError(ValueError):
    """Malformed scenario document; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    scenario: Scenario
    name: str
    description: str = ""
    waypoints: Optional[np.ndarray] = None
    schema_version: int = SCHEMA_VERSION


def _vec(doc, key):
    value = doc[key]
    if not (isinstance(value, list) and len(value) == 3
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in value)):
        raise ScenarioFormatError(key, "expected a list of three numbers")
    return [float(x) for x in value]


def _number(doc, key, path, kind=float):
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioFormatError(path, "expected a number")
    if kind is int:
        if float(value) != int(value):
            raise ScenarioFormatError(path, "expected an integer")
        return int(value)
    return float(value)


def _section(doc, key, allowed, required=()):
    sec = doc[key]
    if not isinstance(sec, dict):
        raise ScenarioFormatError(key, "expected an object")
    for k in sec:
        if k not in allowed:
            raise ScenarioFormatError(f"{key}.{k}", "unknown field")
    for k in required:
        if k not in sec:
            raise ScenarioFormatError(f"{key}.{k}", "missing required field")
    return sec


def scenario_from_dict(doc: dict) -> ScenarioFile:
    if not isinstance(doc, dict):
        raise ScenarioFormatError("<root>", "expected a JSON object")
    for k in doc:
        if k not in _REQUIRED and k not in _OPTIONAL:
            raise ScenarioFormatError(k, "unknown field")
    for k in _REQUIRED:
        if k not in doc:
            raise ScenarioFormatError(k, "missing required field")
    if doc["schema_version"] != SCHEMA_VERSION:
        raise ScenarioFormatError("schema_version", f"expected {SCHEMA_VERSION}")
    if not isinstance(doc["name"], str):
        raise ScenarioFormatError("name", "expected a string")

    ls = _section(doc, "length_spec", ("l_min", "l_max", "tol"), ("l_min", "l_max"))
    wb = _section(doc, "workspace_bounds", ("lo", "hi"), ("lo", "hi"))
    kwargs = dict(
        start=_vec(doc, "start"),
        base_orientation=_vec(doc, "base_orientation"),
        target=_vec(doc, "target"),
        n_segments=_number(doc, "n_segments", "n_segments", int),
        workspace_bounds=Box(_vec(wb, "lo"), _vec(wb, "hi")),
    )
    try:
        kwargs["length_spec"] = LengthSpec(
            _number(ls, "l_min", "length_spec.l_min"), _number(ls, "l_max", "length_spec.l_max"),
            _number(ls, "tol", "length_spec.tol") if ls.get("tol") is not None else None,
        )
    except ValueError as exc:
        if isinstance(exc, ScenarioFormatError):
            raise
        raise ScenarioFormatError("length_spec", str(exc)) from None

    if doc.get("target_orientation") is not None:
        kwargs["target_orientation"] = _vec(doc, "target_orientation")
    if "obstacles" in doc:
        if not isinstance(doc["obstacles"], list):
            raise ScenarioFormatError("obstacles", "expected a list")
        obstacles = []
        for i, ob in enumerate(doc["obstacles"]):
            key = f"obstacles[{i}]"
            if not isinstance(ob, dict):
                raise ScenarioFormatError(key, "expected an object")
            sec = _section({key: ob}, key, ("kind", "center", "radius"), ("kind", "center", "radius"))
            if sec["kind"] != "sphere":
                raise ScenarioFormatError(f"{key}.kind", "only 'sphere' is supported")
            radius = _number(sec, "radius", f"{key}.radius")
            if radius <= 0:
                raise ScenarioFormatError(f"{key}.radius", "must be positive")
            obstacles.append(Obstacle(_vec(sec, "center"), radius))
        kwargs["obstacles"] = obstacles
    if "field_params" in doc:
        fp = _section(doc, "field_params", ("epsilon", "k_o"), ("epsilon", "k_o"))
        try:
            kwargs["field_params"] = FieldParams(_number(fp, "epsilon", "field_params.epsilon"),
                                                 _number(fp, "k_o", "field_params.k_o"))
        except ValueError as exc:
            raise ScenarioFormatError("field_params", str(exc)) from None
    if "weights" in doc:
        wt = _section(doc, "weights", tuple(_WEIGHT_KEYS))
        values = {_WEIGHT_KEYS[k]: _number(wt, k, f"weights.{k}") for k in wt}
        try:
            kwargs["weights"] = CostWeights(**{**asdict(DEFAULT_WEIGHTS), **values})
        except ValueError as exc:
            raise ScenarioFormatError("weights", str(exc)) from None
    if "seed" in doc:
        kwargs["seed"] = _number(doc, "seed", "seed", int)
    if "max_iterations" in doc:
        kwargs["max_iterations"] = _number(doc, "max_iterations", "max_iterations", int)
    if "solver" in doc:
        names = {f.name: f.type for f in fields(SolverConfig)}
        sv = _section(doc, "solver", tuple(names))
        values = {}
        for k, v in sv.items():
            default = getattr(SolverConfig(), k)
            if isinstance(default, bool):
                if not isinstance(v, bool):
                    raise ScenarioFormatError(f"solver.{k}", "expected true or false")
                values[k] = v
            elif v is None and k == "grid_spacing":
                values[k] = None
            elif isinstance(default, int):
                values[k] = _number(sv, k, f"solver.{k}", int)
            else:
                values[k] = _number(sv, k, f"solver.{k}")
        kwargs["solver"] = SolverConfig(**values)

    waypoints = None
    if doc.get("waypoints") is not None:
        if not isinstance(doc["waypoints"], list):
            raise ScenarioFormatError("waypoints", "expected a list of points")
        waypoints = np.array(
            [_vec({f"waypoints[{i}]": w}, f"waypoints[{i}]") for i, w in enumerate(doc["waypoints"])],
            dtype=float,
        ).reshape(-1, 3)
    description = doc.get("description", "")
    if not isinstance(description, str):
        raise ScenarioFormatError("description", "expected a string")
    try:
        scenario = Scenario(**kwargs)
    except ValueError as exc:
        raise ScenarioFormatError("<scenario>", str(exc)) from None
    return ScenarioFile(scenario, doc["name"], description, waypoints)


def scenario_to_dict(sf: ScenarioFile) -> dict:
    sc = sf.scenario
    weights = {k: float(getattr(sc.weights, attr)) for k, attr in _WEIGHT_KEYS.items()}
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": sf.name,
        "description": sf.description,
        "start": sc.start.tolist(),
        "base_orientation": sc.base_orientation.tolist(),
        "target": sc.target.tolist(),
        "target_orientation": None if sc.target_orientation is None else sc.target_orientation.tolist(),
        "n_segments": sc.n_segments,
        "length_spec": {"l_min": sc.length_spec.l_min, "l_max": sc.length_spec.l_max,
                        "tol": sc.length_spec.tol},
        "obstacles": [{"kind": ob.kind, "center": ob.center.tolist(), "radius": ob.radius}
                      for ob in sc.obstacles],
        "field_params": {"epsilon": sc.field_params.epsilon, "k_o": sc.field_params.k_o},
        "workspace_bounds": {"lo": list(sc.workspace_bounds.lo), "hi": list(sc.workspace_bounds.hi)},
        "weights": weights,
        "seed": sc.seed,
        "max_iterations": sc.max_iterations,
        "solver": asdict(sc.solver),
    }
    if sf.waypoints is not None:
        doc["waypoints"] = np.asarray(sf.waypoints, dtype=float).tolist()
    return doc


def dumps(sf: ScenarioFile) -> str:
    return json.dumps(scenario_to_dict(sf), indent=2) + "\n"


def loads(text: str) -> ScenarioFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError("<json>", f"invalid JSON: {exc}") from None
    return scenario_from_dict(doc)


def load(path) -> ScenarioFile:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def save(sf: ScenarioFile, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(sf))


def bundled(name: str) -> ScenarioFile:
    """Load one of the fixtures shipped in ``arcik/data`` (e.g. ``"table_set2"``)."""
    text = resources.files("arcik").joinpath("data").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return loads(text)


def bundled_path(name: str):
    return resources.files("arcik").joinpath("data").joinpath(f"{name}.json")


# ---------------------------------------------------------------------------
# results
# ---------------------------------------------------------------------------

RECORD_FIELDS = ("scenario", "seed", "outcome", "iterations", "wall_time_us", "f_obs", "f_len",
                 "f_ori", "segment_lengths", "ori_error_rad", "min_clearance_mm")


@dataclass(frozen=True)
class ResultRecord:
    scenario: str
    seed: int
    outcome: str
    iterations: int
    wall_time_us: int
    f_obs: float
    f_len: float
    f_ori: float
    segment_lengths: tuple
    ori_error_rad: Optional[float]
    min_clearance_mm: Optional[float]

    @classmethod
    def from_status(cls, name: str, seed: int, status: SolveStatus, timing: bool = True):
        rep = status.final_report
        chk = status.check
        clearance = None
        if chk is not None and np.isfinite(chk.min_clearance):
            clearance = chk.min_clearance
        return cls(
            scenario=name,
            seed=seed,
            outcome=status.outcome.value,
            iterations=status.iterations,
            wall_time_us=int(round(status.wall_time * 1e6)) if timing else 0,
            f_obs=rep.f_obs if rep else float("nan"),
            f_len=rep.f_len if rep else float("nan"),
            f_ori=rep.f_ori if rep else float("nan"),
            segment_lengths=tuple(float(x) for x in rep.per_segment_lengths) if rep else (),
            ori_error_rad=None if chk is None else chk.ori_error,
            min_clearance_mm=clearance,
        )

    def to_json(self) -> str:
        doc = asdict(self)
        doc["segment_lengths"] = list(self.segment_lengths)
        return json.dumps(doc, indent=2) + "\n"

    def csv_row(self) -> list:
        row = asdict(self)
        row["segment_lengths"] = ";".join(repr(x) for x in self.segment_lengths)
        return ["" if row[k] is None else row[k] for k in RECORD_FIELDS]


def records_to_csv(records) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RECORD_FIELDS)
    for rec in records:
        writer.writerow(rec.csv_row())
    return buf.getvalue()
