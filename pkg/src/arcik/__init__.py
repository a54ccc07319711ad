"""Inverse kinematics for continuum robots modeled as chains of circular arcs."""
from .costs import CostContext, CostReport, CostWeights, LengthSpec, total_cost_and_gradient
from .field import Box, ExactField, FieldParams, Obstacle, PotentialGrid, build_grid, load_grid, save_grid
from .geometry import ArcSegment, ArcSpline, build_spline, initial_guess, sample_body
from .optimizer import Outcome, SolverConfig, SolveStatus, solve_loop
from .solver import (DEFAULT_WEIGHTS, Scenario, TrackingRun, UnreachableTarget, scaling_experiment,
                     solve, track)

__all__ = [
    "ArcSegment", "ArcSpline", "Box", "CostContext", "CostReport", "CostWeights", "DEFAULT_WEIGHTS",
    "ExactField", "FieldParams", "LengthSpec", "Obstacle", "Outcome", "PotentialGrid", "Scenario",
    "SolveStatus", "SolverConfig", "TrackingRun", "UnreachableTarget", "build_grid", "build_spline",
    "initial_guess", "load_grid", "sample_body", "save_grid", "scaling_experiment", "solve",
    "solve_loop", "total_cost_and_gradient", "track",
]
