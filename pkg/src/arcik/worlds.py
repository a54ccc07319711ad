"""Seeded random sphere worlds."""
from __future__ import annotations

import numpy as np

from .field import Box, Obstacle, signed_distance

MAX_ATTEMPTS = 10_000


class GenerationFailed(RuntimeError):
    pass


def random_spheres(k: int, radius_range, bounds: Box, seed: int, keep_clear=(),
                   clearance: float = 0.0) -> list[Obstacle]:
    """Rejection-sample ``k`` spheres inside ``bounds``.

    Every sphere keeps at least ``clearance`` from each point in
    ``keep_clear``.  Raises :class:`GenerationFailed` after 10^4 rejected
    draws in total.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    r_lo, r_hi = float(radius_range[0]), float(radius_range[1])
    if not 0 < r_lo <= r_hi:
        raise ValueError("radius range must satisfy 0 < lo <= hi")
    rng = np.random.default_rng(seed)
    lo, hi = np.asarray(bounds.lo), np.asarray(bounds.hi)
    keep = np.asarray(keep_clear, dtype=float).reshape(-1, 3)
    spheres: list[Obstacle] = []
    attempts = 0
    while len(spheres) < k:
        if attempts >= MAX_ATTEMPTS:
            raise GenerationFailed(f"placed {len(spheres)} of {k} spheres in {MAX_ATTEMPTS} draws")
        attempts += 1
        center = rng.uniform(lo, hi)
        radius = rng.uniform(r_lo, r_hi)
        ob = Obstacle(center, radius)
        if keep.size and np.min(signed_distance([ob], keep)) < clearance:
            continue
        spheres.append(ob)
    return spheres


def line_waypoints(p0, p1, count: int) -> np.ndarray:
    p0, p1 = np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)
    s = np.linspace(0.0, 1.0, count)[:, None]
    return p0 + s * (p1 - p0)
