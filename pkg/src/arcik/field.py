"""Sphere obstacles, the three-branch potential cost and its precomputed grid."""
from __future__ import annotations

import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

GRID_MAGIC = b"APFGRID1"
_HEADER = struct.Struct("<8s3dd3qdd")
DEFAULT_MAX_NODES = 50_000_000


class GridTooLarge(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Obstacle:
    center: np.ndarray
    radius: float
    kind: str = "sphere"

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(3)
        if not np.all(np.isfinite(center)):
            raise ValueError("obstacle center must be finite")
        if not self.radius > 0:
            raise ValueError("obstacle radius must be positive")
        if self.kind != "sphere":
            raise ValueError(f"unsupported obstacle kind {self.kind!r}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True)
class FieldParams:
    epsilon: float = 20.0
    k_o: float = 1.0

    def __post_init__(self):
        if not (self.epsilon > 0 and self.k_o > 0):
            raise ValueError("epsilon and k_o must be positive")


@dataclass(frozen=True)
class Box:
    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self):
        lo = tuple(float(x) for x in self.lo)
        hi = tuple(float(x) for x in self.hi)
        if not all(h > l for l, h in zip(lo, hi)):
            raise ValueError("box must have positive extent on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def contains(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        return bool(np.all(p >= self.lo) and np.all(p <= self.hi))


def signed_distance(obstacles, p):
    """Distance from ``p`` (shape (..., 3)) to the nearest sphere surface.

    Negative inside an obstacle; ``+inf`` when there are no obstacles.
    """
    p = np.asarray(p, dtype=float)
    d = np.full(p.shape[:-1], np.inf)
    for ob in obstacles:
        dx = p[..., 0] - ob.center[0]
        dy = p[..., 1] - ob.center[1]
        dz = p[..., 2] - ob.center[2]
        d = np.minimum(d, np.sqrt(dx * dx + dy * dy + dz * dz) - ob.radius)
    return d if d.ndim else float(d)


def obstacle_cost(d, params: FieldParams):
    """Potential cost of a clearance ``d``.

    Linear inside obstacles, quadratic within the influence distance and zero
    beyond it; value and slope are continuous at ``d = 0`` and ``d = epsilon``.
    """
    d = np.asarray(d, dtype=float)
    eps, k = params.epsilon, params.k_o
    with np.errstate(invalid="ignore"):
        inside = k * (-d + 0.5 * eps)
        near = (k / (2.0 * eps)) * (d - eps) ** 2
    out = np.where(d < 0.0, inside, np.where(d <= eps, near, 0.0))
    return out if out.ndim else float(out)


def query_cost_exact(obstacles, p, params: FieldParams):
    return obstacle_cost(signed_distance(obstacles, p), params)


@dataclass(frozen=True, eq=False)
class ExactField:
    """Obstacle cost evaluated directly, bypassing any grid."""

    obstacles: tuple
    params: FieldParams

    def cost(self, p):
        return query_cost_exact(self.obstacles, p, self.params)


@dataclass(frozen=True, eq=False)
class PotentialGrid:
    """Obstacle cost sampled on a regular grid, queried by trilinear interpolation."""

    origin: np.ndarray
    spacing: float
    dims: tuple[int, int, int]
    values: np.ndarray
    params: FieldParams
    _warned: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "origin", np.asarray(self.origin, dtype=float).reshape(3))
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))
        values = np.ascontiguousarray(self.values, dtype=float).reshape(self.dims)
        if min(self.dims) < 2:
            raise ValueError("grid needs at least two nodes per axis")
        if np.any(values < 0):
            raise ValueError("grid values must be non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def upper(self) -> np.ndarray:
        return self.origin + self.spacing * (np.asarray(self.dims) - 1)

    def node(self, ix, iy, iz) -> np.ndarray:
        return self.origin + self.spacing * np.array([ix, iy, iz], dtype=float)

    def cost(self, p):
        return query_cost(self, p)


def build_grid(obstacles, bounds: Box, spacing: float, params: FieldParams,
               max_nodes: int = DEFAULT_MAX_NODES) -> PotentialGrid:
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    lo = np.asarray(bounds.lo)
    hi = np.asarray(bounds.hi)
    dims = tuple(int(np.ceil((h - l) / spacing - 1e-9)) + 1 for l, h in zip(lo, hi))
    count = dims[0] * dims[1] * dims[2]
    if count > max_nodes:
        raise GridTooLarge(f"grid would have {count} nodes (cap {max_nodes})")
    axes = [lo[i] + spacing * np.arange(dims[i], dtype=float) for i in range(3)]
    values = np.zeros(dims)
    if obstacles:
        # one x-slab at a time keeps peak memory at a single plane
        yy, zz = np.meshgrid(axes[1], axes[2], indexing="ij")
        plane = np.empty(yy.shape + (3,))
        plane[..., 1] = yy
        plane[..., 2] = zz
        for ix, x in enumerate(axes[0]):
            plane[..., 0] = x
            values[ix] = obstacle_cost(signed_distance(obstacles, plane), params)
    return PotentialGrid(lo, float(spacing), dims, values, params)


def _cell_coords(t, size):
    r = np.rint(t)
    t = np.where(np.abs(t - r) < 1e-9, r, t)
    i0 = np.clip(np.floor(t), 0, size - 2).astype(np.intp)
    return i0, t - i0


def query_cost(grid: PotentialGrid, p):
    """Trilinear interpolation of the grid; points outside are clamped."""
    p = np.asarray(p, dtype=float)
    t = (p - grid.origin) / grid.spacing
    upper = np.asarray(grid.dims, dtype=float) - 1.0
    outside = (t < 0.0) | (t > upper)
    if outside.any():
        if not grid._warned:
            logger.warning("query outside the potential grid; clamping to boundary")
            grid._warned.append(True)
        t = np.clip(t, 0.0, upper)
    nx, ny, nz = grid.dims
    ix, fx = _cell_coords(t[..., 0], nx)
    iy, fy = _cell_coords(t[..., 1], ny)
    iz, fz = _cell_coords(t[..., 2], nz)
    v = grid.values
    gx, gy, gz = 1.0 - fx, 1.0 - fy, 1.0 - fz
    out = (
        v[ix, iy, iz] * gx * gy * gz
        + v[ix + 1, iy, iz] * fx * gy * gz
        + v[ix, iy + 1, iz] * gx * fy * gz
        + v[ix, iy, iz + 1] * gx * gy * fz
        + v[ix + 1, iy + 1, iz] * fx * fy * gz
        + v[ix + 1, iy, iz + 1] * fx * gy * fz
        + v[ix, iy + 1, iz + 1] * gx * fy * fz
        + v[ix + 1, iy + 1, iz + 1] * fx * fy * fz
    )
    return out if np.ndim(out) else float(out)


def save_grid(grid: PotentialGrid, path) -> None:
    """Write the grid as an APFGRID1 file (little-endian header, row-major values)."""
    header = _HEADER.pack(
        GRID_MAGIC, *grid.origin.tolist(), grid.spacing, *grid.dims,
        grid.params.epsilon, grid.params.k_o,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(grid.values, dtype="<f8").tobytes(order="C"))


def load_grid(path) -> PotentialGrid:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError("file too short for an APFGRID1 header")
    magic, ox, oy, oz, spacing, nx, ny, nz, eps, k_o = _HEADER.unpack_from(raw)
    if magic != GRID_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    count = nx * ny * nz
    if len(raw) != _HEADER.size + 8 * count:
        raise ValueError("grid payload size does not match header dims")
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).astype(float)
    return PotentialGrid((ox, oy, oz), spacing, (nx, ny, nz), values.reshape(nx, ny, nz),
                         FieldParams(eps, k_o))


GRID_HEADER_SIZE = _HEADER.size
