"""Grids, discrete wave functions, trial states and snapshot I/O.

Two discretizations are supported:

* ``Grid3`` / ``Field3``: a uniform cube ``[-L, L)^3`` with ``n`` points per
  axis. Arrays are indexed ``values[ix, iy, iz]``.
* ``RadialGrid`` / ``RadialField``: cell-centred nodes ``r_j = (j + 1/2) dr``
  on ``(0, rmax)`` with an implicit Dirichlet condition ``u(rmax) = 0``.

All fields are real valued and immutable once built.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .errors import FormatError, GeometryError, ResolutionError, ZeroField

SNAPSHOT_MAGIC = b"SPSF"
SNAPSHOT_VERSION = 1
_KIND_FIELD3 = 0
_KIND_RADIAL = 1


def _frozen(values: np.ndarray) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid3:
    n: int
    L: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ValueError(f"n must be an even integer >= 8, got {self.n}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.n

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def weights(self) -> float:
        """Quadrature weight of one cell (h^3)."""
        return self.h ** 3

    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.n)

    def mesh(self, sparse: bool = True):
        x = self.axis()
        return np.meshgrid(x, x, x, indexing="ij", sparse=sparse)

    def radius(self, center: Sequence[float] = (0.0, 0.0, 0.0)) -> np.ndarray:
        X, Y, Z = self.mesh()
        return np.sqrt((X - center[0]) ** 2 + (Y - center[1]) ** 2 + (Z - center[2]) ** 2)


@dataclass(frozen=True)
class RadialGrid:
    nr: int
    rmax: float

    def __post_init__(self):
        if int(self.nr) != self.nr or self.nr < 16:
            raise ValueError(f"nr must be an integer >= 16, got {self.nr}")
        if not self.rmax > 0:
            raise ValueError(f"rmax must be positive, got {self.rmax}")
        object.__setattr__(self, "nr", int(self.nr))
        object.__setattr__(self, "rmax", float(self.rmax))

    @property
    def dr(self) -> float:
        return self.rmax / self.nr

    @property
    def r(self) -> np.ndarray:
        return (np.arange(self.nr) + 0.5) * self.dr

    @property
    def weights(self) -> np.ndarray:
        """Shell volumes 4 pi r_j^2 dr of the midpoint rule."""
        r = self.r
        return 4.0 * np.pi * r * r * self.dr


@dataclass(frozen=True, eq=False)
class Field3:
    grid: Grid3
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.size != self.grid.n ** 3:
            raise ValueError(f"expected {self.grid.n ** 3} values, got {vals.size}")
        vals = vals.reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", _frozen(vals))

    def with_values(self, values: np.ndarray) -> "Field3":
        return Field3(self.grid, values)


@dataclass(frozen=True, eq=False)
class RadialField:
    grid: RadialGrid
    values: np.ndarray = dc_field(repr=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64).ravel()
        if vals.size != self.grid.nr:
            raise ValueError(f"expected {self.grid.nr} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite values")
        object.__setattr__(self, "values", _frozen(vals))

    def with_values(self, values: np.ndarray) -> "RadialField":
        return RadialField(self.grid, values)


AnyField = Union[Field3, RadialField]


def inner(a: AnyField, b: AnyField) -> float:
    """Weighted L2 inner product of two fields on the same grid."""
    return float(np.sum(a.grid.weights * a.values * b.values))


def l2_norm(field: AnyField) -> float:
    return math.sqrt(float(np.sum(field.grid.weights * field.values ** 2)))


def normalize(field: AnyField, rho: float) -> AnyField:
    """Rescale ``field`` so that its L2 norm equals ``rho``."""
    norm = l2_norm(field)
    if norm == 0.0:
        raise ZeroField("cannot normalize a zero field")
    return field.with_values(field.values * (rho / norm))


def gaussian(grid, sigma: float, center: Sequence[float] | None = None, rho: float = 1.0):
    """Gaussian ``exp(-|x - c|^2 / (4 sigma^2))`` normalized to mass ``rho``.

    With this convention ``|u|^2`` is a normal density of variance ``sigma^2``
    per axis, so ``A = 3 rho^2 / (4 sigma^2)`` and ``B = rho^4 / (sigma sqrt(pi))``.
    On a ``RadialGrid`` the bump is centred at the origin.
    """
    if isinstance(grid, RadialGrid):
        if center is not None and any(c != 0 for c in center):
            raise GeometryError("radial gaussians are centred at the origin")
        if sigma < 2 * grid.dr or sigma > grid.rmax / 4:
            raise ResolutionError(
                f"sigma={sigma} outside [2 dr, rmax/4] = [{2 * grid.dr}, {grid.rmax / 4}]")
        vals = np.exp(-grid.r ** 2 / (4 * sigma ** 2))
        return normalize(RadialField(grid, vals), rho)

    center = (0.0, 0.0, 0.0) if center is None else tuple(float(c) for c in center)
    if sigma < 2 * grid.h or sigma > grid.L / 4:
        raise ResolutionError(
            f"sigma={sigma} outside [2 h, L/4] = [{2 * grid.h}, {grid.L / 4}]")
    if any(not (-grid.L <= c < grid.L) for c in center):
        raise GeometryError(f"center {center} outside the box")
    return bumps(grid, [center], sigma, rho)


def bumps(grid: Grid3, centers: Sequence[Sequence[float]], sigma: float, rho: float) -> Field3:
    """Superpose equal-mass Gaussians at ``centers``; total mass ``rho``."""
    X, Y, Z = grid.mesh()
    vals = np.zeros(grid.shape)
    for c in centers:
        vals += np.exp(-((X - c[0]) ** 2 + (Y - c[1]) ** 2 + (Z - c[2]) ** 2) / (4 * sigma ** 2))
    return normalize(Field3(grid, vals), rho)


def bump_centers(k: int, d: float) -> np.ndarray:
    """Centres of ``k`` bumps: a segment for k <= 2, a regular polygon otherwise.

    Nearest neighbours are exactly ``d`` apart.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return np.zeros((1, 3))
    if k == 2:
        return np.array([[-d / 2, 0.0, 0.0], [d / 2, 0.0, 0.0]])
    radius = d / (2 * math.sin(math.pi / k))
    ang = 2 * math.pi * np.arange(k) / k
    return np.stack([radius * np.cos(ang), radius * np.sin(ang), np.zeros(k)], axis=1)


def multi_bump(grid: Grid3, k: int, d: float, sigma: float, rho: float) -> Field3:
    if k == 1:
        return gaussian(grid, sigma, rho=rho)
    centers = bump_centers(k, d)
    reach = float(np.max(np.abs(centers))) + 2 * sigma
    if reach >= grid.L:
        raise GeometryError(
            f"{k} bumps at separation {d} with sigma {sigma} overflow the box (L={grid.L})")
    if sigma < 2 * grid.h:
        raise ResolutionError(f"sigma={sigma} below 2h={2 * grid.h}")
    return bumps(grid, centers, sigma, rho)


def annulus_family(rgrid: RadialGrid, rho: float, R: float, w: float) -> RadialField:
    """Radial shell ``cos^2(pi (r - R) / (2 w))`` on ``|r - R| < w``, mass ``rho``.

    Along ``R = R1 rho^4``, ``w = w1 rho^2`` (see :func:`annulus_scaling`) the
    kinetic term decays like ``rho^-2``, the Coulomb term stays of order one and
    the Slater integral decays like ``rho^(-2/3)``.
    """
    if not (0 < w < R < rgrid.rmax - w):
        raise GeometryError(f"need 0 < w < R < rmax - w, got w={w}, R={R}, rmax={rgrid.rmax}")
    if w < 4 * rgrid.dr:
        raise ResolutionError(f"shell half-width {w} unresolved by dr={rgrid.dr}")
    t = (rgrid.r - R) / w
    vals = np.where(np.abs(t) < 1, np.cos(0.5 * np.pi * t) ** 2, 0.0)
    return normalize(RadialField(rgrid, vals), rho)


def annulus_scaling(rho: float, R1: float = 1.0, w1: float = 0.5) -> tuple[float, float]:
    """Shell radius and half-width ``(R1 rho^4, w1 rho^2)`` of the scaled family."""
    return R1 * rho ** 4, w1 * rho ** 2


def annulus_grid(R: float, w: float, per_width: int = 32) -> RadialGrid:
    """Radial grid just large enough to hold a shell, ``per_width`` cells per ``w``."""
    dr = w / per_width
    nr = int(math.ceil((R + 2 * w) / dr))
    return RadialGrid(max(nr, 16), nr * dr)


def rearrange_decreasing(field: Field3) -> Field3:
    """Discrete symmetric decreasing rearrangement of ``|u|``.

    Cell values sorted in decreasing order are assigned to cells sorted by
    distance from the origin; equal distances are ordered by flat index.
    """
    n = field.grid.n
    off = np.arange(n) - n // 2
    d2 = (off[:, None, None] ** 2 + off[None, :, None] ** 2 + off[None, None, :] ** 2).ravel()
    order = np.argsort(d2, kind="stable")
    out = np.empty(n ** 3)
    out[order] = np.sort(np.abs(field.values).ravel())[::-1]
    return Field3(field.grid, out.reshape(field.grid.shape))


def save_snapshot(field: AnyField, path) -> None:
    path = Path(path)
    if isinstance(field, Field3):
        header = SNAPSHOT_MAGIC + struct.pack("<IBId", SNAPSHOT_VERSION, _KIND_FIELD3,
                                              field.grid.n, field.grid.L)
        body = field.values.ravel(order="F").astype("<f8").tobytes()
    elif isinstance(field, RadialField):
        header = SNAPSHOT_MAGIC + struct.pack("<IBId", SNAPSHOT_VERSION, _KIND_RADIAL,
                                              field.grid.nr, field.grid.rmax)
        body = field.values.astype("<f8").tobytes()
    else:
        raise TypeError(f"cannot snapshot {type(field).__name__}")
    path.write_bytes(header + body)


def load_snapshot(path) -> AnyField:
    data = Path(path).read_bytes()
    head = struct.calcsize("<IBId")
    if len(data) < 4 + head:
        raise FormatError(f"{path}: truncated header")
    if data[:4] != SNAPSHOT_MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}")
    version, kind, size, extent = struct.unpack("<IBId", data[4:4 + head])
    if version != SNAPSHOT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    count = size ** 3 if kind == _KIND_FIELD3 else size
    if kind not in (_KIND_FIELD3, _KIND_RADIAL):
        raise FormatError(f"{path}: unknown kind byte {kind}")
    payload = data[4 + head:]
    if len(payload) != 8 * count:
        raise FormatError(f"{path}: expected {8 * count} payload bytes, found {len(payload)}")
    vals = np.frombuffer(payload, dtype="<f8")
    try:
        if kind == _KIND_FIELD3:
            grid = Grid3(size, extent)
            return Field3(grid, vals.reshape(grid.shape, order="F"))
        return RadialField(RadialGrid(size, extent), vals)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
