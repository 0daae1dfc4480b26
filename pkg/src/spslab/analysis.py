"""Experiments built on the solvers: interpolation-inequality probes, scaling
fits, mass sweeps, subadditivity and symmetry-breaking detection.

Sweep energies are upper bounds assembled from several candidate states per
mass ``M = rho^2``:

* the radial ball minimizer (radius ``rmax``, Dirichlet wall);
* 3D grid minimizers from a few named starts (small masses only);
* clusters: ``k`` copies of a radial minimizer of mass ``M/k``, or the state of
  an earlier row plus a cluster carrying the remaining mass, with the pieces
  moved infinitely far apart. The cross Coulomb energy of separated pieces
  decays like ``m_i m_j / d``, so these values are limits of admissible states;
* for the radial curve, an earlier row's state plus a radial shell of the
  remaining mass escaping to infinity (its energy and interaction vanish).

Only converged constituents are used, so every reported value is the energy
(or a limit of energies) of states that actually exist at the given mass.
"""
from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, replace
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import minimize as sp_minimize, minimize_scalar

from .energy import (EnergyBreakdown, GaussianSpec, P_SLATER, check_exponent, energy,
                     rescale, scaling_exponents)
from .errors import DegenerateField, MissingRho, OutOfRange
from .fields import (Field3, Grid3, RadialField, RadialGrid, annulus_family, gaussian,
                     multi_bump, normalize)
from .optimize import MinimizeOptions, MinimizeResult, g_minimize, minimize

SWEEP_COLUMNS = ("rho", "rho_sq", "I_full", "I_rad", "gap", "lambda_full", "lambda_rad",
                 "conv_full", "conv_rad", "iters_full", "iters_rad", "grid_n", "grid_L",
                 "nr", "rmax")
GRID_STARTS = ("radial", "twobump", "pair", "gaussian")


class BreakingWarning(UserWarning):
    """A converged row above the detected breaking mass shows no gap."""


# -- interpolation inequality -------------------------------------------------

@dataclass(frozen=True)
class InterpParams:
    s: float
    p: float
    theta: float

    @property
    def exponents(self) -> tuple[float, float]:
        """``(theta/(2-theta), (1-theta)/(4-2 theta))``, the powers of the two norms."""
        t = self.theta
        return t / (2 - t), (1 - t) / (4 - 2 * t)

    @property
    def energy_exponents(self) -> tuple[float, float]:
        """Powers of ``A`` and ``B`` in ``S <= C A^a B^b`` (requires ``s = 1``)."""
        e1, e2 = self.exponents
        return self.p * e1 / 2, self.p * e2


def interp_exponent(p: float, s: float = 1.0) -> InterpParams:
    """Interpolation exponent ``theta = (6 - 5p/2) / (3 - p s - p)``.

    Admissible region: ``1/2 < s < 3/2`` and ``(16s+2)/(6s+1) < p <= 6/(3-2s)``.
    """
    if not 0.5 < s < 1.5:
        raise OutOfRange(f"s={s} violates 1/2 < s < 3/2")
    lo, hi = (16 * s + 2) / (6 * s + 1), 6 / (3 - 2 * s)
    if not p > lo:
        raise OutOfRange(f"p={p} violates the open lower bound p > (16s+2)/(6s+1) = {lo:.6g}")
    if not p <= hi:
        raise OutOfRange(f"p={p} violates the upper bound p <= 6/(3-2s) = {hi:.6g}")
    theta = (6 - 2.5 * p) / (3 - p * s - p)
    return InterpParams(s=float(s), p=float(p), theta=theta)


def _components(obj, p: float) -> tuple[float, float, float]:
    if isinstance(obj, EnergyBreakdown):
        return obj.A, obj.B, obj.S
    if isinstance(obj, GaussianSpec):
        return obj.A(), obj.B(), obj.S(p)
    if isinstance(obj, (Field3, RadialField)):
        b = energy(obj, p)
        return b.A, b.B, b.S
    A, B, S = obj
    return float(A), float(B), float(S)


def inequality_ratio(field, params: InterpParams | float = P_SLATER) -> float:
    """``R = S / (A^a B^b)``; at ``p = 8/3`` this is ``||u||_{8/3}^{8/3} / (A^{2/9} B^{5/9})``.

    ``field`` may be a grid field, a :class:`GaussianSpec`, an
    :class:`EnergyBreakdown` or an ``(A, B, S)`` triple.
    """
    if not isinstance(params, InterpParams):
        params = interp_exponent(float(params), 1.0)
    if params.s != 1.0:
        raise ValueError("inequality_ratio is defined for the kinetic norm (s = 1)")
    A, B, S = _components(field, params.p)
    if A <= 0 or B <= 0:
        raise DegenerateField(f"ratio undefined: A={A}, B={B}")
    a, b = params.energy_exponents
    return S / (A ** a * B ** b)


def builtin_family(refine: int = 1, sigmas=None, aspect=None) -> list[RadialField]:
    """Gaussians ``sigma in [0.5, 4]`` and shells ``R/w in [2, 16]`` on one radial grid.

    ``refine`` multiplies the number of radial cells (2048 on ``rmax = 32``).
    """
    grid = RadialGrid(2048 * refine, 32.0)
    sigmas = np.geomspace(0.5, 4.0, 7) if sigmas is None else sigmas
    aspect = np.geomspace(2.0, 16.0, 7) if aspect is None else aspect
    fam = [gaussian(grid, float(s)) for s in sigmas]
    fam += [annulus_family(grid, 1.0, float(q), 1.0) for q in aspect]
    return fam


def empirical_constant(samples: Iterable, p: float = P_SLATER) -> float:
    """Largest ratio ``S / (A^a B^b)`` over the samples (a lower bound for the best C)."""
    params = interp_exponent(p, 1.0)
    ratios = [inequality_ratio(s, params) for s in samples]
    if not ratios:
        raise ValueError("no samples")
    return max(ratios)


def floor_function(C: float, p: float):
    a, b = interp_exponent(p, 1.0).energy_exponents
    return lambda x, y: 0.5 * x + 0.25 * y - (C / p) * x ** a * y ** b


def radial_floor_bound(C: float, p: float = P_SLATER) -> float:
    """``-K1 = min_{x, y >= 0} x/2 + y/4 - (C/p) x^a y^b``.

    Coarse logarithmic grid followed by a Nelder-Mead polish in log
    coordinates. ``a + b = 2p/3 - 1 < 1`` keeps the minimum finite.
    """
    check_exponent(p)
    if C <= 0:
        return 0.0
    f = floor_function(C, p)
    t = np.linspace(-30.0, 30.0, 241) * math.log(10.0)
    X, Y = np.meshgrid(np.exp(t), np.exp(t), indexing="ij")
    vals = f(X, Y)
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    if vals[i, j] >= 0:
        return 0.0
    res = sp_minimize(lambda z: f(math.exp(z[0]), math.exp(z[1])), x0=[t[i], t[j]],
                      method="Nelder-Mead", options=dict(xatol=1e-12, fatol=1e-18, maxiter=4000))
    return float(min(res.fun, vals[i, j]))


@dataclass(frozen=True)
class FloorReport:
    C: float
    floor: float          # -K1 with the empirical C (optimistic)
    floor_band: float     # -K1 with 2 C (safety band)
    p: float


def floor_report(C: float, p: float = P_SLATER) -> FloorReport:
    return FloorReport(C=C, floor=radial_floor_bound(C, p), floor_band=radial_floor_bound(2 * C, p), p=p)


# -- scaling laws ---------------------------------------------------------------

@dataclass(frozen=True)
class ScalingFit:
    beta: float
    p: float
    slopes: tuple[float, float, float]
    expected: tuple[float, float, float]
    residuals: tuple[float, float, float]

    @property
    def max_error(self) -> float:
        return max(abs(s - e) for s, e in zip(self.slopes, self.expected))


def _fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    rms = math.sqrt(float(res[0]) / x.size) if res.size else 0.0
    return float(coef[0]), float(coef[1]), rms


def scaling_law_check(spec, thetas: Sequence[float], beta: float, p: float = P_SLATER) -> ScalingFit:
    """Least-squares slopes of ``log A, log B, log S`` against ``log theta``.

    ``spec`` is a :class:`GaussianSpec` (exact rescaling) or a grid field.
    """
    check_exponent(p)
    thetas = np.asarray(thetas, dtype=float)
    if thetas.size < 4 or thetas.max() / thetas.min() < 2:
        raise ValueError("need at least 4 theta values spanning a factor of 2")
    comps = np.array([_components(rescale(spec, float(t), beta), p) for t in thetas])
    lt = np.log(thetas)
    fits = [_fit(lt, np.log(comps[:, i])) for i in range(3)]
    return ScalingFit(beta=beta, p=p, slopes=tuple(f[0] for f in fits),
                      expected=scaling_exponents(beta, p), residuals=tuple(f[2] for f in fits))


@dataclass(frozen=True)
class LambdaRow:
    rho: float
    lam: float
    G: float
    converged: bool
    iters: int

    @property
    def pohozaev_ratio(self) -> float:
        """Empirical ``G / (lambda rho^2)``."""
        return self.G / (self.lam * self.rho ** 2)


@dataclass(frozen=True)
class LambdaStudy:
    p: float
    slope: float
    intercept: float
    residual: float
    rows: tuple[LambdaRow, ...]

    @property
    def expected_slope(self) -> float:
        return 2 / (self.p - 2) - 1.5

    @property
    def soliton_mass(self) -> float:
        return math.exp(self.intercept)

    @property
    def all_negative(self) -> bool:
        return all(r.lam < 0 for r in self.rows)

    @property
    def monotone(self) -> bool:
        """``|lambda|`` shrinks as ``rho`` decreases."""
        rows = sorted(self.rows, key=lambda r: r.rho)
        return all(abs(a.lam) < abs(b.lam) for a, b in zip(rows, rows[1:]))


def lambda_scaling_study(rho_values: Sequence[float] = (0.25, 0.35, 0.5, 0.7, 1.0),
                         p: float = P_SLATER, opts: MinimizeOptions | None = None,
                         grid: RadialGrid | None = None) -> LambdaStudy:
    """Minimize ``G`` for each ``rho`` and fit ``log rho^2`` against ``log(-lambda)``."""
    check_exponent(p)
    grid = grid or RadialGrid(6000, 600.0)
    opts = opts or MinimizeOptions(tol=1e-10)
    sigma = min(30.0, grid.rmax / 8)
    rows = []
    for rho in rho_values:
        res = g_minimize(gaussian(grid, sigma), float(rho), p, opts)
        rows.append(LambdaRow(rho=float(rho), lam=res.lam, G=res.breakdown.G,
                              converged=res.converged, iters=res.iters))
    use = [r for r in rows if r.converged and r.lam < 0]
    if len(use) >= 2:
        slope, icpt, rms = _fit(np.log([-r.lam for r in use]), np.log([r.rho ** 2 for r in use]))
    else:
        slope = icpt = rms = float("nan")
    return LambdaStudy(p=p, slope=slope, intercept=icpt, residual=rms, rows=tuple(rows))


# -- sweeps ---------------------------------------------------------------------

@dataclass(frozen=True)
class SweepSettings:
    """Discretization of a sweep; 3D grid runs only for ``rho^2 <= grid_rho_sq_max``."""

    nr: int = 6000
    rmax: float = 600.0
    grid_n: int = 48
    grid_L: float = 300.0
    grid_rho_sq_max: float = 0.3
    grid_max_iter: int = 300

    def radial_grid(self) -> RadialGrid:
        return RadialGrid(self.nr, self.rmax)


@dataclass(frozen=True)
class Candidate:
    """An energy estimate for one mass, with the multiplier of the state."""

    name: str
    mass: float
    E: float
    lam: float
    converged: bool
    iters: int


@dataclass(frozen=True)
class SweepRecord:
    rho: float
    I_full: float
    I_rad: float
    lambda_full: float
    lambda_rad: float
    conv_full: bool
    conv_rad: bool
    iters_full: int
    iters_rad: int
    grid_n: int
    grid_L: float
    nr: int
    rmax: float
    source_full: str = ""
    source_rad: str = ""

    @property
    def rho_sq(self) -> float:
        return self.rho * self.rho

    @property
    def gap(self) -> float:
        return self.I_rad - self.I_full

    @property
    def converged(self) -> bool:
        return self.conv_full and self.conv_rad

    def row(self) -> list[str]:
        vals = [self.rho, self.rho_sq, self.I_full, self.I_rad, self.gap, self.lambda_full,
                self.lambda_rad, int(self.conv_full), int(self.conv_rad), self.iters_full,
                self.iters_rad, self.grid_n, self.grid_L, self.nr, self.rmax]
        return [repr(float(v)) if isinstance(v, float) else str(v) for v in vals]


@dataclass
class SweepResult:
    records: list[SweepRecord]
    tol: float
    p: float
    samples: list[EnergyBreakdown] = dc_field(default_factory=list, repr=False)
    starts: list[dict] = dc_field(default_factory=list, repr=False)

    def csv_text(self) -> str:
        return records_to_csv(self.records)


def records_to_csv(records: Sequence[SweepRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for rec in records:
        w.writerow(rec.row())
    return buf.getvalue()


def geometric_rho_sq(lo: float, hi: float, factor: float = math.sqrt(2.0)) -> list[float]:
    """``lo * factor^k`` up to ``hi`` (inclusive up to rounding)."""
    if not (0 < lo <= hi) or factor <= 1:
        raise ValueError("need 0 < lo <= hi and factor > 1")
    out, k = [], 0
    while True:
        v = lo * factor ** k
        if v > hi * (1 + 1e-9):
            break
        out.append(min(v, hi) if abs(v - hi) <= 1e-9 * hi else v)
        k += 1
    return out


class RadialBank:
    """Memoized radial ball minimizers, keyed by mass."""

    def __init__(self, grid: RadialGrid, p: float, opts: MinimizeOptions):
        self.grid, self.p, self.opts = grid, p, opts
        self._cache: dict[float, MinimizeResult] = {}
        self._init = gaussian(grid, max(min(30.0, grid.rmax / 20), 2.5 * grid.dr))

    def solve(self, mass: float) -> MinimizeResult:
        key = float(mass)
        res = self._cache.get(key)
        if res is None:
            res = self._cache[key] = minimize(self._init, math.sqrt(key), self.p, self.opts,
                                              name=f"ball@{key:.6g}")
        return res

    def candidate(self, mass: float) -> Candidate:
        res = self.solve(mass)
        return Candidate("ball", float(mass), res.E, res.lam, res.converged, res.iters)

    def best_mass(self, lo: float = 0.01, hi: float = 1.0) -> float:
        """Mass minimizing ``E/M`` over radial ball minimizers."""
        def per_mass(t):
            res = self.solve(math.exp(t))
            return res.E / math.exp(t) if res.converged else 1.0
        out = minimize_scalar(per_mass, bounds=(math.log(lo), math.log(hi)), method="bounded",
                              options=dict(xatol=1e-3))
        return float(math.exp(out.x))

    def cluster(self, mass: float, m_opt: float) -> Candidate:
        """Best of ``k`` separated copies of the minimizer of mass ``mass/k``."""
        k0 = max(1, round(mass / m_opt))
        best = None
        for k in sorted({1, 2, max(1, k0 - 1), k0, k0 + 1}):
            c = self.candidate(mass / k)
            if not c.converged:
                continue
            cand = Candidate("ball" if k == 1 else f"{k}x ball@{mass / k:.6g}", mass, k * c.E,
                             c.lam, True, c.iters)
            if best is None or cand.E < best.E:
                best = cand
        return best or self.candidate(mass)


def _join(a: Candidate, b: Candidate, name: str) -> Candidate:
    mass = a.mass + b.mass
    return Candidate(name, mass, a.E + b.E, (a.lam * a.mass + b.lam * b.mass) / mass,
                     a.converged and b.converged, a.iters + b.iters)


def _pick(cands: Sequence[Candidate]) -> Candidate:
    ok = [c for c in cands if c.converged]
    pool = ok or list(cands)
    return min(pool, key=lambda c: c.E)  # min keeps the first of exact ties


def _interp_radial(rf: RadialField, grid: Grid3, centers) -> Field3:
    vals = np.zeros(grid.shape)
    for c in centers:
        vals += np.interp(grid.radius(c), rf.grid.r, rf.values, right=0.0)
    return Field3(grid, vals)


def _tail_radius(rf: RadialField, frac: float = 1e-8) -> float:
    dens = rf.grid.weights * rf.values ** 2
    cum = np.cumsum(dens) / dens.sum()
    return float(rf.grid.r[min(np.searchsorted(cum, 1 - frac), rf.grid.nr - 1)])


def row_grid(rf: RadialField, settings: SweepSettings) -> Grid3:
    """Box large enough for the radial minimizer, at the configured spacing."""
    L = max(settings.grid_L, 1.1 * _tail_radius(rf))
    n = settings.grid_n if L == settings.grid_L else 2 * math.ceil(settings.grid_n * L / settings.grid_L / 2)
    return Grid3(n, L)


def pair_grid(half: RadialField, settings: SweepSettings) -> Grid3:
    """Box for two copies of the half-mass minimizer, ``2 t`` apart (``t``: 1e-4 tail radius)."""
    return Grid3(settings.grid_n, max(settings.grid_L, 2.3 * _tail_radius(half, 1e-4)))


def grid_start(name: str, rf: RadialField, grid: Grid3, rho: float,
               half: RadialField | None = None) -> Field3:
    """Named 3D initial state built from the radial minimizer ``rf``.

    ``"pair"`` places two copies of the half-mass minimizer ``half`` on the
    x axis, separated by twice its 1e-4 tail radius.
    """
    if name == "radial":
        return _interp_radial(rf, grid, [(0.0, 0.0, 0.0)])
    if name == "pair":
        if half is None:
            raise ValueError("start 'pair' needs the half-mass radial minimizer")
        d = 2 * _tail_radius(half, 1e-4)
        return normalize(_interp_radial(half, grid, [(-d / 2, 0.0, 0.0), (d / 2, 0.0, 0.0)]), rho)
    dens = rf.grid.weights * rf.values ** 2
    sigma = math.sqrt(float(np.sum(dens * rf.grid.r ** 2) / dens.sum()) / 3)
    sigma = min(max(sigma, 2.05 * grid.h), grid.L / 4)
    if name == "gaussian":
        return gaussian(grid, sigma, rho=rho)
    if name == "twobump":
        return multi_bump(grid, 2, 1.6 * sigma, sigma, rho)
    raise ValueError(f"unknown start {name!r}; choose from {GRID_STARTS}")


def sweep(rho_values: Sequence[float], p: float = P_SLATER, opts: MinimizeOptions | None = None,
          starts: Sequence[str] = ("radial", "twobump", "pair"), *, settings: SweepSettings | None = None,
          jobs: int = 1) -> SweepResult:
    """Radial and full-space energy estimates for each ``rho`` (ascending)."""
    check_exponent(p)
    opts = opts or MinimizeOptions()
    settings = settings or SweepSettings()
    rhos = [float(r) for r in rho_values]
    if not rhos or any(r <= 0 for r in rhos) or any(b <= a for a, b in zip(rhos, rhos[1:])):
        raise ValueError("rho_values must be positive and strictly ascending")
    for s in starts:
        if s not in GRID_STARTS:
            raise ValueError(f"unknown start {s!r}; choose from {GRID_STARTS}")
    masses = [r * r for r in rhos]
    rgrid = settings.radial_grid()
    bank = RadialBank(rgrid, p, opts)
    balls = [bank.solve(m) for m in masses]

    # 3D grid runs: independent tasks, results gathered in task order
    gopts = replace(opts, max_iter=min(opts.max_iter, settings.grid_max_iter))
    tasks = [(i, name) for i, m in enumerate(masses)
             if m <= settings.grid_rho_sq_max and balls[i].converged for name in starts]
    grids = {i: row_grid(balls[i].field, settings) for i, _ in tasks}
    halves = {i: bank.solve(masses[i] / 2).field for i, name in tasks if name == "pair"}

    def run(task):
        i, name = task
        half = halves.get(i)
        grid = pair_grid(half, settings) if name == "pair" else grids[i]
        init = grid_start(name, balls[i].field, grid, rhos[i], half)
        return minimize(init, rhos[i], p, gopts, name=name)

    if jobs > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            grid_results = list(pool.map(run, tasks))
    else:
        grid_results = [run(t) for t in tasks]
    by_row: dict[int, list[MinimizeResult]] = {}
    table = []
    for (i, name), res in zip(tasks, grid_results):
        by_row.setdefault(i, []).append(res)
        table.append(dict(rho=rhos[i], start=name, E=res.E, lam=res.lam, residual=res.residual,
                          iters=res.iters, status=res.status))

    m_opt = bank.best_mass()
    records: list[SweepRecord] = []
    rad_best: list[Candidate] = []
    full_best: list[Candidate] = []
    for i, m in enumerate(masses):
        ball = bank.candidate(m)
        rad = [ball]
        for j in range(i):
            c = rad_best[j]
            rad.append(Candidate(f"row@{masses[j]:.6g} + shell", m, c.E, c.lam * c.mass / m,
                                 c.converged, c.iters))
        rbest = _pick(rad)
        rad_best.append(rbest)

        full = [replace(rbest, name="radial:" + rbest.name)]
        for res in by_row.get(i, []):
            full.append(Candidate("grid:" + res.name, m, res.E, res.lam, res.converged, res.iters))
        full.append(bank.cluster(m, m_opt))
        for j in [k for k in (i - 1, i - 2) if k >= 0]:
            rest = bank.cluster(m - masses[j], m_opt)
            full.append(_join(full_best[j], rest, f"row@{masses[j]:.6g} + {rest.name}"))
        fbest = _pick(full)
        full_best.append(fbest)
        g = grids.get(i)
        records.append(SweepRecord(
            rho=rhos[i], I_full=fbest.E, I_rad=rbest.E, lambda_full=fbest.lam,
            lambda_rad=rbest.lam, conv_full=fbest.converged, conv_rad=rbest.converged,
            iters_full=fbest.iters, iters_rad=rbest.iters,
            grid_n=g.n if g else 0, grid_L=float(g.L) if g else 0.0,
            nr=rgrid.nr, rmax=float(rgrid.rmax), source_full=fbest.name, source_rad=rbest.name))
    samples = [b.breakdown for b in balls if b.converged]
    return SweepResult(records=records, tol=opts.tol, p=p, samples=samples, starts=table)


# -- checks on sweep records ----------------------------------------------------

@dataclass(frozen=True)
class BreakingReport:
    rho_star: float | None
    bracket: tuple[float | None, float] | None
    margin: float
    warnings: tuple[str, ...] = ()

    @property
    def detected(self) -> bool:
        return self.rho_star is not None

    def describe(self) -> str:
        if not self.detected:
            return "none detected"
        lo, hi = self.bracket
        left = "none" if lo is None else f"{lo:.6g}"
        return f"breaking bracket rho in [{left}, {hi:.6g}] (rho^2 in [{'none' if lo is None else f'{lo * lo:.6g}'}, {hi * hi:.6g}])"


def detect_breaking(records: Sequence[SweepRecord], margin: float | None = None,
                    tol: float = 1e-6) -> BreakingReport:
    """Smallest converged ``rho`` with ``gap > margin`` (default ``10 tol``).

    Reported as a bracket ``[last agreeing rho, first breaking rho]``. Converged
    rows above it without a positive gap attach a warning.
    """
    margin = 10 * tol if margin is None else margin
    rows = sorted((r for r in records if r.converged), key=lambda r: r.rho)
    star = next((k for k, r in enumerate(rows) if r.gap > margin), None)
    if star is None:
        return BreakingReport(None, None, margin)
    below = [r for r in rows[:star] if r.gap <= margin]
    lo = below[-1].rho if below else None
    notes = tuple(f"rho={r.rho:.6g} above rho_star has gap {r.gap:.3e} <= 0"
                  for r in rows[star + 1:] if not r.gap > 0)
    for msg in notes:
        warnings.warn(msg, BreakingWarning, stacklevel=2)
    return BreakingReport(rows[star].rho, (lo, rows[star].rho), margin, notes)


@dataclass(frozen=True)
class SubadditivityRow:
    mu: float
    nu: float
    rho: float
    lhs: float
    rhs: float
    ok: bool


@dataclass(frozen=True)
class SubadditivityReport:
    rows: tuple[SubadditivityRow, ...]
    slack: float

    @property
    def violations(self) -> tuple[SubadditivityRow, ...]:
        return tuple(r for r in self.rows if not r.ok)

    @property
    def ok(self) -> bool:
        return not self.violations


def _lookup(records: Sequence[SweepRecord], rho: float) -> SweepRecord:
    for r in records:
        if math.isclose(r.rho, rho, rel_tol=1e-9, abs_tol=0.0):
            return r
    raise MissingRho(f"no sweep record at rho={rho!r}")


def equal_split_triples(records: Sequence[SweepRecord]) -> list[tuple[float, float, float]]:
    """Every ``(mu, mu, rho)`` with ``mu^2 = rho^2/2`` present in the records."""
    out = []
    for r in records:
        mu = r.rho / math.sqrt(2.0)
        try:
            m = _lookup(records, mu)
        except MissingRho:
            continue
        out.append((m.rho, m.rho, r.rho))
    return out


def subadditivity_check(records: Sequence[SweepRecord], triples: Iterable[tuple[float, float, float]],
                        tol: float = 1e-6) -> SubadditivityReport:
    """``I(rho^2) <= I(mu^2) + I(nu^2) + 3 tol`` with ``mu^2 + nu^2 = rho^2``.

    ``mu = 0`` (or ``nu = 0``) uses ``I_0 = 0`` without a record.
    """
    rows = []
    for mu, nu, rho in triples:
        if not math.isclose(mu * mu + nu * nu, rho * rho, rel_tol=1e-9):
            raise ValueError(f"mu^2 + nu^2 != rho^2 for {(mu, nu, rho)}")
        lhs = _lookup(records, rho).I_full
        rhs = sum(0.0 if m == 0 else _lookup(records, m).I_full for m in (mu, nu))
        rows.append(SubadditivityRow(mu, nu, rho, lhs, rhs, lhs <= rhs + 3 * tol))
    return SubadditivityReport(tuple(rows), 3 * tol)


def running_minimum(values: Sequence[float]) -> np.ndarray:
    return np.minimum.accumulate(np.asarray(values, dtype=float))
