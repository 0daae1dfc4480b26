"""Projected gradient descent for ``E`` (and the reduced ``G``) on the mass sphere.

Each iteration takes the tangential gradient ``r = E'(u) - lambda u``,
optionally smooths it with the Sobolev preconditioner ``(alpha - Laplacian)^-1``,
steps along the resulting direction and renormalizes to mass ``rho``. The step
length starts from a Barzilai-Borwein estimate and is backtracked until the
Armijo condition ``E(u+) <= E(u) - c tau <r, d>`` holds, so the recorded energy
trace never increases.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solveh_banded

from . import radial, spectral
from .energy import EnergyBreakdown, P_SLATER, check_exponent, evaluate, residual_from
from .errors import NonFinite, ZeroField
from .fields import AnyField, Field3, Grid3, RadialField, l2_norm, normalize

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MinimizeOptions:
    max_iter: int = 20000
    tol: float = 1e-6
    step0: float = 0.1
    backtrack: float = 0.5
    armijo: float = 1e-4
    seed: int = 0
    precondition: bool = True
    max_rejections: int = 20

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.backtrack < 1:
            raise ValueError("backtrack must lie in (0, 1)")
        if not self.step0 > 0:
            raise ValueError("step0 must be positive")
        if self.max_iter < 0:
            raise ValueError("max_iter must be nonnegative")


@dataclass
class MinimizeResult:
    field: AnyField
    breakdown: EnergyBreakdown
    lam: float
    residual: float
    iters: int
    converged: bool
    energy_trace: np.ndarray = dc_field(repr=False)
    status: str = "converged"
    name: str = ""

    @property
    def E(self) -> float:
        return self.breakdown.E

    @property
    def rho(self) -> float:
        return l2_norm(self.field)


class _Preconditioner:
    """Applies ``(alpha - Laplacian)^-1`` and its inverse on one grid."""

    def __init__(self, field: AnyField, alpha: float):
        self.alpha = alpha
        self.grid = field.grid
        if isinstance(field, Field3):
            self.k2 = spectral.k_squared(field.grid)
        else:
            diag, off = radial.laplacian_bands(field.grid)
            w = field.grid.weights
            self.w = w
            self.diag, self.off = diag, off
            ab = np.zeros((2, w.size))
            ab[0, 1:] = off
            ab[1] = diag + alpha * w
            self.ab = ab

    def apply(self, r: np.ndarray) -> np.ndarray:
        if isinstance(self.grid, Grid3):
            return spectral.apply_symbol(r, 1.0 / (self.alpha + self.k2))
        return solveh_banded(self.ab, self.w * r, check_finite=False)

    def inverse(self, s: np.ndarray) -> np.ndarray:
        if isinstance(self.grid, Grid3):
            return spectral.apply_symbol(s, self.alpha + self.k2)
        lap = self.diag * s
        lap[:-1] += self.off * s[1:]
        lap[1:] += self.off * s[:-1]
        return lap / self.w + self.alpha * s


def _shift(lam: float) -> float:
    return max(abs(lam), 1e-3)


def minimize(init: AnyField, rho: float, p: float = P_SLATER, opts: MinimizeOptions | None = None,
             *, kernel=None, coulomb: bool = True, callback: Callable | None = None,
             name: str = "") -> MinimizeResult:
    """Minimize ``E`` (or ``G`` when ``coulomb=False``) over fields of mass ``rho``.

    The backend follows the type of ``init``. The returned energy is an upper
    bound for the discrete infimum; ``converged`` means ``residual <= tol``.
    """
    opts = opts or MinimizeOptions()
    check_exponent(p)
    if not rho > 0:
        raise ValueError("rho must be positive")
    if l2_norm(init) == 0.0:
        raise ZeroField("initial field is zero")
    if isinstance(init, Field3) and coulomb and kernel is None:
        kernel = spectral.kernel_for(init.grid)

    w = init.grid.weights
    mass = rho * rho

    def ip(a, b):
        return float(np.sum(w * a * b))

    def state(f):
        b, g = evaluate(f, p, kernel, coulomb=coulomb)
        if not (math.isfinite(b.E) and np.all(np.isfinite(g))):
            raise NonFinite(f"non-finite energy or gradient (E={b.E})")
        lam = (b.A + b.B - b.S) / mass
        return b, g, lam

    u = normalize(init, rho)
    b, g, lam = state(u)
    r = g - lam * u.values
    res = residual_from(u, g, lam)
    trace = [b.E]
    tau = opts.step0
    resets = 0
    status = "converged" if res <= opts.tol else "max_iter"
    it = 0
    while res > opts.tol and it < opts.max_iter:
        pre = _Preconditioner(u, _shift(lam)) if opts.precondition else None
        d = pre.apply(r) if pre else r.copy()
        d -= (ip(d, u.values) / mass) * u.values
        slope = ip(r, d)
        if not slope > 0:
            d, slope = r.copy(), ip(r, r)
        accepted = False
        for _ in range(opts.max_rejections):
            trial_vals = u.values - tau * d
            if np.all(np.isfinite(trial_vals)) and np.any(trial_vals):
                trial = normalize(u.with_values(trial_vals), rho)
                try:
                    tb, tg, tlam = state(trial)
                except NonFinite:
                    tb = None
                if tb is not None and tb.E <= b.E - opts.armijo * tau * slope:
                    accepted = True
                    break
            tau *= opts.backtrack
        if not accepted:
            resets += 1
            if resets > 2:
                status = "stalled"
                log.warning("minimize%s stalled at iter %d, residual %.3e", f" [{name}]" if name else "", it, res)
                break
            tau = opts.step0 / 10
            continue
        resets = 0
        it += 1
        tr = tg - tlam * trial.values
        s = trial.values - u.values
        y = tr - r
        sy = ip(s, y)
        if pre is not None:
            ss = ip(s, pre.inverse(s))
        else:
            ss = ip(s, s)
        u, b, g, lam, r = trial, tb, tg, tlam, tr
        trace.append(b.E)
        res = residual_from(u, g, lam)
        tau = ss / sy if sy > 0 else opts.step0
        tau = min(max(tau, 1e-8), 1e4)
        if callback is not None:
            callback(it, u, b, res)
    if res <= opts.tol:
        status = "converged"
    return MinimizeResult(field=u, breakdown=b, lam=lam, residual=res, iters=it,
                          converged=res <= opts.tol, energy_trace=np.asarray(trace),
                          status=status, name=name)


def g_minimize(init: RadialField, rho: float, p: float = P_SLATER,
               opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Minimize ``G = A/2 - S/p`` on the mass sphere; ``lam = (A - S)/rho^2``."""
    return minimize(init, rho, p, opts, coulomb=False)


Start = tuple[str, "AnyField | Callable[[], AnyField]"]


def multistart(rho: float, p: float, opts: MinimizeOptions | None, starts: Sequence[Start],
               *, kernel=None, jobs: int = 1) -> tuple[MinimizeResult, list[dict]]:
    """Run :func:`minimize` from every named start and keep the lowest energy.

    Results within ``2 tol`` of the minimum count as ties; the earliest listed
    start wins a tie.
    """
    if not starts:
        raise ValueError("multistart needs at least one start")
    opts = opts or MinimizeOptions()

    def run(start):
        name, init = start
        field = init() if callable(init) else init
        return minimize(field, rho, p, opts, kernel=kernel, name=name)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(s) for s in starts]
    emin = min(res.E for res in results)
    best = next(res for res in results if res.E <= emin + 2 * opts.tol)
    table = [dict(name=res.name, E=res.E, lam=res.lam, residual=res.residual,
                  iters=res.iters, converged=res.converged, status=res.status)
             for res in results]
    return best, table
