"""Property suites run by ``spslab verify`` and by the acceptance tests.

Each suite returns a list of :class:`Check` rows: name, expected value,
measured value, tolerance and verdict.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import spectral
from .analysis import (builtin_family, empirical_constant, inequality_ratio, interp_exponent,
                       lambda_scaling_study, scaling_law_check)
from .config import RunConfig
from .energy import GaussianSpec, energy, evaluate, rescale, slater_integral
from .errors import OutOfRange
from .fields import (AnyField, Field3, Grid3, RadialField, RadialGrid, gaussian, l2_norm,
                     multi_bump, rearrange_decreasing)


@dataclass(frozen=True)
class Check:
    name: str
    expected: object
    measured: object
    tolerance: object
    passed: bool

    def line(self) -> str:
        def fmt(v):
            return f"{v:.10g}" if isinstance(v, float) else str(v)
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{self.name}\texpected={fmt(self.expected)}\tmeasured={fmt(self.measured)}"
                f"\ttol={fmt(self.tolerance)}\t{verdict}")


def close(name: str, expected: float, measured: float, tol: float, relative: bool = False) -> Check:
    err = abs(measured - expected)
    if relative:
        err /= abs(expected)
    return Check(name, float(expected), float(measured), tol, bool(err <= tol))


def holds(name: str, condition: bool, measured: object = "", expected: object = "true") -> Check:
    return Check(name, expected, measured, "-", bool(condition))


# -- gradient consistency ---------------------------------------------------

def random_smooth_field(grid, rng: np.random.Generator, bumps: int = 3) -> AnyField:
    """Strictly positive sum of random Gaussians (keeps clear of the ``|u|^(p-2)`` kink)."""
    if isinstance(grid, RadialGrid):
        r = grid.r
        vals = np.zeros(grid.nr)
        for _ in range(bumps):
            sigma = rng.uniform(0.06, 0.2) * grid.rmax
            vals += rng.uniform(0.5, 1.5) * np.exp(-r ** 2 / (4 * sigma ** 2))
        return RadialField(grid, vals * rng.uniform(0.5, 1.5))
    X, Y, Z = grid.mesh()
    vals = np.zeros(grid.shape)
    for _ in range(bumps):
        c = rng.uniform(-0.3, 0.3, 3) * grid.L
        sigma = rng.uniform(0.1, 0.2) * grid.L
        vals += rng.uniform(0.5, 1.5) * np.exp(-((X - c[0]) ** 2 + (Y - c[1]) ** 2 + (Z - c[2]) ** 2)
                                               / (4 * sigma ** 2))
    return Field3(grid, vals * rng.uniform(0.5, 1.5))


def directional_error(u: AnyField, v: AnyField, p: float, kernel=None,
                      eps: tuple[float, ...] = (1e-3, 1e-4, 1e-5)) -> float:
    """Relative mismatch of central differences of ``E`` against ``<E'(u), v>``.

    The best value over the step sweep is reported, as usual for difference
    checks where truncation and rounding errors pull in opposite directions.
    """
    _, grad = evaluate(u, p, kernel)
    exact = float(np.sum(u.grid.weights * grad * v.values))
    errs = []
    for e in eps:
        fp = energy(u.with_values(u.values + e * v.values), p, kernel).E
        fm = energy(u.with_values(u.values - e * v.values), p, kernel).E
        errs.append(abs((fp - fm) / (2 * e) - exact) / max(abs(exact), 1e-300))
    return min(errs)


def euler_error(u: AnyField, p: float, kernel=None) -> float:
    b, grad = evaluate(u, p, kernel)
    lhs = float(np.sum(u.grid.weights * grad * u.values))
    return abs(lhs - (b.A + b.B - b.S)) / abs(b.A + b.B + b.S)


def gradient_checks(cfg: RunConfig, grid3: Grid3 | None = None,
                    rgrid: RadialGrid | None = None) -> list[Check]:
    p = cfg.physics_p
    rng = np.random.default_rng(cfg.solver_seed)
    out = []
    for label, grid in (("radial", rgrid or RadialGrid(512, 16.0)), ("full3d", grid3 or Grid3(32, 8.0))):
        kernel = spectral.kernel_for(grid) if isinstance(grid, Grid3) else None
        worst, worst_euler = 0.0, 0.0
        for _ in range(cfg.verify_pairs):
            u = random_smooth_field(grid, rng)
            v = random_smooth_field(grid, rng)
            worst = max(worst, directional_error(u, v, p, kernel))
            worst_euler = max(worst_euler, euler_error(u, p, kernel))
        out.append(Check(f"gradcheck.{label}.directional_max_rel", 0.0, worst, 1e-6, worst <= 1e-6))
        out.append(Check(f"gradcheck.{label}.euler_max_rel", 0.0, worst_euler, 1e-10, worst_euler <= 1e-10))
    return out


# -- scaling laws -------------------------------------------------------------

def scaling_checks(cfg: RunConfig) -> list[Check]:
    p = cfg.physics_p
    spec = GaussianSpec(1.0, 1.0)
    thetas = np.geomspace(0.5, 2.0, 7)
    out = []
    for beta in (-2.0, 0.0, 1.0, 2.0 / 3.0):
        fit = scaling_law_check(spec, thetas, beta, p)
        for term, s, e in zip("ABS", fit.slopes, fit.expected):
            out.append(close(f"scaling.beta={beta:.4g}.slope_{term}", e, s, 1e-3))
        if beta == -2.0 and math.isclose(p, 8.0 / 3.0):
            # literal triple (6, 6, 14/3) for the Slater case
            for term, s, e in zip("ABS", fit.slopes, (6.0, 6.0, 14.0 / 3.0)):
                out.append(close(f"scaling.beta=-2.triple_{term}", e, s, 1e-3))
    # u_{theta,-2} has negative energy tending to 0 from below as theta -> 0
    base = GaussianSpec(10.0, 1.0)
    es = [rescale(base, t, -2.0).breakdown(p).E for t in (0.5, 0.4, 0.3)]
    out.append(holds("scaling.beta=-2.negative_energy", all(e < 0 for e in es), ",".join(f"{e:.4g}" for e in es)))
    out.append(holds("scaling.beta=-2.tends_to_zero_from_below", es[0] < es[1] < es[2] < 0,
                     ",".join(f"{e:.4g}" for e in es)))
    return out


# -- interpolation inequality -------------------------------------------------

def family_constant(refine: int, p: float) -> float:
    return empirical_constant(builtin_family(refine), p)


def ineq_checks(cfg: RunConfig) -> list[Check]:
    p = cfg.physics_p
    out = []
    ip = interp_exponent(8.0 / 3.0, 1.0)
    out.append(close("ineq.theta(p=8/3,s=1)", 2.0 / 7.0, ip.theta, 1e-12))
    out.append(close("ineq.exponent_gradient", 1.0 / 6.0, ip.exponents[0], 1e-12))
    out.append(close("ineq.exponent_coulomb", 5.0 / 24.0, ip.exponents[1], 1e-12))
    try:
        interp_exponent(18.0 / 7.0, 1.0)
        out.append(holds("ineq.left_endpoint_excluded", False, "accepted"))
    except OutOfRange as exc:
        out.append(holds("ineq.left_endpoint_excluded", True, f"OutOfRange({exc})"))
    out.append(close("ineq.right_endpoint_theta(p=6)", (6 - 15) / (3 - 12), interp_exponent(6.0, 1.0).theta, 1e-12))

    params = interp_exponent(p, 1.0)
    spec = GaussianSpec(1.0, 1.0)
    r0 = inequality_ratio(spec, params)
    rg = RadialGrid(4096, 64.0)
    u = gaussian(rg, 2.0)
    g0 = inequality_ratio(u, params)
    for theta, beta in ((1.3, -2.0), (1.3, 1.0)):
        r1 = inequality_ratio(rescale(spec, theta, beta), params)
        out.append(close(f"ineq.invariance.analytic(theta={theta},beta={beta:g})", r0, r1, 1e-6, relative=True))
        g1 = inequality_ratio(rescale(u, theta, beta), params)
        out.append(close(f"ineq.invariance.grid(theta={theta},beta={beta:g})", g0, g1, 1e-3, relative=True))
    c1, c2 = family_constant(1, p), family_constant(2, p)
    out.append(holds("ineq.family_max_finite", math.isfinite(c1) and c1 > 0, f"{c1:.8g}"))
    out.append(close("ineq.family_max_refinement", c2, c1, 1e-2, relative=True))
    return out


# -- multiplier asymptotics of G ---------------------------------------------

def gstudy_checks(cfg: RunConfig) -> list[Check]:
    out = []
    grid = cfg.radial_grid()
    for p in (8.0 / 3.0, 2.8):
        st = lambda_scaling_study(p=p, grid=grid)
        tag = f"gstudy.p={p:.4g}"
        out.append(close(f"{tag}.slope", st.expected_slope, st.slope, 0.05, relative=True))
        out.append(holds(f"{tag}.lambda_negative", st.all_negative,
                         ",".join(f"{r.lam:.4g}" for r in st.rows)))
        out.append(holds(f"{tag}.lambda_to_zero_monotone", st.monotone))
        out.append(holds(f"{tag}.all_converged", all(r.converged for r in st.rows)))
        out.append(Check(f"{tag}.soliton_mass", "reported", st.soliton_mass, "-", True))
        ratios = ",".join(f"{r.pohozaev_ratio:.6g}" for r in st.rows)
        out.append(Check(f"{tag}.pohozaev_ratio_G_over_lambda_rho2", "reported", ratios, "-", True))
    return out


# -- rearrangement ------------------------------------------------------------

def rearrange_checks(cfg: RunConfig) -> list[Check]:
    p = cfg.physics_p
    n = cfg.verify_rearrange_n
    grid = Grid3(n, 16.0)
    u = multi_bump(grid, 2, 8.0, 1.0, 1.0)
    us = rearrange_decreasing(u)
    bu, bs = energy(u, p), energy(us, p)
    same = np.array_equal(np.sort(np.abs(u.values).ravel()), np.sort(us.values.ravel()))
    return [
        holds("rearrange.equimeasurable", same),
        close("rearrange.norm", l2_norm(u), l2_norm(us), 1e-12, relative=True),
        close("rearrange.slater", slater_integral(u, p), slater_integral(us, p), 1e-12, relative=True),
        Check("rearrange.coulomb_increases", f">= {bu.B:.8g}*(1-1e-2)", bs.B, 1e-2,
              bool(bs.B >= bu.B * (1 - 1e-2))),
        Check("rearrange.kinetic_decreases", f"<= {bu.A:.8g}*(1+1e-2)", bs.A, 1e-2,
              bool(bs.A <= bu.A * (1 + 1e-2))),
    ]


SUITES: dict[str, Callable[[RunConfig], list[Check]]] = {
    "scaling": scaling_checks,
    "ineq": ineq_checks,
    "gradcheck": gradient_checks,
    "gstudy": gstudy_checks,
    "rearrange": rearrange_checks,
}
