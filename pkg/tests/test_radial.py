import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spslab.fields import RadialField, RadialGrid, annulus_family, gaussian
from spslab.radial import (RadialWorkspace, laplacian_bands, radial_coulomb_energy,
                           radial_coulomb_potential, radial_el_gradient, radial_kinetic,
                           radial_slater)

import oracles

P = 8.0 / 3.0


@pytest.fixture(scope="module")
def unit():
    return gaussian(RadialGrid(2048, 16.0), 1.0)


def test_oracles_at_default_resolution(unit):
    assert radial_kinetic(unit) == pytest.approx(oracles.GAUSS_A, rel=1e-5)
    assert radial_coulomb_energy(unit) == pytest.approx(oracles.GAUSS_B, rel=1e-5)
    assert radial_slater(unit, P) == pytest.approx(oracles.GAUSS_S, rel=1e-5)


def test_second_order_convergence():
    errs = []
    for nr in (256, 512, 1024):
        u = gaussian(RadialGrid(nr, 16.0), 1.0)
        errs.append(abs(radial_kinetic(u) - oracles.GAUSS_A) + abs(radial_coulomb_energy(u) - oracles.GAUSS_B))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert min(orders) > 1.8


def test_newton_shell_potential():
    # a thin shell of charge Q at radius R: V = Q/R inside, Q/r outside
    g = RadialGrid(4096, 64.0)
    u = annulus_family(g, 1.0, 20.0, 1.0)
    V = radial_coulomb_potential(u).values
    inside, outside = g.r < 18.0, g.r > 22.0
    shell_mean = np.sum(g.weights * u.values ** 2 / g.r)      # <1/r> over the shell
    assert V[inside] == pytest.approx(np.full(inside.sum(), shell_mean), rel=1e-12)
    assert V[outside] == pytest.approx(1.0 / g.r[outside], rel=1e-12)


def test_potential_monotone_and_positive(unit):
    V = radial_coulomb_potential(unit).values
    assert np.all(V > 0) and np.all(np.diff(V) <= 0)


def test_workspace_reuse(unit):
    ws = RadialWorkspace(unit.grid)
    a = radial_coulomb_energy(unit, ws)
    assert radial_coulomb_energy(unit, ws) == a == radial_coulomb_energy(unit)


def test_laplacian_bands_match_kinetic():
    rng = np.random.default_rng(2)
    g = RadialGrid(64, 4.0)
    u = rng.normal(size=g.nr)
    diag, off = laplacian_bands(g)
    quad_form = float(np.sum(diag * u * u) + 2 * np.sum(off * u[:-1] * u[1:]))
    assert quad_form == pytest.approx(radial_kinetic(RadialField(g, u)), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_gradient_is_exact_discrete_derivative(seed):
    rng = np.random.default_rng(seed)
    g = RadialGrid(32, 4.0)
    u = RadialField(g, 1.0 + rng.random(g.nr))      # positive: away from the |u|^(p-2) kink
    v = rng.normal(size=g.nr)

    def E(vals):
        f = RadialField(g, vals)
        return radial_kinetic(f) / 2 + radial_coulomb_energy(f) / 4 - radial_slater(f, P) / P

    eps = 1e-5
    fd = (E(u.values + eps * v) - E(u.values - eps * v)) / (2 * eps)
    exact = float(np.sum(g.weights * radial_el_gradient(u, P).values * v))
    assert fd == pytest.approx(exact, rel=1e-6, abs=1e-9)
