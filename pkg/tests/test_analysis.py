import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spslab.analysis import (BreakingWarning, SweepRecord, builtin_family, detect_breaking,
                             empirical_constant, equal_split_triples, floor_report, geometric_rho_sq,
                             inequality_ratio, interp_exponent, lambda_scaling_study,
                             radial_floor_bound, records_to_csv, running_minimum, scaling_law_check,
                             subadditivity_check, sweep, SWEEP_COLUMNS)
from spslab.energy import EnergyBreakdown, GaussianSpec, rescale
from spslab.errors import DegenerateField, ExponentOutOfRange, MissingRho, OutOfRange
from spslab.fields import RadialGrid

import oracles

P = 8.0 / 3.0


def rec(rho, I_full, I_rad, conv=True):
    return SweepRecord(rho=rho, I_full=I_full, I_rad=I_rad, lambda_full=-1.0, lambda_rad=-1.0,
                       conv_full=conv, conv_rad=conv, iters_full=1, iters_rad=1, grid_n=8,
                       grid_L=1.0, nr=16, rmax=1.0)


# -- interpolation inequality ------------------------------------------------------

def test_interp_exponent_slater():
    ip = interp_exponent(P)
    assert ip.theta == pytest.approx(2 / 7, rel=1e-14)
    assert ip.exponents == pytest.approx((1 / 6, 5 / 24), rel=1e-14)
    assert ip.energy_exponents == pytest.approx(oracles.FLOOR_EXPONENTS, rel=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.55, 1.45), st.floats(0.01, 0.99))
def test_interp_exponent_formula(s, frac):
    lo, hi = (16 * s + 2) / (6 * s + 1), 6 / (3 - 2 * s)
    p = lo + frac * (hi - lo)
    assert interp_exponent(p, s).theta == pytest.approx(oracles.interp_theta(p, s), rel=1e-12)


def test_interp_exponent_bounds():
    with pytest.raises(OutOfRange, match="lower"):
        interp_exponent(18 / 7)
    with pytest.raises(OutOfRange, match="upper"):
        interp_exponent(6.5)
    with pytest.raises(OutOfRange):
        interp_exponent(3.0, s=1.5)
    assert interp_exponent(6.0).theta == pytest.approx(1.0)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.2, 5.0), st.floats(-3.0, 3.0), st.floats(2.6, 3.0))
def test_ratio_scale_invariant(theta, beta, p):
    spec = GaussianSpec(1.3, 0.8)
    params = interp_exponent(p)
    assert inequality_ratio(rescale(spec, theta, beta), params) == pytest.approx(
        inequality_ratio(spec, params), rel=1e-9)


def test_ratio_accepts_triples_and_rejects_degenerate():
    b = EnergyBreakdown.from_parts(1.0, 2.0, 0.5, P)
    assert inequality_ratio(b) == inequality_ratio((1.0, 2.0, 0.5))
    with pytest.raises(DegenerateField):
        inequality_ratio((0.0, 1.0, 1.0))


def test_family_constant_stable():
    c1 = empirical_constant(builtin_family(1))
    c2 = empirical_constant(builtin_family(2))
    assert 0 < c1 < 1 and c1 == pytest.approx(c2, rel=1e-2)
    with pytest.raises(ValueError):
        empirical_constant([])


# -- radial floor ------------------------------------------------------------------

@pytest.mark.parametrize("C", [0.05, 0.38, 0.76, 3.0])
def test_floor_matches_closed_form(C):
    assert radial_floor_bound(C) == pytest.approx(oracles.floor_closed_form(C), rel=1e-6)


def test_floor_limits_and_monotonicity():
    assert radial_floor_bound(0.0) == 0.0
    assert radial_floor_bound(-1.0) == 0.0
    vals = [radial_floor_bound(c) for c in (0.1, 0.2, 0.4, 0.8)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert abs(radial_floor_bound(1e-4)) < 1e-18
    with pytest.raises(ExponentOutOfRange):
        radial_floor_bound(1.0, 2.0)


def test_floor_report_band():
    rep = floor_report(0.38)
    assert rep.floor_band == pytest.approx(radial_floor_bound(0.76)) and rep.floor_band < rep.floor < 0


# -- scaling fits ------------------------------------------------------------------

@pytest.mark.parametrize("beta", [-2.0, 0.0, 1.0])
def test_scaling_fit_recovers_exponents(beta):
    fit = scaling_law_check(GaussianSpec(1.0, 1.0), np.geomspace(0.5, 2.0, 7), beta)
    assert fit.max_error < 1e-10
    assert max(fit.residuals) < 1e-10


def test_scaling_fit_on_grid_field():
    from spslab.fields import gaussian
    u = gaussian(RadialGrid(4096, 64.0), 2.0)
    fit = scaling_law_check(u, np.geomspace(0.8, 1.6, 5), 1.0)
    assert fit.max_error < 1e-3


def test_scaling_fit_needs_span():
    with pytest.raises(ValueError):
        scaling_law_check(GaussianSpec(1.0), [1.0, 1.1, 1.2, 1.3], 0.0)


# -- multiplier study --------------------------------------------------------------

@pytest.mark.parametrize("p,slope,ratio", [(8 / 3, 1.5, oracles.POHOZAEV_SLATER), (2.8, 1.0, oracles.POHOZAEV_P28)])
def test_lambda_study(p, slope, ratio):
    st_ = lambda_scaling_study(p=p)
    assert st_.expected_slope == pytest.approx(slope)
    assert st_.slope == pytest.approx(slope, rel=0.05)
    assert st_.all_negative and st_.monotone
    assert all(r.converged for r in st_.rows)
    for r in st_.rows:
        assert r.pohozaev_ratio == pytest.approx(oracles.pohozaev_constant(p), rel=1e-3)
        assert r.pohozaev_ratio == pytest.approx(ratio, rel=1e-3)


# -- breaking, subadditivity and helpers --------------------------------------------

def test_detect_breaking_none():
    recs = [rec(r, -r, -r + 1e-9) for r in (0.1, 0.2, 0.3)]
    rep = detect_breaking(recs, tol=1e-6)
    assert not rep.detected and rep.describe() == "none detected"
    assert rep.margin == pytest.approx(1e-5)


def test_detect_breaking_bracket():
    recs = [rec(0.1, -1.0, -1.0), rec(0.2, -2.0, -2.0 + 1e-7), rec(0.3, -3.0, -2.5), rec(0.4, -4.0, -3.0)]
    rep = detect_breaking(recs, tol=1e-6)
    assert rep.rho_star == 0.3 and rep.bracket == (0.2, 0.3) and not rep.warnings


def test_detect_breaking_skips_unconverged_and_warns():
    recs = [rec(0.1, -1.0, -1.0), rec(0.2, -3.0, -2.0, conv=False), rec(0.3, -3.0, -2.5),
            rec(0.4, -3.0, -3.0)]
    with pytest.warns(BreakingWarning):
        rep = detect_breaking(recs, tol=1e-6)
    assert rep.bracket == (0.1, 0.3) and len(rep.warnings) == 1


def test_detect_breaking_at_first_row():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        rep = detect_breaking([rec(0.1, -2.0, -1.0)], tol=1e-6)
    assert rep.bracket == (None, 0.1) and "none" in rep.describe()


def test_subadditivity():
    s = math.sqrt(2.0)
    recs = [rec(1.0, -1.0, -1.0), rec(s, -2.5, -2.0), rec(2.0, -5.5, -3.0)]
    triples = equal_split_triples(recs)
    assert triples == [(1.0, 1.0, s), (s, s, 2.0)]
    rep = subadditivity_check(recs, triples)
    assert rep.ok and rep.slack == 3e-6
    bad = [rec(1.0, -1.0, -1.0), rec(s, -1.5, -1.0)]
    assert not subadditivity_check(bad, equal_split_triples(bad)).ok
    assert subadditivity_check(recs, [(0.0, 1.0, 1.0)]).ok
    with pytest.raises(MissingRho):
        subadditivity_check(recs, [(0.6, 0.8, 1.0)])
    with pytest.raises(ValueError):
        subadditivity_check(recs, [(1.0, 1.0, 1.0)])


def test_geometric_masses():
    ms = geometric_rho_sq(100 / 2048, 100.0)
    assert len(ms) == 23 and ms[0] == 100 / 2048 and ms[-1] == 100.0
    assert np.allclose(np.diff(np.log(ms)), 0.5 * math.log(2))
    with pytest.raises(ValueError):
        geometric_rho_sq(1.0, 0.5)


def test_running_minimum():
    assert running_minimum([3, 1, 2, 0]).tolist() == [3, 1, 1, 0]


def test_csv_layout():
    text = records_to_csv([rec(0.5, -1.0, -0.5)])
    head, row = text.splitlines()
    assert head.split(",") == list(SWEEP_COLUMNS)
    assert row.split(",")[:5] == ["0.5", "0.25", "-1.0", "-0.5", "0.5"]


def test_small_sweep_matches_radial_and_is_deterministic():
    rhos = [math.sqrt(0.05), math.sqrt(0.1)]
    from spslab.analysis import SweepSettings
    cfg = SweepSettings(grid_n=24, grid_max_iter=200)
    a = sweep(rhos, starts=("radial",), settings=cfg)
    b = sweep(rhos, starts=("radial",), settings=cfg, jobs=2)
    assert a.csv_text() == b.csv_text()
    for r in a.records:
        assert r.converged and abs(r.gap) <= 2e-6
    with pytest.raises(ValueError):
        sweep(rhos[::-1])
    with pytest.raises(ValueError):
        sweep(rhos, starts=("bogus",))
