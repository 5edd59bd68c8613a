import numpy as np
import pytest

from conftest import random_calibration
from olgnk.calibration import Calibration, PreferenceKind, baseline_ghh, baseline_loglog
from olgnk.errors import NonpositiveDenominator
from olgnk.steady_state import (
    annualize_rate,
    euler_residual,
    labor_supply_residual,
    solve_steady_state,
    steady_state_rate,
)


def test_zero_debt_collapses_to_pure_discount_rate():
    calib = Calibration(debt_to_gdp=0.0).with_eta_pinned()
    assert steady_state_rate(calib) == pytest.approx(1.0 / 0.998 - 1.0, abs=1e-15)


def test_certain_survival_collapses_to_pure_discount_rate():
    for by in (0.0, 2.4, 8.0):
        calib = Calibration(q=1.0, debt_to_gdp=by).with_eta_pinned()
        assert steady_state_rate(calib) == pytest.approx(1.0 / 0.998 - 1.0, abs=1e-14)


def test_baseline_annualized_rate_near_published_anchors():
    calib = baseline_loglog()
    r60 = annualize_rate(steady_state_rate(calib))
    r200 = annualize_rate(steady_state_rate(
        calib.replace(debt_to_gdp=8.0).with_eta_pinned()
    ))
    assert r60 == pytest.approx(0.0162, abs=5e-4)
    assert r200 == pytest.approx(0.0365, abs=5e-4)


def test_ghh_baseline_rate_in_documented_band():
    r = annualize_rate(steady_state_rate(baseline_ghh()))
    assert 0.015 <= r <= 0.018


def test_rate_needs_eta_under_loglog():
    with pytest.raises(ValueError, match="eta"):
        steady_state_rate(Calibration())


def test_rate_raises_on_infeasible_debt():
    calib = baseline_ghh()
    with pytest.raises(NonpositiveDenominator):
        steady_state_rate(calib.replace(debt_to_gdp=1500.0, eta=calib.eta))


# -- monotonicity and limits -------------------------------------------------

@pytest.mark.parametrize("make", [baseline_loglog, baseline_ghh])
def test_rate_strictly_increasing_in_debt(make):
    calib = make()
    grid = np.linspace(0.0, 8.0, 33)
    rates = [steady_state_rate(calib.replace(debt_to_gdp=b)) for b in grid]
    assert all(a < b for a, b in zip(rates, rates[1:]))


@pytest.mark.parametrize("pref", [PreferenceKind.LOG_LOG, PreferenceKind.GHH])
def test_rate_strictly_decreasing_in_survival(pref):
    grid = np.linspace(0.9, 1.0, 21)
    rates = [
        steady_state_rate(Calibration(q=q, pref=pref).with_eta_pinned())
        for q in grid
    ]
    assert all(a > b for a, b in zip(rates, rates[1:]))


@pytest.mark.parametrize("pref", [PreferenceKind.LOG_LOG, PreferenceKind.GHH])
def test_rate_limit_as_survival_goes_to_one(pref):
    calib = Calibration(q=1.0 - 1e-8, pref=pref).with_eta_pinned()
    assert abs(steady_state_rate(calib) - (1.0 / 0.998 - 1.0)) < 1e-9


def test_wealth_premium_iff_turnover_and_debt():
    calib = baseline_loglog()
    assert calib.beta * (1.0 + steady_state_rate(calib)) > 1.0
    flat = calib.replace(debt_to_gdp=0.0).with_eta_pinned()
    assert calib.beta * (1.0 + steady_state_rate(flat)) == pytest.approx(1.0, abs=1e-15)


# -- full steady state --------------------------------------------------------

def test_baseline_steady_state_values(loglog):
    ss = solve_steady_state(loglog)
    assert ss.Y == pytest.approx(0.3, abs=1e-15)
    assert ss.C == ss.Y
    assert ss.L == pytest.approx(0.3, abs=1e-13)
    assert ss.w == pytest.approx(5.0 / 6.0, abs=1e-13)
    assert ss.T == pytest.approx(ss.B_prime * ss.r_bar / (1.0 + ss.r_bar), abs=1e-15)
    assert ss.T > 0.0
    assert ss.V == ss.B_prime
    assert ss.i == ss.r_bar
    assert ss.pi == 0.0


def test_turnover_term_vanishes_at_certain_survival():
    calib = Calibration(q=1.0).with_eta_pinned()
    ss = solve_steady_state(calib)
    assert abs(euler_residual(calib, ss)) < 1e-15
    assert ss.r_bar == pytest.approx(1.0 / 0.998 - 1.0, abs=1e-14)


def test_steady_state_identity_audit_random_calibrations():
    rng = np.random.default_rng(7)
    checked = 0
    while checked < 1000:
        try:
            calib = random_calibration(rng)
        except NonpositiveDenominator:
            continue
        ss = solve_steady_state(calib)
        assert abs(ss.Y - ss.C - ss.G) < 1e-14
        assert abs(ss.Y - ss.L ** calib.sigma) < 1e-12
        assert abs((ss.T - ss.G) - ss.B_prime * (1.0 - 1.0 / (1.0 + ss.r_bar))) < 1e-14
        assert abs(ss.delta - 1.0 / (1.0 - calib.q * calib.beta)) < 1e-12
        assert abs(euler_residual(calib, ss)) < 1e-12
        assert abs(labor_supply_residual(calib, ss)) < 1e-12
        if calib.q < 1.0 and calib.debt_to_gdp > 0.0:
            assert calib.beta * (1.0 + ss.r_bar) > 1.0
        checked += 1
