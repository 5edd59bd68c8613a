import math

import numpy as np
import pytest

from conftest import random_calibration
from olgnk.calibration import Calibration, PreferenceKind
from olgnk.errors import IndeterminateSystem, NonpositiveDenominator
from olgnk.linear import (
    Instrument,
    LinearCoefficients,
    Regime,
    ShortRunState,
    analytic_multiplier,
    check_determinacy,
    determinacy_threshold,
    solve_two_state,
    sweep_multiplier,
    sweep_to_csv,
    two_state_residuals,
)
from olgnk.steady_state import steady_state_rate


def fd_multiplier(calib, mu, instrument, regime, h=1e-6):
    """Finite difference of the two-state solve w.r.t. the instrument.

    The system is linear in the shock terms, so central differences are
    exact up to roundoff; this is the oracle for the closed forms.
    """
    r_e = math.log1p(steady_state_rate(calib))
    zlb = regime is Regime.ZLB

    def y_at(value):
        if instrument is Instrument.DEBT:
            state = ShortRunState(mu=mu, r_e_S=r_e, b_prime_S=value, zlb=zlb)
        else:
            state = ShortRunState(mu=mu, r_e_S=r_e, g_S=value, zlb=zlb)
        return solve_two_state(calib, state).y_S

    return (y_at(h) - y_at(-h)) / (2.0 * h)


def test_no_shock_stays_at_steady_state(loglog):
    r_e = math.log1p(steady_state_rate(loglog))
    sol = solve_two_state(loglog, ShortRunState(mu=0.4, r_e_S=r_e))
    assert sol.y_S == 0.0
    assert sol.pi_S == 0.0
    assert sol.delta_hat_S == 0.0
    assert sol.i_S == pytest.approx(r_e, abs=1e-15)


def test_two_state_residuals_within_tolerance(loglog, ghh):
    for calib in (loglog, ghh):
        r_e = math.log1p(steady_state_rate(calib))
        for state in (
            ShortRunState(mu=0.4, r_e_S=r_e, b_prime_S=1.0),
            ShortRunState(mu=0.4, r_e_S=r_e - 0.02, zlb=True),
            ShortRunState(mu=0.55, r_e_S=r_e, g_S=0.3),
        ):
            sol = solve_two_state(calib, state)
            ad, nkpc = two_state_residuals(calib, state, sol)
            assert abs(ad) < 1e-12
            assert abs(nkpc) < 1e-12


def test_closed_form_matches_two_state_solve(loglog):
    bm = analytic_multiplier(loglog, 0.4, Instrument.DEBT, Regime.NORMAL)
    assert fd_multiplier(loglog, 0.4, Instrument.DEBT, Regime.NORMAL) == pytest.approx(
        bm, rel=1e-10
    )


def test_deep_trap_produces_deflationary_recession(loglog):
    r_e = math.log1p(steady_state_rate(loglog))
    sol = solve_two_state(
        loglog, ShortRunState(mu=0.4, r_e_S=r_e - 0.02, zlb=True)
    )
    assert sol.y_S < 0.0
    assert sol.pi_S < 0.0
    assert sol.i_S == 0.0


def test_oracle_equivalence_random_draws():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 200:
        try:
            calib = random_calibration(rng)
        except NonpositiveDenominator:
            continue
        mu = rng.uniform(0.0, 0.9)
        for instrument in Instrument:
            for regime in Regime:
                if not check_determinacy(calib, mu, regime).determinate:
                    continue
                closed = analytic_multiplier(calib, mu, instrument, regime)
                fd = fd_multiplier(calib, mu, instrument, regime)
                assert abs(fd - closed) <= 1e-8 * max(1.0, abs(closed))
        checked += 1


def test_ricardian_equivalence_at_certain_survival():
    calib = Calibration(q=1.0).with_eta_pinned()
    assert analytic_multiplier(calib, 0.4, Instrument.DEBT, Regime.NORMAL) == 0.0
    assert analytic_multiplier(calib, 0.4, Instrument.DEBT, Regime.ZLB) == 0.0


def test_zlb_debt_multiplier_dominates_normal(loglog):
    for mu in np.linspace(0.0, 0.69, 24):
        zlb = analytic_multiplier(loglog, mu, Instrument.DEBT, Regime.ZLB)
        normal = analytic_multiplier(loglog, mu, Instrument.DEBT, Regime.NORMAL)
        assert zlb > normal


def test_ghh_spending_exceeds_debt_multiplier(ghh):
    for mu in np.linspace(0.05, 0.5, 10):
        gsm = analytic_multiplier(ghh, mu, Instrument.SPENDING, Regime.NORMAL)
        bm = analytic_multiplier(ghh, mu, Instrument.DEBT, Regime.NORMAL)
        assert gsm > bm


def test_ghh_debt_multiplier_exceeds_loglog(loglog, ghh):
    bm_ll = analytic_multiplier(loglog, 0.4, Instrument.DEBT, Regime.NORMAL)
    bm_ghh = analytic_multiplier(ghh, 0.4, Instrument.DEBT, Regime.NORMAL)
    assert bm_ghh > bm_ll


def test_debt_multiplier_numerator_sign():
    rng = np.random.default_rng(13)
    for _ in range(100):
        try:
            calib = random_calibration(rng)
        except NonpositiveDenominator:
            continue
        coef = LinearCoefficients.from_calibration(calib)
        bm = analytic_multiplier(calib, 0.3, Instrument.DEBT, Regime.NORMAL)
        if calib.q == 1.0 or calib.debt_to_gdp == 0.0:
            assert bm == 0.0
        else:
            assert math.copysign(1.0, bm) == math.copysign(1.0, coef.beta_1r - 1.0)


def test_determinacy_equals_positive_denominator():
    rng = np.random.default_rng(17)
    checked = 0
    while checked < 200:
        try:
            calib = random_calibration(rng)
        except NonpositiveDenominator:
            continue
        if calib.q == 1.0 or calib.debt_to_gdp == 0.0:
            continue  # zero numerator makes the sign test degenerate
        mu = rng.uniform(0.0, 0.99)
        for regime in Regime:
            margin = check_determinacy(calib, mu, regime).margin
            bm = analytic_multiplier(calib, mu, Instrument.DEBT, regime)
            if margin > 0.0:
                assert bm > 0.0
            elif margin < 0.0:
                assert bm < 0.0
        checked += 1


def test_taylor_response_monotonicity(loglog):
    for field in ("phi_pi", "phi_y"):
        grid = np.linspace(getattr(loglog, field), getattr(loglog, field) + 2.0, 9)
        vals = [
            analytic_multiplier(
                loglog.replace(**{field: v}), 0.4, Instrument.DEBT, Regime.NORMAL
            )
            for v in grid
        ]
        assert all(a > b for a, b in zip(vals, vals[1:]))


# -- determinacy -------------------------------------------------------------

def test_zlb_thresholds_match_published_values(loglog, ghh):
    assert determinacy_threshold(loglog, Regime.ZLB) == pytest.approx(0.70, abs=0.01)
    assert determinacy_threshold(ghh, Regime.ZLB) == pytest.approx(0.58, abs=0.01)


def test_taylor_principle_gives_determinacy_everywhere(loglog):
    assert check_determinacy(loglog, 0.99, Regime.NORMAL).determinate
    assert determinacy_threshold(loglog, Regime.NORMAL) == 1.0


def test_solve_raises_beyond_threshold(loglog):
    r_e = math.log1p(steady_state_rate(loglog))
    with pytest.raises(IndeterminateSystem):
        solve_two_state(loglog, ShortRunState(mu=0.85, r_e_S=r_e, zlb=True))


def test_short_run_state_validates_mu():
    with pytest.raises(ValueError):
        ShortRunState(mu=1.0, r_e_S=0.0)


# -- sweeps -------------------------------------------------------------------

def test_sweep_q_ends_at_zero_multiplier(loglog):
    rows = sweep_multiplier(loglog, "q", [0.95, 0.97, 1.0],
                            Instrument.DEBT, Regime.NORMAL, mu=0.4)
    assert rows[-1].value == 1.0
    assert rows[-1].multiplier == 0.0


def test_sweep_debt_axis_increasing(loglog):
    rows = sweep_multiplier(loglog, "debt_to_gdp", np.linspace(0.0, 8.0, 9),
                            Instrument.DEBT, Regime.NORMAL, mu=0.4)
    vals = [r.multiplier for r in rows]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_sweep_q_axis_decreasing(loglog):
    rows = sweep_multiplier(loglog, "q", np.linspace(0.93, 0.99, 7),
                            Instrument.DEBT, Regime.NORMAL, mu=0.4)
    vals = [r.multiplier for r in rows]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_sweep_flags_failures_without_dropping(ghh):
    rows = sweep_multiplier(ghh, "debt_to_gdp", [2.4, 2000.0],
                            Instrument.DEBT, Regime.ZLB, mu=0.4)
    assert len(rows) == 2
    bad = rows[-1]
    assert bad.error == "NonpositiveDenominator"
    assert not bad.determinate
    assert math.isnan(bad.multiplier)


def test_sweep_sorts_by_axis_and_renders_csv(loglog):
    rows = sweep_multiplier(loglog, "mu", [0.5, 0.1, 0.3],
                            Instrument.SPENDING, Regime.NORMAL)
    assert [r.value for r in rows] == [0.1, 0.3, 0.5]
    csv_text = sweep_to_csv(rows)
    lines = csv_text.strip().split("\n")
    assert lines[0] == "axis,value,multiplier,determinate,r_bar_annualized"
    assert len(lines) == 4
    assert lines[1].startswith("mu,0.1,")


def test_sweep_requires_mu_for_parameter_axes(loglog):
    with pytest.raises(ValueError, match="mu"):
        sweep_multiplier(loglog, "q", [0.95], Instrument.DEBT, Regime.NORMAL)
