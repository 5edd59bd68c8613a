import math

import numpy as np
import pytest

from olgnk.calibration import Calibration
from olgnk.empirics import (
    BUNDLED_PANEL,
    CountryObservation,
    FittedLine,
    calibrate_beta_q,
    fit_line,
    load_panel,
    residuals_by_country,
)
from olgnk.errors import DegenerateDesign, EmptyPanel, NoRoot, ParseError
from olgnk.steady_state import annualize_rate, steady_state_rate


def obs(country, x, y):
    return CountryObservation(country, x, y)


# -- loading -------------------------------------------------------------------

def test_bundled_panel_loads():
    panel = load_panel(BUNDLED_PANEL)
    assert len(panel) == 34
    assert all(o.debt_to_gdp > 0 for o in panel)
    assert all(o.n_years == 19 for o in panel)
    # high inflation samples can push measured real rates negative
    assert any(o.real_rate < 0 for o in panel)


def test_high_debt_outlier_sits_above_the_line():
    panel = load_panel(BUNDLED_PANEL)
    line = fit_line(panel)
    residuals = residuals_by_country(panel, line)
    assert max(residuals, key=residuals.get) == "GRC"


def test_load_rejects_nonpositive_debt(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text("country,debt_to_gdp,real_rate\nAAA,0.5,0.01\nBBB,-0.2,0.01\n")
    with pytest.raises(ParseError, match="3"):
        load_panel(path)


def test_load_rejects_duplicates(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text("country,debt_to_gdp,real_rate\nAAA,0.5,0.01\nAAA,0.6,0.02\n")
    with pytest.raises(ParseError, match="duplicate"):
        load_panel(path)


def test_load_rejects_bad_numbers_and_header(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text("country,debt_to_gdp,real_rate\nAAA,abc,0.01\n")
    with pytest.raises(ParseError):
        load_panel(path)
    path.write_text("nation,debt,rate\nAAA,0.5,0.01\n")
    with pytest.raises(ParseError, match="header"):
        load_panel(path)


def test_load_empty_panel(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text("")
    with pytest.raises(EmptyPanel):
        load_panel(path)
    path.write_text("country,debt_to_gdp,real_rate\n")
    with pytest.raises(EmptyPanel):
        load_panel(path)


# -- OLS -----------------------------------------------------------------------

def test_two_point_fit_is_exact():
    line = fit_line([obs("A", 0.6, 0.0162), obs("B", 1.0, 0.0226)])
    assert line.predict(0.6) == pytest.approx(0.0162, abs=1e-15)
    assert line.predict(1.0) == pytest.approx(0.0226, abs=1e-15)
    assert line.r_squared == pytest.approx(1.0, abs=1e-12)


def test_noiseless_recovery():
    x = np.linspace(0.2, 1.4, 12)
    panel = [obs(f"C{k}", xi, 0.004 + 0.015 * xi) for k, xi in enumerate(x)]
    line = fit_line(panel)
    assert line.intercept == pytest.approx(0.004, abs=1e-10)
    assert line.slope == pytest.approx(0.015, abs=1e-10)


def test_five_point_fit_matches_normal_equations_oracle():
    # oracle: raw normal equations, solved by Cramer's rule
    x = [0.3, 0.55, 0.8, 1.1, 1.6]
    y = [0.009, 0.018, 0.014, 0.027, 0.031]
    n = len(x)
    sx, sy = sum(x), sum(y)
    sxx = sum(v * v for v in x)
    sxy = sum(a * b for a, b in zip(x, y))
    det = n * sxx - sx * sx
    slope_oracle = (n * sxy - sx * sy) / det
    intercept_oracle = (sxx * sy - sx * sxy) / det

    line = fit_line([obs(f"C{k}", a, b) for k, (a, b) in enumerate(zip(x, y))])
    assert line.slope == pytest.approx(slope_oracle, abs=1e-12)
    assert line.intercept == pytest.approx(intercept_oracle, abs=1e-12)


def test_degenerate_designs():
    with pytest.raises(DegenerateDesign):
        fit_line([obs("A", 0.5, 0.01)])
    with pytest.raises(DegenerateDesign):
        fit_line([obs("A", 0.5, 0.01), obs("B", 0.5, 0.02)])


def test_fit_invariant_to_order_and_scaling():
    rng = np.random.default_rng(3)
    panel = [obs(f"C{k}", x, 0.006 + 0.012 * x + e)
             for k, (x, e) in enumerate(zip(rng.uniform(0.2, 1.5, 20),
                                            rng.normal(0, 0.004, 20)))]
    line = fit_line(panel)
    shuffled = list(panel)
    rng.shuffle(shuffled)
    line2 = fit_line(shuffled)
    assert line2.slope == pytest.approx(line.slope, abs=1e-15)
    assert line2.intercept == pytest.approx(line.intercept, abs=1e-15)
    # doubling x exactly halves the slope (powers of two are exact)
    scaled = [obs(o.country, 2.0 * o.debt_to_gdp, o.real_rate) for o in panel]
    assert fit_line(scaled).slope == line.slope / 2.0


# -- calibration ----------------------------------------------------------------

def model_anchor_line() -> FittedLine:
    """Line through the model-implied rates at the two anchor debt levels."""
    base = Calibration().with_eta_pinned()
    r60 = annualize_rate(steady_state_rate(base.replace(debt_to_gdp=2.4)))
    r100 = annualize_rate(steady_state_rate(base.replace(debt_to_gdp=4.0)))
    slope = (r100 - r60) / 0.4
    return FittedLine(intercept=r60 - 0.6 * slope, slope=slope,
                      r_squared=1.0, n=2)


def test_round_trip_recovers_table_calibration():
    line = model_anchor_line()
    beta, q = calibrate_beta_q(line, "loglog")
    assert beta == pytest.approx(0.998, abs=5e-4)
    assert q == pytest.approx(0.9512, abs=5e-4)
    beta_g, q_g = calibrate_beta_q(line, "ghh")
    assert beta_g == pytest.approx(0.998, abs=5e-4)
    assert q_g == pytest.approx(0.9785, abs=5e-4)


def test_round_trip_reproduces_anchor_rates():
    line = model_anchor_line()
    for pref in ("loglog", "ghh"):
        beta, q = calibrate_beta_q(line, pref)
        for anchor in (0.6, 1.0):
            calib = Calibration(beta=beta, q=q, pref=pref,
                                debt_to_gdp=4.0 * anchor).with_eta_pinned()
            rate = annualize_rate(steady_state_rate(calib))
            assert abs(rate - line.predict(anchor)) < 1e-10


def test_model_rate_is_nearly_linear_between_anchors():
    line = model_anchor_line()
    base = Calibration().with_eta_pinned()
    for anchor in np.linspace(0.6, 1.0, 9):
        rate = annualize_rate(steady_state_rate(
            base.replace(debt_to_gdp=4.0 * anchor)
        ))
        assert abs(rate - line.predict(anchor)) < 5e-4  # five basis points


def test_flat_line_at_discount_rate_has_no_interior_root():
    flat = 4.0 * (1.0 / 0.998 - 1.0)
    line = FittedLine(intercept=flat, slope=0.0, r_squared=1.0, n=2)
    with pytest.raises(NoRoot):
        calibrate_beta_q(line, "loglog")


def test_nonpositive_anchor_rates_rejected():
    line = FittedLine(intercept=-0.01, slope=0.001, r_squared=0.5, n=10)
    with pytest.raises(NoRoot):
        calibrate_beta_q(line, "loglog")
