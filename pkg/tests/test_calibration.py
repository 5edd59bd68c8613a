import json

import pytest

from olgnk.calibration import (
    Calibration,
    PreferenceKind,
    baseline_ghh,
    baseline_loglog,
    pin_eta,
    steady_state_hours,
)
from olgnk.errors import NonpositiveDenominator


def test_baseline_defaults():
    calib = Calibration()
    assert calib.beta == 0.998
    assert calib.q == 0.9512
    assert calib.debt_to_gdp == 2.4
    assert calib.pref is PreferenceKind.LOG_LOG
    assert calib.eta is None


@pytest.mark.parametrize("field,value", [
    ("beta", 0.0), ("beta", 1.0), ("q", 0.0), ("q", 1.01),
    ("theta", 1.0), ("epsilon", 1.0), ("alpha", 1.0), ("alpha", -0.1),
    ("sigma", 0.0), ("sigma", 1.5), ("phi_pi", -0.1), ("phi_y", -1.0),
    ("debt_to_gdp", -0.1), ("L_bar", 0.0), ("L_bar", 1.0), ("eta", -2.0),
])
def test_invalid_parameters_rejected(field, value):
    with pytest.raises(ValueError):
        Calibration(**{field: value})


def test_infeasible_debt_fails_at_construction():
    # log-log needs eta before the denominator can be checked
    with pytest.raises(NonpositiveDenominator):
        Calibration(debt_to_gdp=1500.0).with_eta_pinned()
    # GHH denominator is checkable immediately
    with pytest.raises(NonpositiveDenominator):
        Calibration(q=0.9, debt_to_gdp=300.0, pref=PreferenceKind.GHH)


def test_pref_parsing_variants():
    assert Calibration(pref="LogLog").pref is PreferenceKind.LOG_LOG
    assert Calibration(pref="GHH").pref is PreferenceKind.GHH
    assert Calibration(pref="ghh").pref is PreferenceKind.GHH
    with pytest.raises(ValueError):
        PreferenceKind.parse("chh")


def test_json_round_trip():
    calib = baseline_ghh().replace(q=0.97).with_eta_pinned()
    again = Calibration.from_json(calib.to_json())
    assert again == calib
    data = json.loads(calib.to_json())
    assert set(data) == set(Calibration._FIELDS)
    assert data["pref"] == "ghh"


def test_unknown_json_keys_rejected():
    data = Calibration().to_dict()
    data["phi_pie"] = 2.0  # typo must not pass silently
    with pytest.raises(ValueError, match="phi_pie"):
        Calibration.from_dict(data)


# -- eta pinning ------------------------------------------------------------

def test_pin_eta_loglog_baseline():
    # w = 5/6, C = 0.3, eta = (5/6)(0.7)/0.3
    calib = Calibration()
    assert pin_eta(calib) == pytest.approx(35.0 / 18.0, abs=1e-15)


def test_pin_eta_ghh_baseline():
    # w = eta L^(eps-1): eta = (5/6)/0.3
    calib = Calibration(pref=PreferenceKind.GHH)
    assert pin_eta(calib) == pytest.approx((5.0 / 6.0) / 0.3, abs=1e-14)


def test_pin_eta_symmetric_leisure():
    calib = Calibration(L_bar=0.5)
    assert pin_eta(calib) == pytest.approx(5.0 / 6.0, abs=1e-15)


@pytest.mark.parametrize("make", [baseline_loglog, baseline_ghh])
def test_pinned_eta_reproduces_hours_target(make):
    calib = make()
    assert steady_state_hours(calib) == pytest.approx(calib.L_bar, abs=1e-12)


@pytest.mark.parametrize("pref", [PreferenceKind.LOG_LOG, PreferenceKind.GHH])
@pytest.mark.parametrize("sigma", [1.0, 0.7])
def test_labor_supply_holds_for_arbitrary_eta(pref, sigma):
    calib = Calibration(sigma=sigma, pref=pref, eta=1.7)
    L = steady_state_hours(calib)
    w = (calib.theta - 1.0) / calib.theta * sigma * L ** (sigma - 1.0)
    if pref is PreferenceKind.LOG_LOG:
        residual = w * (1.0 - L) - calib.eta * L ** sigma
    else:
        residual = w - calib.eta * L ** (calib.epsilon - 1.0)
    assert abs(residual) < 1e-12
