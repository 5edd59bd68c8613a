"""Nonlinear steady state with an endogenous real interest rate.

With survival probability q < 1 and a positive stock of government debt,
aggregate financial wealth drags on aggregate consumption growth
(generational turnover), so the real rate that keeps aggregate
consumption constant exceeds the pure-discount rate 1/beta - 1 and rises
with the debt-to-GDP ratio.  The closed forms below invert the aggregate
Euler equation at the zero-inflation steady state.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calibration import Calibration, PreferenceKind, steady_state_hours
from .errors import NonpositiveDenominator


def annualize_rate(quarterly_rate: float) -> float:
    """Annualized net rate, simple convention: 4 x quarterly net rate."""
    return 4.0 * quarterly_rate


def deannualize_rate(annual_rate: float) -> float:
    return annual_rate / 4.0


def steady_state_rate(calib: Calibration) -> float:
    """Quarterly net real interest rate at the steady state.

    Log-log preferences:

        1 + r = q(1+eta) / [ beta q (1+eta) - (1-q)(1-beta q) B/Y ]

    GHH preferences (independent of eta):

        1 + r = (1/beta) * q S / [ q S - eps theta (1-q)(1/beta - q) B/Y ]
        with S = eps*theta - sigma*(theta-1).

    Raises NonpositiveDenominator when the bracketed denominator is <= 0,
    i.e. the debt stock is too large to be willingly held at any finite
    rate.  At q = 1 or B/Y = 0 both forms collapse to 1/beta - 1.
    """
    if calib.pref is PreferenceKind.LOG_LOG and calib.eta is None:
        raise ValueError("log-log steady-state rate needs eta; pin it first")
    den = calib.rate_denominator()
    if den <= 0.0:
        raise NonpositiveDenominator(
            f"steady-state rate denominator {den:.6g} <= 0 "
            f"at debt_to_gdp={calib.debt_to_gdp}"
        )
    if calib.pref is PreferenceKind.LOG_LOG:
        return calib.q * (1.0 + calib.eta) / den - 1.0
    scale = calib.epsilon * calib.theta - calib.sigma * (calib.theta - 1.0)
    return (calib.q * scale / den) / calib.beta - 1.0


def wealth_premium(calib: Calibration) -> float:
    """beta * (1 + rbar) - 1, in its exact cancellation form.

    Algebraically the premium equals (1-q)(1-beta q) B/Y / denominator
    (log-log) or eps theta (1-q)(1/beta - q) B/Y / denominator (GHH),
    so it is exactly zero at q = 1 or B/Y = 0 -- the Ricardian cases --
    with no floating-point residue.
    """
    if calib.pref is PreferenceKind.LOG_LOG and calib.eta is None:
        raise ValueError("log-log wealth premium needs eta; pin it first")
    den = calib.rate_denominator()
    if den <= 0.0:
        raise NonpositiveDenominator(
            f"steady-state rate denominator {den:.6g} <= 0 "
            f"at debt_to_gdp={calib.debt_to_gdp}"
        )
    if calib.pref is PreferenceKind.LOG_LOG:
        num = (1.0 - calib.q) * (1.0 - calib.beta * calib.q) * calib.debt_to_gdp
    else:
        num = (
            calib.epsilon * calib.theta * (1.0 - calib.q)
            * (1.0 / calib.beta - calib.q) * calib.debt_to_gdp
        )
    return num / den


@dataclass(frozen=True)
class SteadyState:
    """Zero-inflation steady state of the full nonlinear model."""

    r_bar: float      # quarterly net real rate
    Y: float          # output level
    L: float          # hours
    C: float          # consumption
    w: float          # real wage
    T: float          # lump-sum taxes (level)
    B_prime: float    # real debt inclusive of interest, (1+r)B
    V: float          # aggregate financial wealth (= B_prime)
    delta: float      # present-value aggregator, 1/(1 - q beta)
    G: float = 0.0    # government spending (zero in all experiments)
    pi: float = 0.0   # net inflation
    i: float = 0.0    # net nominal rate (= r_bar)

    @property
    def r_bar_annualized(self) -> float:
        return annualize_rate(self.r_bar)

    def to_dict(self) -> dict:
        return {
            "r_bar": self.r_bar,
            "r_bar_annualized": self.r_bar_annualized,
            "Y": self.Y,
            "L": self.L,
            "C": self.C,
            "w": self.w,
            "T": self.T,
            "B_prime": self.B_prime,
            "V": self.V,
            "delta": self.delta,
            "G": self.G,
            "pi": self.pi,
            "i": self.i,
        }


def solve_steady_state(calib: Calibration) -> SteadyState:
    """Full steady state for the active preference kind.

    Hours follow from eta (equal to L_bar when eta was pinned from it),
    output from the production function, consumption from market
    clearing with G = 0, and taxes from the government budget.  Wealth
    equals government debt inclusive of interest: bonds are the only
    asset, so bond-market clearing sets V = B'.
    """
    r_bar = steady_state_rate(calib)
    L = steady_state_hours(calib)
    Y = L ** calib.sigma
    C = Y  # market clearing with G = 0
    w = (calib.theta - 1.0) / calib.theta * calib.sigma * L ** (calib.sigma - 1.0)
    B = calib.debt_to_gdp * Y
    B_prime = (1.0 + r_bar) * B
    T = B_prime * (1.0 - 1.0 / (1.0 + r_bar))  # = r_bar * B, with G = 0
    delta = 1.0 / (1.0 - calib.q * calib.beta)
    return SteadyState(
        r_bar=r_bar, Y=Y, L=L, C=C, w=w, T=T,
        B_prime=B_prime, V=B_prime, delta=delta,
        i=r_bar,
    )


def euler_residual(calib: Calibration, ss: SteadyState) -> float:
    """Aggregate Euler-equation residual at the steady state.

    Zero (to machine precision) when ss was produced by
    :func:`solve_steady_state`; exposed so audits can verify the wealth
    drag and the rate formula against each other.
    """
    gross = 1.0 + ss.r_bar
    if calib.pref is PreferenceKind.LOG_LOG:
        drag = (1.0 - calib.q) / ((1.0 + calib.eta) * calib.q)
        return ss.C + drag * ss.V / ss.delta - calib.beta * gross * ss.C
    drag = (1.0 - calib.q) / calib.q
    net = ss.C - (calib.eta / calib.epsilon) * ss.L ** calib.epsilon
    return net + drag * ss.V / ss.delta - calib.beta * gross * net


def labor_supply_residual(calib: Calibration, ss: SteadyState) -> float:
    """Steady-state labor-supply condition residual (should be ~0)."""
    if calib.pref is PreferenceKind.LOG_LOG:
        return ss.w * (1.0 - ss.L) - calib.eta * ss.C
    return ss.w - calib.eta * ss.L ** (calib.epsilon - 1.0)
