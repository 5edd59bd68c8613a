"""Linearized two-state (short-run / long-run) analytics.

The economy sits in a "short-run" state hit by a natural-rate shock,
government-debt deviation and/or spending, and reverts to the long run
each period with probability 1 - mu.  Expectations of any deviation x
therefore satisfy E[x'] = mu * x_S, which collapses the linearized
system (aggregate demand, Phillips curve, policy rule, wealth
aggregator) to two equations in the short-run output and inflation
deviations.  Solving that 2x2 system yields closed-form impact
multipliers for debt (tax deferral at constant spending) and for
balanced-budget spending, in each of the two policy regimes:

  NORMAL : i_S = r_e_S + phi_pi * pi_S + phi_y * y_S   (rule active)
  ZLB    : i_S = 0                                     (bound binding)

``solve_two_state`` is the numeric oracle; ``analytic_multiplier``
evaluates the eight closed forms (preference x instrument x regime) that
must agree with finite differences of the oracle.  ``check_determinacy``
evaluates the quadratic-in-mu determinacy margin, whose positivity is
equivalent to a positive multiplier denominator within each regime.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .calibration import Calibration, PreferenceKind, steady_state_hours
from .errors import IndeterminateSystem, NonpositiveDenominator
from .steady_state import annualize_rate, steady_state_rate, wealth_premium


class Instrument(enum.Enum):
    DEBT = "debt"
    SPENDING = "spending"

    @classmethod
    def parse(cls, value: "Instrument | str") -> "Instrument":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())


class Regime(enum.Enum):
    NORMAL = "normal"
    ZLB = "zlb"

    @classmethod
    def parse(cls, value: "Regime | str") -> "Regime":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())


# ---------------------------------------------------------------------------
# Reduced-form coefficients
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearCoefficients:
    """Composite coefficients of the linearized system.

    kappa is the Phillips-curve slope under log-log preferences,
    kappa_ghh its GHH counterpart; zeta > 1 rescales the interest-rate
    and wealth channels under GHH.  Both slopes are evaluated at the
    calibration's own steady-state gross rate 1 + r_bar.
    """

    kappa: float
    kappa_ghh: float
    zeta: float
    r_bar: float
    one_minus_L: float
    beta_1r: float  # beta * (1 + r_bar), exact cancellation form

    @classmethod
    def from_calibration(cls, calib: Calibration) -> "LinearCoefficients":
        r_bar = steady_state_rate(calib)
        gross = 1.0 + r_bar
        L = steady_state_hours(calib)
        common = (1.0 - calib.alpha) * (1.0 / calib.alpha - 1.0 / gross) / (
            1.0 - calib.theta + calib.theta / calib.sigma
        )
        kappa = common / ((1.0 - L) * calib.sigma)
        kappa_ghh = common * (calib.epsilon / calib.sigma - 1.0)
        zeta = 1.0 / (
            1.0 - (calib.sigma / calib.epsilon) * (1.0 - 1.0 / calib.theta)
        )
        return cls(
            kappa=kappa,
            kappa_ghh=kappa_ghh,
            zeta=zeta,
            r_bar=r_bar,
            one_minus_L=1.0 - L,
            # via the premium so the Ricardian zero (q=1 or B/Y=0) is exact
            beta_1r=1.0 + wealth_premium(calib),
        )


# ---------------------------------------------------------------------------
# Two-state solve (the oracle)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShortRunState:
    """Exogenous short-run conditions.

    r_e_S is the short-run natural-rate term in log units (its no-shock
    value is log(1 + r_bar), not zero); g_S is spending as a share of
    steady-state output; b_prime_S is the log-deviation of debt
    inclusive of interest; zlb selects the policy regime.
    """

    mu: float
    r_e_S: float
    g_S: float = 0.0
    b_prime_S: float = 0.0
    zlb: bool = False

    def __post_init__(self):
        if not 0.0 <= self.mu < 1.0:
            raise ValueError("mu must lie in [0, 1)")


@dataclass(frozen=True)
class TwoStateSolution:
    """Short-run fixed point of the linearized system.

    y_S and pi_S are log-deviations; i_S is log(1 + i), an absolute
    level rather than a deviation; delta_hat_S is the log-deviation of
    the wealth-pricing aggregator.
    """

    y_S: float
    pi_S: float
    i_S: float
    delta_hat_S: float


def delta_hat_short_run(calib: Calibration, mu: float, r_e_S: float,
                        r_bar: float) -> float:
    """Closed form of the aggregator deviation under two-state dynamics."""
    qb = calib.q * calib.beta
    return -qb * (r_e_S - math.log1p(r_bar)) / (1.0 - qb * mu)


def solve_two_state(calib: Calibration, state: ShortRunState) -> TwoStateSolution:
    """Solve the 2x2 short-run system in (y_S, pi_S).

    The nominal rate is eliminated with the regime rule and the wealth
    aggregator with its closed form, leaving aggregate demand and the
    Phillips curve.  Raises IndeterminateSystem when the determinacy
    margin for the requested regime is nonpositive (the fixed point is
    then not unique) or the system is numerically singular.
    """
    coef = LinearCoefficients.from_calibration(calib)
    regime = Regime.ZLB if state.zlb else Regime.NORMAL
    det = check_determinacy(calib, state.mu, regime, coef=coef)
    if not det.determinate:
        raise IndeterminateSystem(
            f"two-state system indeterminate (margin {det.margin:.6g}) "
            f"at mu={state.mu}, regime={regime.value}"
        )

    mu = state.mu
    br = coef.beta_1r
    gross = 1.0 + coef.r_bar
    dhat = delta_hat_short_run(calib, mu, state.r_e_S, coef.r_bar)
    shock = state.r_e_S - math.log1p(coef.r_bar)  # natural-rate gap

    if calib.pref is PreferenceKind.LOG_LOG:
        kap = coef.kappa
        wealth = br - 1.0
        rhs_ad = (mu - br) * state.g_S - wealth * state.b_prime_S + wealth * mu * dhat
        if state.zlb:
            a_y, a_pi = mu - br, br * mu
            rhs_ad -= br * state.r_e_S
        else:
            a_y = mu - br * (1.0 + calib.phi_y)
            a_pi = -br * (calib.phi_pi - mu)
            # the rule's natural-rate term cancels the shock in AD
        rhs_nkpc = -kap * coef.one_minus_L * calib.sigma * state.g_S
    else:
        kap = coef.kappa_ghh
        zeta = coef.zeta
        wealth = (br - 1.0) / zeta
        rhs_ad = (mu - br) * state.g_S - wealth * state.b_prime_S + wealth * mu * dhat
        if state.zlb:
            a_y = (mu - br) / calib.theta
            a_pi = br * mu / zeta
            rhs_ad -= (br / zeta) * state.r_e_S
        else:
            a_y = (mu - br) / calib.theta - (br / zeta) * calib.phi_y
            a_pi = -(br / zeta) * (calib.phi_pi - mu)
        rhs_nkpc = 0.0

    mat = np.array([[a_y, a_pi], [-kap, 1.0 - mu / gross]])
    rhs = np.array([rhs_ad, rhs_nkpc])
    detval = mat[0, 0] * mat[1, 1] - mat[0, 1] * mat[1, 0]
    if abs(detval) < 1e-14:
        raise IndeterminateSystem("two-state system is singular")
    y_S, pi_S = np.linalg.solve(mat, rhs)

    if state.zlb:
        i_S = 0.0
    else:
        i_S = state.r_e_S + calib.phi_pi * pi_S + calib.phi_y * y_S
    # suppress signed zeros for exact steady-state inputs
    return TwoStateSolution(y_S=float(y_S) + 0.0, pi_S=float(pi_S) + 0.0,
                            i_S=float(i_S) + 0.0, delta_hat_S=dhat + 0.0)


def two_state_residuals(calib: Calibration, state: ShortRunState,
                        sol: TwoStateSolution) -> tuple[float, float]:
    """(AD, Phillips-curve) residuals of a candidate solution."""
    coef = LinearCoefficients.from_calibration(calib)
    mu, br = state.mu, coef.beta_1r
    gross = 1.0 + coef.r_bar
    y, pi, i, dhat = sol.y_S, sol.pi_S, sol.i_S, sol.delta_hat_S
    g, bp = state.g_S, state.b_prime_S
    if calib.pref is PreferenceKind.LOG_LOG:
        ad = mu * y - (
            br * y + br * (i - mu * pi) + mu * g - br * g - br * state.r_e_S
            - (br - 1.0) * bp + (br - 1.0) * mu * dhat
        )
        nkpc = pi - mu * pi / gross - coef.kappa * (
            y - coef.one_minus_L * calib.sigma * g
        )
    else:
        th, zeta = calib.theta, coef.zeta
        ad = mu * y / th - (
            br * y / th + (br / zeta) * (i - mu * pi) + mu * g - br * g
            - (br / zeta) * state.r_e_S - ((br - 1.0) / zeta) * bp
            + ((br - 1.0) / zeta) * mu * dhat
        )
        nkpc = pi - mu * pi / gross - coef.kappa_ghh * y
    return ad, nkpc


# ---------------------------------------------------------------------------
# Closed-form multipliers
# ---------------------------------------------------------------------------

def analytic_multiplier(calib: Calibration, mu: float,
                        instrument: Instrument | str,
                        regime: Regime | str) -> float:
    """Impact multiplier d y_S / d instrument_S, closed form.

    Debt multipliers are with respect to the log-deviation of debt
    inclusive of interest (spending held at zero); spending multipliers
    are with respect to spending as a share of output at constant debt.
    Pure formula evaluation: determinacy is not checked here.
    """
    if not 0.0 <= mu < 1.0:
        raise ValueError("mu must lie in [0, 1)")
    instrument = Instrument.parse(instrument)
    regime = Regime.parse(regime)
    coef = LinearCoefficients.from_calibration(calib)
    br = coef.beta_1r
    gross = 1.0 + coef.r_bar
    slack = 1.0 - mu / gross  # 1 - (1+r)^{-1} mu

    if calib.pref is PreferenceKind.LOG_LOG:
        kap = coef.kappa
        gterm = kap * coef.one_minus_L * calib.sigma
        if regime is Regime.NORMAL:
            den = (br * (1.0 + calib.phi_y) - mu) * slack + br * kap * (
                calib.phi_pi - mu
            )
            if instrument is Instrument.DEBT:
                return (br - 1.0) * slack / den
            num = (br - mu) * slack + br * gterm * (calib.phi_pi - mu)
            return num / den
        den = (br - mu) * slack - br * kap * mu
        if instrument is Instrument.DEBT:
            return (br - 1.0) * slack / den
        num = (br - mu) * slack - br * gterm * mu
        return num / den

    kap = coef.kappa_ghh
    zeta, th = coef.zeta, calib.theta
    if regime is Regime.NORMAL:
        den = (zeta / th) * (br * (1.0 + (th / zeta) * calib.phi_y) - mu) * slack \
            + br * kap * (calib.phi_pi - mu)
    else:
        den = (zeta / th) * (br - mu) * slack - mu * br * kap
    if instrument is Instrument.DEBT:
        return slack * (br - 1.0) / den
    return slack * (br - mu) * zeta / den


# ---------------------------------------------------------------------------
# Determinacy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeterminacyResult:
    determinate: bool
    margin: float


def determinacy_margin(calib: Calibration, mu: float,
                       regime: Regime | str,
                       coef: LinearCoefficients | None = None) -> float:
    """Value of the regime-specific determinacy quadratic in mu.

    The quadratic is a positive rescaling of the corresponding
    multiplier denominator, so within each regime positivity of one is
    equivalent to positivity of the other.
    """
    regime = Regime.parse(regime)
    if coef is None:
        coef = LinearCoefficients.from_calibration(calib)
    gross = 1.0 + coef.r_bar
    beta = calib.beta
    if calib.pref is PreferenceKind.LOG_LOG:
        kap = coef.kappa
        if regime is Regime.NORMAL:
            const = beta * gross**2 * (1.0 + calib.phi_y + kap * calib.phi_pi)
            lin = gross * (beta * (1.0 + calib.phi_y + kap * gross) + 1.0)
        else:
            const = beta * gross**2
            lin = gross * (beta * (1.0 + kap * gross) + 1.0)
    else:
        kap = coef.kappa_ghh
        zeta, th = coef.zeta, calib.theta
        if regime is Regime.NORMAL:
            const = (beta * gross**2 * th / zeta) * (
                zeta / th + calib.phi_y + kap * calib.phi_pi
            )
            lin = gross * (
                (beta * th / zeta) * (zeta / th + calib.phi_y + gross * kap) + 1.0
            )
        else:
            const = beta * gross**2
            lin = gross * ((beta * th / zeta) * (zeta / th + gross * kap) + 1.0)
    return mu * mu - lin * mu + const


def check_determinacy(calib: Calibration, mu: float,
                      regime: Regime | str,
                      coef: LinearCoefficients | None = None) -> DeterminacyResult:
    """Determinacy of the two-state system at persistence mu."""
    if not 0.0 <= mu < 1.0:
        raise ValueError("mu must lie in [0, 1)")
    margin = determinacy_margin(calib, mu, regime, coef=coef)
    return DeterminacyResult(determinate=margin > 0.0, margin=margin)


def determinacy_threshold(calib: Calibration, regime: Regime | str,
                          tol: float = 1e-4) -> float:
    """Largest persistence mu in [0, 1) with a determinate system.

    Bisects on the sign of the determinacy quadratic.  Returns 1.0 when
    the system is determinate on all of [0, 1) (always the case in the
    NORMAL regime when the inflation response exceeds one).  The product
    of the quadratic's roots is beta*(1+r)^2 > 1, so at most one root
    lies in [0, 1) and bisection is exact.
    """
    regime = Regime.parse(regime)
    coef = LinearCoefficients.from_calibration(calib)
    hi = 1.0 - 1e-12
    if determinacy_margin(calib, hi, regime, coef=coef) > 0.0:
        return 1.0
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if determinacy_margin(calib, mid, regime, coef=coef) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Parameter sweeps
# ---------------------------------------------------------------------------

SWEEP_AXES = ("q", "debt_to_gdp", "mu")
SWEEP_CSV_HEADER = "axis,value,multiplier,determinate,r_bar_annualized"


@dataclass(frozen=True)
class SweepRow:
    axis: str
    value: float
    multiplier: float            # nan when the steady state fails
    determinate: bool
    r_bar_annualized: float      # nan when the steady state fails
    error: str | None = None     # name of the failure, rows never dropped


def sweep_multiplier(calib: Calibration, axis: str,
                     grid: Sequence[float] | Iterable[float],
                     instrument: Instrument | str,
                     regime: Regime | str,
                     mu: float | None = None,
                     pin_eta_each: bool = True) -> list[SweepRow]:
    """Multiplier along a parameter grid, steady state recomputed per point.

    For axis 'q' or 'debt_to_gdp' the persistence mu must be supplied;
    for axis 'mu' the grid itself provides it.  eta is re-pinned from
    L_bar at every point unless pin_eta_each is False (it matters only
    if the caller supplied a custom eta).  Infeasible or indeterminate
    points are flagged in the row rather than dropped.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"axis must be one of {SWEEP_AXES}")
    if axis != "mu" and mu is None:
        raise ValueError("mu is required when sweeping q or debt_to_gdp")
    instrument = Instrument.parse(instrument)
    regime = Regime.parse(regime)

    rows: list[SweepRow] = []
    for value in sorted(float(v) for v in grid):
        point_mu = value if axis == "mu" else mu
        try:
            if axis == "mu":
                point = calib
            else:
                point = calib.replace(**{axis: value})
            if pin_eta_each:
                point = point.with_eta_pinned()
            r_bar = steady_state_rate(point)
            mult = analytic_multiplier(point, point_mu, instrument, regime)
            det = check_determinacy(point, point_mu, regime)
            rows.append(SweepRow(axis, value, mult, det.determinate,
                                 annualize_rate(r_bar)))
        except NonpositiveDenominator as exc:
            rows.append(SweepRow(axis, value, math.nan, False, math.nan,
                                 error=type(exc).__name__))
    return rows


def sweep_to_csv(rows: Sequence[SweepRow]) -> str:
    """Render sweep rows in the fixed CSV schema (10 significant digits)."""
    lines = [SWEEP_CSV_HEADER]
    for row in rows:
        lines.append(
            f"{row.axis},{row.value:.10g},{row.multiplier:.10g},"
            f"{'true' if row.determinate else 'false'},"
            f"{row.r_bar_annualized:.10g}"
        )
    return "\n".join(lines) + "\n"
