"""Nonlinear perfect-foresight simulation with an occasionally binding ZLB.

The model is stacked over t = 1..T and solved as one square system by a
damped Newton method with an analytic sparse block-tridiagonal Jacobian.
Seven unknowns per period -- output Y, gross inflation Pi, the
present-value aggregator delta, price dispersion s, the two pricing
recursion auxiliaries x1 and x2, and the relative reset price p* --
satisfy, each period,

  Euler      : C' + m B'/delta'            = beta (1+r) (xi'/xi) C
               (GHH: C replaced by C - (eta/eps) L^eps, m by (1-q)/q)
  aggregator : delta = 1 + q beta (xi'/xi) delta'
  pricing    : x1 = w Y^{1/sigma} + alpha Pi'^{theta/sigma} x1' / (1+r)
               x2 = Y + alpha Pi'^{theta-1} x2' / (1+r)
  reset      : p*^{1+theta/sigma-theta} x2 = theta/((theta-1) sigma) x1
  index      : 1 = alpha Pi^{theta-1} + (1-alpha) p*^{1-theta}
  dispersion : s = alpha Pi^{theta/sigma} s_{-1} + (1-alpha) p*^{-theta/sigma}

with the static definitions C = Y - G, L = Y^{1/sigma} s, the
preference-specific labor supply for w, the policy rule

  1 + i = max(1, (1+rbar) (xi/xi') Pi^{phi_pi} (Y/Ybar)^{phi_y})

the Fisher relation 1+r = (1+i)/Pi', aggregate wealth V = B'
(bond-market clearing), and taxes residual from the government budget
G - T = B'/(1+r) - B'_{-1}.  The debt path B' is exogenous, given by
the fiscal plan.

The rule's anchors (rbar, Ybar) are the *pre-experiment* steady state:
the central bank keeps the intercept it has always used.  Its
log-linearization therefore reproduces the linear rule including the
natural-rate term tracking the preference shifter; setting
track_natural_rate=False freezes that term at the constant intercept.
Under a permanent debt expansion the long-run real rate rises while the
intercept stays put, so the economy converges to an anchor with
slightly positive steady inflation -- that anticipated inflation during
a trap is what makes permanent plans more powerful than temporary ones.

The bound is handled by active-set iteration: guess the set of binding
periods, solve the equality system, flip the periods whose implied rate
violates complementarity, and repeat until the pattern is stable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import brentq, root

from .calibration import Calibration, PreferenceKind
from .errors import (
    DimensionMismatch,
    NoConvergence,
    NonpositiveDenominator,
    RegimeCycleDetected,
)
from .steady_state import SteadyState, solve_steady_state, steady_state_rate

NEWTON_TOL = 1e-9
MAX_NEWTON_ITER = 60
MAX_BACKTRACK = 10
MAX_REGIME_ITER = 50

PATH_CSV_HEADER = (
    "t,Y,C,L,pi_annualized,i_annualized,r_annualized,"
    "B_prime,taxes,debt_to_gdp_annualized,zlb_flag"
)

EQUATION_NAMES = (
    "labor_supply", "euler", "delta", "x1", "x2", "reset_price",
    "price_index", "dispersion", "production", "market_clearing",
    "government_budget", "policy_rule", "fisher",
)


# ---------------------------------------------------------------------------
# Shock and plan specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ShockSpec:
    """Deterministic path of the preference shifter xi.

    ``xi_path[t-1]`` is the level of xi in period t; periods beyond the
    stored path are at the no-shock level 1.  During a recession window
    the shifter grows at a constant per-period factor and reaches 1 at
    the window's end, which keeps the natural-rate gap constant while
    the shock is active and zero afterwards.
    """

    xi_path: tuple[float, ...]
    recession_length: int

    def __post_init__(self):
        object.__setattr__(self, "xi_path", tuple(float(x) for x in self.xi_path))
        if self.recession_length < 0:
            raise ValueError("recession_length must be nonnegative")
        if any(x <= 0.0 for x in self.xi_path):
            raise ValueError("xi must be strictly positive")
        for t, x in enumerate(self.xi_path, start=1):
            if t > self.recession_length and x != 1.0:
                raise ValueError(
                    f"xi must equal 1 after the recession window (period {t})"
                )

    @classmethod
    def none(cls, horizon: int = 0) -> "ShockSpec":
        return cls(xi_path=(1.0,) * horizon, recession_length=0)

    @classmethod
    def constant_growth(cls, growth: float, recession_length: int,
                        horizon: int | None = None) -> "ShockSpec":
        """Window with xi growing at ``growth`` per period, ending at 1.

        growth > 1 raises the effective discount factor throughout the
        window (households save more), producing a recession with a
        constant negative natural-rate gap of -log(growth).
        """
        if growth <= 0.0:
            raise ValueError("growth must be positive")
        n = recession_length if horizon is None else max(horizon, recession_length)
        xi = tuple(
            growth ** -max(0, recession_length + 1 - t) for t in range(1, n + 1)
        )
        return cls(xi_path=xi, recession_length=recession_length)

    def xi(self, t: int) -> float:
        """Level of the shifter in period t (1-based); 1 beyond the path."""
        if t < 1:
            raise ValueError("periods are 1-based")
        return self.xi_path[t - 1] if t <= len(self.xi_path) else 1.0

    def xi_levels(self, horizon: int) -> np.ndarray:
        """Array of xi_t for t = 1..horizon+1 (the lead of the last period)."""
        return np.array([self.xi(t) for t in range(1, horizon + 2)])

    @property
    def growth(self) -> float:
        """Per-period growth factor during the window (1 when no shock)."""
        if self.recession_length == 0 or not self.xi_path:
            return 1.0
        return self.xi(2) / self.xi(1) if self.recession_length > 1 else 1.0 / self.xi(1)


class PlanKind(enum.Enum):
    NONE = "none"
    TEMPORARY = "temporary"
    PERMANENT = "permanent"

    @classmethod
    def parse(cls, value: "PlanKind | str") -> "PlanKind":
        if isinstance(value, cls):
            return value
        return cls(str(value).strip().lower())


@dataclass(frozen=True)
class FiscalPlan:
    """Debt experiment: a step in debt inclusive of interest at t = 1.

    debt_step is the change in the *annualized* debt-to-GDP ratio
    (0.02 = +2 percentage points), so debt inclusive of interest moves
    by debt_step * 4 * Y * (1 + rbar) -- e.g. 8% of quarterly output
    (before interest) for the +2pp experiment.  A TEMPORARY plan holds
    the new level until a restoring tax adjustment in ``revert_period``;
    a PERMANENT plan keeps it forever.  Spending g_path (share-of-output
    levels) is zero in all debt experiments.
    """

    kind: PlanKind = PlanKind.NONE
    debt_step: float = 0.0
    revert_period: int = 9
    g_path: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PlanKind.parse(self.kind))
        if self.kind is PlanKind.TEMPORARY and self.revert_period <= 1:
            raise ValueError("a temporary plan must revert after period 1")
        if self.g_path is not None:
            object.__setattr__(self, "g_path", tuple(float(g) for g in self.g_path))

    @classmethod
    def none(cls) -> "FiscalPlan":
        return cls()

    @classmethod
    def temporary(cls, debt_step: float = 0.02, revert_period: int = 9) -> "FiscalPlan":
        return cls(kind=PlanKind.TEMPORARY, debt_step=debt_step,
                   revert_period=revert_period)

    @classmethod
    def permanent(cls, debt_step: float = 0.02) -> "FiscalPlan":
        return cls(kind=PlanKind.PERMANENT, debt_step=debt_step)

    def debt_level_step(self, initial: SteadyState) -> float:
        """Step of B' in levels implied by the annualized ratio step."""
        return self.debt_step * 4.0 * initial.Y * (1.0 + initial.r_bar)

    def debt_path(self, initial: SteadyState, horizon: int) -> np.ndarray:
        """Exogenous path of debt inclusive of interest, t = 1..horizon."""
        step = self.debt_level_step(initial)
        path = np.full(horizon, initial.B_prime)
        if self.kind is PlanKind.TEMPORARY:
            if self.revert_period > horizon + 1:
                raise DimensionMismatch(
                    f"revert_period {self.revert_period} beyond horizon {horizon}"
                )
            path[: self.revert_period - 1] += step
        elif self.kind is PlanKind.PERMANENT:
            path += step
        return path

    def spending_path(self, initial: SteadyState, horizon: int) -> np.ndarray:
        """Spending levels G_t (g_path is in shares of steady-state output)."""
        g = np.zeros(horizon)
        if self.g_path is not None:
            if len(self.g_path) > horizon:
                raise DimensionMismatch(
                    f"g_path length {len(self.g_path)} exceeds horizon {horizon}"
                )
            g[: len(self.g_path)] = np.asarray(self.g_path) * initial.Y
        return g


def terminal_steady_state(calib: Calibration, plan: FiscalPlan,
                          initial: SteadyState) -> tuple[Calibration, SteadyState]:
    """Zero-inflation steady state consistent with the plan's long-run debt.

    For a PERMANENT plan the debt ratio solves the fixed point
    (1 + r(B/Y)) * (B/Y) * Y = B'_new, since the rate itself moves with
    the ratio.  Output is unchanged (hours depend only on preferences),
    so only the rate, taxes and wealth differ from the initial state.
    This is the reporting anchor; the exact long-run point of the
    simulated path additionally carries the slight steady inflation
    implied by the unchanged policy intercept (see TerminalAnchor).
    """
    if plan.kind is not PlanKind.PERMANENT:
        return calib, initial
    b_prime_new = initial.B_prime + plan.debt_level_step(initial)
    if b_prime_new <= 0.0:
        raise NonpositiveDenominator("permanent plan drives debt nonpositive")

    def gap(by: float) -> float:
        trial = calib.replace(debt_to_gdp=by)
        return (1.0 + steady_state_rate(trial)) * by * initial.Y - b_prime_new

    hi = b_prime_new / initial.Y
    new_ratio = brentq(gap, 0.0, hi, xtol=1e-15, rtol=8.9e-16)
    new_calib = calib.replace(debt_to_gdp=new_ratio)
    return new_calib, solve_steady_state(new_calib)


# ---------------------------------------------------------------------------
# Terminal anchor (long-run point of the stacked system)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TerminalAnchor:
    """Exact long-run values the stacked system converges to.

    Under NONE/TEMPORARY plans this is the initial zero-inflation steady
    state.  Under a PERMANENT plan it solves the full stationary system
    with the new debt level and the *old* policy intercept, which
    features slightly nonzero steady inflation.
    """

    Y: float
    Pi: float
    delta: float
    s: float
    x1: float
    x2: float
    p_star: float
    C: float
    L: float
    w: float
    gross_i: float
    gross_r: float

    def unknown_vector(self) -> np.ndarray:
        return np.array([self.Y, self.Pi, self.delta, self.s,
                         self.x1, self.x2, self.p_star])


def _anchor_from_steady_state(ss: SteadyState, calib: Calibration) -> TerminalAnchor:
    disc = 1.0 - calib.alpha / (1.0 + ss.r_bar)
    a = 1.0 / calib.sigma
    return TerminalAnchor(
        Y=ss.Y, Pi=1.0, delta=ss.delta, s=1.0,
        x1=ss.w * ss.Y ** a / disc, x2=ss.Y / disc, p_star=1.0,
        C=ss.C, L=ss.L, w=ss.w,
        gross_i=1.0 + ss.r_bar, gross_r=1.0 + ss.r_bar,
    )


def _stationary_residuals(YPi: np.ndarray, calib: Calibration,
                          b_prime: float, rule_gross: float,
                          rule_Y: float) -> np.ndarray:
    """Euler and reset-price residuals of the stationary system at (Y, Pi)."""
    c = calib
    Y, Pi = float(YPi[0]), float(YPi[1])
    a = 1.0 / c.sigma
    th_a = c.theta * a
    p_star = ((1.0 - c.alpha * Pi ** (c.theta - 1.0)) / (1.0 - c.alpha)) ** (
        1.0 / (1.0 - c.theta)
    )
    s = (1.0 - c.alpha) * p_star ** -th_a / (1.0 - c.alpha * Pi ** th_a)
    L = Y ** a * s
    C = Y
    if c.pref is PreferenceKind.LOG_LOG:
        w = c.eta * C / (1.0 - L)
    else:
        w = c.eta * L ** (c.epsilon - 1.0)
    gross_i = rule_gross * Pi ** c.phi_pi * (Y / rule_Y) ** c.phi_y
    gross_r = gross_i / Pi
    x1 = w * Y ** a / (1.0 - c.alpha * Pi ** (th_a + 1.0) / gross_i)
    x2 = Y / (1.0 - c.alpha * Pi ** c.theta / gross_i)
    wedge = 1.0 - c.q * c.beta  # V / delta = B' * (1 - q beta)
    if c.pref is PreferenceKind.LOG_LOG:
        m = (1.0 - c.q) / ((1.0 + c.eta) * c.q)
        euler = C + m * b_prime * wedge - c.beta * gross_r * C
    else:
        m = (1.0 - c.q) / c.q
        net = C - (c.eta / c.epsilon) * L ** c.epsilon
        euler = net + m * b_prime * wedge - c.beta * gross_r * net
    reset = p_star ** (1.0 + th_a - c.theta) * x2 - (
        c.theta / ((c.theta - 1.0) * c.sigma)
    ) * x1
    return np.array([euler, reset])


def _solve_terminal_anchor(calib: Calibration, initial: SteadyState,
                           b_prime_terminal: float) -> TerminalAnchor:
    """Long-run point under the unchanged policy intercept."""
    rule_gross = 1.0 + initial.r_bar
    rule_Y = initial.Y
    if abs(b_prime_terminal - initial.B_prime) < 1e-15:
        return _anchor_from_steady_state(initial, calib)

    sol = root(
        _stationary_residuals, np.array([initial.Y, 1.0]),
        args=(calib, b_prime_terminal, rule_gross, rule_Y),
        method="hybr",
    )
    if not sol.success:
        raise NoConvergence(
            0, float(np.abs(sol.fun).max()),
            message=f"terminal anchor solve failed: {sol.message}",
        )
    Y, Pi = sol.x
    # polish with finite-difference Newton steps to machine precision
    for _ in range(8):
        f0 = _stationary_residuals(np.array([Y, Pi]), calib, b_prime_terminal,
                                   rule_gross, rule_Y)
        if np.abs(f0).max() < 1e-14:
            break
        jac = np.empty((2, 2))
        for k, h in ((0, 1e-8 * max(1.0, abs(Y))), (1, 1e-8)):
            z = np.array([Y, Pi])
            z[k] += h
            jac[:, k] = (
                _stationary_residuals(z, calib, b_prime_terminal, rule_gross, rule_Y)
                - f0
            ) / h
        step = np.linalg.solve(jac, f0)
        Y, Pi = Y - step[0], Pi - step[1]

    c = calib
    a = 1.0 / c.sigma
    th_a = c.theta * a
    p_star = ((1.0 - c.alpha * Pi ** (c.theta - 1.0)) / (1.0 - c.alpha)) ** (
        1.0 / (1.0 - c.theta)
    )
    s = (1.0 - c.alpha) * p_star ** -th_a / (1.0 - c.alpha * Pi ** th_a)
    L = Y ** a * s
    C = Y
    w = c.eta * C / (1.0 - L) if c.pref is PreferenceKind.LOG_LOG else (
        c.eta * L ** (c.epsilon - 1.0)
    )
    gross_i = rule_gross * Pi ** c.phi_pi * (Y / rule_Y) ** c.phi_y
    if gross_i < 1.0:
        raise NoConvergence(
            0, gross_i - 1.0,
            message="terminal policy rate violates the zero bound; "
                    "the permanent plan is too contractionary",
        )
    gross_r = gross_i / Pi
    x1 = w * Y ** a / (1.0 - c.alpha * Pi ** (th_a + 1.0) / gross_i)
    x2 = Y / (1.0 - c.alpha * Pi ** c.theta / gross_i)
    delta = 1.0 / (1.0 - c.q * c.beta)
    return TerminalAnchor(Y=Y, Pi=Pi, delta=delta, s=s, x1=x1, x2=x2,
                          p_star=p_star, C=C, L=L, w=w,
                          gross_i=gross_i, gross_r=gross_r)


# ---------------------------------------------------------------------------
# Simulation path container
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SimulationPath:
    """Converged perfect-foresight path, one entry per period t = 1..T.

    ``terminal`` is the zero-inflation steady state consistent with the
    plan's long-run debt (the reporting anchor); ``anchor`` is the exact
    long-run point of the stacked system, which under a permanent plan
    additionally carries the slight steady inflation implied by the
    unchanged policy intercept.
    """

    calib: Calibration
    shocks: ShockSpec
    plan: FiscalPlan
    initial: SteadyState
    terminal: SteadyState
    anchor: TerminalAnchor
    track_natural_rate: bool
    Y: np.ndarray
    C: np.ndarray
    L: np.ndarray
    w: np.ndarray
    pi: np.ndarray        # gross inflation Pi_t
    i: np.ndarray         # net nominal rate, >= 0
    r: np.ndarray         # net real rate
    B_prime: np.ndarray   # debt inclusive of interest (exogenous)
    taxes: np.ndarray
    V: np.ndarray         # aggregate financial wealth (= B_prime)
    delta: np.ndarray
    xi: np.ndarray
    p_star: np.ndarray
    s: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    zlb: np.ndarray       # bool, bound binding in t

    @property
    def horizon(self) -> int:
        return len(self.Y)

    def output_deviation(self) -> np.ndarray:
        """Y_t / Y_initial - 1."""
        return self.Y / self.initial.Y - 1.0

    def debt_to_gdp_annualized(self) -> np.ndarray:
        return self.B_prime / (1.0 + self.r) / (4.0 * self.Y)

    def zlb_quarters(self) -> int:
        return int(self.zlb.sum())

    def to_csv(self) -> str:
        """Fixed-column CSV (net rates annualized as 4x quarterly)."""
        lines = [PATH_CSV_HEADER]
        by = self.debt_to_gdp_annualized()
        for j in range(self.horizon):
            lines.append(
                f"{j + 1},{self.Y[j]:.10g},{self.C[j]:.10g},{self.L[j]:.10g},"
                f"{4.0 * (self.pi[j] - 1.0):.10g},{4.0 * self.i[j]:.10g},"
                f"{4.0 * self.r[j]:.10g},{self.B_prime[j]:.10g},"
                f"{self.taxes[j]:.10g},{by[j]:.10g},{int(self.zlb[j])}"
            )
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Stacked system
# ---------------------------------------------------------------------------

_VY, _VPI, _VD, _VS, _VX1, _VX2, _VP = range(7)
_NVAR = 7


class _StackedSystem:
    """Residuals and Jacobian of the stacked 7-equation system."""

    def __init__(self, calib: Calibration, anchor: TerminalAnchor,
                 rule_gross: float, rule_Y: float,
                 xi: np.ndarray, b_prime: np.ndarray, g: np.ndarray,
                 s_initial: float, track_natural_rate: bool):
        self.calib = calib
        self.anchor = anchor
        T = len(b_prime)
        if len(xi) != T + 1:
            raise DimensionMismatch("xi must have length horizon + 1")
        if len(g) != T:
            raise DimensionMismatch("g must have length horizon")
        self.T = T
        self.xi_t = xi[:-1]
        self.xi_next = xi[1:]
        self.growth = self.xi_next / self.xi_t
        self.b_prime = b_prime
        self.g = g
        self.g_next = np.append(g[1:], 0.0)
        self.s_init = s_initial
        self.track = track_natural_rate
        self.rule_Y = rule_Y

        c = calib
        self.a = 1.0 / c.sigma
        self.theta_a = c.theta * self.a
        self.chi = 1.0 + self.theta_a - c.theta
        self.markup = c.theta / ((c.theta - 1.0) * c.sigma)
        if c.pref is PreferenceKind.LOG_LOG:
            self.m_wealth = (1.0 - c.q) / ((1.0 + c.eta) * c.q)
        else:
            self.m_wealth = (1.0 - c.q) / c.q
        if track_natural_rate:
            self.rule_const = rule_gross * self.xi_t / self.xi_next
        else:
            self.rule_const = np.full(T, rule_gross)

    # -- pieces -----------------------------------------------------------

    def steady_guess(self) -> np.ndarray:
        return np.tile(self.anchor.unknown_vector(), (self.T, 1))

    def shadow_rate(self, X: np.ndarray) -> np.ndarray:
        """Gross shadow policy rate (the rule before the bound)."""
        c = self.calib
        Y, Pi = X[:, _VY], X[:, _VPI]
        return self.rule_const * Pi ** c.phi_pi * (Y / self.rule_Y) ** c.phi_y

    def _wage(self, Y, s):
        c = self.calib
        L = Y ** self.a * s
        C = Y - self.g
        if c.pref is PreferenceKind.LOG_LOG:
            w = c.eta * C / (1.0 - L)
        else:
            w = c.eta * L ** (c.epsilon - 1.0)
        return L, C, w

    def _leads(self, X: np.ndarray):
        an = self.anchor
        Y1 = np.append(X[1:, _VY], an.Y)
        Pi1 = np.append(X[1:, _VPI], an.Pi)
        dl1 = np.append(X[1:, _VD], an.delta)
        s1 = np.append(X[1:, _VS], an.s)
        x11 = np.append(X[1:, _VX1], an.x1)
        x21 = np.append(X[1:, _VX2], an.x2)
        return Y1, Pi1, dl1, s1, x11, x21

    def residuals(self, X: np.ndarray, binding: np.ndarray) -> np.ndarray:
        c = self.calib
        T = self.T
        Y, Pi, dl, s, x1, x2, ps = (X[:, k] for k in range(_NVAR))
        Y1, Pi1, dl1, s1, x11, x21 = self._leads(X)
        s_lag = np.concatenate(([self.s_init], s[:-1]))

        L, C, w = self._wage(Y, s)
        C1 = Y1 - self.g_next
        one_i = np.where(binding, 1.0, self.shadow_rate(X))
        one_r = one_i / Pi1

        R = np.empty((T, _NVAR))
        if c.pref is PreferenceKind.LOG_LOG:
            R[:, 0] = (C1 + self.m_wealth * self.b_prime / dl1
                       - c.beta * self.growth * one_r * C)
        else:
            ed = c.eta / c.epsilon
            L1 = Y1 ** self.a * s1
            net = C - ed * L ** c.epsilon
            net1 = C1 - ed * L1 ** c.epsilon
            R[:, 0] = (net1 + self.m_wealth * self.b_prime / dl1
                       - c.beta * self.growth * one_r * net)
        R[:, 1] = dl - 1.0 - c.q * c.beta * self.growth * dl1
        R[:, 2] = x1 - w * Y ** self.a - c.alpha * Pi1 ** (self.theta_a + 1.0) * x11 / one_i
        R[:, 3] = x2 - Y - c.alpha * Pi1 ** c.theta * x21 / one_i
        R[:, 4] = ps ** self.chi * x2 - self.markup * x1
        R[:, 5] = c.alpha * Pi ** (c.theta - 1.0) + (1.0 - c.alpha) * ps ** (1.0 - c.theta) - 1.0
        R[:, 6] = s - c.alpha * Pi ** self.theta_a * s_lag - (1.0 - c.alpha) * ps ** -self.theta_a
        return R

    def jacobian(self, X: np.ndarray, binding: np.ndarray) -> sp.csc_matrix:
        c = self.calib
        T = self.T
        Y, Pi, dl, s, x1, x2, ps = (X[:, k] for k in range(_NVAR))
        Y1, Pi1, dl1, s1, x11, x21 = self._leads(X)
        s_lag = np.concatenate(([self.s_init], s[:-1]))

        L, C, w = self._wage(Y, s)
        one_i = np.where(binding, 1.0, self.shadow_rate(X))
        one_r = one_i / Pi1
        nb = (~binding).astype(float)  # rule-response terms vanish when binding

        a, th_a, chi = self.a, self.theta_a, self.chi
        dLdY = a * Y ** (a - 1.0) * s
        dLds = Y ** a
        if c.pref is PreferenceKind.LOG_LOG:
            one_m_L = 1.0 - L
            dwdY = c.eta * (one_m_L + C * dLdY) / one_m_L ** 2
            dwds = c.eta * C * dLds / one_m_L ** 2
        else:
            dwdY = c.eta * (c.epsilon - 1.0) * L ** (c.epsilon - 2.0) * dLdY
            dwds = c.eta * (c.epsilon - 1.0) * L ** (c.epsilon - 2.0) * dLds

        entries: list[tuple[int, int, int, np.ndarray]] = []  # (eq, var, off, vals)

        bXi = c.beta * self.growth
        if c.pref is PreferenceKind.LOG_LOG:
            entries += [
                (0, _VY, 0, -bXi * one_r * (1.0 + c.phi_y * C / Y * nb)),
                (0, _VPI, 0, -bXi * C * c.phi_pi * one_r / Pi * nb),
                (0, _VY, 1, np.ones(T)),
                (0, _VPI, 1, bXi * C * one_r / Pi1),
                (0, _VD, 1, -self.m_wealth * self.b_prime / dl1 ** 2),
            ]
        else:
            ed = c.eta / c.epsilon
            L1 = Y1 ** a * s1
            net = C - ed * L ** c.epsilon
            dnetdY = 1.0 - c.eta * L ** (c.epsilon - 1.0) * dLdY
            dnetds = -c.eta * L ** (c.epsilon - 1.0) * dLds
            dnet1dY1 = 1.0 - c.eta * L1 ** (c.epsilon - 1.0) * a * Y1 ** (a - 1.0) * s1
            dnet1ds1 = -c.eta * L1 ** (c.epsilon - 1.0) * Y1 ** a
            entries += [
                (0, _VY, 0, -bXi * (one_r * dnetdY + net * c.phi_y * one_r / Y * nb)),
                (0, _VS, 0, -bXi * one_r * dnetds),
                (0, _VPI, 0, -bXi * net * c.phi_pi * one_r / Pi * nb),
                (0, _VY, 1, dnet1dY1),
                (0, _VS, 1, dnet1ds1),
                (0, _VPI, 1, bXi * net * one_r / Pi1),
                (0, _VD, 1, -self.m_wealth * self.b_prime / dl1 ** 2),
            ]

        entries += [
            (1, _VD, 0, np.ones(T)),
            (1, _VD, 1, -c.q * c.beta * self.growth),
        ]

        Q3 = c.alpha * Pi1 ** (th_a + 1.0) * x11 / one_i
        entries += [
            (2, _VX1, 0, np.ones(T)),
            (2, _VY, 0, -(dwdY * Y ** a + w * a * Y ** (a - 1.0)) + Q3 * c.phi_y / Y * nb),
            (2, _VS, 0, -dwds * Y ** a),
            (2, _VPI, 0, Q3 * c.phi_pi / Pi * nb),
            (2, _VPI, 1, -Q3 * (th_a + 1.0) / Pi1),
            (2, _VX1, 1, -c.alpha * Pi1 ** (th_a + 1.0) / one_i),
        ]

        Q4 = c.alpha * Pi1 ** c.theta * x21 / one_i
        entries += [
            (3, _VX2, 0, np.ones(T)),
            (3, _VY, 0, -1.0 + Q4 * c.phi_y / Y * nb),
            (3, _VPI, 0, Q4 * c.phi_pi / Pi * nb),
            (3, _VPI, 1, -Q4 * c.theta / Pi1),
            (3, _VX2, 1, -c.alpha * Pi1 ** c.theta / one_i),
        ]

        entries += [
            (4, _VP, 0, chi * ps ** (chi - 1.0) * x2),
            (4, _VX2, 0, ps ** chi),
            (4, _VX1, 0, np.full(T, -self.markup)),
            (5, _VPI, 0, c.alpha * (c.theta - 1.0) * Pi ** (c.theta - 2.0)),
            (5, _VP, 0, (1.0 - c.alpha) * (1.0 - c.theta) * ps ** -c.theta),
            (6, _VS, 0, np.ones(T)),
            (6, _VPI, 0, -c.alpha * th_a * Pi ** (th_a - 1.0) * s_lag),
            (6, _VP, 0, (1.0 - c.alpha) * th_a * ps ** (-th_a - 1.0)),
            (6, _VS, -1, -c.alpha * Pi ** th_a),
        ]

        rows, cols, vals = [], [], []
        periods = np.arange(T)
        for eq, var, off, v in entries:
            if off == 0:
                j = periods
            elif off == 1:
                j = periods[:-1]
                v = v[:-1]
            else:
                j = periods[1:]
                v = v[1:]
            rows.append(_NVAR * j + eq)
            cols.append(_NVAR * (j + off) + var)
            vals.append(v)
        mat = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(_NVAR * T, _NVAR * T),
        )
        return mat.tocsc()

    # -- Newton -------------------------------------------------------------

    def _valid(self, X: np.ndarray) -> bool:
        if (X <= 0.0).any():
            return False
        if self.calib.pref is PreferenceKind.LOG_LOG:
            L = X[:, _VY] ** self.a * X[:, _VS]
            if (L >= 1.0).any():
                return False
        return True

    def newton(self, X: np.ndarray, binding: np.ndarray,
               tol: float = NEWTON_TOL, max_iter: int = MAX_NEWTON_ITER) -> np.ndarray:
        R = self.residuals(X, binding)
        norm = float(np.abs(R).max())
        for iteration in range(max_iter):
            if norm < tol:
                return X
            J = self.jacobian(X, binding)
            step = spla.spsolve(J, R.ravel()).reshape(self.T, _NVAR)
            lam = 1.0
            accepted = False
            for _ in range(MAX_BACKTRACK + 1):
                X_new = X - lam * step
                if self._valid(X_new):
                    R_new = self.residuals(X_new, binding)
                    norm_new = float(np.abs(R_new).max())
                    if math.isfinite(norm_new) and (norm_new < norm or norm_new < tol):
                        accepted = True
                        break
                lam *= 0.5
            if not accepted:
                raise NoConvergence(iteration, norm, best=X)
            X, R, norm = X_new, R_new, norm_new
        if norm < tol:
            return X
        raise NoConvergence(max_iter, norm, best=X)

    def solve(self, X0: np.ndarray | None = None,
              tol: float = NEWTON_TOL) -> tuple[np.ndarray, np.ndarray]:
        """Active-set iteration over ZLB binding patterns."""
        X = self.steady_guess() if X0 is None else X0.copy()
        binding = np.zeros(self.T, dtype=bool)
        seen = {binding.tobytes()}
        for _ in range(MAX_REGIME_ITER):
            X = self.newton(X, binding, tol=tol)
            shadow = self.shadow_rate(X)
            new_binding = shadow < 1.0 - 1e-12
            if np.array_equal(new_binding, binding):
                return X, binding
            key = new_binding.tobytes()
            if key in seen:
                raise RegimeCycleDetected(
                    "ZLB active-set iteration revisited a binding pattern"
                )
            seen.add(key)
            binding = new_binding
        raise RegimeCycleDetected(
            f"ZLB active-set iteration exceeded {MAX_REGIME_ITER} rounds"
        )


# ---------------------------------------------------------------------------
# Public entry points
# ---------------------------------------------------------------------------

def solve_path(calib: Calibration, shocks: ShockSpec | None = None,
               plan: FiscalPlan | None = None, horizon: int = 200,
               track_natural_rate: bool = True,
               tol: float = NEWTON_TOL) -> SimulationPath:
    """Solve the nonlinear model under perfect foresight over ``horizon``.

    The terminal condition is the initial steady state (NONE/TEMPORARY
    plans) or the long-run point with the plan's permanent debt level
    (PERMANENT).  The horizon must leave room for the transition: at
    least recession_length + 40 periods.  Raises NoConvergence if Newton
    stalls or the path has not settled at the terminal point by t = T,
    and RegimeCycleDetected if the bound pattern oscillates.
    """
    shocks = ShockSpec.none() if shocks is None else shocks
    plan = FiscalPlan.none() if plan is None else plan
    if horizon < shocks.recession_length + 40:
        raise ValueError("horizon must be at least recession_length + 40")
    if calib.eta is None:
        calib = calib.with_eta_pinned()
    if len(shocks.xi_path) > horizon:
        raise DimensionMismatch(
            f"shock path length {len(shocks.xi_path)} exceeds horizon {horizon}"
        )

    initial = solve_steady_state(calib)
    _, terminal = terminal_steady_state(calib, plan, initial)
    xi = shocks.xi_levels(horizon)
    b_prime = plan.debt_path(initial, horizon)
    g = plan.spending_path(initial, horizon)
    if plan.kind is PlanKind.PERMANENT:
        anchor = _solve_terminal_anchor(calib, initial, float(b_prime[-1]))
    else:
        anchor = _anchor_from_steady_state(initial, calib)

    system = _StackedSystem(calib, anchor, 1.0 + initial.r_bar, initial.Y,
                            xi, b_prime, g, s_initial=1.0,
                            track_natural_rate=track_natural_rate)
    X, binding = system.solve(tol=tol)

    # terminal closeness check (relative, per unknown)
    rel = np.abs(X[-1] / anchor.unknown_vector() - 1.0)
    if rel.max() > 1e-6:
        raise NoConvergence(
            0, rel.max(), best=X,
            message=(
                f"path has not settled at the terminal anchor by t={horizon} "
                f"(max relative deviation {rel.max():.3e}); extend the horizon"
            ),
        )

    Y, Pi, dl, s, x1, x2, ps = (X[:, k] for k in range(_NVAR))
    L = Y ** system.a * s
    C = Y - g
    if calib.pref is PreferenceKind.LOG_LOG:
        w = calib.eta * C / (1.0 - L)
    else:
        w = calib.eta * L ** (calib.epsilon - 1.0)
    one_i = np.where(binding, 1.0, system.shadow_rate(X))
    Pi1 = np.append(Pi[1:], anchor.Pi)
    one_r = one_i / Pi1
    b_lag = np.concatenate(([initial.B_prime], b_prime[:-1]))
    taxes = g - b_prime / one_r + b_lag

    return SimulationPath(
        calib=calib, shocks=shocks, plan=plan,
        initial=initial, terminal=terminal, anchor=anchor,
        track_natural_rate=track_natural_rate,
        Y=Y, C=C, L=L, w=w, pi=Pi, i=one_i - 1.0, r=one_r - 1.0,
        B_prime=b_prime.copy(), taxes=taxes, V=b_prime.copy(),
        delta=dl, xi=system.xi_t.copy(), p_star=ps, s=s, x1=x1, x2=x2,
        zlb=binding.copy(),
    )


def residuals(path: SimulationPath, calib: Calibration | None = None,
              shocks: ShockSpec | None = None, plan: FiscalPlan | None = None,
              terminal: SteadyState | None = None) -> np.ndarray:
    """Stacked residual vector of every model equation along a path.

    Thirteen equations per period (see EQUATION_NAMES), evaluated from
    the stored arrays only -- independent of how the path was produced.
    All residuals are exactly zero on a constant steady-state path and
    below the solver tolerance on any converged path.
    """
    table = residual_table(path, calib=calib, shocks=shocks, plan=plan,
                           terminal=terminal)
    return np.concatenate([table[name] for name in EQUATION_NAMES])


def residual_table(path: SimulationPath, calib: Calibration | None = None,
                   shocks: ShockSpec | None = None,
                   plan: FiscalPlan | None = None,
                   terminal: SteadyState | None = None) -> dict[str, np.ndarray]:
    """Residuals keyed by equation name (each an array over periods).

    Leads at t = T come from the path's stored terminal anchor; passing
    ``terminal`` overrides them with a zero-inflation steady state
    (exact for NONE/TEMPORARY plans).
    """
    c = path.calib if calib is None else calib
    if c.eta is None:
        raise ValueError("calibration must have eta pinned")
    shocks = path.shocks if shocks is None else shocks
    plan = path.plan if plan is None else plan
    anchor = path.anchor if terminal is None else _anchor_from_steady_state(terminal, c)
    T = path.horizon
    if len(shocks.xi_path) > T:
        raise DimensionMismatch(
            f"shock path length {len(shocks.xi_path)} exceeds path horizon {T}"
        )

    a = 1.0 / c.sigma
    th_a = c.theta * a
    xi = shocks.xi_levels(T)
    growth = xi[1:] / xi[:-1]

    Y, Pi, dl, s = path.Y, path.pi, path.delta, path.s
    x1, x2, ps = path.x1, path.x2, path.p_star
    C, L, w = path.C, path.L, path.w
    one_i, one_r = 1.0 + path.i, 1.0 + path.r
    bp = path.B_prime
    g = plan.spending_path(path.initial, T)

    C1 = np.append(C[1:], anchor.C)
    L1 = np.append(L[1:], anchor.L)
    dl1 = np.append(dl[1:], anchor.delta)
    Pi1 = np.append(Pi[1:], anchor.Pi)
    x11 = np.append(x1[1:], anchor.x1)
    x21 = np.append(x2[1:], anchor.x2)
    s_lag = np.concatenate(([1.0], s[:-1]))
    bp_lag = np.concatenate(([path.initial.B_prime], bp[:-1]))

    out: dict[str, np.ndarray] = {}
    if c.pref is PreferenceKind.LOG_LOG:
        out["labor_supply"] = w * (1.0 - L) - c.eta * C
        m = (1.0 - c.q) / ((1.0 + c.eta) * c.q)
        out["euler"] = C1 + m * path.V / dl1 - c.beta * one_r * growth * C
    else:
        out["labor_supply"] = w - c.eta * L ** (c.epsilon - 1.0)
        ed = c.eta / c.epsilon
        m = (1.0 - c.q) / c.q
        out["euler"] = (
            (C1 - ed * L1 ** c.epsilon) + m * path.V / dl1
            - c.beta * one_r * growth * (C - ed * L ** c.epsilon)
        )
    out["delta"] = dl - 1.0 - c.q * c.beta * growth * dl1
    out["x1"] = x1 - w * Y ** a - c.alpha * Pi1 ** th_a * x11 / one_r
    out["x2"] = x2 - Y - c.alpha * Pi1 ** (c.theta - 1.0) * x21 / one_r
    out["reset_price"] = ps ** (1.0 + th_a - c.theta) * x2 - (
        c.theta / ((c.theta - 1.0) * c.sigma)
    ) * x1
    out["price_index"] = (
        c.alpha * Pi ** (c.theta - 1.0) + (1.0 - c.alpha) * ps ** (1.0 - c.theta) - 1.0
    )
    out["dispersion"] = s - c.alpha * Pi ** th_a * s_lag - (1.0 - c.alpha) * ps ** -th_a
    out["production"] = L - Y ** a * s
    out["market_clearing"] = Y - C - g
    out["government_budget"] = (g - path.taxes) - (bp / one_r - bp_lag)
    rule_gross = 1.0 + path.initial.r_bar
    if path.track_natural_rate:
        shadow = rule_gross * (xi[:-1] / xi[1:]) * Pi ** c.phi_pi * (
            Y / path.initial.Y
        ) ** c.phi_y
    else:
        shadow = rule_gross * Pi ** c.phi_pi * (Y / path.initial.Y) ** c.phi_y
    out["policy_rule"] = one_i - np.maximum(1.0, shadow)
    out["fisher"] = one_r * Pi1 - one_i
    return out


def walras_residual(path: SimulationPath) -> np.ndarray:
    """Aggregate household budget residual (the redundant equation).

    Households' budget plus firm profits plus the government budget
    imply goods-market clearing; with profits D = Y - w L and bonds
    B = B'/(1+r), the residual below must vanish on any internally
    consistent path.
    """
    D = path.Y - path.w * path.L
    B = path.B_prime / (1.0 + path.r)
    B_lag = np.concatenate(
        ([path.initial.B_prime / (1.0 + path.initial.r_bar)], B[:-1])
    )
    r_lag = np.concatenate(([path.initial.r_bar], path.r[:-1]))
    return (
        path.C + B - (1.0 + r_lag) * B_lag - path.w * path.L - D + path.taxes
    )
