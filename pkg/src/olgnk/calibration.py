"""Model parameterization.

``Calibration`` is the single source of truth for every formula in the
package: steady states, analytic multipliers, determinacy conditions and
the nonlinear simulations all read from it.  Instances are immutable;
derive variants with :func:`dataclasses.replace` or the helpers below.

The labor-disutility weight ``eta`` may be left unset (``None``) and
pinned afterwards from the steady-state hours target ``L_bar`` via
:func:`pin_eta`, which is how the quarterly baseline is built.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, replace
from typing import Any


class PreferenceKind(enum.Enum):
    """Household utility specification.

    LOG_LOG: separable log consumption / log leisure utility, with a
    wealth effect on labor supply.  GHH: utility over consumption net of
    labor disutility, which removes that wealth effect.
    """

    LOG_LOG = "loglog"
    GHH = "ghh"

    @classmethod
    def parse(cls, value: "PreferenceKind | str") -> "PreferenceKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        if key in ("loglog", "log"):
            return cls.LOG_LOG
        if key == "ghh":
            return cls.GHH
        raise ValueError(f"unknown preference kind: {value!r}")


@dataclass(frozen=True)
class Calibration:
    """Structural parameters, quarterly frequency.

    Defaults reproduce the benchmark quarterly calibration with log-log
    preferences and a 60% annualized debt-to-GDP ratio (2.4 quarterly).
    """

    beta: float = 0.998          # subjective discount factor
    q: float = 0.9512            # per-quarter survival probability
    theta: float = 6.0           # elasticity of substitution between goods
    epsilon: float = 2.0         # inverse labor-supply elasticity (GHH only)
    alpha: float = 0.75          # probability of keeping the price fixed
    sigma: float = 1.0           # output elasticity of labor
    phi_pi: float = 2.0          # policy-rule inflation response
    phi_y: float = 0.125         # policy-rule output response
    debt_to_gdp: float = 2.4     # steady-state B/Y, quarterly basis
    eta: float | None = None     # labor-disutility weight; pin with pin_eta
    L_bar: float = 0.3           # steady-state hours target
    pref: PreferenceKind = PreferenceKind.LOG_LOG

    def __post_init__(self):
        object.__setattr__(self, "pref", PreferenceKind.parse(self.pref))
        checks = [
            (0.0 < self.beta < 1.0, "beta must lie in (0, 1)"),
            (0.0 < self.q <= 1.0, "q must lie in (0, 1]"),
            (self.theta > 1.0, "theta must exceed 1"),
            (self.epsilon > 1.0, "epsilon must exceed 1"),
            (0.0 <= self.alpha < 1.0, "alpha must lie in [0, 1)"),
            (0.0 < self.sigma <= 1.0, "sigma must lie in (0, 1]"),
            (self.phi_pi >= 0.0, "phi_pi must be nonnegative"),
            (self.phi_y >= 0.0, "phi_y must be nonnegative"),
            (self.debt_to_gdp >= 0.0, "debt_to_gdp must be nonnegative"),
            (0.0 < self.L_bar < 1.0, "L_bar must lie in (0, 1)"),
            (self.eta is None or self.eta > 0.0, "eta must be positive"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)
        # Fail construction early when the steady-state rate denominator is
        # already known to be nonpositive (debt too large for parameters).
        # The log-log check needs eta, so it runs once eta is set.
        if self.rate_denominator() is not None and self.rate_denominator() <= 0.0:
            from .errors import NonpositiveDenominator

            raise NonpositiveDenominator(
                f"steady-state rate denominator is {self.rate_denominator():.6g} "
                f"<= 0 at debt_to_gdp={self.debt_to_gdp}"
            )

    # -- steady-state rate plumbing ------------------------------------

    def rate_denominator(self) -> float | None:
        """Denominator of the closed-form steady-state rate, or None when
        eta is required (log-log) but not yet pinned."""
        if self.pref is PreferenceKind.LOG_LOG:
            if self.eta is None:
                return None
            return self.beta * self.q * (1.0 + self.eta) - (1.0 - self.q) * (
                1.0 - self.beta * self.q
            ) * self.debt_to_gdp
        scale = self.epsilon * self.theta - self.sigma * (self.theta - 1.0)
        return self.q * scale - self.epsilon * self.theta * (1.0 - self.q) * (
            1.0 / self.beta - self.q
        ) * self.debt_to_gdp

    # -- convenience constructors ---------------------------------------

    def with_eta_pinned(self) -> "Calibration":
        """Return a copy with eta set from the hours target L_bar."""
        return replace(self, eta=pin_eta(self))

    def replace(self, **changes: Any) -> "Calibration":
        return replace(self, **changes)

    # -- JSON (flat object, exact field names, unknown keys rejected) ---

    _FIELDS = (
        "beta", "q", "theta", "epsilon", "alpha", "sigma",
        "phi_pi", "phi_y", "debt_to_gdp", "eta", "L_bar", "pref",
    )

    def to_dict(self) -> dict:
        out = {name: getattr(self, name) for name in self._FIELDS}
        out["pref"] = self.pref.value
        return out

    def to_json(self, **kwargs: Any) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "Calibration":
        unknown = sorted(set(data) - set(cls._FIELDS))
        if unknown:
            raise ValueError(f"unknown Calibration keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> "Calibration":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("Calibration JSON must be a flat object")
        return cls.from_dict(data)


def baseline_loglog() -> Calibration:
    """Benchmark log-log calibration with eta pinned from L_bar."""
    return Calibration().with_eta_pinned()


def baseline_ghh() -> Calibration:
    """Benchmark GHH calibration (survival probability 0.9785)."""
    return Calibration(q=0.9785, pref=PreferenceKind.GHH).with_eta_pinned()


def pin_eta(calib: Calibration) -> float:
    """Labor-disutility weight that puts steady-state hours at L_bar.

    At the zero-inflation steady state real marginal cost equals
    (theta-1)/theta, so the real wage is w = ((theta-1)/theta) * sigma *
    L_bar**(sigma-1).  Inverting the aggregate labor-supply condition
    gives eta = w * (1 - L_bar) / C with C = L_bar**sigma under log-log
    preferences, and eta = w * L_bar**(1-epsilon) under GHH.
    """
    w = (calib.theta - 1.0) / calib.theta * calib.sigma * calib.L_bar ** (
        calib.sigma - 1.0
    )
    if calib.pref is PreferenceKind.LOG_LOG:
        consumption = calib.L_bar ** calib.sigma
        return w * (1.0 - calib.L_bar) / consumption
    return w * calib.L_bar ** (1.0 - calib.epsilon)


def steady_state_hours(calib: Calibration) -> float:
    """Hours implied by eta at the zero-inflation steady state.

    Closed forms from combining labor supply with the flexible-markup
    wage: log-log gives L = M / (eta + M) and GHH gives
    L = (M / eta)**(1/(epsilon - sigma)), where
    M = ((theta-1)/theta) * sigma.  When eta was pinned via
    :func:`pin_eta` this returns L_bar exactly.
    """
    if calib.eta is None:
        raise ValueError("eta is not set; call pin_eta / with_eta_pinned first")
    markup_wage = (calib.theta - 1.0) / calib.theta * calib.sigma
    if calib.pref is PreferenceKind.LOG_LOG:
        return markup_wage / (calib.eta + markup_wage)
    return math.exp(
        math.log(markup_wage / calib.eta) / (calib.epsilon - calib.sigma)
    )
