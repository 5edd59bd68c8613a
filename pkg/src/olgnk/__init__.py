"""Solver toolkit for an overlapping-generations New Keynesian model.

Computes steady states with an endogenous, debt-dependent real interest
rate, closed-form debt and spending multipliers with their determinacy
regions, nonlinear perfect-foresight simulations with an occasionally
binding zero lower bound, and the cross-country calibration of the
discount factor and survival probability from debt/real-rate data.
"""

from .calibration import (
    Calibration,
    PreferenceKind,
    baseline_ghh,
    baseline_loglog,
    pin_eta,
    steady_state_hours,
)
from .empirics import (
    CountryObservation,
    FittedLine,
    calibrate_beta_q,
    fit_line,
    load_panel,
)
from .errors import (
    BracketFailure,
    DegenerateDesign,
    DimensionMismatch,
    DomainError,
    EmptyPanel,
    IndeterminateSystem,
    NoConvergence,
    NonpositiveDenominator,
    NoRoot,
    ParseError,
    RegimeCycleDetected,
)
from .experiments import (
    MultiplierReport,
    calibrate_shock,
    debt_level_experiment,
    debt_multiplier_experiment,
)
from .linear import (
    Instrument,
    LinearCoefficients,
    Regime,
    ShortRunState,
    SweepRow,
    TwoStateSolution,
    analytic_multiplier,
    check_determinacy,
    determinacy_threshold,
    solve_two_state,
    sweep_multiplier,
)
from .simulation import (
    FiscalPlan,
    PlanKind,
    ShockSpec,
    SimulationPath,
    residuals,
    solve_path,
)
from .steady_state import (
    SteadyState,
    annualize_rate,
    solve_steady_state,
    steady_state_rate,
)

__version__ = "0.1.0"

__all__ = [
    "BracketFailure",
    "Calibration",
    "CountryObservation",
    "DegenerateDesign",
    "DimensionMismatch",
    "DomainError",
    "EmptyPanel",
    "FiscalPlan",
    "FittedLine",
    "IndeterminateSystem",
    "Instrument",
    "LinearCoefficients",
    "MultiplierReport",
    "NoConvergence",
    "NonpositiveDenominator",
    "NoRoot",
    "ParseError",
    "PlanKind",
    "PreferenceKind",
    "Regime",
    "RegimeCycleDetected",
    "ShockSpec",
    "ShortRunState",
    "SimulationPath",
    "SteadyState",
    "SweepRow",
    "TwoStateSolution",
    "analytic_multiplier",
    "annualize_rate",
    "baseline_ghh",
    "baseline_loglog",
    "calibrate_beta_q",
    "calibrate_shock",
    "check_determinacy",
    "debt_level_experiment",
    "debt_multiplier_experiment",
    "determinacy_threshold",
    "fit_line",
    "load_panel",
    "pin_eta",
    "residuals",
    "solve_path",
    "solve_steady_state",
    "solve_two_state",
    "steady_state_hours",
    "steady_state_rate",
    "sweep_multiplier",
]
