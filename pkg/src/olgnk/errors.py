"""Exception types shared across the toolkit.

Every error a caller may want to handle programmatically derives from
``DomainError``; the CLI maps these to exit code 1 and prints the class
name plus context.
"""


class DomainError(Exception):
    """Base class for all model/data errors raised by this package."""


class NonpositiveDenominator(DomainError):
    """The steady-state rate formula's denominator is <= 0: the requested
    debt level is infeasible for the given preference parameters."""


class IndeterminateSystem(DomainError):
    """The two-state linear system is singular or violates the determinacy
    condition for the requested regime and persistence."""


class DimensionMismatch(DomainError):
    """Array lengths of a path, shock spec or fiscal plan are inconsistent."""


class NoConvergence(DomainError):
    """The stacked Newton solver failed to reach the residual tolerance.

    Carries the iteration count, the best residual norm reached, and the
    best iterate (raw unknown matrix) for post-mortem inspection.
    """

    def __init__(self, iterations, residual, best=None, message=None):
        if message is None:
            message = (
                f"no convergence after {iterations} iterations "
                f"(best max residual {residual:.3e})"
            )
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual
        self.best = best


class RegimeCycleDetected(DomainError):
    """The zero-lower-bound active-set iteration revisited a binding
    pattern without converging."""


class BracketFailure(DomainError):
    """Shock-size root finding could not bracket the target."""


class ParseError(DomainError):
    """A data file failed validation; the message names the offending row."""


class EmptyPanel(DomainError):
    """The country panel contains no observations."""


class DegenerateDesign(DomainError):
    """The regression design matrix is rank deficient (all debt ratios
    equal, or fewer than two observations)."""


class NoRoot(DomainError):
    """The two-parameter calibration system has no solution in the unit
    box; carries the final residuals."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
