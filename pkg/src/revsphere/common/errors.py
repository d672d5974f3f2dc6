"""Exception types raised by the numerical kernels and geometry modules."""

from typing import Any


class DomainError(ValueError):
    """A parameter lies outside the domain of the requested construction."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature did not converge within the subdivision budget."""

    def __init__(
        self, message: str, value: float, err_estimate: float, evaluations: int
    ):
        super().__init__(message)
        self.value = value
        self.err_estimate = err_estimate
        self.evaluations = evaluations


class SingularityOrderError(ValueError):
    """The integrand is stronger than an inverse square root at the endpoint."""


class OutOfRangeError(ValueError):
    """The requested value is not attained on the bracket."""


class MonotonicityError(ValueError):
    """A function assumed strictly monotone was sampled non-monotone."""


class EvaluationError(ValueError):
    """A function returned a non-finite value."""


class IntegrationError(RuntimeError):
    """The ODE integrator stopped before reaching the end of the span."""

    def __init__(self, message: str, last_s: float, last_state: Any):
        super().__init__(message)
        self.last_s = last_s
        self.last_state = last_state


class NearPoleError(ValueError):
    """The evaluation point is too close to a pole for the requested formula."""


class CriterionInapplicableError(ValueError):
    """The monotonicity criterion requires m' > 0 on (0, pi/2)."""


class NotFoundError(LookupError):
    """A threshold scan found no admissible value within its budget."""


class UnreachableError(RuntimeError):
    """No geodesic of the fan approaches the target point."""
