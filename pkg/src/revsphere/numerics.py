"""Shared numerical kernels.

Thin, validated wrappers around scipy's quadrature, ODE, root-finding and
minimisation routines, plus the square-root endpoint transform used by every
Clairaut-type integral in the geometry modules.
"""

import logging
import math
import warnings

from collections.abc import Callable, Sequence
from typing import Literal

import numpy as np

from scipy import integrate, optimize

from revsphere.common.errors import (
    EvaluationError,
    IntegrationError,
    MonotonicityError,
    OutOfRangeError,
    QuadratureError,
    SingularityOrderError,
)
from revsphere.common.types import Interval, QuadResult, Trajectory


logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
SUBDIVISION_LIMIT = 2**15
MONOTONE_PROBES = 9


def _as_interval(iv: Interval | tuple[float, float]) -> tuple[Interval, float]:
    """Normalise iv, returning the ordered interval and the orientation sign."""
    if isinstance(iv, Interval):
        return iv, 1.0
    lo, hi = (float(v) for v in iv)
    if lo > hi:
        return Interval(lo=hi, hi=lo), -1.0
    return Interval(lo=lo, hi=hi), 1.0


def integrate_adaptive(
    f: Callable[[float], float],
    iv: Interval | tuple[float, float],
    tol: float = DEFAULT_TOL,
    limit: int = SUBDIVISION_LIMIT,
) -> QuadResult:
    """Adaptive Gauss-Kronrod quadrature of f over iv.

    A tuple (lo, hi) with lo > hi integrates in the reversed orientation and
    negates the value.

    Raises:
        QuadratureError: if the subdivision budget is exhausted; the error
            carries the best estimate.
    """
    if not tol > 0:
        raise ValueError(f'tol must be positive, got {tol}')
    interval, sign = _as_interval(iv)
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', integrate.IntegrationWarning)
        result = integrate.quad(
            f,
            interval.lo,
            interval.hi,
            epsabs=tol,
            epsrel=0.0,
            limit=limit,
            full_output=1,
        )
    value, err, info = result[:3]
    converged = len(result) == 3
    evaluations = max(1, int(info.get('neval', 1)))
    if not math.isfinite(value):
        raise EvaluationError(
            f'Integrand produced non-finite values on [{interval.lo}, {interval.hi}]'
        )
    if not converged and err > tol:
        logger.debug(f'quad: {result[3]}')
        raise QuadratureError(
            f'Quadrature did not reach tol={tol:g} (estimate {err:g})',
            value=sign * value,
            err_estimate=abs(err),
            evaluations=evaluations,
        )
    return QuadResult(
        value=sign * value, err_estimate=abs(err), evaluations=evaluations
    )


def integrate_sqrt_singular(
    g: Callable[[float], float],
    iv: Interval | tuple[float, float],
    singular_at: Literal['lo', 'hi'] = 'lo',
    tol: float = DEFAULT_TOL,
) -> QuadResult:
    """Integrate g(x)/sqrt(x - lo) (or g(x)/sqrt(hi - x)) over iv.

    The substitution x = lo + t**2 (resp. hi - t**2) turns the integrand into
    2*g(x(t)), which is bounded when g is finite at the singular endpoint.

    Raises:
        SingularityOrderError: if the transformed integrand blows up at t=0.
    """
    interval, _ = _as_interval(iv)
    root = math.sqrt(interval.width)
    if singular_at == 'lo':
        def transformed(t: float) -> float:
            return 2.0 * g(interval.lo + t * t)
    elif singular_at == 'hi':
        def transformed(t: float) -> float:
            return 2.0 * g(interval.hi - t * t)
    else:
        raise ValueError(f"singular_at must be 'lo' or 'hi', got {singular_at!r}")

    near = abs(transformed(root * 1e-6))
    far = abs(transformed(root * 1e-4))
    if not (math.isfinite(near) and math.isfinite(far)) or near > 5.0 * (1.0 + far):
        raise SingularityOrderError(
            f'Integrand is more singular than an inverse square root at {singular_at}'
        )
    return integrate_adaptive(transformed, (0.0, root), tol)


def invert_monotone(
    f: Callable[[float], float],
    y: float,
    bracket: Interval | tuple[float, float],
    tol: float = DEFAULT_TOL,
    probes: int = MONOTONE_PROBES,
) -> float:
    """Solve f(x) = y for strictly monotone f on bracket.

    Uses Brent's bracketed hybrid (bisection with secant and inverse quadratic
    steps); no derivative is needed, so flat points such as m'(pi/2) = 0 are
    safe. probes > 0 samples f to detect monotonicity violations.
    """
    interval, _ = _as_interval(bracket)
    f_lo, f_hi = f(interval.lo), f(interval.hi)
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)):
        raise EvaluationError('f is not finite at the bracket endpoints')
    slack = tol * (1.0 + abs(y))
    lower, upper = min(f_lo, f_hi), max(f_lo, f_hi)
    if y < lower - slack or y > upper + slack:
        raise OutOfRangeError(f'y={y} outside [{lower}, {upper}]')

    if probes > 0:
        xs = np.linspace(interval.lo, interval.hi, probes + 2)
        values = np.array([f_lo, *(f(x) for x in xs[1:-1]), f_hi])
        steps = np.diff(values) * (1.0 if f_hi >= f_lo else -1.0)
        if np.any(steps <= 0.0):
            raise MonotonicityError(
                f'f is not strictly monotone on [{interval.lo}, {interval.hi}]'
            )

    if abs(f_lo - y) <= slack:
        return interval.lo
    if abs(f_hi - y) <= slack:
        return interval.hi
    return optimize.brentq(
        lambda x: f(x) - y,
        interval.lo,
        interval.hi,
        xtol=1e-15,
        rtol=4.0 * np.finfo(float).eps,
        maxiter=200,
    )


def ode_solve(
    field: Callable[[float, np.ndarray], np.ndarray],
    y0: Sequence[float] | np.ndarray,
    s_span: Interval | tuple[float, float],
    tol: float = DEFAULT_TOL,
    s_eval: np.ndarray | None = None,
    events: Sequence[Callable] | None = None,
    atol: float | None = None,
    dense: bool = True,
) -> Trajectory:
    """Integrate y' = field(s, y) with the adaptive DOP853 Runge-Kutta pair.

    Dense output has the order of the integrator; s_eval selects the returned
    samples (default: the accepted steps). atol overrides the
    absolute tolerance, e.g. for stacked systems whose error norm is an RMS.
    dense=False skips the interpolant, which is large for stacked systems.

    Raises:
        IntegrationError: on step-size underflow, carrying the last good state.
    """
    interval, _ = _as_interval(s_span)
    rtol = max(tol, 100.0 * np.finfo(float).eps)
    solution = integrate.solve_ivp(
        field,
        (interval.lo, interval.hi),
        np.asarray(y0, dtype=float),
        method='DOP853',
        rtol=rtol,
        atol=atol if atol is not None else tol,
        dense_output=dense,
        t_eval=s_eval,
        events=events,
    )
    if solution.status == -1:
        if solution.t.size:
            last_s, last_state = float(solution.t[-1]), solution.y[:, -1].copy()
        else:
            last_s, last_state = interval.lo, np.asarray(y0, dtype=float)
        raise IntegrationError(
            f'Integration failed after s={last_s:.6g}: {solution.message}',
            last_s=last_s,
            last_state=last_state,
        )
    return Trajectory(
        s=solution.t,
        y=solution.y,
        dense=solution.sol,
        evaluations=int(solution.nfev),
        events=solution.t_events,
    )


def minimize_scalar(
    f: Callable[[float], float],
    bracket: Interval | tuple[float, float],
    tol: float = 1e-10,
) -> tuple[float, float]:
    """Bounded minimisation of a unimodal f; boundary minima are returned exactly."""
    interval, _ = _as_interval(bracket)

    def checked(x: float) -> float:
        value = f(x)
        if not math.isfinite(value):
            raise EvaluationError(f'f({x}) is not finite')
        return value

    result = optimize.minimize_scalar(
        checked,
        bounds=(interval.lo, interval.hi),
        method='bounded',
        options={'xatol': tol, 'maxiter': 500},
    )
    x_min, f_min = float(result.x), float(result.fun)
    for endpoint in (interval.lo, interval.hi):
        value = checked(endpoint)
        if value < f_min:
            x_min, f_min = endpoint, value
    return x_min, f_min


def sign_changes(values: Sequence[tuple[float, float]]) -> list[tuple[int, int]]:
    """Adjacent index pairs whose values change sign.

    Exact zeros take the sign of the preceding nonzero value; leading zeros
    never start a pair.
    """
    v = np.array([value for _, value in values], dtype=float)
    if v.size < 2:
        return []
    if not np.all(np.isfinite(v)):
        raise EvaluationError('sign_changes requires finite values')
    signs = np.sign(v)
    for i in range(1, signs.size):
        if signs[i] == 0.0:
            signs[i] = signs[i - 1]
    flips = np.nonzero(signs[:-1] * signs[1:] < 0.0)[0]
    return [(int(i), int(i) + 1) for i in flips]
