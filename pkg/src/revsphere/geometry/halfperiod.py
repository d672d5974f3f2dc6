"""Half period function of a 2-sphere of revolution and its monotonicity criteria.

phi(nu) is the theta-advance of a geodesic with Clairaut constant nu between
two consecutive touches of its turning parallels. Two evaluations are
provided: a compactified form with a smooth integrand on a finite interval
and the direct integral, which serves as an independent cross-check.
"""

import logging
import math

import numpy as np

from revsphere.common.errors import CriterionInapplicableError, DomainError
from revsphere.common.types import (
    AFunctionProfile,
    HalfPeriodEntry,
    HalfPeriodReport,
    HalfPeriodTable,
    MonotonicityReport,
)
from revsphere.common.utils import closed_grid, match_shape, open_grid, parallel_map
from revsphere.geometry.curvature import gaussian_curvature
from revsphere.geometry.profiles import MetricProfile
from revsphere.numerics import (
    DEFAULT_TOL,
    integrate_adaptive,
    integrate_sqrt_singular,
    invert_monotone,
)


logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2
EQUATOR_BAND = 1e-5
TAYLOR_GAP = 1e-12
FLAT_TOL = 1e-8
DIRECT_MARGIN = 1e-3


def a_function(p: MetricProfile, x: float) -> float:
    """A(x) = sqrt(a^2 - m^2) / m' on [0, pi/2].

    Within EQUATOR_BAND of pi/2 both numerator and denominator vanish and the
    limit sqrt(a / -m''(pi/2)) is returned.

    Raises:
        CriterionInapplicableError: if m'(x) <= 0 in the interior.
    """
    if not 0.0 <= x <= HALF_PI:
        raise DomainError(f'x must lie in [0, pi/2], got {x}')
    a = p.a
    if x == 0.0:
        return a
    if HALF_PI - x < EQUATOR_BAND:
        return math.sqrt(a / -float(p.d2m(HALF_PI)))
    slope = float(p.dm(x))
    if slope <= 0.0:
        raise CriterionInapplicableError(f"m'({x}) = {slope} is not positive")
    m = float(p.m(x))
    return math.sqrt(max(a * a - m * m, 0.0)) / slope


def a_function_profile(p: MetricProfile, grid_size: int = 1000) -> AFunctionProfile:
    x = closed_grid(0.0, HALF_PI, grid_size)
    values = [a_function(p, float(xi)) for xi in x]
    return AFunctionProfile(a=p.a, family=p.family, x=x.tolist(), values=values)


def f_function(p: MetricProfile, x):
    """F = m'^2 + (m''/m)(a^2 - m^2), written as m'^2 - G (a^2 - m^2) to stay finite at the poles."""
    a = p.a
    m = p.m(x)
    return match_shape(p.dm(x) ** 2 - gaussian_curvature(p, x) * (a * a - m * m), x)


def u_substitution(tau, nu: float, a: float):
    """u(tau, nu) = nu^2 (a^2 tau^2 + 1) / (tau^2 nu^2 + 1); runs from nu^2 at tau=0 to a^2 at infinity."""
    tau = np.asarray(tau, dtype=float)
    return match_shape(nu * nu * (a * a * tau * tau + 1.0) / (tau * tau * nu * nu + 1.0), tau)


def _check_nu(p: MetricProfile, nu: float) -> float:
    a = p.a
    if not 0.0 < nu < a:
        raise DomainError(f'nu must lie in (0, {a}), got {nu}')
    return a


def half_period(p: MetricProfile, nu: float, tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """phi(nu) = (2/a) int_0^{pi/2} A(m^-1(sqrt u)) dsigma with tau = tan(sigma)/a.

    Returns:
        (phi, err) where err is the propagated quadrature error estimate.
    """
    a = _check_nu(p, nu)
    ratio = (nu / a) ** 2
    top = float(p.m(HALF_PI))

    def integrand(sigma: float) -> float:
        sin_s, cos_s = math.sin(sigma), math.cos(sigma)
        level = nu / math.sqrt(cos_s * cos_s + ratio * sin_s * sin_s)
        level = min(max(level, nu), top)
        x = invert_monotone(p.m, level, (0.0, HALF_PI), tol=1e-15, probes=0)
        return a_function(p, min(x, HALF_PI))

    result = integrate_adaptive(integrand, (0.0, HALF_PI), tol=tol * a / 2.0)
    return 2.0 * result.value / a, 2.0 * result.err_estimate / a


def half_period_direct(
    p: MetricProfile, nu: float, tol: float = DEFAULT_TOL
) -> tuple[float, float]:
    """phi(nu) = 2 int_{x0}^{pi/2} nu / (m sqrt(m^2 - nu^2)) dx with m(x0) = nu.

    The square-root singularity sits at x0 only: m = a > nu at pi/2, so the
    equator endpoint is regular. Accuracy degrades as nu approaches a.
    """
    a = _check_nu(p, nu)
    if nu > a * (1.0 - DIRECT_MARGIN):
        raise DomainError(f'nu={nu} too close to a={a} for the direct integral')
    x0 = invert_monotone(p.m, nu, (0.0, HALF_PI))
    edge = 1.0 / math.sqrt(2.0 * nu * float(p.dm(x0)))

    def g(x: float) -> float:
        gap = x - x0
        m = float(p.m(x))
        squared = m * m - nu * nu
        if gap < TAYLOR_GAP or squared <= 0.0:
            return edge
        return nu * math.sqrt(gap) / (m * math.sqrt(squared))

    result = integrate_sqrt_singular(g, (x0, HALF_PI), singular_at='lo', tol=tol / 2.0)
    return 2.0 * result.value, 2.0 * result.err_estimate


def _clairaut_integral(
    p: MetricProfile,
    r0: float,
    nu: float,
    numerator,
    tol: float,
) -> float:
    """int_{r0}^{pi - r0} numerator(m) / sqrt(m^2 - nu^2) dr with both endpoints transformed."""
    m0 = float(p.m(r0))
    tangential = math.isclose(nu, m0, rel_tol=1e-14, abs_tol=0.0)
    edge = numerator(m0) / math.sqrt(2.0 * nu * float(p.dm(r0))) if tangential else 0.0

    def piece(anchor: float):
        def g(x: float) -> float:
            gap = abs(x - anchor)
            m = float(p.m(x))
            squared = m * m - nu * nu
            if tangential and (gap < TAYLOR_GAP or squared <= 0.0):
                return edge
            return numerator(m) * math.sqrt(gap) / math.sqrt(squared)

        return g

    lo = integrate_sqrt_singular(piece(r0), (r0, HALF_PI), singular_at='lo', tol=tol / 2.0)
    hi = integrate_sqrt_singular(
        piece(math.pi - r0), (HALF_PI, math.pi - r0), singular_at='hi', tol=tol / 2.0
    )
    return lo.value + hi.value


def _check_crossing(p: MetricProfile, r0: float, nu: float) -> float:
    if not 0.0 < r0 < HALF_PI:
        raise DomainError(f'r0 must lie in (0, pi/2), got {r0}')
    m0 = float(p.m(r0))
    if nu < 0.0 or nu > m0 * (1.0 + 1e-14):
        raise DomainError(f'nu must lie in [0, m(r0)={m0}], got {nu}')
    return min(nu, m0)


def swept_angle_direct(
    p: MetricProfile, r0: float, nu: float, tol: float = DEFAULT_TOL
) -> float:
    """theta-advance of the north-going geodesic from parallel r0 to parallel pi - r0.

    int_{r0}^{pi - r0} nu / (m sqrt(m^2 - nu^2)) dr; nu = m(r0) is the tangential
    geodesic with square-root singularities at both ends.
    """
    nu = _check_crossing(p, r0, nu)
    if nu == 0.0:
        return 0.0
    return _clairaut_integral(p, r0, nu, lambda m: nu / m, tol)


def first_crossing_length(
    p: MetricProfile, r0: float, nu: float, tol: float = DEFAULT_TOL
) -> float:
    """Arc length int_{r0}^{pi - r0} m / sqrt(m^2 - nu^2) dr of the same geodesic piece."""
    nu = _check_crossing(p, r0, nu)
    if nu == 0.0:
        return math.pi - 2.0 * r0
    return _clairaut_integral(p, r0, nu, lambda m: m, tol)


def classify_monotonicity(quantity: str, values: np.ndarray, extra=None) -> MonotonicityReport:
    """Direction of a sampled sequence; steps within FLAT_TOL (relative) count as flat."""
    values = np.asarray(values, dtype=float)
    diffs = np.diff(values)
    flat = FLAT_TOL * max(1.0, float(np.max(np.abs(values))))
    if np.all(np.abs(diffs) <= flat):
        direction, worst = 'constant', float(np.max(np.abs(diffs), initial=0.0))
    elif np.all(diffs < -flat):
        direction, worst = 'strictly-decreasing', 0.0
    elif np.all(diffs > flat):
        direction, worst = 'strictly-increasing', 0.0
    else:
        direction = 'neither'
        worst = float(min(np.max(diffs), np.max(-diffs)))
    return MonotonicityReport(
        quantity=quantity,
        direction=direction,
        worst_violation=worst,
        grid_size=int(values.size),
        extra=extra or {},
    )


def criterion_A_monotone(p: MetricProfile, grid_size: int = 1000) -> MonotonicityReport:
    """Monotonicity of A on (0, pi/2); a decreasing A forces a decreasing phi.

    Raises:
        CriterionInapplicableError: if m' <= 0 somewhere on the grid.
    """
    x = open_grid(0.0, HALF_PI, grid_size)
    if np.any(p.dm(x) <= 0.0):
        raise CriterionInapplicableError("m' is not positive on (0, pi/2)")
    values = np.array([a_function(p, float(xi)) for xi in x])
    return classify_monotonicity('A', values)


def criterion_ff(p: MetricProfile, grid_size: int = 1000) -> MonotonicityReport:
    """Monotonicity of -m''/m, the meridian curvature, on (0, pi/2).

    Increasing curvature forces a decreasing phi. The report also carries
    min F and F(pi/2) of the auxiliary function F = m'^2 + (m''/m)(a^2 - m^2).
    """
    x = open_grid(0.0, HALF_PI, grid_size)
    f = f_function(p, x)
    extra = {'min_f': float(np.min(f)), 'f_equator': float(f_function(p, HALF_PI))}
    return classify_monotonicity('-m\'\'/m', gaussian_curvature(p, x), extra)


def monotonicity_report(
    p: MetricProfile, nu_grid_size: int = 50, tol: float = DEFAULT_TOL
) -> HalfPeriodReport:
    """Tabulate phi on a uniform grid of [a/100, 0.99 a] and test strict monotonicity.

    A step counts only when it exceeds ten times the combined error estimates.
    """
    if nu_grid_size < 2:
        raise ValueError(f'nu_grid_size must be >= 2, got {nu_grid_size}')
    a = p.a
    nus = closed_grid(a / 100.0, a * 0.99, nu_grid_size)
    results = parallel_map(lambda nu: half_period(p, float(nu), tol), nus)
    entries = [
        HalfPeriodEntry(nu=float(nu), phi=phi, err=err)
        for nu, (phi, err) in zip(nus, results)
    ]
    phi = np.array([e.phi for e in entries])
    err = np.array([e.err for e in entries])
    noise = 10.0 * (err[:-1] + err[1:])
    steps = phi[:-1] - phi[1:]
    decreasing_margin = steps - noise
    increasing_margin = -steps - noise
    report = HalfPeriodReport(
        table=HalfPeriodTable(a=a, family=p.family, entries=entries),
        strictly_decreasing=bool(np.all(decreasing_margin > 0.0)),
        strictly_increasing=bool(np.all(increasing_margin > 0.0)),
        worst_margin=float(np.min(decreasing_margin)),
    )
    logger.info(
        f'half period table for {p.family.kind}: {nu_grid_size} entries, '
        f'strictly_decreasing={report.strictly_decreasing}'
    )
    return report
