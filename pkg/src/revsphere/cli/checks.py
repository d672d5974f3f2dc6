"""Registry of verification checks run by `revsphere verify`.

Each check returns (passed, measured) where measured holds the margins that
decided the outcome. Random inputs come from a seeded generator so that two
runs with the same flags report identical numbers.
"""

import logging
import math

from collections.abc import Callable
from typing import Any

import numpy as np

from pydantic import BaseModel, ConfigDict

from revsphere.cli.config import RunConfig
from revsphere.common.types import CheckResult, SurfacePoint
from revsphere.common.utils import centered_angle, closed_grid, open_grid
from revsphere.geometry.curvature import (
    alternation_diagnostics,
    band_constants,
    count_extrema,
    curvature_derivative,
    curvature_via_h,
    h0_band_check,
    h_triple_prime_at_tk,
    sample_point,
)
from revsphere.geometry.geodesics import cut_locus, distance, shoot
from revsphere.geometry.halfperiod import (
    a_function,
    criterion_A_monotone,
    criterion_ff,
    first_crossing_length,
    half_period,
    half_period_direct,
    monotonicity_report,
    swept_angle_direct,
)
from revsphere.geometry.profiles import (
    MetricProfile,
    SinSquaredB,
    b_ratio_sups,
    derivative_sup_bounds,
    find_minimal_n0,
    h_generator,
    make_h_profile,
    make_lambda_profile,
    make_theorem_a,
    make_unit_sphere,
    perturbation_bound_check,
    perturbation_ratio_sups,
    profile_invariants,
    sin_multiple_bound_check,
    validate_b_conditions,
    validate_h_conditions,
)


logger = logging.getLogger(__name__)

Measured = dict[str, float | int | bool | str | None]
Outcome = tuple[bool, Measured]

THIRD = 1.0 / 3.0
QUICK_FAN = 1024
QUICK_DIRECTIONS = 16
CLAIRAUT_SHOTS = 100


class Check(BaseModel):
    """A named claim and the function that measures it."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    claim: str
    run: Callable[[RunConfig], Outcome]


REGISTRY: dict[str, Check] = {}


def check(name: str, claim: str):
    def register(fn: Callable[[RunConfig], Outcome]) -> Callable[[RunConfig], Outcome]:
        REGISTRY[name] = Check(name=name, claim=claim, run=fn)
        return fn

    return register


def standard_families() -> list[MetricProfile]:
    return [
        make_unit_sphere(),
        make_lambda_profile(1.0),
        make_lambda_profile(4.0),
        make_h_profile(h_generator(0.25, 3)),
        make_theorem_a(8),
    ]


# Profiles --------------------------------------------------------------------


@check('profile-invariants', 'Standard families satisfy m(0)=0, m\'(0)=1, reflective symmetry and m <= m(pi/2).')
def _profile_invariants(config: RunConfig) -> Outcome:
    worst = {'pole_value': 0.0, 'pole_slope': 0.0, 'symmetry': 0.0, 'equator_excess': -math.inf}
    min_m = math.inf
    for p in standard_families():
        found = profile_invariants(p, grid_size=max(config.samples, 1000))
        for key in worst:
            worst[key] = max(worst[key], found[key])
        min_m = min(min_m, found['min_m'])
    passed = (
        worst['pole_value'] <= 1e-12
        and worst['pole_slope'] <= 1e-9
        and worst['symmetry'] <= 1e-10
        and worst['equator_excess'] <= 1e-12
        and min_m > 0.0
    )
    return passed, {**worst, 'min_m': min_m}


@check('h-conditions', 'h\' > 0, h(pi - x) = pi - h(x) and h\'\' > 0 hold for the theorem-a generators.')
def _h_conditions(config: RunConfig) -> Outcome:
    measured: Measured = {}
    passed = True
    for n in (0, 8, 12):
        gen = h_generator(THIRD, n)
        report = validate_h_conditions(gen)
        passed = passed and report.all_pass
        measured[f'n{n}_h_prime_margin'] = report.h_prime_margin
        measured[f'n{n}_h_second_margin'] = report.h_second_margin
        measured[f'n{n}_symmetry_margin'] = report.symmetry_margin
    return passed, measured


@check('b-conditions', 'B = sin^2 2x is reflective, vanishes with its slope at 0 and pi/2, and |B|, |B\'| are O(sin 2x).')
def _b_conditions(config: RunConfig) -> Outcome:
    b = SinSquaredB()
    report = validate_b_conditions(b)
    value_ratio, slope_ratio = b_ratio_sups(b)
    passed = (
        report.reflective
        and report.vanishes
        and report.derivative_vanishes
        and math.isfinite(value_ratio)
        and math.isfinite(slope_ratio)
    )
    return passed, {
        'reflective_margin': report.reflective_margin,
        'vanishing_margin': report.vanishing_margin,
        'derivative_margin': report.derivative_margin,
        'value_ratio_sup': value_ratio,
        'slope_ratio_sup': slope_ratio,
    }


@check('perturbation-bounds', 'R\' and R\'\' stay under their pointwise majorants and relative to h0\', h0\'\' they are bounded.')
def _perturbation_bounds(config: RunConfig) -> Outcome:
    measured: Measured = {}
    passed = True
    for n in (4, 8):
        gen = h_generator(THIRD, n)
        bounds = perturbation_bound_check(gen)
        first, second = perturbation_ratio_sups(gen)
        passed = passed and bounds.holds and math.isfinite(first) and math.isfinite(second)
        measured[f'n{n}_first_slack'] = bounds.first_slack
        measured[f'n{n}_second_slack'] = bounds.second_slack
        measured[f'n{n}_first_ratio'] = first
        measured[f'n{n}_second_ratio'] = second
    return passed, measured


@check('sin-multiple-bound', '|sin nx| <= n |sin x| for n <= n_max on a 1000-point grid of [0, pi].')
def _sin_multiple_bound(config: RunConfig) -> Outcome:
    worst = sin_multiple_bound_check(n_max=config.n_max, grid_size=1000)
    return worst <= 1e-12, {'n_max': config.n_max, 'worst': worst}


@check('derivative-bound-n0', 'For alpha=1/3 and B=sin^2 2x every n in (n0, n0+20] keeps sup|h\'|, sup|h\'\'| <= 2.')
def _derivative_bound_n0(config: RunConfig) -> Outcome:
    b = SinSquaredB()
    n0 = find_minimal_n0(THIRD, b)
    worst_d1, worst_d2 = 0.0, 0.0
    for n in range(n0 + 1, n0 + 21):
        sup_d1, sup_d2 = derivative_sup_bounds(h_generator(THIRD, n, b))
        worst_d1, worst_d2 = max(worst_d1, sup_d1), max(worst_d2, sup_d2)
    return worst_d1 <= 2.0 and worst_d2 <= 2.0, {
        'n0': n0,
        'sup_h_prime': worst_d1,
        'sup_h_second': worst_d2,
    }


@check('band-constants', 'h0 stays in the band [(2d - sin 2d)/2, (pi - d)/2] and the perturbation falls below eps0.')
def _band_constants(config: RunConfig) -> Outcome:
    eps0, c_delta, n0 = band_constants(config.delta, SinSquaredB())
    report = h0_band_check(THIRD, config.delta)
    return report.holds and c_delta > 0.0, {
        'delta': config.delta,
        'eps0': eps0,
        'c_delta': c_delta,
        'n0': n0,
        'lower_slack': report.first_slack,
        'upper_slack': report.second_slack,
    }


# Curvature -------------------------------------------------------------------


@check('curvature-min', 'The lambda-family curvature has its minimum on (0, pi/2) at arccos sqrt(2/lambda).')
def _curvature_min(config: RunConfig) -> Outcome:
    lam = config.family.lam if config.family.name == 'lambda' else 8.0
    _, extrema = count_extrema(make_lambda_profile(lam))
    minima = [e.x for e in extrema if e.kind == 'min']
    if lam <= 2.0:
        return not minima, {'lambda': lam, 'minima': len(minima)}
    expected = math.acos(math.sqrt(2.0 / lam))
    if len(minima) != 1:
        return False, {'lambda': lam, 'expected': expected, 'minima': len(minima)}
    error = abs(minima[0] - expected)
    return error <= 1e-6, {
        'lambda': lam,
        'expected': expected,
        'minimizer': minima[0],
        'error': error,
    }


@check('curvature-identity', 'The closed-form curvature derivative matches centred differences (step 1e-5) on [0.1, 1.4] for n=6.')
def _curvature_identity(config: RunConfig) -> Outcome:
    gen = h_generator(THIRD, 6)
    x = closed_grid(0.1, 1.4, 2001)
    step = 1e-5
    closed = curvature_derivative(gen, x)
    numeric = (curvature_via_h(gen, x + step) - curvature_via_h(gen, x - step)) / (2.0 * step)
    deviation = float(np.max(np.abs(closed - numeric)) / np.max(np.abs(numeric)))
    return deviation <= 1e-5, {'relative_deviation': deviation}


@check('h-triple-prime-closed-form', 'h\'\'\'(t_k) in closed form matches the generic evaluator for 50 random (n, k).')
def _h_triple_prime(config: RunConfig) -> Outcome:
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 21))
        k = int(rng.integers(1, n * n + 1))
        gen = h_generator(THIRD, n)
        worst = max(worst, abs(h_triple_prime_at_tk(gen, k) - float(gen.d3h(sample_point(gen, k)))))
    return worst <= 1e-9, {'worst': worst}


@check('sign-alternation', 'For n=12 the curvature derivative alternates in sign over consecutive t_k in the band.')
def _sign_alternation(config: RunConfig) -> Outcome:
    gen = make_theorem_a(12).generator
    diagnostics = alternation_diagnostics(gen, config.band, config.delta)
    passed = (
        not diagnostics.empty
        and diagnostics.alternates
        and diagnostics.bound_holds
        and diagnostics.eps_small
    )
    finite_eps = [abs(e) for e in diagnostics.eps_values if e is not None]
    return passed, {
        'points': len(diagnostics.k_values),
        'alternates': diagnostics.alternates,
        'bound_holds': diagnostics.bound_holds,
        'f_bound': diagnostics.f_bound,
        'max_abs_f': max((abs(f) for f in diagnostics.f_values), default=0.0),
        'max_abs_eps': max(finite_eps, default=0.0),
        'identity_residual': diagnostics.identity_residual,
    }


@check('extrema-growth', 'Curvature extrema counts on (0, pi/2) grow strictly over n = 4, 8, 12 with at least 20 at n=12.')
def _extrema_growth(config: RunConfig) -> Outcome:
    counts = {n: count_extrema(make_theorem_a(n))[0] for n in (4, 8, 12)}
    passed = counts[4] < counts[8] < counts[12] and counts[12] >= 20
    return passed, {f'count_n{n}': c for n, c in counts.items()}


# Half period -----------------------------------------------------------------


@check('unit-sphere-half-period', 'On the unit sphere phi(nu) = pi, and the direct integral agrees.')
def _unit_sphere_half_period(config: RunConfig) -> Outcome:
    p = make_unit_sphere()
    compact, direct = 0.0, 0.0
    for nu in np.arange(1, 10) / 10.0:
        phi, _ = half_period(p, float(nu))
        phi_direct, _ = half_period_direct(p, float(nu))
        compact = max(compact, abs(phi - math.pi))
        direct = max(direct, abs(phi_direct - phi))
    return compact <= 1e-7 and direct <= 1e-6, {
        'compact_error': compact,
        'direct_gap': direct,
    }


@check('lambda-half-period-decreasing', 'phi is strictly decreasing for lambda = 1, 4, 10 with margins above 10x the quadrature error.')
def _lambda_half_period(config: RunConfig) -> Outcome:
    measured: Measured = {}
    passed = True
    for lam in (1.0, 4.0, 10.0):
        report = monotonicity_report(make_lambda_profile(lam), nu_grid_size=50)
        passed = passed and report.strictly_decreasing
        measured[f'lambda{lam:g}_worst_margin'] = report.worst_margin
    return passed, measured


@check('half-period-oracle', 'Compactified and direct half period integrals agree within 1e-6 at 20 values of nu.')
def _half_period_oracle(config: RunConfig) -> Outcome:
    measured: Measured = {}
    worst = 0.0
    for label, p in (
        ('lambda1', make_lambda_profile(1.0)),
        ('lambda4', make_lambda_profile(4.0)),
        ('theorem_a6', make_theorem_a(6)),
    ):
        gap = 0.0
        for nu in closed_grid(p.a / 20.0, 0.95 * p.a, 20):
            gap = max(gap, abs(half_period(p, float(nu))[0] - half_period_direct(p, float(nu))[0]))
        measured[label] = gap
        worst = max(worst, gap)
    return worst <= 1e-6, measured


@check('a-function-closed-form', 'The generic A evaluator matches (1 + lambda cos^2)/c and 1/h\' at 100 points.')
def _a_function_closed_form(config: RunConfig) -> Outcome:
    x = open_grid(0.0, math.pi / 2, 100)
    measured: Measured = {}
    for label, p in (
        ('lambda1', make_lambda_profile(1.0)),
        ('lambda4', make_lambda_profile(4.0)),
        ('lambda10', make_lambda_profile(10.0)),
        ('h_alpha025_n3', make_h_profile(h_generator(0.25, 3))),
        ('theorem_a8', make_theorem_a(8)),
    ):
        closed = np.asarray(p.closed_a_function(x), dtype=float)
        generic = np.array([a_function(p, float(t)) for t in x])
        measured[label] = float(np.max(np.abs(closed - generic)))
    return max(measured.values()) <= 1e-9, measured


@check('criterion-implication', 'Increasing -m\'\'/m implies decreasing A, which implies decreasing phi.')
def _criterion_implication(config: RunConfig) -> Outcome:
    measured: Measured = {}
    passed = True
    for label, p in (
        ('lambda1', make_lambda_profile(1.0)),
        ('lambda4', make_lambda_profile(4.0)),
        ('theorem_a8', make_theorem_a(8)),
    ):
        ff = criterion_ff(p)
        a_report = criterion_A_monotone(p)
        phi = monotonicity_report(p, nu_grid_size=20)
        if ff.direction == 'strictly-increasing':
            passed = passed and a_report.direction == 'strictly-decreasing'
        if a_report.direction == 'strictly-decreasing':
            passed = passed and phi.strictly_decreasing
        measured[f'{label}_curvature'] = ff.direction
        measured[f'{label}_a'] = a_report.direction
        measured[f'{label}_min_f'] = ff.extra['min_f']
        measured[f'{label}_phi_decreasing'] = phi.strictly_decreasing
    return passed, measured


# Geodesics -------------------------------------------------------------------


@check('swept-angle', 'Shooting to the antipodal parallel reproduces the swept-angle and arc-length integrals.')
def _swept_angle(config: RunConfig) -> Outcome:
    angle_gap, radial_gap = 0.0, 0.0
    for p, r0 in ((make_lambda_profile(4.0), math.pi / 4), (make_theorem_a(8), math.pi / 3)):
        start = SurfacePoint(r=r0, theta=0.0)
        for xi in (0.3, 0.8, 1.3):
            nu = float(p.m(r0)) * math.sin(xi)
            length = first_crossing_length(p, r0, nu)
            path = shoot(p, start, xi, length, tol=1e-11)
            swept = swept_angle_direct(p, r0, nu)
            angle_gap = max(angle_gap, abs(float(centered_angle(path.theta[-1] - swept))))
            radial_gap = max(radial_gap, abs(path.r[-1] - (math.pi - r0)))
    return angle_gap <= 1e-7 and radial_gap <= 1e-7, {
        'angle_gap': angle_gap,
        'radial_gap': float(radial_gap),
    }


@check('clairaut-drift', 'm(r) sin(psi) drifts by at most 1e-8 over length 2 pi in 100 random shots at tolerance 1e-10.')
def _clairaut_drift(config: RunConfig) -> Outcome:
    rng = np.random.default_rng(0)
    families = standard_families()
    worst = 0.0
    for i in range(CLAIRAUT_SHOTS):
        p = families[i % len(families)]
        start = SurfacePoint(r=float(rng.uniform(0.1, math.pi - 0.1)), theta=float(rng.uniform(0.0, 2.0 * math.pi)))
        path = shoot(p, start, float(rng.uniform(0.0, 2.0 * math.pi)), 2.0 * math.pi, tol=1e-10)
        worst = max(worst, path.clairaut_drift)
    return worst <= 1e-8, {'shots': CLAIRAUT_SHOTS, 'worst_drift': worst}


@check('antipode-distance', 'On the unit sphere the fan distance to the antipode is pi.')
def _antipode_distance(config: RunConfig) -> Outcome:
    start = SurfacePoint(r=math.pi / 3, theta=0.0)
    length, _ = distance(make_unit_sphere(), start, start.antipode(), fan_size=1024)
    error = abs(length - math.pi)
    return error <= 1e-4, {'distance': length, 'error': error}


@check('pole-distance', 'The fan distance between the poles is pi on every family.')
def _pole_distance(config: RunConfig) -> Outcome:
    worst = 0.0
    for p in (make_unit_sphere(), make_lambda_profile(4.0), make_theorem_a(4)):
        length, _ = distance(p, SurfacePoint(r=0.0), SurfacePoint(r=math.pi), fan_size=256)
        worst = max(worst, abs(length - math.pi))
    return worst <= 1e-4, {'worst_error': worst}


def _cut_locus_outcome(config: RunConfig, p: MetricProfile, r0: float) -> Outcome:
    fan = QUICK_FAN if config.quick else config.fan
    directions = QUICK_DIRECTIONS if config.quick else config.directions
    arc = cut_locus(p, SurfacePoint(r=r0, theta=0.0), fan_size=fan, directions=directions)
    found = sum(1 for cut in arc.per_direction if cut.point is not None)
    return arc.passed, {
        'fan': fan,
        'directions': directions,
        'found': found,
        'expected_r': arc.parallel_r,
        'max_radial_deviation': arc.max_radial_deviation,
        'theta_lo': arc.theta_interval[0],
        'theta_hi': arc.theta_interval[1],
    }


@check('cut-locus-theorem-a', 'For n=8 every refined cut point from (pi/3, 0) lies on the parallel r = 2 pi/3.')
def _cut_locus_theorem_a(config: RunConfig) -> Outcome:
    return _cut_locus_outcome(config, make_theorem_a(8), math.pi / 3)


@check('cut-locus-lambda', 'For lambda=4 every refined cut point from (pi/4, 0) lies on the parallel r = 3 pi/4.')
def _cut_locus_lambda(config: RunConfig) -> Outcome:
    return _cut_locus_outcome(config, make_lambda_profile(4.0), math.pi / 4)


# Runner ----------------------------------------------------------------------


def _clean(value: Any) -> float | int | bool | str | None:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else None
    return value


def run_check(name: str, config: RunConfig) -> CheckResult:
    entry = REGISTRY[name]
    logger.info(f'check {name}')
    try:
        passed, measured = entry.run(config)
    except Exception as e:
        logger.error(f'check {name} raised: {e}')
        passed, measured = False, {'error': f'{type(e).__name__}: {e}'}
    if not passed:
        logger.error(f'check {name} failed: {measured}')
    return CheckResult(
        name=name,
        claim=entry.claim,
        passed=bool(passed),
        measured={key: _clean(value) for key, value in measured.items()},
    )


def run_checks(config: RunConfig) -> list[CheckResult]:
    """Run the selected checks (all when none are selected) in registry order."""
    names = list(config.checks) or list(REGISTRY)
    unknown = [name for name in names if name not in REGISTRY]
    if unknown:
        raise ValueError(f'Unknown checks: {", ".join(unknown)}')
    return [run_check(name, config) for name in names]
