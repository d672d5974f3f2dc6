"""Gaussian curvature along a meridian, its derivative and extremum counting."""

import logging
import math

import numpy as np

from scipy import optimize

from revsphere.common.errors import DomainError, NearPoleError, NotFoundError
from revsphere.common.types import (
    AlternationDiagnostics,
    BoundCheckReport,
    CurvatureProfile,
    Extremum,
    Interval,
)
from revsphere.common.utils import closed_grid, match_shape, open_grid
from revsphere.geometry.profiles import (
    BFunction,
    HGenerator,
    MetricProfile,
    find_minimal_n0,
)
from revsphere.numerics import sign_changes


logger = logging.getLogger(__name__)

POLE_GUARD = 1e-6
NEAR_POLE = 1e-8
EXTREMUM_FLOOR = 1e-9
FD_STEP = 1e-5
B_SECOND_GRID = 10_000
DEFAULT_BAND = Interval(lo=0.6, hi=0.9)
DEFAULT_DELTA = 0.5


def gaussian_curvature(p: MetricProfile, x):
    """G = -m''/m, replaced by the pole limit -m'''/m' within POLE_GUARD of 0 or pi."""
    xs = np.asarray(x, dtype=float)
    if np.any((xs < 0.0) | (xs > math.pi)):
        raise DomainError(f'x must lie in [0, pi], got {x}')
    # both poles share the limit since m(pi - r) = m(r)
    poles = (xs <= POLE_GUARD) | (xs >= math.pi - POLE_GUARD)
    interior = ~poles
    values = np.empty_like(xs)
    safe = np.where(interior, xs, math.pi / 2)
    values[...] = -p.d2m(safe) / p.m(safe)
    if np.any(poles):
        values[poles] = p.pole_curvature()
    return match_shape(values, x)


def curvature_via_h(gen: HGenerator, x):
    """G = h'^2 - cot(h) h'' for the induced profile a sin h."""
    xs = np.asarray(x, dtype=float)
    if np.any((xs <= 0.0) | (xs >= math.pi)):
        raise DomainError(f'x must lie in (0, pi), got {x}')
    h = gen.h(xs)
    return match_shape(gen.dh(xs) ** 2 - gen.d2h(xs) / np.tan(h), x)


def curvature_derivative(gen: HGenerator, x):
    """G' from 2 G' sin^2 h = 2 (2 - cos 2h) h' h'' - sin 2h h'''.

    Raises:
        NearPoleError: if sin h(x) < 1e-8 anywhere in x.
    """
    xs = np.asarray(x, dtype=float)
    h = gen.h(xs)
    sin_h = np.sin(h)
    if np.any(np.abs(sin_h) < NEAR_POLE):
        raise NearPoleError(f'sin h(x) below {NEAR_POLE:g} for x={x}')
    dh, d2h, d3h = gen.dh(xs), gen.d2h(xs), gen.d3h(xs)
    rhs = 2.0 * (2.0 - np.cos(2.0 * h)) * dh * d2h - np.sin(2.0 * h) * d3h
    return match_shape(rhs / (2.0 * sin_h**2), x)


def sample_point(gen: HGenerator, k: int) -> float:
    """t_k = k pi / (2 n^2), where the perturbation wave sin(2 n^2 x) vanishes."""
    return k * math.pi / (2.0 * gen.n * gen.n)


def h_triple_prime_at_tk(gen: HGenerator, k: int) -> float:
    """h''' at t_k in closed form: 8 alpha cos 2t + (-1)^k (6 n^-3 B'' - 8 n B)."""
    if gen.n < 1 or not 1 <= k <= gen.n * gen.n:
        raise DomainError(f'k must lie in [1, n^2] for n={gen.n}, got {k}')
    t = sample_point(gen, k)
    n = float(gen.n)
    sign = -1.0 if k % 2 else 1.0
    return float(
        8.0 * gen.alpha * math.cos(2.0 * t)
        + sign * (6.0 * gen.b.d2(t) / n**3 - 8.0 * n * gen.b.value(t))
    )


def band_constants(
    delta: float,
    b: BFunction,
    n_max: int = 200,
    grid_size: int = 10_000,
) -> tuple[float, float, int]:
    """Constants keeping sin 2h bounded below on [delta, (pi - delta)/2].

    Returns:
        (eps0, c, n0) with eps0 = (2 delta - sin 2 delta)/8,
        c = min(sin 6 eps0, sin(delta - 2 eps0)) and n0 the smallest n whose
        perturbation sup |B(x) sin(2 n^2 x)| / n^5 on [0, pi/2] is below eps0.
    """
    if not 0.0 < delta < math.pi / 3:
        raise DomainError(f'delta must lie in (0, pi/3), got {delta}')
    eps0 = (2.0 * delta - math.sin(2.0 * delta)) / 8.0
    c_delta = min(math.sin(6.0 * eps0), math.sin(delta - 2.0 * eps0))
    for n in range(1, n_max + 1):
        x = closed_grid(0.0, math.pi / 2, max(grid_size, 8 * n * n))
        sup = float(np.max(np.abs(b.value(x) * np.sin(2.0 * n * n * x)))) / n**5
        if sup < eps0:
            return eps0, c_delta, n
    raise NotFoundError(f'No n <= {n_max} brings the perturbation below eps0={eps0:g}')


def h0_band_check(alpha: float, delta: float, grid_size: int = 1000) -> BoundCheckReport:
    """(2 delta - sin 2 delta)/2 <= h0(x) <= (pi - delta)/2 on [delta, (pi - delta)/2]."""
    if not 0.0 < delta < math.pi / 3:
        raise DomainError(f'delta must lie in (0, pi/3), got {delta}')
    gen = HGenerator(alpha=alpha, n=0)
    x = closed_grid(delta, (math.pi - delta) / 2.0, grid_size)
    h0 = gen.h0(x)
    lower = float(np.min(h0 - (2.0 * delta - math.sin(2.0 * delta)) / 2.0))
    upper = float(np.min((math.pi - delta) / 2.0 - h0))
    return BoundCheckReport(
        first_slack=lower,
        second_slack=upper,
        holds=lower >= -1e-12 and upper >= -1e-12,
    )


def alternation_diagnostics(
    gen: HGenerator,
    iv: Interval = DEFAULT_BAND,
    delta: float = DEFAULT_DELTA,
    n_max: int = 200,
) -> AlternationDiagnostics:
    """Sign pattern of G' on the sample points t_k inside iv.

    At t_k the curvature identity splits as
    2 G' sin^2 h = f + (-1)^k 8n sin(2h) B, and G' alternates in sign over
    consecutive k once |f| is dominated by the second term.
    """
    if gen.n < 2:
        raise DomainError(f'n must be >= 2, got {gen.n}')
    if not (delta < iv.lo and iv.hi < (math.pi - delta) / 2.0):
        raise DomainError(f'{iv} must lie inside (delta, (pi - delta)/2) for delta={delta}')

    b = gen.b
    try:
        eps0, c_delta, n0_band = band_constants(delta, b, n_max)
    except NotFoundError:
        eps0 = (2.0 * delta - math.sin(2.0 * delta)) / 8.0
        c_delta = min(math.sin(6.0 * eps0), math.sin(delta - 2.0 * eps0))
        n0_band = None
    try:
        n0_deriv = find_minimal_n0(gen.alpha, b, n_max=n_max)
    except NotFoundError:
        n0_deriv = None

    max_b2 = float(np.max(np.abs(b.d2(closed_grid(0.0, math.pi / 2, B_SECOND_GRID)))))
    reference_n = n0_deriv if n0_deriv is not None else gen.n
    f_bound = 28.0 + 6.0 * max_b2 / reference_n**3
    min_abs_b = float(np.min(np.abs(b.value(closed_grid(iv.lo, iv.hi, 1000)))))
    n1_threshold = None
    if n0_deriv is not None and min_abs_b > 0.0 and c_delta > 0.0:
        n1_threshold = max(
            n0_deriv + 1, math.floor(f_bound / (4.0 * c_delta * min_abs_b)) + 1
        )

    n = gen.n
    scale = 2.0 * n * n / math.pi
    k_values = [
        k
        for k in range(math.ceil(iv.lo * scale), math.floor(iv.hi * scale) + 1)
        if iv.contains(sample_point(gen, k))
    ]
    t_grid, f_values, eps_values, signs, gaps = [], [], [], [], []
    sin2h_values, residuals = [], []
    for k in k_values:
        t = sample_point(gen, k)
        h, dh, d2h = float(gen.h(t)), float(gen.dh(t)), float(gen.d2h(t))
        parity = -1.0 if k % 2 else 1.0
        sin2h = math.sin(2.0 * h)
        f = 2.0 * (2.0 - math.cos(2.0 * h)) * dh * d2h - sin2h * (
            8.0 * gen.alpha * math.cos(2.0 * t) + parity * 6.0 * float(b.d2(t)) / n**3
        )
        leading = parity * 8.0 * n * sin2h * float(b.value(t))
        gprime = float(curvature_derivative(gen, t))
        lhs = 2.0 * gprime * math.sin(h) ** 2
        residuals.append(abs(lhs - f - leading) / (1.0 + abs(lhs)))
        if leading == 0.0:
            gaps.append(k)
            eps_values.append(None)
        else:
            eps_values.append(f / leading)
        t_grid.append(t)
        f_values.append(f)
        signs.append(int(np.sign(gprime)))
        sin2h_values.append(sin2h)

    finite_eps = [abs(e) for e in eps_values if e is not None]
    diagnostics = AlternationDiagnostics(
        n=n,
        delta=delta,
        eps0=eps0,
        c_delta=c_delta,
        n0_band=n0_band,
        n0_deriv=n0_deriv,
        n1_threshold=n1_threshold,
        min_abs_b=min_abs_b,
        k_values=k_values,
        t_grid=t_grid,
        f_values=f_values,
        eps_values=eps_values,
        gprime_signs=signs,
        gaps=gaps,
        empty=not k_values,
        f_bound=f_bound,
        bound_holds=all(abs(f) < f_bound for f in f_values),
        sin2h_min=min(sin2h_values, default=math.inf),
        sin2h_holds=all(s >= c_delta for s in sin2h_values),
        eps_small=all(e < 0.5 for e in finite_eps),
        alternates=all(s * t < 0 for s, t in zip(signs, signs[1:])),
        identity_residual=max(residuals, default=0.0),
    )
    logger.info(
        f'alternation n={n} on [{iv.lo}, {iv.hi}]: {len(k_values)} points, '
        f'alternates={diagnostics.alternates}'
    )
    return diagnostics


def _curvature_slope(p: MetricProfile, x: np.ndarray) -> np.ndarray:
    gen = p.generator
    if gen is not None:
        return curvature_derivative(gen, x)
    return (
        gaussian_curvature(p, x + FD_STEP) - gaussian_curvature(p, x - FD_STEP)
    ) / (2.0 * FD_STEP)


def count_extrema(
    p: MetricProfile,
    iv: Interval = Interval(lo=0.0, hi=math.pi / 2),
    grid_size: int = 4000,
) -> tuple[int, list[Extremum]]:
    """Count sign changes of G' on iv and locate each extremum by Brent's method.

    Raises:
        ValueError: if the grid is too coarse for the perturbation frequency.
    """
    if iv.lo < 0.0 or iv.hi > math.pi / 2:
        raise DomainError(f'{iv} must lie in (0, pi/2]')
    gen = p.generator
    if gen is not None and gen.perturbed and grid_size < 8 * gen.n * gen.n:
        raise ValueError(f'grid_size must be >= 8 n^2 = {8 * gen.n * gen.n}')

    x = open_grid(iv.lo, iv.hi, grid_size)
    slope = _curvature_slope(p, x)
    keep = np.abs(slope) > EXTREMUM_FLOOR
    xs, vs = x[keep], slope[keep]

    def slope_at(t: float) -> float:
        return float(_curvature_slope(p, np.array([t]))[0])

    extrema = []
    for i, j in sign_changes(list(zip(xs, vs))):
        root = optimize.brentq(slope_at, xs[i], xs[j], xtol=1e-12)
        extrema.append(Extremum(x=float(root), kind='min' if vs[i] < 0.0 else 'max'))
    logger.debug(f'{p.family.kind}: {len(extrema)} extrema on [{iv.lo}, {iv.hi}]')
    return len(extrema), extrema


def curvature_profile(p: MetricProfile, grid_size: int = 1000) -> CurvatureProfile:
    """Curvature samples over (0, pi) plus the extrema on (0, pi/2]."""
    x = open_grid(0.0, math.pi, grid_size)
    g = gaussian_curvature(p, x)
    size = grid_size
    gen = p.generator
    if gen is not None and gen.perturbed:
        size = max(size, 16 * gen.n * gen.n)
    _, extrema = count_extrema(p, grid_size=size)
    return CurvatureProfile(
        profile=p,
        samples=[(float(a), float(b)) for a, b in zip(x, g)],
        extrema=extrema,
    )
