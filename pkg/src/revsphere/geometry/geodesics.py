"""Geodesics of dr^2 + m(r)^2 dtheta^2, fan distances and cut loci.

Geodesics are integrated in (r, theta, psi) with psi the angle to the
northward meridian, using the odd 2*pi-periodic extension of m so that
meridians run through the poles; states are mapped back to r in [0, pi]
afterwards. The Clairaut quantity m(r) sin(psi) is monitored, not imposed.

Distances come from a GeodesicFan: every geodesic leaving a base point in a
uniform set of directions is integrated as one stacked system, sampled in arc
length and indexed with a k-d tree. A target is located by solving for the
(direction, length) pair whose interpolated fan position hits it.
"""

import logging
import math

from collections.abc import Callable

import numpy as np

from scipy import optimize
from scipy.spatial import cKDTree

from revsphere.common.errors import DomainError, UnreachableError
from revsphere.common.types import (
    CutLocusArc,
    DirectionCut,
    GeodesicPath,
    SurfacePoint,
)
from revsphere.common.utils import (
    centered_angle,
    closed_grid,
    parallel_map,
    wrap_angle,
)
from revsphere.geometry.profiles import MetricProfile
from revsphere.numerics import DEFAULT_TOL, minimize_scalar, ode_solve


logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
SAFE_M = 1e-9
TOL_LOSS = 1e-4
RADIAL_TOL = 5e-4
SCAN_STEP = math.pi / 64
SCAN_MARGIN = 0.05
BISECTION_STEPS = 16
FAN_REACH = math.pi + 0.1
MAX_FAN_SAMPLES = 512
NEWTON_STEPS = 8
DEFAULT_FAN = 4096
DEFAULT_DIRECTIONS = 64
SHOOT_TOL_FACTOR = 1e-2
SHOOT_TOL_FLOOR = 1e-13


def geodesic_field(p: MetricProfile) -> Callable[[float, np.ndarray], np.ndarray]:
    """r' = cos psi, theta' = sin psi / m, psi' = -(m'/m) sin psi for stacked (r, theta, psi) blocks."""

    def field(s: float, y: np.ndarray) -> np.ndarray:
        n = y.size // 3
        r, psi = y[:n], y[2 * n:]
        m = p.m(r)
        inv_m = np.divide(1.0, m, out=np.zeros_like(r), where=np.abs(m) > SAFE_M)
        sin_psi = np.sin(psi)
        return np.concatenate(
            (np.cos(psi), sin_psi * inv_m, -p.dm(r) * inv_m * sin_psi)
        )

    return field


def canonical(r, theta, psi):
    """Map extended coordinates back to r in [0, pi]; crossing a pole shifts theta and psi by pi."""
    wrapped = np.mod(r, TWO_PI)
    flip = wrapped > math.pi
    shift = np.where(flip, math.pi, 0.0)
    return (
        np.where(flip, TWO_PI - wrapped, wrapped),
        wrap_angle(theta + shift),
        np.mod(psi + shift, TWO_PI),
    )


def _initial_state(start: SurfacePoint, xi) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Initial (r, theta, psi) blocks; from a pole the direction xi selects the meridian theta = xi."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    r = np.full_like(xi, start.r)
    if start.r <= 0.0:
        return r, xi.copy(), np.zeros_like(xi)
    if start.r >= math.pi:
        return r, xi.copy(), np.full_like(xi, math.pi)
    return r, np.full_like(xi, start.theta), xi.copy()


def _turning(s: float, y: np.ndarray) -> float:
    return math.cos(y[2])


def shoot(
    p: MetricProfile,
    start: SurfacePoint,
    xi: float,
    s_max: float,
    tol: float = DEFAULT_TOL,
    samples: int | None = None,
) -> GeodesicPath:
    """Integrate the unit-speed geodesic leaving start at angle xi from the meridian.

    Pole starts integrate as meridians. Turning points are the arc lengths
    where cos psi changes sign.
    tol bounds the Clairaut drift over one revolution, so the integrator
    itself runs SHOOT_TOL_FACTOR tighter.
    """
    if not s_max > 0.0:
        raise DomainError(f's_max must be positive, got {s_max}')
    r0, theta0, psi0 = _initial_state(start, xi)
    nu = float(p.m(r0[0]) * math.sin(psi0[0]))
    count = samples or max(257, math.ceil(s_max / 0.01) + 1)
    trajectory = ode_solve(
        geodesic_field(p),
        np.concatenate((r0, theta0, psi0)),
        (0.0, s_max),
        tol=max(tol * SHOOT_TOL_FACTOR, SHOOT_TOL_FLOOR),
        s_eval=np.linspace(0.0, s_max, count),
        events=[_turning],
    )
    r, theta, psi = trajectory.y
    drift = float(np.max(np.abs(p.m(r) * np.sin(psi) - nu)))

    turning = []
    for s in trajectory.events[0]:
        if s < 1e-6 or s > s_max - 1e-6:
            continue
        before, after = trajectory.dense(s - 1e-6)[2], trajectory.dense(s + 1e-6)[2]
        if math.cos(before) * math.cos(after) < 0.0:
            turning.append(float(s))

    r_c, theta_c, psi_c = canonical(r, theta, psi)
    if drift > 1e-8:
        logger.debug(f'Clairaut drift {drift:.3g} for xi={xi} from {start}')
    return GeodesicPath(
        start=start,
        xi=float(xi),
        nu=nu,
        s=trajectory.s,
        r=r_c,
        theta=theta_c,
        psi=psi_c,
        turning_points=turning,
        clairaut_drift=drift,
    )


def _embed(p: MetricProfile, r, theta) -> np.ndarray:
    m = p.m(r)
    return np.stack((m * np.cos(theta), m * np.sin(theta), np.asarray(r, dtype=float)), axis=-1)


def _chart(p: MetricProfile, target: SurfacePoint):
    """Polar chart about the pole nearest target, returning positions and unit-speed tangents."""
    north = target.r > math.pi / 2

    def project(r, theta, psi):
        r = np.asarray(r, dtype=float)
        rho = math.pi - r if north else r
        radial = -np.cos(psi) if north else np.cos(psi)
        m = np.asarray(p.m(r), dtype=float)
        ratio = np.divide(rho, m, out=np.ones_like(m), where=np.abs(m) > SAFE_M)
        spin = ratio * np.sin(psi)
        c, s = np.cos(theta), np.sin(theta)
        return rho * c, rho * s, radial * c - spin * s, radial * s + spin * c

    return project


def _hermite(u, p0, t0, p1, t1, h):
    u2, u3 = u * u, u * u * u
    value = (
        (2 * u3 - 3 * u2 + 1) * p0
        + (u3 - 2 * u2 + u) * h * t0
        + (-2 * u3 + 3 * u2) * p1
        + (u3 - u2) * h * t1
    )
    slope = (
        (6 * u2 - 6 * u) * p0
        + (3 * u2 - 4 * u + 1) * h * t0
        + (-6 * u2 + 6 * u) * p1
        + (3 * u2 - 2 * u) * h * t1
    )
    return value, slope


class GeodesicFan:
    """Geodesics leaving `base` in `size` equally spaced directions, up to length `reach`."""

    def __init__(
        self,
        profile: MetricProfile,
        base: SurfacePoint,
        size: int = DEFAULT_FAN,
        tol: float = 1e-9,
        reach: float = FAN_REACH,
    ):
        if size < 8:
            raise DomainError(f'fan size must be >= 8, got {size}')
        self.profile = profile
        self.base = base
        self.size = size
        self.tol = tol
        self.xi = TWO_PI * np.arange(size) / size
        self.dxi = TWO_PI / size
        self.capture = 2.0 * TWO_PI * profile.a / size
        count = math.ceil(reach / max(self.capture, reach / MAX_FAN_SAMPLES)) + 1
        self.s = np.linspace(0.0, reach, count)
        self.ds = float(self.s[1] - self.s[0])

        r0, theta0, psi0 = _initial_state(base, self.xi)
        trajectory = ode_solve(
            geodesic_field(profile),
            np.concatenate((r0, theta0, psi0)),
            (0.0, reach),
            tol=tol,
            s_eval=self.s,
            atol=tol / math.sqrt(3 * size),
            dense=False,
        )
        r, theta, psi = trajectory.y.reshape(3, size, count)
        self.r, self.theta, self.psi = canonical(r, theta, psi)
        self._tree = cKDTree(_embed(profile, self.r, self.theta).reshape(-1, 3))

        steepest = float(np.max(np.abs(profile.dm(closed_grid(0.0, math.pi, 2001)))))
        self.radius = self.capture + self.ds
        self._search = self.radius * math.sqrt(1.0 + steepest**2)
        logger.info(
            f'fan of {size} geodesics from ({base.r:.6g}, {base.theta:.6g}): '
            f'{count} samples each, {trajectory.evaluations} evaluations'
        )

    def _candidates(self, target: SurfacePoint) -> tuple[np.ndarray, np.ndarray]:
        hits = self._tree.query_ball_point(_embed(self.profile, target.r, target.theta), self._search)
        if not hits:
            return np.empty(0, dtype=int), np.empty(0, dtype=int)
        i, j = np.divmod(np.asarray(hits, dtype=int), self.s.size)
        r, theta = self.r[i, j], self.theta[i, j]
        # local metric: dr^2 + m1 m2 (2 sin(dtheta/2))^2
        spread = self.profile.m(r) * self.profile.m(target.r) * (2.0 * np.sin((theta - target.theta) / 2.0)) ** 2
        close = (r - target.r) ** 2 + spread <= self.radius**2
        return i[close], j[close]

    def locate(self, target: SurfacePoint) -> list[tuple[float, float]]:
        """(length, direction) pairs of fan geodesics through target, interpolated between samples."""
        i, j = self._candidates(target)
        if i.size == 0:
            return []
        last = self.s.size - 2
        combos = np.unique(
            np.stack(
                (
                    np.concatenate(((i - 1) % self.size, i, (i - 1) % self.size, i)),
                    np.clip(np.concatenate((j - 1, j - 1, j, j)), 0, last),
                ),
                axis=1,
            ),
            axis=0,
        )
        i0, j0 = combos[:, 0], combos[:, 1]
        i1 = (i0 + 1) % self.size

        project = _chart(self.profile, target)
        bx, by, _, _ = project(target.r, target.theta, 0.0)

        def ends(ii):
            start = project(self.r[ii, j0], self.theta[ii, j0], self.psi[ii, j0])
            stop = project(self.r[ii, j0 + 1], self.theta[ii, j0 + 1], self.psi[ii, j0 + 1])
            return start, stop

        (ax0, ay0, atx0, aty0), (ax1, ay1, atx1, aty1) = ends(i0)
        (bx0, by0, btx0, bty0), (bx1, by1, btx1, bty1) = ends(i1)
        h = self.ds
        t = np.full(i0.size, 0.5)
        u = np.full(i0.size, 0.5)
        valid = np.ones(i0.size, dtype=bool)
        for _ in range(NEWTON_STEPS):
            qax, dqax = _hermite(u, ax0, atx0, ax1, atx1, h)
            qay, dqay = _hermite(u, ay0, aty0, ay1, aty1, h)
            qbx, dqbx = _hermite(u, bx0, btx0, bx1, btx1, h)
            qby, dqby = _hermite(u, by0, bty0, by1, bty1, h)
            fx = (1 - t) * qax + t * qbx - bx
            fy = (1 - t) * qay + t * qby - by
            jtx, jty = qbx - qax, qby - qay
            jux, juy = (1 - t) * dqax + t * dqbx, (1 - t) * dqay + t * dqby
            det = jtx * juy - jux * jty
            scale = np.hypot(jtx, jty) * np.hypot(jux, juy)
            valid &= np.abs(det) > 1e-12 * np.maximum(scale, 1e-300)
            safe = np.where(valid, det, 1.0)
            t = np.clip(t - (fx * juy - fy * jux) / safe, -1.0, 2.0)
            u = np.clip(u - (jtx * fy - jty * fx) / safe, -1.0, 2.0)
        qax, _ = _hermite(u, ax0, atx0, ax1, atx1, h)
        qay, _ = _hermite(u, ay0, aty0, ay1, aty1, h)
        qbx, _ = _hermite(u, bx0, btx0, bx1, btx1, h)
        qby, _ = _hermite(u, by0, bty0, by1, bty1, h)
        miss = np.hypot((1 - t) * qax + t * qbx - bx, (1 - t) * qay + t * qby - by)
        edge = 1e-9
        valid &= (t >= -edge) & (t <= 1 + edge) & (u >= -edge) & (u <= 1 + edge) & (miss < 1e-10)

        if np.any(valid):
            lengths = self.s[j0[valid]] + u[valid] * h
            directions = self.xi[i0[valid]] + t[valid] * self.dxi
            return list(zip(lengths.tolist(), wrap_angle(directions).tolist()))

        # degenerate cells (all geodesics converging): project along the nearest sample
        x, y, tx, ty = project(self.r[i, j], self.theta[i, j], self.psi[i, j])
        nearest = int(np.argmin(np.hypot(x - bx, y - by)))
        along = ((bx - x[nearest]) * tx[nearest] + (by - y[nearest]) * ty[nearest]) / (
            tx[nearest] ** 2 + ty[nearest] ** 2
        )
        logger.debug(f'fan lookup of {target} fell back to along-track projection')
        return [(float(self.s[j[nearest]] + along), float(self.xi[i[nearest]]))]

    def distance(self, target: SurfacePoint, refine: bool = False) -> tuple[float, float]:
        """Shortest fan length to target and its direction.

        Raises:
            UnreachableError: if no fan geodesic passes within the capture radius.
        """
        found = self.locate(target)
        if not found:
            raise UnreachableError(f'No fan geodesic from {self.base} passes near {target}')
        length, xi = min(found)
        if refine and not target.is_pole:
            length, xi = self._refine(target, length, xi)
        return length, xi

    def _refine(self, target: SurfacePoint, length: float, xi: float) -> tuple[float, float]:
        """Polish a fan estimate by Brent's method on the signed lateral miss of fresh shots."""
        project = _chart(self.profile, target)
        bx, by, _, _ = project(target.r, target.theta, 0.0)
        window = 2.0 * self.ds
        field = geodesic_field(self.profile)

        def closest(direction: float) -> tuple[float, float]:
            trajectory = ode_solve(
                field,
                np.concatenate(_initial_state(self.base, direction)),
                (0.0, length + window),
                tol=min(self.tol, DEFAULT_TOL),
            )

            def gap(s: float) -> float:
                x, y, _, _ = project(*canonical(*trajectory.dense(s)))
                return float((x - bx) ** 2 + (y - by) ** 2)

            s_min, _ = minimize_scalar(gap, (max(0.0, length - window), length + window), tol=1e-12)
            x, y, tx, ty = project(*canonical(*trajectory.dense(s_min)))
            return float(tx * (by - y) - ty * (bx - x)), s_min

        lo, hi = xi - self.dxi, xi + self.dxi
        if closest(lo)[0] * closest(hi)[0] > 0.0:
            logger.debug(f'no lateral sign change around xi={xi}; keeping fan estimate')
            return length, xi
        root = optimize.brentq(lambda d: closest(d)[0], lo, hi, xtol=1e-10)
        return closest(root)[1], float(wrap_angle(root))


def distance(
    p: MetricProfile,
    a: SurfacePoint,
    b: SurfacePoint,
    fan_size: int = 1024,
    tol: float = DEFAULT_TOL,
) -> tuple[float, float]:
    """Fan-shooting distance from a to b and the realizing direction at a."""
    if fan_size < 256:
        raise DomainError(f'fan_size must be >= 256, got {fan_size}')
    return GeodesicFan(p, a, fan_size, tol).distance(b, refine=True)


def _extrapolate_cut(loss: Callable[[float], float], lo: float, hi: float) -> float:
    """Zero of the minimality loss behind hi, from a quadratic fit of three samples beyond it."""
    step = SCAN_STEP / 8.0
    xs = np.array([hi, hi + step, hi + 2.0 * step])
    ys = np.array([loss(float(x)) for x in xs])
    fit = np.polynomial.Polynomial.fit(xs, ys, 2).convert()
    roots = [
        float(z.real)
        for z in fit.roots()
        if abs(z.imag) < 1e-12 and lo - SCAN_STEP <= z.real <= hi + 1e-12
    ]
    if roots:
        return max(roots)
    slope = (ys[1] - ys[0]) / step
    if slope <= 0.0:
        return hi
    return max(lo - SCAN_STEP, hi - ys[0] / slope)


def _antipode_rule(
    p: MetricProfile,
    start: SurfacePoint,
    trace: Callable[[float], np.ndarray],
    fan: GeodesicFan,
    s_end: float,
) -> tuple[SurfacePoint | None, float | None]:
    """Accept the antipode as cut point when the geodesic reaches it at its fan distance."""
    target = start.antipode()
    project = _chart(p, target)
    bx, by, _, _ = project(target.r, target.theta, 0.0)

    def gap(s: float) -> float:
        x, y, _, _ = project(*canonical(*trace(s)))
        return float(np.hypot(x - bx, y - by))

    s_near, miss = minimize_scalar(gap, (math.pi - 0.5, s_end))
    if miss > fan.capture:
        return None, None
    reach, _ = fan.distance(target)
    if abs(reach - s_near) <= TOL_LOSS:
        logger.debug(f'antipode rule applied from {start}')
        return target, s_near
    return None, None


def cut_point_along(
    p: MetricProfile,
    start: SurfacePoint,
    xi: float,
    fan_size: int = DEFAULT_FAN,
    tol: float = 1e-9,
    fan: GeodesicFan | None = None,
) -> tuple[SurfacePoint | None, float | None]:
    """First length where the geodesic stops minimizing, and the point reached there.

    Scans s in steps of pi/64 for s - d(start, gamma(s)) > TOL_LOSS, bisects
    the bracket and extrapolates the loss back to zero. Returns (None, None)
    when no loss is seen and the antipode rule does not apply.
    """
    if start.is_pole:
        raise DomainError('cut points are computed for non-pole base points')
    fan = fan or GeodesicFan(p, start, fan_size, tol)
    s_end = math.pi + SCAN_MARGIN
    trace = ode_solve(
        geodesic_field(p),
        np.concatenate(_initial_state(start, xi)),
        (0.0, s_end + SCAN_STEP),
        tol=tol,
    ).dense

    def point(s: float) -> SurfacePoint:
        r, theta, _ = canonical(*trace(s))
        return SurfacePoint(r=float(r), theta=float(theta))

    def loss(s: float) -> float:
        return s - fan.distance(point(s))[0]

    lo = 0.0
    for k in range(1, math.floor(s_end / SCAN_STEP) + 1):
        s = k * SCAN_STEP
        if loss(s) > TOL_LOSS:
            hi = s
            break
        lo = s
    else:
        found, length = _antipode_rule(p, start, trace, fan, s_end)
        if found is None:
            logger.warning(f'no minimality loss along xi={xi} from {start}')
        return found, length

    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if loss(mid) > TOL_LOSS:
            hi = mid
        else:
            lo = mid
    s_cut = _extrapolate_cut(loss, lo, hi)
    return point(s_cut), s_cut


def cut_locus(
    p: MetricProfile,
    start: SurfacePoint,
    fan_size: int = DEFAULT_FAN,
    tol: float = 1e-9,
    directions: int = DEFAULT_DIRECTIONS,
) -> CutLocusArc:
    """Cut points along `directions` fan directions and their spread about the antipodal parallel."""
    if start.is_pole:
        raise DomainError('cut loci are computed for non-pole base points')
    if not 2 <= directions <= fan_size:
        raise DomainError(f'directions must lie in [2, {fan_size}], got {directions}')
    fan = GeodesicFan(p, start, fan_size, tol)
    indices = (np.arange(directions) * fan_size) // directions
    xis = fan.xi[indices]
    results = parallel_map(
        lambda xi: cut_point_along(p, start, float(xi), tol=tol, fan=fan), xis
    )
    per_direction = [
        DirectionCut(xi=float(xi), point=point, distance=length)
        for xi, (point, length) in zip(xis, results)
    ]

    parallel_r = math.pi - start.r
    found = [cut.point for cut in per_direction if cut.point is not None]
    deviation = max((abs(q.r - parallel_r) for q in found), default=math.pi)
    center = start.theta + math.pi
    offsets = centered_angle(np.array([q.theta for q in found]) - center) if found else np.zeros(1)
    passed = len(found) == directions and deviation <= max(10.0 * tol, RADIAL_TOL)
    arc = CutLocusArc(
        base=start,
        parallel_r=parallel_r,
        theta_interval=(center + float(np.min(offsets)), center + float(np.max(offsets))),
        per_direction=per_direction,
        max_radial_deviation=deviation,
        passed=passed,
        on_equator=abs(start.r - math.pi / 2) < 1e-12,
    )
    if passed:
        logger.info(f'cut locus of {start}: max radial deviation {deviation:.3g}')
    else:
        logger.error(
            f'cut locus of {start}: {directions - len(found)} directions without a cut point, '
            f'max radial deviation {deviation:.3g} from r={parallel_r:.6g}'
        )
    return arc
