"""Metric profiles m(r) of 2-spheres of revolution dr^2 + m(r)^2 dtheta^2.

Every evaluator is a closed form built from numpy ufuncs, so it accepts
scalars as well as arrays. Derivatives are assembled by hand with the chain
rule; finite differences appear only in tests.
"""

import logging
import math

from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from pydantic import BaseModel, ConfigDict, Field

from revsphere.common.errors import DomainError, NotFoundError
from revsphere.common.types import (
    BConditionReport,
    BoundCheckReport,
    FamilyTag,
    HConditionReport,
)
from revsphere.common.utils import closed_grid, open_grid


logger = logging.getLogger(__name__)

HALF_PI = math.pi / 2
SYMMETRY_TOL = 1e-10


# Perturbation amplitudes B(x) ------------------------------------------------


class BFunction(BaseModel, ABC):
    """Amplitude B of the perturbation R(x) = B(x) sin(2 n^2 x) / n^5.

    Admissible amplitudes are even, satisfy B(pi - x) = B(x) and vanish at 0
    and pi/2.
    """

    model_config = ConfigDict(frozen=True)

    @property
    @abstractmethod
    def label(self) -> str: ...

    @abstractmethod
    def value(self, x): ...

    @abstractmethod
    def d1(self, x): ...

    @abstractmethod
    def d2(self, x): ...

    @abstractmethod
    def d3(self, x): ...


class ZeroB(BFunction):
    """B = 0, i.e. no perturbation."""

    @property
    def label(self) -> str:
        return 'zero'

    def value(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    d1 = d2 = d3 = value


class SinSquaredB(BFunction):
    """B(x) = sin^2(2x), the amplitude of the theorem-a family."""

    @property
    def label(self) -> str:
        return 'sin2sq'

    def value(self, x):
        return np.sin(2.0 * x) ** 2

    def d1(self, x):
        return 2.0 * np.sin(4.0 * x)

    def d2(self, x):
        return 8.0 * np.cos(4.0 * x)

    def d3(self, x):
        return -32.0 * np.sin(4.0 * x)


class SinSquaredPolyB(BFunction):
    """B(x) = sin^2(2x) * f(cos^2 x) with f a polynomial (coefficients c0, c1, ...)."""

    coefficients: tuple[float, ...] = Field(min_length=1)

    @property
    def label(self) -> str:
        return 'sin2sq-poly:' + ','.join(f'{c:g}' for c in self.coefficients)

    def _parts(self, x):
        poly = np.polynomial.Polynomial(self.coefficients)
        c = np.cos(x) ** 2
        dc, d2c, d3c = -np.sin(2.0 * x), -2.0 * np.cos(2.0 * x), 4.0 * np.sin(2.0 * x)
        s = np.sin(2.0 * x) ** 2
        ds, d2s, d3s = (
            2.0 * np.sin(4.0 * x),
            8.0 * np.cos(4.0 * x),
            -32.0 * np.sin(4.0 * x),
        )
        f = [poly.deriv(k)(c) if k else poly(c) for k in range(4)]
        return (s, ds, d2s, d3s), (dc, d2c, d3c), f

    def value(self, x):
        (s, *_), _, f = self._parts(x)
        return s * f[0]

    def d1(self, x):
        (s, ds, *_), (dc, *_), f = self._parts(x)
        return ds * f[0] + s * f[1] * dc

    def d2(self, x):
        (s, ds, d2s, _), (dc, d2c, _), f = self._parts(x)
        return d2s * f[0] + 2.0 * ds * f[1] * dc + s * (f[2] * dc**2 + f[1] * d2c)

    def d3(self, x):
        (s, ds, d2s, d3s), (dc, d2c, d3c), f = self._parts(x)
        return (
            d3s * f[0]
            + 3.0 * d2s * f[1] * dc
            + 3.0 * ds * (f[2] * dc**2 + f[1] * d2c)
            + s * (f[3] * dc**3 + 3.0 * f[2] * dc * d2c + f[1] * d3c)
        )


def b_from_choice(choice: str) -> BFunction:
    """Parse 'sin2sq', 'zero' or 'sin2sq-poly:c0,c1,...'."""
    choice = choice.strip()
    if choice == 'sin2sq':
        return SinSquaredB()
    if choice == 'zero':
        return ZeroB()
    if choice.startswith('sin2sq-poly:'):
        raw = choice.split(':', 1)[1]
        try:
            coefficients = tuple(float(c) for c in raw.split(',') if c.strip())
        except ValueError as e:
            raise DomainError(f'Invalid polynomial coefficients {raw!r}') from e
        if not coefficients:
            raise DomainError('sin2sq-poly needs at least one coefficient')
        return SinSquaredPolyB(coefficients=coefficients)
    raise DomainError(f'Unknown B choice {choice!r}')


# Generating functions h(x) ---------------------------------------------------


class HGenerator(BaseModel):
    """h(x) = x - alpha sin 2x + B(x) sin(2 n^2 x) / n^5; n = 0 means no perturbation."""

    model_config = ConfigDict(frozen=True)

    alpha: float = Field(gt=0.0, lt=0.5)
    n: int = Field(ge=0)
    b: BFunction = Field(default_factory=SinSquaredB)

    @property
    def perturbed(self) -> bool:
        return self.n > 0 and not isinstance(self.b, ZeroB)

    @property
    def frequency(self) -> float:
        return 2.0 * self.n * self.n

    # unperturbed part
    def h0(self, x):
        return x - self.alpha * np.sin(2.0 * x)

    def dh0(self, x):
        return 1.0 - 2.0 * self.alpha * np.cos(2.0 * x)

    def d2h0(self, x):
        return 4.0 * self.alpha * np.sin(2.0 * x)

    def d3h0(self, x):
        return 8.0 * self.alpha * np.cos(2.0 * x)

    # perturbation R = B S / n^5 with S = sin(k x), k = 2 n^2
    def _wave(self, x):
        k = self.frequency
        return k, np.sin(k * x), np.cos(k * x), float(self.n) ** 5

    def pert(self, x):
        if not self.perturbed:
            return np.zeros_like(np.asarray(x, dtype=float))
        _, s, _, p = self._wave(x)
        return self.b.value(x) * s / p

    def dpert(self, x):
        if not self.perturbed:
            return np.zeros_like(np.asarray(x, dtype=float))
        k, s, c, p = self._wave(x)
        return (self.b.d1(x) * s + k * self.b.value(x) * c) / p

    def d2pert(self, x):
        if not self.perturbed:
            return np.zeros_like(np.asarray(x, dtype=float))
        k, s, c, p = self._wave(x)
        b, db, d2b = self.b.value(x), self.b.d1(x), self.b.d2(x)
        return (d2b * s + 2.0 * k * db * c - k * k * b * s) / p

    def d3pert(self, x):
        if not self.perturbed:
            return np.zeros_like(np.asarray(x, dtype=float))
        k, s, c, p = self._wave(x)
        b, db, d2b, d3b = (
            self.b.value(x),
            self.b.d1(x),
            self.b.d2(x),
            self.b.d3(x),
        )
        return (
            d3b * s + 3.0 * k * d2b * c - 3.0 * k * k * db * s - k**3 * b * c
        ) / p

    # full generator
    def h(self, x):
        return self.h0(x) + self.pert(x)

    def dh(self, x):
        return self.dh0(x) + self.dpert(x)

    def d2h(self, x):
        return self.d2h0(x) + self.d2pert(x)

    def d3h(self, x):
        return self.d3h0(x) + self.d3pert(x)


# Metric profiles -------------------------------------------------------------


class MetricProfile(BaseModel, ABC):
    """The warping function m of g = dr^2 + m(r)^2 dtheta^2 on [0, pi]."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    family: FamilyTag

    @abstractmethod
    def m(self, r): ...

    @abstractmethod
    def dm(self, r): ...

    @abstractmethod
    def d2m(self, r): ...

    @abstractmethod
    def d3m(self, r): ...

    @property
    def a(self) -> float:
        """Equatorial radius m(pi/2)."""
        return float(self.m(HALF_PI))

    @property
    def generator(self) -> HGenerator | None:
        return None

    def closed_a_function(self, x) -> Any:
        """Closed-form A(x) when the family has one, else None."""
        return None

    def pole_curvature(self) -> float:
        """lim_{r->0} -m''/m = -m'''(0)/m'(0)."""
        return float(-self.d3m(0.0) / self.dm(0.0))


class UnitSphereProfile(MetricProfile):
    family: FamilyTag = FamilyTag(kind='unit-sphere')

    def m(self, r):
        return np.sin(r)

    def dm(self, r):
        return np.cos(r)

    def d2m(self, r):
        return -np.sin(r)

    def d3m(self, r):
        return -np.cos(r)

    def closed_a_function(self, x):
        return np.ones_like(np.asarray(x, dtype=float))


class LambdaProfile(MetricProfile):
    """m(r) = sqrt(lam+1) sin r / sqrt(1 + lam cos^2 r)."""

    lam: float = Field(ge=0.0)

    @property
    def _c(self) -> float:
        return math.sqrt(self.lam + 1.0)

    def _big_lambda(self, r):
        return np.sqrt(1.0 + self.lam * np.cos(r) ** 2)

    def m(self, r):
        return self._c * np.sin(r) / self._big_lambda(r)

    def dm(self, r):
        return (self._c / self._big_lambda(r)) ** 3 * np.cos(r)

    def d2m(self, r):
        big = self._big_lambda(r)
        return (
            self._c**3
            * np.sin(r)
            * (2.0 * self.lam * np.cos(r) ** 2 - 1.0)
            / big**5
        )

    def d3m(self, r):
        big = self._big_lambda(r)
        sin_r, cos_r = np.sin(r), np.cos(r)
        g = sin_r * (2.0 * self.lam * cos_r**2 - 1.0)
        dg = 2.0 * self.lam * (cos_r**3 - 2.0 * sin_r**2 * cos_r) - cos_r
        return self._c**3 * (dg * big**2 + 5.0 * self.lam * g * sin_r * cos_r) / big**7

    @property
    def a(self) -> float:
        return self._c

    def closed_a_function(self, x):
        return (1.0 + self.lam * np.cos(x) ** 2) / self._c

    def equator_gap(self, r):
        """sqrt(a^2 - m^2) = (lam + 1) cos r / Lambda."""
        return (self.lam + 1.0) * np.cos(r) / self._big_lambda(r)


class HProfile(MetricProfile):
    """m(r) = a sin h(r) with a = 1/h'(0) = 1/(1 - 2 alpha)."""

    gen: HGenerator

    @property
    def generator(self) -> HGenerator:
        return self.gen

    @property
    def scale(self) -> float:
        return 1.0 / (1.0 - 2.0 * self.gen.alpha)

    @property
    def a(self) -> float:
        return self.scale

    def m(self, r):
        return self.scale * np.sin(self.gen.h(r))

    def dm(self, r):
        return self.scale * self.gen.dh(r) * np.cos(self.gen.h(r))

    def d2m(self, r):
        h, dh, d2h = self.gen.h(r), self.gen.dh(r), self.gen.d2h(r)
        return self.scale * (d2h * np.cos(h) - dh**2 * np.sin(h))

    def d3m(self, r):
        h, dh, d2h, d3h = (
            self.gen.h(r),
            self.gen.dh(r),
            self.gen.d2h(r),
            self.gen.d3h(r),
        )
        return self.scale * (
            d3h * np.cos(h) - 3.0 * dh * d2h * np.sin(h) - dh**3 * np.cos(h)
        )

    def closed_a_function(self, x):
        return 1.0 / self.gen.dh(x)


def make_unit_sphere() -> UnitSphereProfile:
    return UnitSphereProfile()


def make_lambda_profile(lam: float) -> LambdaProfile:
    if not lam >= 0.0:
        raise DomainError(f'lambda must be >= 0, got {lam}')
    return LambdaProfile(lam=lam, family=FamilyTag(kind='lambda', params={'lambda': lam}))


def make_h_profile(gen: HGenerator) -> HProfile:
    if not 0.0 < gen.alpha < 0.5:
        raise DomainError(f'alpha must lie in (0, 1/2), got {gen.alpha}')
    tag = FamilyTag(
        kind='h-generated',
        params={'alpha': gen.alpha, 'n': gen.n, 'b': gen.b.label},
    )
    return HProfile(gen=gen, family=tag)


def make_theorem_a(n: int) -> HProfile:
    """m_n(r) = 3 sin(r - sin 2r / 3 + sin^2 2r sin(2 n^2 r) / n^5)."""
    if n < 2:
        raise DomainError(f'n must be >= 2, got {n}')
    gen = HGenerator(alpha=1.0 / 3.0, n=n, b=SinSquaredB())
    return HProfile(gen=gen, family=FamilyTag(kind='theorem-a', params={'n': n}))


def h_generator(alpha: float, n: int, b: BFunction | None = None) -> HGenerator:
    """Build an HGenerator, turning validation failures into DomainError."""
    if not 0.0 < alpha < 0.5:
        raise DomainError(f'alpha must lie in (0, 1/2), got {alpha}')
    if n < 0:
        raise DomainError(f'n must be >= 0, got {n}')
    return HGenerator(alpha=alpha, n=n, b=b or SinSquaredB())


# Hypothesis checks -----------------------------------------------------------


def _resolve_grid(gen: HGenerator, grid_size: int) -> int:
    """Grid size resolving the 2 n^2 oscillation, rounded to 1 mod 4."""
    size = max(grid_size, 16 * gen.n * gen.n)
    return 4 * math.ceil((size - 1) / 4) + 1


def profile_invariants(p: MetricProfile, grid_size: int = 1000) -> dict[str, float]:
    """Deviations from the pole conditions, reflective symmetry and equator maximality."""
    r = open_grid(0.0, math.pi, grid_size)
    m = p.m(r)
    return {
        'pole_value': abs(float(p.m(0.0))),
        'pole_slope': abs(float(p.dm(0.0)) - 1.0),
        'symmetry': float(np.max(np.abs(p.m(math.pi - r) - m))),
        'min_m': float(np.min(m)),
        'equator_excess': float(np.max(m - p.a)),
    }


def validate_h_conditions(gen: HGenerator, grid_size: int = 1000) -> HConditionReport:
    """Check h' > 0 on [0, pi/2), h(pi - x) = pi - h(x) and h'' > 0 on (0, pi/2)."""
    if grid_size < 100:
        raise ValueError(f'grid_size must be >= 100, got {grid_size}')
    size = _resolve_grid(gen, grid_size)
    quarter = open_grid(0.0, HALF_PI, size)
    half = open_grid(0.0, math.pi, size)
    dh_min = float(np.min(gen.dh(quarter)))
    d2h_min = float(np.min(gen.d2h(quarter)))
    deviation = float(np.max(np.abs(gen.h(math.pi - half) - (math.pi - gen.h(half)))))
    report = HConditionReport(
        h_prime_positive=dh_min > 0.0,
        h_prime_margin=dh_min,
        symmetry_holds=deviation <= SYMMETRY_TOL,
        symmetry_margin=SYMMETRY_TOL - deviation,
        h_second_positive=d2h_min > 0.0,
        h_second_margin=d2h_min,
    )
    if not report.all_pass:
        logger.info(f'h conditions fail for {gen}: {report}')
    return report


def derivative_sup_bounds(gen: HGenerator, grid_size: int = 1001) -> tuple[float, float]:
    """Grid suprema of |h'| and |h''| over [0, pi]."""
    if grid_size < 1000:
        raise ValueError(f'grid_size must be >= 1000, got {grid_size}')
    x = closed_grid(0.0, math.pi, _resolve_grid(gen, grid_size))
    return float(np.max(np.abs(gen.dh(x)))), float(np.max(np.abs(gen.d2h(x))))


def find_minimal_n0(
    alpha: float,
    b: BFunction,
    bound: float = 2.0,
    n_max: int = 100,
    grid_size: int = 1001,
) -> int:
    """Smallest n in [2, n_max] with sup|h'| <= bound and sup|h''| <= bound."""
    for n in range(2, n_max + 1):
        sup_d1, sup_d2 = derivative_sup_bounds(h_generator(alpha, n, b), grid_size)
        if sup_d1 <= bound and sup_d2 <= bound:
            logger.debug(f'n0 for alpha={alpha}, B={b.label}, bound={bound}: {n}')
            return n
    raise NotFoundError(f'No n <= {n_max} satisfies the derivative bound {bound}')


def perturbation_ratio_sups(gen: HGenerator, grid_size: int = 1000) -> tuple[float, float]:
    """Grid suprema of |R'|/h0' and |R''|/h0'' over the open interval (0, pi/2)."""
    if gen.n < 1:
        raise ValueError('perturbation ratios need n >= 1')
    x = open_grid(0.0, HALF_PI, _resolve_grid(gen, grid_size))
    first = np.abs(gen.dpert(x)) / gen.dh0(x)
    second = np.abs(gen.d2pert(x)) / gen.d2h0(x)
    return float(np.max(first)), float(np.max(second))


def sin_multiple_bound_check(n_max: int = 50, grid_size: int = 1000) -> float:
    """max over n <= n_max and x in [0, pi] of |sin nx| - n|sin x| (never positive in exact arithmetic)."""
    x = closed_grid(0.0, math.pi, grid_size)
    n = np.arange(1, n_max + 1)[:, None]
    return float(np.max(np.abs(np.sin(n * x)) - n * np.abs(np.sin(x))))


def validate_b_conditions(b: BFunction, grid_size: int = 1000) -> BConditionReport:
    """Reflective evenness, vanishing at 0 and pi/2, and vanishing slope there."""
    x = closed_grid(0.0, math.pi, grid_size)
    reflective = float(np.max(np.abs(b.value(math.pi - x) - b.value(x))))
    ends = np.array([0.0, HALF_PI])
    vanishing = float(np.max(np.abs(b.value(ends))))
    slope = float(np.max(np.abs(b.d1(ends))))
    return BConditionReport(
        reflective=reflective <= SYMMETRY_TOL,
        reflective_margin=reflective,
        vanishes=vanishing <= SYMMETRY_TOL,
        vanishing_margin=vanishing,
        derivative_vanishes=slope <= SYMMETRY_TOL,
        derivative_margin=slope,
    )


def b_ratio_sups(b: BFunction, grid_size: int = 1000) -> tuple[float, float]:
    """Grid suprema of |B|/sin 2x and |B'|/sin 2x on (0, pi/2)."""
    x = open_grid(0.0, HALF_PI, grid_size)
    sin2x = np.sin(2.0 * x)
    return (
        float(np.max(np.abs(b.value(x)) / sin2x)),
        float(np.max(np.abs(b.d1(x)) / sin2x)),
    )


def perturbation_bound_check(gen: HGenerator, grid_size: int = 1000) -> BoundCheckReport:
    """Worst slack of |R'| and |R''| under their pointwise majorants on [0, pi]."""
    if gen.n < 1:
        raise ValueError('perturbation bounds need n >= 1')
    x = closed_grid(0.0, math.pi, _resolve_grid(gen, grid_size))
    n = float(gen.n)
    b, db, d2b = np.abs(gen.b.value(x)), np.abs(gen.b.d1(x)), gen.b.d2(x)
    first_bound = (db + 2.0 * n**2 * b) / n**5
    second_bound = (
        np.abs(d2b * np.sin(gen.frequency * x)) + 4.0 * n**4 * b + 4.0 * n**2 * db
    ) / n**5
    first = float(np.min(first_bound - np.abs(gen.dpert(x))))
    second = float(np.min(second_bound - np.abs(gen.d2pert(x))))
    return BoundCheckReport(
        first_slack=first,
        second_slack=second,
        holds=first >= -1e-12 and second >= -1e-12,
    )

