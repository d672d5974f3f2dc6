import math

from collections.abc import Callable
from typing import Any, Literal

import numpy as np

from pydantic import BaseModel, ConfigDict, Field, model_validator


class Interval(BaseModel):
    """A closed real interval with lo < hi."""

    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float

    @model_validator(mode='after')
    def check_order(self):
        if not self.lo < self.hi:
            raise ValueError(f'Interval requires lo < hi, got [{self.lo}, {self.hi}]')
        return self

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


class QuadResult(BaseModel):
    """Value of a definite integral with its absolute error estimate."""

    model_config = ConfigDict(frozen=True)

    value: float
    err_estimate: float = Field(ge=0.0)
    evaluations: int = Field(ge=1)


class Trajectory(BaseModel):
    """Sampled ODE solution with a dense interpolant."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    s: np.ndarray = Field(description='Sample abscissae.')
    y: np.ndarray = Field(description='States, shape (dimension, samples).')
    dense: Callable[[Any], np.ndarray] | None = Field(
        default=None, description='Interpolant of the integrator order.'
    )
    evaluations: int = Field(description='Right-hand side evaluations.')
    events: list[np.ndarray] | None = None


class FamilyTag(BaseModel):
    """Provenance of a metric profile."""

    model_config = ConfigDict(frozen=True)

    kind: Literal['unit-sphere', 'lambda', 'h-generated', 'theorem-a']
    params: dict[str, float | int | str] = Field(default_factory=dict)


class SurfacePoint(BaseModel):
    """A point in geodesic polar coordinates about the south pole."""

    model_config = ConfigDict(frozen=True)

    r: float = Field(ge=0.0, le=math.pi)
    theta: float = 0.0

    @model_validator(mode='before')
    @classmethod
    def canonicalize(cls, values):
        if isinstance(values, dict):
            values = dict(values)
            r = float(values.get('r', 0.0))
            theta = float(values.get('theta', 0.0)) % (2.0 * math.pi)
            if r <= 0.0 or r >= math.pi:
                theta = 0.0
            values['theta'] = theta
        return values

    @property
    def is_pole(self) -> bool:
        return self.r <= 0.0 or self.r >= math.pi

    def antipode(self) -> 'SurfacePoint':
        return SurfacePoint(r=math.pi - self.r, theta=self.theta + math.pi)


class GeodesicPath(BaseModel):
    """A unit-speed geodesic sampled in arc length."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    start: SurfacePoint
    xi: float = Field(description='Initial angle from the meridian direction.')
    nu: float = Field(description='Clairaut constant m(r0) sin(xi).')
    s: np.ndarray
    r: np.ndarray
    theta: np.ndarray
    psi: np.ndarray
    turning_points: list[float] = Field(default_factory=list)
    clairaut_drift: float = 0.0


class DirectionCut(BaseModel):
    """Cut point found along one fan direction (None when not found)."""

    xi: float
    point: SurfacePoint | None = None
    distance: float | None = None


class CutLocusArc(BaseModel):
    """Empirical cut locus of a base point."""

    base: SurfacePoint
    parallel_r: float = Field(description='Expected parallel pi - r(base).')
    theta_interval: tuple[float, float] = Field(
        description='[min, max] of cut theta in the chart centred on theta(base)+pi.'
    )
    per_direction: list[DirectionCut]
    max_radial_deviation: float
    passed: bool
    on_equator: bool = False


class HalfPeriodEntry(BaseModel):
    nu: float
    phi: float
    err: float = Field(ge=0.0)


class HalfPeriodTable(BaseModel):
    """Sampled half period function of one profile."""

    a: float = Field(gt=0.0)
    family: FamilyTag
    entries: list[HalfPeriodEntry]

    @model_validator(mode='after')
    def check_entries(self):
        for entry in self.entries:
            if not 0.0 < entry.nu < self.a:
                raise ValueError(f'nu={entry.nu} outside (0, {self.a})')
            if not (math.isfinite(entry.phi) and entry.phi > 0.0):
                raise ValueError(f'phi={entry.phi} at nu={entry.nu} is not positive')
        return self


class AFunctionProfile(BaseModel):
    """A sampled on a closed grid of [0, pi/2], endpoint limits included."""

    a: float = Field(gt=0.0)
    family: FamilyTag
    x: list[float]
    values: list[float]

    @model_validator(mode='after')
    def check_positive(self):
        if len(self.x) != len(self.values):
            raise ValueError('x and values differ in length')
        bad = [v for v in self.values if not (math.isfinite(v) and v > 0.0)]
        if bad:
            raise ValueError(f'A is not positive: {bad[0]}')
        return self

    @property
    def equator_limit(self) -> float:
        return self.values[-1]


class HalfPeriodReport(BaseModel):
    table: HalfPeriodTable
    strictly_decreasing: bool
    strictly_increasing: bool = False
    worst_margin: float = Field(
        description='min over adjacent pairs of phi_i - phi_(i+1) - 10*(err_i + err_(i+1)).'
    )


Direction = Literal[
    'strictly-decreasing', 'strictly-increasing', 'constant', 'neither'
]


class MonotonicityReport(BaseModel):
    """Monotonicity of a sampled function on a grid."""

    quantity: str
    direction: Direction
    worst_violation: float = Field(
        description='Largest step against the reported direction (0 if none).'
    )
    grid_size: int
    extra: dict[str, float] = Field(default_factory=dict)


class HConditionReport(BaseModel):
    h_prime_positive: bool
    h_prime_margin: float
    symmetry_holds: bool
    symmetry_margin: float
    h_second_positive: bool
    h_second_margin: float

    @property
    def all_pass(self) -> bool:
        return (
            self.h_prime_positive
            and self.symmetry_holds
            and self.h_second_positive
        )


class BConditionReport(BaseModel):
    reflective: bool
    reflective_margin: float
    vanishes: bool
    vanishing_margin: float
    derivative_vanishes: bool
    derivative_margin: float


class BoundCheckReport(BaseModel):
    """Worst slack of |R'| and |R''| against their pointwise majorants."""

    first_slack: float
    second_slack: float
    holds: bool


class Extremum(BaseModel):
    x: float
    kind: Literal['min', 'max']


class CurvatureProfile(BaseModel):
    """Curvature samples on a grid symmetric about pi/2 and the extrema on (0, pi/2]."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    profile: Any
    samples: list[tuple[float, float]]
    extrema: list[Extremum]

    @model_validator(mode='after')
    def check_symmetry_and_alternation(self):
        for (x, g), (x_mirror, g_mirror) in zip(self.samples, reversed(self.samples)):
            if abs(x + x_mirror - math.pi) > 1e-12:
                raise ValueError(f'grid is not symmetric about pi/2 at x={x}')
            if abs(g - g_mirror) > 1e-8 * max(1.0, abs(g)):
                raise ValueError(f'G({x})={g} differs from G(pi - x)={g_mirror}')
        for left, right in zip(self.extrema, self.extrema[1:]):
            if right.x <= left.x or right.kind == left.kind:
                raise ValueError(f'extrema at {left.x} and {right.x} do not alternate')
        return self


class AlternationDiagnostics(BaseModel):
    """Diagnostics for the sign alternation of the curvature derivative on the t_k grid."""

    n: int
    delta: float
    eps0: float
    c_delta: float
    n0_band: int | None
    n0_deriv: int | None
    n1_threshold: int | None
    min_abs_b: float
    k_values: list[int]
    t_grid: list[float]
    f_values: list[float]
    eps_values: list[float | None]
    gprime_signs: list[int]
    gaps: list[int] = Field(
        default_factory=list, description='k with B(t_k)=0 (eps undefined).'
    )
    empty: bool
    f_bound: float
    bound_holds: bool
    sin2h_min: float
    sin2h_holds: bool
    eps_small: bool
    alternates: bool
    identity_residual: float

    @model_validator(mode='after')
    def check_grid(self):
        for t in self.t_grid:
            if not 0.0 <= t <= math.pi / 2 + 1e-12:
                raise ValueError(f't_k={t} outside [0, pi/2]')
        if self.delta > 0 and not self.eps0 > 0:
            raise ValueError('eps0 must be positive for positive delta')
        return self


class CheckResult(BaseModel):
    """Outcome of one verification check."""

    name: str
    claim: str
    passed: bool
    measured: dict[str, float | int | bool | str | None] = Field(
        default_factory=dict
    )
