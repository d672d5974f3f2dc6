import math

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from revsphere.common.types import Interval, SurfacePoint
from revsphere.geometry.profiles import (
    MetricProfile,
    b_from_choice,
    h_generator,
    make_h_profile,
    make_lambda_profile,
    make_theorem_a,
    make_unit_sphere,
)


FamilyName = Literal['unit-sphere', 'lambda', 'h', 'theorem-a']
OutputFormat = Literal['csv', 'json']


class FamilySpec(BaseModel):
    """Family name plus the parameters it needs."""

    model_config = ConfigDict(frozen=True)

    name: FamilyName = Field(description='Metric family.')
    lam: float | None = Field(default=None, description='lambda of the lambda-family.')
    alpha: float | None = Field(default=None, description='alpha of h-generated metrics.')
    n: int | None = Field(default=None, description='Perturbation index.')
    b: str = Field(default='sin2sq', description='Perturbation amplitude choice.')

    @model_validator(mode='after')
    def check_parameters(self):
        if self.name == 'lambda' and self.lam is None:
            raise ValueError('--lambda is required for the lambda family')
        if self.name == 'h' and self.alpha is None:
            raise ValueError('--alpha is required for the h family')
        if self.name == 'theorem-a' and self.n is None:
            raise ValueError('--n is required for the theorem-a family')
        # domain errors surface here, before any computation
        self.build()
        return self

    def build(self) -> MetricProfile:
        if self.name == 'unit-sphere':
            return make_unit_sphere()
        if self.name == 'lambda':
            return make_lambda_profile(self.lam)
        if self.name == 'theorem-a':
            return make_theorem_a(self.n)
        gen = h_generator(self.alpha, self.n or 0, b_from_choice(self.b))
        return make_h_profile(gen)

    def describe(self) -> dict[str, float | int | str]:
        return self.model_dump(exclude_none=True)


class RunConfig(BaseModel):
    """Validated settings of one CLI invocation."""

    command: Literal['profile', 'halfperiod', 'cutlocus', 'extrema', 'verify']
    family: FamilySpec
    samples: int = Field(default=200, ge=2, description='Grid size.')
    tol: float | None = Field(default=None, gt=0.0, lt=1e-2, description='Numerical tolerance.')
    fan: int = Field(default=4096, ge=16, description='Geodesic fan size.')
    directions: int = Field(default=64, ge=2, description='Refined cut-locus directions.')
    r0: float = Field(default=math.pi / 3, description='Base point radial coordinate.')
    theta0: float = Field(default=0.0, description='Base point angle.')
    interval: tuple[float, float] = Field(
        default=(0.6, 0.9), description='Interval of the sign-alternation diagnostics.'
    )
    delta: float = Field(default=0.5, gt=0.0, lt=math.pi / 3)
    format: OutputFormat | None = None
    out: Path | None = None
    checks: tuple[str, ...] = ()
    quick: bool = False
    n_max: int = Field(default=50, ge=1)

    @model_validator(mode='after')
    def check_ranges(self):
        if not 0.0 < self.r0 < math.pi:
            raise ValueError(f'--r0 must lie in (0, pi), got {self.r0}')
        if self.directions > self.fan:
            raise ValueError('--directions must not exceed --fan')
        lo, hi = self.interval
        if not 0.0 < lo < hi < math.pi / 2:
            raise ValueError(f'--interval must satisfy 0 < lo < hi < pi/2, got {self.interval}')
        return self

    @property
    def base(self) -> SurfacePoint:
        return SurfacePoint(r=self.r0, theta=self.theta0)

    @property
    def band(self) -> Interval:
        return Interval(lo=self.interval[0], hi=self.interval[1])

    def output_format(self, default: OutputFormat) -> OutputFormat:
        return self.format or default
