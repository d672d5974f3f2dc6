import math

import numpy as np
import pytest

from hypothesis import given, settings
from hypothesis import strategies as st

from revsphere.common.errors import DomainError, UnreachableError
from revsphere.common.types import SurfacePoint
from revsphere.common.utils import centered_angle
from revsphere.geometry.geodesics import (
    GeodesicFan,
    canonical,
    cut_locus,
    cut_point_along,
    distance,
    geodesic_field,
    shoot,
)
from revsphere.geometry.profiles import make_lambda_profile, make_theorem_a, make_unit_sphere


def sphere_distance(a: SurfacePoint, b: SurfacePoint) -> float:
    cosine = math.cos(a.r) * math.cos(b.r) + math.sin(a.r) * math.sin(b.r) * math.cos(a.theta - b.theta)
    return math.acos(max(-1.0, min(1.0, cosine)))


@pytest.fixture(scope='module')
def sphere_fan(unit_sphere, base_point):
    return GeodesicFan(unit_sphere, base_point, size=1024)


def test_surface_point_normalisation():
    assert SurfacePoint(r=0.0, theta=2.0).theta == 0.0
    assert SurfacePoint(r=1.0, theta=-math.pi / 2).theta == pytest.approx(1.5 * math.pi)
    antipode = SurfacePoint(r=1.0, theta=0.5).antipode()
    assert antipode.r == pytest.approx(math.pi - 1.0)
    assert antipode.theta == pytest.approx(0.5 + math.pi)


def test_canonical_crosses_pole():
    r, theta, psi = canonical(np.array([math.pi + 0.1]), np.array([0.2]), np.array([0.0]))
    assert r[0] == pytest.approx(math.pi - 0.1)
    assert theta[0] == pytest.approx(0.2 + math.pi)
    assert psi[0] == pytest.approx(math.pi)


def test_shoot_meridian(unit_sphere):
    path = shoot(unit_sphere, SurfacePoint(r=math.pi / 4, theta=0.0), 0.0, 1.0)
    assert path.r[-1] == pytest.approx(math.pi / 4 + 1.0, abs=1e-9)
    assert np.all(path.theta == 0.0)
    assert path.nu == 0.0
    assert path.clairaut_drift == 0.0


def test_shoot_from_pole(unit_sphere):
    path = shoot(unit_sphere, SurfacePoint(r=0.0), 1.0, math.pi / 2)
    assert path.r[-1] == pytest.approx(math.pi / 2, abs=1e-9)
    assert path.theta[-1] == pytest.approx(1.0, abs=1e-9)


def test_shoot_turning_points(unit_sphere):
    path = shoot(unit_sphere, SurfacePoint(r=math.pi / 2, theta=0.0), math.pi / 4, 2.0 * math.pi)
    assert path.turning_points == pytest.approx([math.pi / 2, 1.5 * math.pi], abs=1e-6)
    assert np.max(path.r) == pytest.approx(math.pi / 2 + math.pi / 4, abs=1e-4)


def test_shoot_rejects_length(unit_sphere):
    with pytest.raises(DomainError):
        shoot(unit_sphere, SurfacePoint(r=1.0), 0.3, 0.0)


@given(
    st.sampled_from([make_unit_sphere(), make_lambda_profile(4.0), make_theorem_a(4)]),
    st.floats(min_value=0.1, max_value=math.pi - 0.1),
    st.floats(min_value=0.0, max_value=2.0 * math.pi),
)
@settings(max_examples=15, deadline=None)
def test_clairaut_constant_is_conserved(p, r0, xi):
    path = shoot(p, SurfacePoint(r=r0, theta=0.3), xi, 2.0 * math.pi, tol=1e-10)
    assert path.clairaut_drift <= 1e-8


def test_clairaut_drift_steep_theorem_a_shot():
    path = shoot(make_theorem_a(8), SurfacePoint(r=0.2944, theta=2.0), 0.4190, 2.0 * math.pi, tol=1e-10)
    assert path.clairaut_drift <= 1e-8


def test_shots_mirror_under_negated_direction(lambda4):
    start = SurfacePoint(r=math.pi / 3, theta=0.0)
    east = shoot(lambda4, start, 0.7, 2.0 * math.pi)
    west = shoot(lambda4, start, -0.7, 2.0 * math.pi)
    np.testing.assert_allclose(east.r, west.r, atol=1e-8)
    np.testing.assert_allclose(centered_angle(east.theta + west.theta), 0.0, atol=1e-8)
    np.testing.assert_allclose(centered_angle(east.psi + west.psi), 0.0, atol=1e-8)
    assert east.nu == pytest.approx(-west.nu, abs=1e-15)


def test_equatorial_reflection_is_a_geodesic(lambda4):
    length, count = 2.0, 20001
    path = shoot(lambda4, SurfacePoint(r=math.pi / 3, theta=0.0), 1.0, length, samples=count)
    ds = length / (count - 1)
    r = math.pi - path.r[::-1]
    theta = np.unwrap(path.theta)[::-1]
    psi = -np.unwrap(path.psi)[::-1]
    derivative = np.concatenate([np.gradient(v, ds)[1:-1] for v in (r, theta, psi)])
    field = geodesic_field(lambda4)(0.0, np.concatenate((r[1:-1], theta[1:-1], psi[1:-1])))
    assert np.max(np.abs(derivative - field)) <= 1e-6


def test_fan_distance_matches_sphere(unit_sphere, base_point, sphere_fan):
    for target in (SurfacePoint(r=math.pi / 2, theta=0.5), SurfacePoint(r=0.4, theta=2.0)):
        length, _ = sphere_fan.distance(target)
        assert length == pytest.approx(sphere_distance(base_point, target), abs=5e-5)


def test_refined_distance(unit_sphere, base_point):
    target = SurfacePoint(r=2.0, theta=1.0)
    length, xi = distance(unit_sphere, base_point, target, fan_size=256)
    assert length == pytest.approx(sphere_distance(base_point, target), abs=1e-6)
    end = shoot(unit_sphere, base_point, xi, length)
    assert end.r[-1] == pytest.approx(target.r, abs=1e-5)


def test_antipode_distance(unit_sphere, base_point):
    length, _ = distance(unit_sphere, base_point, base_point.antipode(), fan_size=1024)
    assert length == pytest.approx(math.pi, abs=1e-4)


def test_distance_along_a_minimizing_shot(lambda4):
    start = SurfacePoint(r=math.pi / 3, theta=0.0)
    path = shoot(lambda4, start, 0.9, 0.9, samples=4)
    for s, r, theta in zip(path.s[1:], path.r[1:], path.theta[1:]):
        length, _ = distance(lambda4, start, SurfacePoint(r=float(r), theta=float(theta)), fan_size=256)
        assert length == pytest.approx(s, abs=1e-5)


def test_distance_is_symmetric(lambda4):
    a, b = SurfacePoint(r=math.pi / 3, theta=0.0), SurfacePoint(r=2.0, theta=1.2)
    there, _ = distance(lambda4, a, b, fan_size=256)
    back, _ = distance(lambda4, b, a, fan_size=256)
    assert there == pytest.approx(back, abs=1e-5)


def test_distance_below_parallel_arc(lambda4):
    r0 = math.pi / 3
    length, _ = distance(lambda4, SurfacePoint(r=r0, theta=0.0), SurfacePoint(r=r0, theta=0.3), fan_size=256)
    assert length < float(lambda4.m(r0)) * 0.3


def test_pole_to_pole(theorem_a8):
    length, _ = distance(theorem_a8, SurfacePoint(r=0.0), SurfacePoint(r=math.pi), fan_size=256)
    assert length == pytest.approx(math.pi, abs=1e-4)


def test_distance_fan_size_guard(unit_sphere, base_point):
    with pytest.raises(DomainError):
        distance(unit_sphere, base_point, base_point.antipode(), fan_size=64)


def test_short_fan_is_unreachable(unit_sphere, base_point):
    fan = GeodesicFan(unit_sphere, base_point, size=64, reach=0.5)
    with pytest.raises(UnreachableError):
        fan.distance(base_point.antipode())


def test_cut_point_on_sphere_is_antipode(unit_sphere, base_point, sphere_fan):
    point, length = cut_point_along(unit_sphere, base_point, 0.7, fan=sphere_fan)
    assert point is not None
    assert point.r == pytest.approx(2.0 * math.pi / 3, abs=5e-4)
    assert length == pytest.approx(math.pi, abs=5e-3)


def test_cut_point_rejects_pole(unit_sphere):
    with pytest.raises(DomainError):
        cut_point_along(unit_sphere, SurfacePoint(r=0.0), 0.5, fan_size=256)


def test_cut_locus_sphere(unit_sphere, base_point):
    arc = cut_locus(unit_sphere, base_point, fan_size=512, directions=8)
    assert arc.passed
    assert arc.parallel_r == pytest.approx(2.0 * math.pi / 3)
    assert len(arc.per_direction) == 8
    assert arc.max_radial_deviation <= 5e-4
    assert not arc.on_equator


def test_cut_locus_direction_guard(unit_sphere, base_point):
    with pytest.raises(DomainError):
        cut_locus(unit_sphere, base_point, fan_size=256, directions=1)


def test_cut_locus_mirrors_under_negated_direction(lambda4):
    start = SurfacePoint(r=math.pi / 4, theta=0.0)
    arc = cut_locus(lambda4, start, fan_size=1024, directions=8)
    cuts = arc.per_direction
    for k in range(1, 8):
        cut, mirror = cuts[k], cuts[8 - k]
        assert cut.xi + mirror.xi == pytest.approx(2.0 * math.pi)
        assert (cut.point is None) == (mirror.point is None)
        if cut.point is None:
            continue
        assert cut.point.r == pytest.approx(mirror.point.r, abs=1e-6)
        assert float(centered_angle(cut.point.theta + mirror.point.theta)) == pytest.approx(0.0, abs=1e-6)
        assert cut.distance == pytest.approx(mirror.distance, abs=1e-6)
    low, high = arc.theta_interval
    assert low + high == pytest.approx(2.0 * math.pi, abs=1e-6)


@pytest.mark.slow
def test_cut_locus_theorem_a(theorem_a8):
    arc = cut_locus(theorem_a8, SurfacePoint(r=math.pi / 3, theta=0.0), fan_size=4096, directions=64)
    assert arc.passed
    assert arc.max_radial_deviation <= 5e-4


@pytest.mark.slow
def test_cut_locus_lambda(lambda4):
    arc = cut_locus(lambda4, SurfacePoint(r=math.pi / 4, theta=0.0), fan_size=4096, directions=64)
    assert arc.passed
    assert all(cut.point.r == pytest.approx(3.0 * math.pi / 4, abs=5e-4) for cut in arc.per_direction)
