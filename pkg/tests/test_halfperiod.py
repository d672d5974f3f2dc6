import math

import numpy as np
import pytest

from hypothesis import given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from revsphere.common.errors import DomainError
from revsphere.common.types import FamilyTag, HalfPeriodEntry, HalfPeriodTable, SurfacePoint
from revsphere.common.utils import centered_angle
from revsphere.geometry.curvature import gaussian_curvature
from revsphere.geometry.geodesics import shoot
from revsphere.geometry.halfperiod import (
    a_function,
    a_function_profile,
    classify_monotonicity,
    criterion_A_monotone,
    criterion_ff,
    f_function,
    first_crossing_length,
    half_period,
    half_period_direct,
    monotonicity_report,
    swept_angle_direct,
    u_substitution,
)
from revsphere.geometry.profiles import make_lambda_profile, make_theorem_a, make_unit_sphere


@pytest.mark.parametrize('nu', np.arange(1, 10) / 10.0)
def test_unit_sphere_half_period(unit_sphere, nu):
    phi, err = half_period(unit_sphere, float(nu))
    assert phi == pytest.approx(math.pi, abs=1e-7)
    assert err >= 0.0
    phi_direct, _ = half_period_direct(unit_sphere, float(nu))
    assert phi_direct == pytest.approx(phi, abs=1e-6)


@given(st.floats(min_value=0.02, max_value=0.98))
@settings(max_examples=20, deadline=None)
def test_unit_sphere_half_period_any_nu(nu):
    assert half_period(make_unit_sphere(), nu)[0] == pytest.approx(math.pi, abs=1e-7)


@pytest.mark.parametrize('fixture', ['lambda1', 'lambda4'])
def test_half_period_paths_agree(request, fixture):
    p = request.getfixturevalue(fixture)
    for nu in (0.1 * p.a, 0.5 * p.a, 0.9 * p.a):
        assert half_period(p, nu)[0] == pytest.approx(half_period_direct(p, nu)[0], abs=1e-6)


def test_half_period_paths_agree_theorem_a():
    p = make_theorem_a(6)
    for nu in (0.3, 1.5, 2.7):
        assert half_period(p, nu)[0] == pytest.approx(half_period_direct(p, nu)[0], abs=1e-6)


@pytest.mark.parametrize('fixture', ['lambda1', 'lambda4', 'theorem_a8'])
def test_half_period_limit_at_equator(request, fixture):
    p = request.getfixturevalue(fixture)
    expected = math.pi / (p.a * math.sqrt(gaussian_curvature(p, math.pi / 2)))
    phi, _ = half_period(p, p.a * (1.0 - 1e-4))
    assert phi == pytest.approx(expected, abs=1e-2)


@pytest.mark.parametrize('fraction', [0.1, 0.5, 0.9])
def test_half_period_stable_under_tighter_tol(lambda4, fraction):
    nu = fraction * lambda4.a
    phi, err = half_period(lambda4, nu, tol=1e-9)
    finer, _ = half_period(lambda4, nu, tol=5e-10)
    assert abs(phi - finer) <= err + 1e-13


@pytest.mark.parametrize('nu', [0.0, 1.0, 1.5, -0.2])
def test_half_period_domain(unit_sphere, nu):
    with pytest.raises(DomainError):
        half_period(unit_sphere, nu)


def test_half_period_direct_near_equator(unit_sphere):
    with pytest.raises(DomainError):
        half_period_direct(unit_sphere, 0.9995)


def test_a_function_unit_sphere(unit_sphere):
    for x in (0.0, 0.3, 1.0, math.pi / 2 - 1e-7, math.pi / 2):
        assert a_function(unit_sphere, x) == pytest.approx(1.0, abs=1e-9)


def test_a_function_closed_forms(lambda4, h_family):
    x = np.linspace(0.01, 1.56, 100)
    for p in (lambda4, h_family):
        generic = np.array([a_function(p, float(t)) for t in x])
        np.testing.assert_allclose(generic, p.closed_a_function(x), atol=1e-9)


def test_a_function_profile_endpoints(h_family):
    profile = a_function_profile(make_lambda_profile(3.0), 201)
    assert profile.values[0] == pytest.approx(profile.a)
    assert profile.equator_limit == pytest.approx(0.5, abs=1e-6)
    h_profile = a_function_profile(h_family, 201)
    products = np.array(h_profile.values) * h_family.gen.dh(np.array(h_profile.x))
    np.testing.assert_allclose(products, 1.0, atol=1e-6)


def test_a_function_domain(unit_sphere):
    with pytest.raises(DomainError):
        a_function(unit_sphere, 2.0)


def test_f_function_vanishes_at_equator(lambda1, theorem_a8):
    for p in (lambda1, theorem_a8):
        assert f_function(p, math.pi / 2) == pytest.approx(0.0, abs=1e-10)


def test_u_substitution_limits():
    assert u_substitution(0.0, 0.4, 2.0) == pytest.approx(0.16)
    assert u_substitution(1e8, 0.4, 2.0) == pytest.approx(4.0, rel=1e-9)
    tau = np.linspace(0.0, 10.0, 50)
    assert np.all(np.diff(u_substitution(tau, 0.4, 2.0)) > 0.0)


def test_swept_angle_tangential_unit_sphere(unit_sphere):
    r0 = math.pi / 4
    nu = math.sin(r0)
    assert swept_angle_direct(unit_sphere, r0, nu) == pytest.approx(math.pi, abs=1e-7)
    assert first_crossing_length(unit_sphere, r0, nu) == pytest.approx(math.pi, abs=1e-7)


def test_swept_angle_meridian(lambda4):
    assert swept_angle_direct(lambda4, 0.5, 0.0) == 0.0
    assert first_crossing_length(lambda4, 0.5, 0.0) == pytest.approx(math.pi - 1.0)


def test_swept_angle_increases_with_nu(lambda4):
    r0 = math.pi / 3
    m0 = float(lambda4.m(r0))
    swept = [swept_angle_direct(lambda4, r0, nu) for nu in np.linspace(0.05, 1.0, 20) * m0]
    assert np.all(np.diff(swept) > 0.0)


@pytest.mark.parametrize('k', range(1, 11))
def test_swept_angle_matches_shot(lambda4, k):
    r0 = math.pi / 3
    xi = math.asin(k / 11.0)
    nu = float(lambda4.m(r0)) * math.sin(xi)
    length = first_crossing_length(lambda4, r0, nu)
    path = shoot(lambda4, SurfacePoint(r=r0, theta=0.0), xi, length, tol=1e-11)
    swept = swept_angle_direct(lambda4, r0, nu)
    assert float(centered_angle(path.theta[-1] - swept)) == pytest.approx(0.0, abs=1e-6)
    assert path.r[-1] == pytest.approx(math.pi - r0, abs=1e-6)


@pytest.mark.parametrize('r0,nu', [(0.0, 0.1), (1.8, 0.1), (0.5, 0.9)])
def test_swept_angle_domain(unit_sphere, r0, nu):
    with pytest.raises(DomainError):
        swept_angle_direct(unit_sphere, r0, nu)


def test_classify_monotonicity():
    assert classify_monotonicity('q', [3.0, 2.0, 1.0]).direction == 'strictly-decreasing'
    assert classify_monotonicity('q', [1.0, 2.0, 3.0]).direction == 'strictly-increasing'
    assert classify_monotonicity('q', [1.0, 1.0, 1.0]).direction == 'constant'
    report = classify_monotonicity('q', [1.0, 3.0, 2.0])
    assert report.direction == 'neither'
    assert report.worst_violation == pytest.approx(1.0)
    assert report.grid_size == 3


def test_criterion_ff(lambda1, lambda8):
    report = criterion_ff(lambda1, grid_size=200)
    assert report.direction == 'strictly-increasing'
    assert 'min_f' in report.extra
    assert criterion_ff(lambda8, grid_size=200).direction == 'neither'


def test_criterion_a(lambda4, theorem_a8, unit_sphere):
    assert criterion_A_monotone(lambda4, grid_size=200).direction == 'strictly-decreasing'
    assert criterion_A_monotone(theorem_a8, grid_size=200).direction == 'strictly-decreasing'
    assert criterion_A_monotone(unit_sphere, grid_size=200).direction == 'constant'


def test_monotonicity_report_lambda(lambda4):
    report = monotonicity_report(lambda4, nu_grid_size=20)
    assert report.strictly_decreasing
    assert not report.strictly_increasing
    assert report.worst_margin > 0.0
    assert len(report.table.entries) == 20
    assert report.table.family.kind == 'lambda'


def test_monotonicity_report_unit_sphere(unit_sphere):
    report = monotonicity_report(unit_sphere, nu_grid_size=10)
    assert not report.strictly_decreasing
    assert not report.strictly_increasing
    assert all(e.phi == pytest.approx(math.pi, abs=1e-7) for e in report.table.entries)


def test_monotonicity_report_needs_two_points(unit_sphere):
    with pytest.raises(ValueError):
        monotonicity_report(unit_sphere, nu_grid_size=1)


@pytest.mark.slow
@pytest.mark.parametrize('lam', [1.0, 4.0, 10.0])
def test_lambda_tables_strictly_decreasing(lam):
    assert monotonicity_report(make_lambda_profile(lam), nu_grid_size=50).strictly_decreasing


def test_half_period_table_validation():
    with pytest.raises(ValidationError):
        HalfPeriodTable(
            a=1.0,
            family=FamilyTag(kind='unit-sphere'),
            entries=[HalfPeriodEntry(nu=1.5, phi=math.pi, err=0.0)],
        )
