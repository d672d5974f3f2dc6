import io
import json
import math

import numpy as np
import pandas as pd
import pytest

from click.testing import CliRunner

from revsphere import main
from revsphere.cli.checks import REGISTRY
from revsphere.common.utils import closed_grid
from revsphere.geometry.profiles import make_unit_sphere


@pytest.fixture
def runner():
    return CliRunner()


def read_csv(text: str) -> pd.DataFrame:
    return pd.read_csv(io.StringIO(text), comment='#', float_precision='round_trip')


def summary_lines(text: str) -> dict[str, str]:
    lines = [line[2:] for line in text.splitlines() if line.startswith('# ')]
    return dict(line.split(': ', 1) for line in lines)


def test_profile_unit_sphere(runner):
    result = runner.invoke(main, ['profile', '--family', 'unit-sphere', '--samples', '10'])
    assert result.exit_code == 0
    frame = read_csv(result.stdout)
    assert list(frame.columns) == ['r', 'm', 'dm', 'd2m', 'curvature']
    assert len(frame) == 10
    np.testing.assert_allclose(frame['curvature'], 1.0, rtol=1e-12)


def test_profile_csv_round_trip(runner):
    result = runner.invoke(main, ['profile', '--samples', '33'])
    frame = read_csv(result.stdout)
    r = closed_grid(0.0, math.pi, 33)
    np.testing.assert_array_equal(frame['r'].to_numpy(), r)
    np.testing.assert_array_equal(frame['m'].to_numpy(), make_unit_sphere().m(r))


def test_profile_lambda_curvature_minimum(runner):
    result = runner.invoke(main, ['profile', '--family', 'lambda', '--lambda', '8', '--samples', '721'])
    frame = read_csv(result.stdout)
    quarter = frame[frame['r'] <= math.pi / 2]
    r_min = quarter['r'].iloc[int(np.argmin(quarter['curvature'].to_numpy()))]
    assert r_min == pytest.approx(math.pi / 3, abs=math.pi / 720)


def test_profile_theorem_a_equator(runner):
    result = runner.invoke(main, ['profile', '--family', 'theorem-a', '--n', '10', '--samples', '201'])
    frame = read_csv(result.stdout)
    row = frame.iloc[int(np.argmin(np.abs(frame['r'].to_numpy() - math.pi / 2)))]
    assert row['m'] == pytest.approx(3.0, abs=1e-12)


def test_profile_json(runner):
    result = runner.invoke(main, ['profile', '--samples', '5', '--format', 'json'])
    document = json.loads(result.stdout)
    assert document['schema_version'] == 1
    assert document['tool'] == 'revsphere'
    assert document['command'] == 'profile'
    assert document['family'] == {'b': 'sin2sq', 'name': 'unit-sphere'}
    assert len(document['columns']['r']) == 5


@pytest.mark.parametrize(
    'args',
    [
        ['profile', '--family', 'lambda'],
        ['profile', '--family', 'lambda', '--lambda', '-1'],
        ['profile', '--family', 'theorem-a', '--n', '1'],
        ['profile', '--family', 'h', '--alpha', '0.7'],
        ['profile', '--family', 'h', '--alpha', '0.3', '--b', 'cubic'],
        ['profile', '--family', 'sphere'],
        ['cutlocus', '--r0', '4.0'],
        ['cutlocus', '--samples', '100'],
        ['extrema', '--interval', '0.9,0.6'],
    ],
)
def test_usage_errors(runner, args):
    assert runner.invoke(main, args).exit_code == 2


def test_halfperiod_unit_sphere(runner):
    result = runner.invoke(main, ['halfperiod', '--samples', '10'])
    assert result.exit_code == 0
    frame = read_csv(result.stdout)
    assert list(frame.columns) == ['nu', 'phi', 'err']
    np.testing.assert_allclose(frame['phi'], math.pi, atol=1e-7)
    assert summary_lines(result.stdout)['strictly_decreasing'] == 'false'


def test_halfperiod_lambda(runner):
    result = runner.invoke(main, ['halfperiod', '--family', 'lambda', '--lambda', '4', '--samples', '20'])
    assert result.exit_code == 0
    assert summary_lines(result.stdout)['strictly_decreasing'] == 'true'


def test_halfperiod_json_to_file(runner, tmp_path):
    out = tmp_path / 'table.json'
    result = runner.invoke(
        main,
        ['halfperiod', '--family', 'lambda', '--lambda', '1', '--samples', '8', '--format', 'json', '--out', str(out)],
    )
    assert result.exit_code == 0
    document = json.loads(out.read_text())
    assert document['strictly_decreasing'] is True
    assert len(document['columns']['phi']) == 8


def test_cutlocus_unit_sphere(runner):
    result = runner.invoke(main, ['cutlocus', '--fan', '256', '--directions', '4'])
    assert result.exit_code == 0
    frame = read_csv(result.stdout)
    assert list(frame.columns) == ['xi', 'cut_r', 'cut_theta', 'cut_distance']
    assert len(frame) == 4
    np.testing.assert_allclose(frame['cut_r'], 2.0 * math.pi / 3, atol=5e-4)
    np.testing.assert_allclose(frame['cut_distance'], math.pi, atol=5e-3)
    assert summary_lines(result.stdout)['passed'] == 'true'


def test_extrema_unit_sphere(runner):
    result = runner.invoke(main, ['extrema'])
    assert result.exit_code == 0
    document = json.loads(result.stdout)
    assert document['count'] == 0
    assert document['diagnostics'] is None


def test_extrema_theorem_a_alternation(runner):
    result = runner.invoke(main, ['extrema', '--family', 'theorem-a', '--n', '12', '--interval', '0.6,0.9', '--delta', '0.5'])
    assert result.exit_code == 0
    document = json.loads(result.stdout)
    assert document['count'] >= 20
    assert document['diagnostics']['alternates'] is True
    assert len(document['locations']) == document['count']


def test_verify_list_checks(runner):
    result = runner.invoke(main, ['verify', '--list-checks'])
    assert result.exit_code == 0
    names = [line.split(':', 1)[0] for line in result.stdout.splitlines()]
    assert names == list(REGISTRY)
    assert 'curvature-min' in names


def test_verify_curvature_min(runner):
    result = runner.invoke(main, ['verify', '--family', 'lambda', '--lambda', '8', '--check', 'curvature-min'])
    assert result.exit_code == 0
    document = json.loads(result.stdout)
    assert document['passed'] is True
    (entry,) = document['checks']
    assert entry['name'] == 'curvature-min'
    assert entry['measured']['error'] <= 1e-6


def test_verify_sin_multiple_bound(runner):
    result = runner.invoke(main, ['verify', '--check', 'sin-multiple-bound', '--n-max', '50'])
    assert result.exit_code == 0
    (entry,) = json.loads(result.stdout)['checks']
    assert entry['passed'] is True
    assert entry['measured']['worst'] <= 1e-12


def test_verify_unknown_check(runner):
    assert runner.invoke(main, ['verify', '--check', 'no-such-check']).exit_code == 2


def test_verify_clairaut_drift(runner):
    result = runner.invoke(main, ['verify', '--check', 'clairaut-drift'])
    assert result.exit_code == 0
    (entry,) = json.loads(result.stdout)['checks']
    assert entry['passed'] is True
    assert entry['measured']['shots'] == 100
    assert entry['measured']['worst_drift'] <= 1e-8


def test_verify_is_deterministic(runner):
    args = ['verify', '--check', 'h-triple-prime-closed-form', '--check', 'b-conditions', '--check', 'sin-multiple-bound']
    first = runner.invoke(main, args)
    second = runner.invoke(main, args)
    assert first.exit_code == 0
    assert first.stdout == second.stdout


def test_verify_csv(runner):
    result = runner.invoke(main, ['verify', '--check', 'b-conditions', '--format', 'csv'])
    frame = read_csv(result.stdout)
    assert list(frame['name']) == ['b-conditions']
    assert bool(frame['passed'].iloc[0])


@pytest.mark.slow
def test_verify_full_suite(runner):
    result = runner.invoke(main, ['verify'])
    assert result.exit_code == 0
    assert json.loads(result.stdout)['passed'] is True


@pytest.mark.slow
def test_verify_quick_cut_loci(runner):
    result = runner.invoke(main, ['verify', '--quick', '--check', 'cut-locus-theorem-a', '--check', 'cut-locus-lambda'])
    assert result.exit_code == 0
