"""revsphere command line: profile, halfperiod, cutlocus, extrema and verify."""

import functools
import json
import logging
import math
import sys

import click
import numpy as np
import pandas as pd

from pydantic import ValidationError

from revsphere.cli.checks import REGISTRY, run_checks
from revsphere.cli.config import FamilySpec, RunConfig
from revsphere.cli.output import frame_columns, write_csv, write_json
from revsphere.common.types import Interval
from revsphere.common.utils import closed_grid, config_logging
from revsphere.geometry.curvature import (
    alternation_diagnostics,
    count_extrema,
    gaussian_curvature,
)
from revsphere.geometry.geodesics import cut_locus
from revsphere.geometry.halfperiod import monotonicity_report
from revsphere.numerics import DEFAULT_TOL


logger = logging.getLogger(__name__)

DEFAULT_SAMPLES = {
    'profile': 200,
    'halfperiod': 50,
    'extrema': 4000,
    'verify': 1000,
}
CUT_TOL = 1e-9


def _parse_interval(ctx, param, value):
    if value is None:
        return None
    try:
        lo, hi = (float(part) for part in value.split(','))
    except ValueError:
        raise click.BadParameter('expected LO,HI') from None
    return lo, hi


def family_options(fn):
    """Options shared by every subcommand."""
    options = [
        click.option(
            '--family',
            'family',
            type=click.Choice(['unit-sphere', 'lambda', 'h', 'theorem-a']),
            default='unit-sphere',
            help='Metric family',
        ),
        click.option('--lambda', 'lam', type=float, help='lambda of the lambda-family'),
        click.option('--alpha', 'alpha', type=float, help='alpha of an h-generated metric'),
        click.option('--n', 'n', type=int, help='Perturbation index'),
        click.option(
            '--b',
            'b',
            default='sin2sq',
            help='Perturbation amplitude: sin2sq, zero or sin2sq-poly:c0,c1,...',
        ),
        click.option('--tol', 'tol', type=float, help='Numerical tolerance'),
        click.option(
            '--format',
            'fmt',
            type=click.Choice(['csv', 'json']),
            help='Output format',
        ),
        click.option('--out', 'out', type=click.Path(dir_okay=False), help='Output file (default stdout)'),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


samples_option = click.option('--samples', 'samples', type=int, help='Grid size')


def build_config(
    command: str, family: str, lam, alpha, n, b, fmt, out, samples=None, **extra
) -> RunConfig:
    """Validate flags into a RunConfig; invalid values are usage errors.

    Commands without a grid (cutlocus) take no --samples.
    """
    if command in DEFAULT_SAMPLES:
        extra['samples'] = samples or DEFAULT_SAMPLES[command]
    try:
        spec = FamilySpec(name=family, lam=lam, alpha=alpha, n=n, b=b)
        return RunConfig(
            command=command,
            family=spec,
            format=fmt,
            out=out,
            **{key: value for key, value in extra.items() if value is not None},
        )
    except ValidationError as e:
        messages = '; '.join(error['msg'] for error in e.errors())
        raise click.UsageError(messages) from None
    except ValueError as e:
        raise click.UsageError(str(e)) from None


def guarded(fn):
    """Run a command body, logging unexpected failures and exiting with status 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except click.ClickException:
            raise
        except Exception as e:
            logger.error(f'An error occurred: {e}')
            sys.exit(1)

    return wrapper


@click.group()
@click.option(
    '--log-level',
    'log_level',
    type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False),
    help='Overrides REVSPHERE_LOG_LEVEL',
)
def main(log_level) -> None:
    """Numerics for 2-spheres of revolution."""
    config_logging(log_level)


@main.command()
@family_options
@samples_option
def profile(**options) -> None:
    """Tabulate m, m', m'' and the Gaussian curvature on [0, pi]."""
    config = build_config('profile', **options)
    _run_profile(config)


@guarded
def _run_profile(config: RunConfig) -> None:
    p = config.family.build()
    r = closed_grid(0.0, math.pi, config.samples)
    frame = pd.DataFrame(
        {
            'r': r,
            'm': p.m(r),
            'dm': p.dm(r),
            'd2m': p.d2m(r),
            'curvature': gaussian_curvature(p, r),
        }
    )
    summary = {'family': config.family.describe(), 'a': p.a}
    if config.output_format('csv') == 'csv':
        write_csv(frame, config.out, summary)
    else:
        write_json({**summary, 'columns': frame_columns(frame)}, config.out, 'profile')


@main.command()
@family_options
@samples_option
def halfperiod(**options) -> None:
    """Tabulate the half period function on a uniform nu grid."""
    config = build_config('halfperiod', **options)
    _run_halfperiod(config)


@guarded
def _run_halfperiod(config: RunConfig) -> None:
    p = config.family.build()
    report = monotonicity_report(p, nu_grid_size=config.samples, tol=config.tol or DEFAULT_TOL)
    frame = pd.DataFrame([entry.model_dump() for entry in report.table.entries], columns=['nu', 'phi', 'err'])
    summary = {
        'family': config.family.describe(),
        'a': report.table.a,
        'strictly_decreasing': report.strictly_decreasing,
        'strictly_increasing': report.strictly_increasing,
        'worst_margin': report.worst_margin,
    }
    if config.output_format('csv') == 'csv':
        write_csv(frame, config.out, summary)
    else:
        write_json({**summary, 'columns': frame_columns(frame)}, config.out, 'halfperiod')


@main.command()
@family_options
@click.option('--fan', 'fan', type=int, default=4096, help='Geodesic fan size')
@click.option('--directions', 'directions', type=int, default=64, help='Refined fan directions')
@click.option('--r0', 'r0', type=float, default=math.pi / 3, help='Base point r')
@click.option('--theta0', 'theta0', type=float, default=0.0, help='Base point theta')
def cutlocus(**options) -> None:
    """Cut points of a base point along refined fan directions."""
    config = build_config('cutlocus', **options)
    if not _run_cutlocus(config):
        sys.exit(1)


@guarded
def _run_cutlocus(config: RunConfig) -> bool:
    p = config.family.build()
    arc = cut_locus(
        p,
        config.base,
        fan_size=config.fan,
        tol=config.tol or CUT_TOL,
        directions=config.directions,
    )
    rows = [
        {
            'xi': cut.xi,
            'cut_r': cut.point.r if cut.point else np.nan,
            'cut_theta': cut.point.theta if cut.point else np.nan,
            'cut_distance': cut.distance if cut.distance is not None else np.nan,
        }
        for cut in arc.per_direction
    ]
    frame = pd.DataFrame(rows, columns=['xi', 'cut_r', 'cut_theta', 'cut_distance'])
    summary = {
        'family': config.family.describe(),
        'base': [arc.base.r, arc.base.theta],
        'parallel_r': arc.parallel_r,
        'max_radial_deviation': arc.max_radial_deviation,
        'theta_interval': list(arc.theta_interval),
        'on_equator': arc.on_equator,
        'passed': arc.passed,
    }
    if config.output_format('csv') == 'csv':
        write_csv(frame, config.out, summary)
    else:
        write_json({**summary, 'columns': frame_columns(frame)}, config.out, 'cutlocus')
    return arc.passed


@main.command()
@family_options
@samples_option
@click.option(
    '--interval',
    'interval',
    callback=_parse_interval,
    help='LO,HI of the sign-alternation band (default 0.6,0.9)',
)
@click.option('--delta', 'delta', type=float, help='delta of the band constants (default 0.5)')
def extrema(**options) -> None:
    """Count curvature extrema on (0, pi/2) and report the sign-alternation diagnostics."""
    config = build_config('extrema', **options)
    _run_extrema(config)


@guarded
def _run_extrema(config: RunConfig) -> None:
    p = config.family.build()
    gen = p.generator
    grid = config.samples
    if gen is not None and gen.perturbed:
        grid = max(grid, 16 * gen.n * gen.n)
    count, found = count_extrema(p, Interval(lo=0.0, hi=math.pi / 2), grid)
    diagnostics = None
    if gen is not None and gen.n >= 2:
        diagnostics = alternation_diagnostics(gen, config.band, config.delta).model_dump()
    payload = {
        'family': config.family.describe(),
        'count': count,
        'locations': [e.x for e in found],
        'kinds': [e.kind for e in found],
        'diagnostics': diagnostics,
    }
    if config.output_format('json') == 'json':
        write_json(payload, config.out, 'extrema')
    else:
        frame = pd.DataFrame({'x': payload['locations'], 'kind': payload['kinds']}, columns=['x', 'kind'])
        write_csv(frame, config.out, {'family': payload['family'], 'count': count})


@main.command()
@family_options
@samples_option
@click.option('--check', 'checks', multiple=True, help='Run only this check (repeatable)')
@click.option('--list-checks', 'list_checks', is_flag=True, help='List the available checks and exit')
@click.option('--quick', 'quick', is_flag=True, help='Reduced fan size for the cut-locus checks')
@click.option('--n-max', 'n_max', type=int, help='Largest n of the sin-multiple bound')
@click.option('--fan', 'fan', type=int, help='Geodesic fan size of the cut-locus checks')
@click.option('--directions', 'directions', type=int, help='Refined directions of the cut-locus checks')
@click.option('--interval', 'interval', callback=_parse_interval, help='LO,HI of the sign-alternation band')
@click.option('--delta', 'delta', type=float, help='delta of the band constants')
def verify(list_checks, **options) -> None:
    """Run the verification suite; exit status 0 iff every selected check passes."""
    if list_checks:
        for name, entry in REGISTRY.items():
            click.echo(f'{name}: {entry.claim}')
        return
    options['checks'] = tuple(options['checks']) or None
    config = build_config('verify', **options)
    unknown = [name for name in config.checks if name not in REGISTRY]
    if unknown:
        raise click.UsageError(f'Unknown checks: {", ".join(unknown)}')
    if not _run_verify(config):
        sys.exit(1)


@guarded
def _run_verify(config: RunConfig) -> bool:
    results = run_checks(config)
    passed = all(result.passed for result in results)
    if config.output_format('json') == 'json':
        write_json(
            {
                'family': config.family.describe(),
                'passed': passed,
                'checks': [result.model_dump() for result in results],
            },
            config.out,
            'verify',
        )
    else:
        frame = pd.DataFrame(
            [
                {
                    'name': result.name,
                    'passed': result.passed,
                    'measured': json.dumps(result.measured, sort_keys=True),
                }
                for result in results
            ],
            columns=['name', 'passed', 'measured'],
        )
        write_csv(frame, config.out, {'passed': passed})
    logger.info(f'verify: {sum(r.passed for r in results)}/{len(results)} checks passed')
    return passed
