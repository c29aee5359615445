"""Flask CLI commands for reserving, SCR simulation, backtesting and the fiducial example."""
import functools
import os

import click
from flask import current_app
from flask.cli import with_appcontext

from app.models.fiducial import FiducialSetup
from app.models.risk import MethodTag
from app.services import (backtest_service, chain_ladder_service, fiducial_service, report_service,
                          scr_service, triangle_service)
from app.utils.exceptions import ReservingError
from app.utils.rng import fresh_seed, substream
from app.utils.validators import (validate_alpha, validate_alphas, validate_non_negative, validate_positive,
                                  validate_positive_float)

GAMMA_CHOICE = click.Choice(['0', '1'])
METHOD_CHOICE = click.Choice([m.value for m in MethodTag], case_sensitive=False)


def handle_errors(command):
    """Print ReservingError as a red [ERROR] line and exit with its exit code."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ReservingError as e:
            current_app.logger.error(f'{command.__name__}: {e.message}')
            click.echo(click.style(f'[ERROR] {e.message}', fg='red'))
            if e.payload:
                position = ', '.join(f'{k}={v}' for k, v in e.payload.items())
                click.echo(f'   ({position})')
            click.get_current_context().exit(e.exit_code)

    return wrapper


def _seed(seed):
    if seed is None:
        seed = fresh_seed()
        click.echo(click.style(f'[INFO] No --seed given, using --seed {seed}', fg='cyan'))
    return seed


def _triangle(path):
    return triangle_service.read_triangle(path or current_app.config['REFERENCE_TRIANGLE'])


@click.command('reserve')
@click.option('--triangle', 'triangle_path', type=click.Path(exists=True, dir_okay=False),
              help='Cumulative triangle CSV (default: bundled reference triangle)')
@click.option('--gamma', type=GAMMA_CHOICE, default='0', show_default=True,
              help='Variance weighting exponent')
@with_appcontext
@handle_errors
def reserve_command(triangle_path, gamma):
    """
    Chain-ladder best estimate reserve per accident year and in total.

    Usage:
        flask reserve --gamma 0
        flask reserve --triangle data/paid.csv --gamma 1
    """
    tri = _triangle(triangle_path)
    est = chain_ladder_service.estimate(tri, int(gamma))
    reserves = chain_ladder_service.reserve_t0(tri, est)

    click.echo(click.style(f'\n[INFO] Development factors (gamma={gamma}, n={tri.n})\n', fg='cyan', bold=True))
    for line in report_service.format_estimates(est):
        click.echo(f'   {line}')
    click.echo(click.style('\n[INFO] Best estimate reserve R0\n', fg='cyan', bold=True))
    for line in report_service.format_reserves(reserves):
        click.echo(f'   {line}')
    click.echo(click.style(f'\n[SUCCESS] Total reserve: {reserves.total:,.0f}', fg='green'))


@click.command('scr')
@click.option('--triangle', 'triangle_path', type=click.Path(exists=True, dir_okay=False),
              help='Cumulative triangle CSV (default: bundled reference triangle)')
@click.option('--method', type=METHOD_CHOICE, required=True, help='Parameter-uncertainty method')
@click.option('--gamma', type=GAMMA_CHOICE, default='0', show_default=True, help='Variance weighting exponent')
@click.option('--alpha', type=float, default=0.995, show_default=True, callback=validate_alpha,
              help='Confidence level in (0, 1)')
@click.option('--scenarios', type=int, callback=validate_positive,
              help='Modelled scenarios t (default: SCR_SCENARIOS)')
@click.option('--seed', type=int, callback=validate_non_negative, help='Random seed (default: drawn and printed)')
@with_appcontext
@handle_errors
def scr_command(triangle_path, method, gamma, alpha, scenarios, seed):
    """
    Modelled one-year SCR as the empirical alpha-quantile of the loss X.

    Usage:
        flask scr --method inversion --gamma 0 --alpha 0.995 --scenarios 100000 --seed 7
    """
    tri = _triangle(triangle_path)
    seed = _seed(seed)
    scenarios = scenarios or current_app.config['SCR_SCENARIOS']
    method = MethodTag.coerce(method)

    result = scr_service.compute_scr(tri, method, int(gamma), alpha, scenarios, seed,
                                     block_size=current_app.config['SCR_BLOCK_SIZE'])

    click.echo(click.style(f'\n[SUCCESS] SCR ({method.label}, gamma={result.gamma}, alpha={alpha}): '
                           f'{result.scr:,.0f}', fg='green'))
    click.echo(f'   R0: {result.reserve_t0:,.0f}')
    click.echo(f'   Scenarios: {result.scenarios}')
    click.echo(f'   Seed: {result.seed}')
    if result.deterministic:
        click.echo(click.style(f'[WARNING] All {result.scenarios} modelled losses are equal; '
                               f'the triangle carries no estimated variance', fg='yellow'))


@click.command('backtest')
@click.option('--config', 'config_path', type=click.Path(dir_okay=False),
              help='Run-config file (default: DEFAULT_BACKTEST_CONFIG)')
@click.option('--s', 's', type=int, callback=validate_positive, help='Outer replicates')
@click.option('--t', 't', type=int, callback=validate_positive, help='Modelled scenarios per replicate')
@click.option('--seed', type=int, callback=validate_non_negative, help='Master seed (overrides master_seed)')
@click.option('--workers', type=int, callback=validate_positive, help='Worker processes')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), help='CSV report path')
@with_appcontext
@handle_errors
def backtest_command(config_path, s, t, seed, workers, out_path):
    """
    Probability of solvency P(X <= SCR) per method and confidence level.

    Writes the CSV report and a JSON run manifest next to it.

    Usage:
        flask backtest --config app/data/normal_world_gamma1.cfg
        flask backtest --s 100000 --t 10000 --workers 8 --out reports/full.csv
    """
    app_config = current_app.config
    config_path = config_path or app_config['DEFAULT_BACKTEST_CONFIG']
    config = backtest_service.load_run_config(
        config_path,
        overrides={'s': s, 't': t, 'master_seed': seed, 'workers': workers},
        defaults={'s': app_config['BACKTEST_REPLICATES'], 't': app_config['BACKTEST_SCENARIOS'],
                  'workers': app_config['WORKERS']},
    )
    for alpha in config.thin_alphas():
        click.echo(click.style(f'[INFO] t={config.t} is small for alpha={alpha}', fg='yellow'))

    click.echo(click.style(f'\n[INFO] Backtest gamma={config.gamma}: s={config.s}, t={config.t}, '
                           f'seed={config.master_seed}, workers={config.workers}\n', fg='cyan', bold=True))
    report = backtest_service.run_backtest(config, chunk_size=app_config['BACKTEST_CHUNK_SIZE'])

    for line in report_service.format_backtest(report):
        click.echo(f'   {line}')

    out_path = out_path or os.path.join(app_config['REPORT_DIR'],
                                        f'backtest_gamma{config.gamma}_seed{config.master_seed}.csv')
    csv_path = report_service.write_backtest_csv(report, out_path)
    manifest_path = report_service.write_manifest(report.manifest,
                                                  os.path.splitext(out_path)[0] + '.manifest.json')
    click.echo(click.style(f'\n[SUCCESS] Report: {csv_path}', fg='green'))
    click.echo(f'   Manifest: {manifest_path}')
    click.echo(f'   Wall time: {report.manifest["wall_time_seconds"]}s')


@click.command('fiducial')
@click.option('--n', 'n', type=int, required=True, callback=validate_positive, help='Sample size')
@click.option('--sigma2hat', type=float, callback=validate_positive_float,
              help='Observed variance estimate: print the SCR of every variant')
@click.option('--sigma-true', type=float, callback=validate_positive_float,
              help='True standard deviation: run the coverage experiment')
@click.option('--alphas', default='0.9,0.99,0.995', show_default=True, callback=validate_alphas,
              help='Comma-separated confidence levels')
@click.option('--replicates', type=int, callback=validate_positive,
              help='Coverage replicates s (default: FIDUCIAL_REPLICATES)')
@click.option('--scenarios', type=int, callback=validate_non_negative,
              help='Scenarios per SCR; 0 = analytic quantiles (default: FIDUCIAL_SCENARIOS)')
@click.option('--seed', type=int, callback=validate_non_negative, help='Random seed (default: drawn and printed)')
@click.option('--variant', 'variants', type=click.Choice(fiducial_service.VARIANTS), multiple=True,
              help='Restrict to these variants (repeatable)')
@click.option('--density-out', type=click.Path(dir_okay=False), help='Write density curves A and B')
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), help='Coverage CSV path')
@with_appcontext
@handle_errors
def fiducial_command(n, sigma2hat, sigma_true, alphas, replicates, scenarios, seed, variants, density_out,
                     out_path):
    """
    Fiducial versus theoretical versus plug-in variance modelling for N(0, sigma^2).

    Usage:
        flask fiducial --n 10 --sigma2hat 4 --alphas 0.995
        flask fiducial --n 10 --sigma-true 1 --alphas 0.9,0.99,0.995 --replicates 100000 --seed 1
    """
    if (sigma2hat is None) == (sigma_true is None):
        raise click.UsageError('give exactly one of --sigma2hat and --sigma-true')

    app_config = current_app.config
    variants = variants or fiducial_service.VARIANTS
    scenarios = app_config['FIDUCIAL_SCENARIOS'] if scenarios is None else scenarios

    if density_out:
        path = report_service.write_density_csv(fiducial_service.density_grid(n), density_out)
        click.echo(click.style(f'[INFO] Density curves: {path}', fg='cyan'))

    if sigma2hat is not None:
        seed = _seed(seed) if scenarios else seed
        click.echo(click.style(f'\n[INFO] SCR for n={n}, sigma2hat={sigma2hat}\n', fg='cyan', bold=True))
        click.echo(f'   {"alpha":>6}  ' + '  '.join(f'{v:>12}' for v in variants))
        for alpha in alphas:
            setup = FiducialSetup(n=n, sigma2hat=sigma2hat, alpha=alpha)
            if scenarios:
                values = [fiducial_service.scr_fiducial(setup, scenarios, substream(seed, i), variant=v)
                          for i, v in enumerate(variants)]
            else:
                values = [setup.sigmahat * fiducial_service.standardized_quantile(v, n, alpha) for v in variants]
            click.echo(f'   {alpha:>6}  ' + '  '.join(f'{value:>12.6g}' for value in values))
        return

    seed = _seed(seed)
    replicates = replicates or app_config['FIDUCIAL_REPLICATES']
    coverage = fiducial_service.coverage_experiment(sigma_true, n, alphas, replicates, scenarios, seed,
                                                    variants=variants)

    click.echo(click.style(f'\n[INFO] Coverage P(X <= SCR), n={n}, s={replicates}, '
                           f'{"analytic" if scenarios == 0 else f"t={scenarios}"}\n', fg='cyan', bold=True))
    for line in report_service.format_coverage(coverage):
        click.echo(f'   {line}')
    if out_path:
        path = report_service.write_coverage_csv(coverage, out_path)
        click.echo(click.style(f'\n[SUCCESS] Coverage table: {path}', fg='green'))


def register_commands(app):
    """Register all CLI commands with the Flask app."""
    app.cli.add_command(reserve_command)
    app.cli.add_command(scr_command)
    app.cli.add_command(backtest_command)
    app.cli.add_command(fiducial_command)
