"""
Nested Monte-Carlo backtest of the SCR methods.

Outer loop: s triangles simulated from the true normal world, each with one realized
one-year loss. Inner loop: per method, t modelled losses and their empirical quantiles.
The reported probability of solvency is the frequency of realized loss <= SCR.
"""
import logging
import os
import platform
import re
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Dict, Iterable, Optional

import numpy as np
import scipy
from dotenv import dotenv_values

from app.models.backtest import BacktestConfig, BacktestReport, SolvencyEstimate
from app.models.estimates import DevFactorEstimates
from app.models.triangle import Triangle
from app.models.world import TrueParams
from app.services.chain_ladder_service import cdr_loss, estimate, fit_column
from app.services.scr_service import ColumnLayout, InversionAdjEngine, build_engine, empirical_quantiles
from app.services.true_world_service import simulate_next_diagonal, simulate_triangle
from app.utils.exceptions import ConfigurationError, ReservingError, SimulationError, ValidationError
from app.utils.rng import substream

logger = logging.getLogger('simulation')

BACKTEST_CHUNK_SIZE = 100
# A replicate failing this many times in a row aborts the run
MAX_REDRAWS = 50

SCALAR_KEYS = {'gamma', 'f0', 'sigma0', 's', 't', 'master_seed', 'workers'}
LIST_KEYS = {'f', 'sigma_scaled', 'alphas', 'methods'}
INDEXED_KEY = re.compile(r'^(f|sigma_scaled)\[(\d+)\]$')


def _split(value):
    return [item.strip() for item in value.split(',') if item.strip()]


def _number(key, value, kind=float):
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f'{key}: cannot read {value!r} as {kind.__name__}', payload={'key': key})


def load_run_config(path, overrides: Optional[Dict] = None, defaults: Optional[Dict] = None) -> BacktestConfig:
    """
    Read a flat key=value run-config file.

    Vectors are comma lists (``f=1.5,1.2,...``) or indexed keys (``f[1]=1.5``, k = 1..n).
    Non-None ``overrides`` (s, t, master_seed, workers) replace file values; ``defaults``
    fill keys the file leaves out.

    Raises:
        ConfigurationError: Unknown or missing keys, unreadable values
    """
    if not os.path.isfile(path):
        raise ConfigurationError(f'run config {path} does not exist', payload={'key': 'config'})
    raw = dotenv_values(path)

    values, indexed = {}, {'f': {}, 'sigma_scaled': {}}
    for key, value in raw.items():
        key = key.strip()
        if value is None:
            raise ConfigurationError(f'{key}: missing value', payload={'key': key})
        match = INDEXED_KEY.match(key)
        if match:
            indexed[match.group(1)][int(match.group(2))] = _number(key, value)
        elif key in SCALAR_KEYS or key in LIST_KEYS:
            values[key] = value
        else:
            raise ConfigurationError(f'unknown run-config key {key!r}', payload={'key': key})

    for name, entries in indexed.items():
        if not entries:
            continue
        if name in values:
            raise ConfigurationError(f'{name} given both as a list and as indexed keys', payload={'key': name})
        if sorted(entries) != list(range(1, len(entries) + 1)):
            raise ConfigurationError(f'{name}[k] must cover k = 1..n without gaps', payload={'key': name})
        values[name] = [entries[k] for k in sorted(entries)]

    for key, value in (defaults or {}).items():
        values.setdefault(key, value)
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value

    missing = sorted((SCALAR_KEYS | LIST_KEYS) - set(values) - {'workers'})
    if missing:
        raise ConfigurationError(f'run config misses {", ".join(missing)}', payload={'key': missing[0]})

    def vector(key, kind=float):
        value = values[key]
        items = _split(value) if isinstance(value, str) else list(value)
        return [_number(key, item, kind) for item in items]

    params = TrueParams.from_table(
        f0=_number('f0', values['f0']),
        sigma0=_number('sigma0', values['sigma0']),
        f=vector('f'),
        sigma_scaled=vector('sigma_scaled'),
        gamma=_number('gamma', values['gamma'], int),
    )
    config = BacktestConfig(
        true_params=params,
        methods=tuple(vector('methods', str)),
        alphas=tuple(vector('alphas')),
        s=_number('s', values['s'], int),
        t=_number('t', values['t'], int),
        master_seed=_number('master_seed', values['master_seed'], int),
        workers=_number('workers', values.get('workers', 1), int),
    )
    logger.info(f'Run config {path}: gamma={config.gamma} n={params.n} s={config.s} t={config.t}')
    return config


def solvency_se(p_hat: float, s: int) -> float:
    """Binomial standard error sqrt(p (1 - p) / s)."""
    if not 0.0 <= p_hat <= 1.0 or s < 1:
        raise ValidationError(f'need 0 <= p <= 1 and s >= 1, got p={p_hat}, s={s}')
    return float(np.sqrt(p_hat * (1.0 - p_hat) / s))


def run_replicate(config: BacktestConfig, j: int) -> Dict:
    """
    One outer replicate: hits[m, a] = 1 when the realized loss is <= SCR(alpha_a) of method m.

    A replicate whose estimation fails is redrawn with the next attempt index.

    Raises:
        SimulationError: After MAX_REDRAWS consecutive failures
    """
    params = config.true_params
    seed = config.master_seed
    for attempt in range(MAX_REDRAWS + 1):
        try:
            tri, residues = simulate_triangle(params, substream(seed, j, attempt, 0))
            est = estimate(tri, params.gamma)
            diag = simulate_next_diagonal(tri, params, substream(seed, j, attempt, 1))
            loss = cdr_loss(tri, est, diag)

            hits = np.zeros((len(config.methods), len(config.alphas)), dtype=np.int64)
            model_resets = 0
            for row, method in enumerate(config.methods):
                engine = build_engine(method, tri, est)
                samples = engine.simulate(substream(seed, j, attempt, 2 + method.stream), config.t)
                scr = empirical_quantiles(np.sort(samples), config.alphas)
                hits[row] = loss <= scr
                model_resets += engine.resets
        except ReservingError as e:
            logger.warning(f'Replicate {j} attempt {attempt} redrawn: {e.message}')
            continue
        return {
            'hits': hits,
            'redraws': attempt,
            'triangle_resets': len(residues.reset_cells),
            'diagonal_resets': diag.resets,
            'model_resets': model_resets,
        }
    raise SimulationError(f'replicate {j} failed {MAX_REDRAWS + 1} times in a row', payload={'replicate': j})


def _chunks(s: int, chunk_size: int):
    return [(start, min(start + chunk_size, s)) for start in range(0, s, chunk_size)]


def _execute(task, jobs, workers: int):
    """Run task(*job) for every job, in a process pool when workers > 1."""
    if workers <= 1 or len(jobs) <= 1:
        return [task(*job) for job in jobs]
    results = []
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as executor:
        futures = {executor.submit(task, *job): job for job in jobs}
        for future in as_completed(futures):
            results.append(future.result())
    return results


def _check(results):
    failed = [r for r in results if r['status'] != 'success']
    if failed:
        first = failed[0]
        raise SimulationError(f'replicates {first["start"]}..{first["stop"] - 1} failed: {first["error"]}',
                              payload={'failed_chunks': len(failed)})
    return sorted(results, key=lambda r: r['start'])


def run_backtest(config: BacktestConfig, chunk_size: int = BACKTEST_CHUNK_SIZE) -> BacktestReport:
    """
    Probability of solvency per (method, alpha) over config.s outer replicates.

    Replicates are grouped into chunks and evaluated by ``app.tasks.backtest_tasks`` in up to
    config.workers processes. The report is identical for every worker count.

    Raises:
        SimulationError: If a worker chunk fails
    """
    from app.tasks.backtest_tasks import run_replicate_chunk

    for alpha in config.thin_alphas():
        logger.warning(f't={config.t} leaves fewer than one scenario above the {alpha} quantile')
    logger.info(f'Backtest started: gamma={config.gamma} s={config.s} t={config.t} '
                f'methods={",".join(m.value for m in config.methods)} seed={config.master_seed} '
                f'workers={config.workers}')
    started = time.perf_counter()

    jobs = [(config, start, stop) for start, stop in _chunks(config.s, chunk_size)]
    results = _check(_execute(run_replicate_chunk, jobs, config.workers))

    hits = sum(r['hits'] for r in results)
    counters = {key: int(sum(r[key] for r in results))
                for key in ('redraws', 'triangle_resets', 'diagonal_resets', 'model_resets')}
    wall_time = time.perf_counter() - started

    estimates = []
    for row, method in enumerate(config.methods):
        for col, alpha in enumerate(config.alphas):
            successes = int(hits[row, col])
            probability = successes / config.s
            estimates.append(SolvencyEstimate(method=method, alpha=alpha, successes=successes, s=config.s,
                                              probability=probability,
                                              std_error=solvency_se(probability, config.s)))

    manifest = {
        'config': config.echo(),
        'chunk_size': chunk_size,
        'resets': {k: counters[k] for k in ('triangle_resets', 'diagonal_resets', 'model_resets')},
        'redraws': counters['redraws'],
        'wall_time_seconds': round(wall_time, 3),
        'versions': {'python': platform.python_version(), 'numpy': np.__version__, 'scipy': scipy.__version__},
    }
    if counters['redraws']:
        logger.warning(f'{counters["redraws"]} replicate(s) redrawn after estimation failures')
    logger.info(f'Backtest finished in {wall_time:.1f}s')
    return BacktestReport(estimates=estimates, manifest=manifest)


def fixed_weight_estimates(layout: ColumnLayout, params: TrueParams, zeta) -> DevFactorEstimates:
    """Estimates from ratios F = f + sigma / sqrt(w) * zeta on the layout's fixed weights."""
    cols = layout.columns
    ratios = params.f[cols] + params.sigma[cols] / layout.sqrt_weights * zeta
    fhat = np.empty(layout.n)
    fhat[-1] = params.f[-1]
    sigma2hat = np.zeros(layout.n)
    for k in range(1, layout.n):
        cells = cols == k - 1
        fhat[k - 1], sigma2hat[k - 1] = fit_column(ratios[cells], layout.weights[cells])
    return DevFactorEstimates(gamma=params.gamma, fhat=fhat, sigma2hat=sigma2hat)


def fixed_weight_replicate(tri: Triangle, params: TrueParams, alphas, t: int, seed: int, j: int,
                           adjusted: bool = True) -> np.ndarray:
    """
    One replicate of the fixed-weight experiment: hit per alpha of sum Z <= SCR_Z.

    Residues are redrawn on the fixed cells of ``tri``; SCR_Z is the quantile of the summed
    next-year payments of the inversion engine with the true-sigma correction weights.
    """
    layout = ColumnLayout(tri, params.gamma)
    est = fixed_weight_estimates(layout, params, substream(seed, j, 0).standard_normal(layout.cells))
    true_total = simulate_next_diagonal(tri, params, substream(seed, j, 1)).total
    engine = InversionAdjEngine(tri, est, weight_sigma2=params.sigma ** 2, adjusted=adjusted)
    totals = np.sort(engine.payments(substream(seed, j, 2), t).sum(axis=-1))
    return (true_total <= empirical_quantiles(totals, alphas)).astype(np.int64)


def fixed_weight_coverage(tri: Triangle, params: TrueParams, alphas: Iterable[float], s: int, t: int, seed: int,
                          workers: int = 1, adjusted: bool = True,
                          chunk_size: int = BACKTEST_CHUNK_SIZE) -> Dict[float, float]:
    """
    Coverage P(sum Z <= SCR_Z(alpha)) with the triangle weights held fixed.

    Returns:
        dict: alpha -> coverage frequency over s replicates
    """
    from app.tasks.backtest_tasks import run_coverage_chunk

    if tri.n != params.n:
        raise ValidationError(f'triangle has n={tri.n}, parameters describe n={params.n}')
    alphas = tuple(sorted(float(a) for a in alphas))
    logger.info(f'Fixed-weight coverage: s={s} t={t} seed={seed} adjusted={adjusted}')
    jobs = [(tri, params, alphas, t, seed, start, stop, adjusted) for start, stop in _chunks(s, chunk_size)]
    results = _check(_execute(run_coverage_chunk, jobs, workers))
    hits = sum(r['hits'] for r in results)
    return {alpha: float(hits[i]) / s for i, alpha in enumerate(alphas)}
