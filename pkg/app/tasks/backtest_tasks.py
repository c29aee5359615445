"""Worker-process tasks for the backtest and the fixed-weight coverage experiment."""
import logging

import numpy as np

from app.services import backtest_service

logger = logging.getLogger('simulation')


def run_replicate_chunk(config, start, stop):
    """
    Evaluate outer replicates start..stop-1 of a backtest.

    Module level so ProcessPoolExecutor can pickle it.

    Args:
        config: BacktestConfig
        start: First replicate index
        stop: One past the last replicate index

    Returns:
        dict: Status dict with 'status', 'start', 'stop' and either the summed
              'hits' matrix plus reset/redraw counters, or 'error'
    """
    try:
        hits = np.zeros((len(config.methods), len(config.alphas)), dtype=np.int64)
        counters = {'redraws': 0, 'triangle_resets': 0, 'diagonal_resets': 0, 'model_resets': 0}
        for j in range(start, stop):
            outcome = backtest_service.run_replicate(config, j)
            hits += outcome.pop('hits')
            for key, value in outcome.items():
                counters[key] += value

        return {'status': 'success', 'start': start, 'stop': stop, 'hits': hits, **counters}

    except Exception as e:
        logger.error(f'Replicates {start}..{stop - 1} failed: {e}')
        return {'status': 'error', 'start': start, 'stop': stop, 'error': str(e)}


def run_coverage_chunk(tri, params, alphas, t, seed, start, stop, adjusted=True):
    """
    Evaluate replicates start..stop-1 of the fixed-weight coverage experiment.

    Returns:
        dict: Status dict with 'status', 'start', 'stop' and 'hits' per alpha or 'error'
    """
    try:
        hits = np.zeros(len(alphas), dtype=np.int64)
        for j in range(start, stop):
            hits += backtest_service.fixed_weight_replicate(tri, params, alphas, t, seed, j, adjusted=adjusted)

        return {'status': 'success', 'start': start, 'stop': stop, 'hits': hits}

    except Exception as e:
        logger.error(f'Coverage replicates {start}..{stop - 1} failed: {e}')
        return {'status': 'error', 'start': start, 'stop': stop, 'error': str(e)}
