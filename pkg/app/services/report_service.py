"""Console tables and machine-readable report files."""
import csv
import json
import logging
from pathlib import Path
from typing import Dict, List

import numpy as np

from app.models.backtest import BacktestReport
from app.models.estimates import DevFactorEstimates, Reserves

logger = logging.getLogger('simulation')

REPORT_COLUMNS = ('method', 'alpha', 'successes', 's', 'probability', 'std_error')
COVERAGE_COLUMNS = ('alpha', 'coverage_fiducial', 'coverage_theoretical', 'coverage_plugin')
DENSITY_COLUMNS = ('x', 'density_A', 'density_B')


def format_reserves(reserves: Reserves) -> List[str]:
    """Reserve per accident year and the total, in whole currency units."""
    lines = [f'{"year":>6}  {"reserve":>14}']
    for i, value in enumerate(reserves.by_year):
        lines.append(f'{i:>6}  {value:>14,.0f}')
    lines.append(f'{"total":>6}  {reserves.total:>14,.0f}')
    return lines


def format_estimates(est: DevFactorEstimates) -> List[str]:
    lines = [f'{"k":>4}  {"f_hat":>12}  {"sigma2_hat":>14}']
    for k in range(1, est.n + 1):
        lines.append(f'{k:>4}  {est.factor(k):>12.6f}  {est.variance(k):>14.6g}')
    return lines


def format_backtest(report: BacktestReport) -> List[str]:
    """One row per (method, alpha): probability of solvency and its standard error in percent."""
    lines = [f'{"method":<10}  {"alpha":>6}  {"successes":>10}  {"s":>8}  {"P(X<=SCR)":>10}  {"s.e.":>7}']
    for e in report.estimates:
        lines.append(f'{e.method.value:<10}  {e.alpha:>6}  {e.successes:>10}  {e.s:>8}  '
                     f'{e.probability:>10.2%}  {e.std_error:>7.2%}')
    return lines


def format_coverage(coverage: Dict[str, Dict[float, float]]) -> List[str]:
    variants = list(coverage)
    alphas = sorted(next(iter(coverage.values())))
    lines = ['  '.join([f'{"alpha":>6}'] + [f'{v:>12}' for v in variants])]
    for alpha in alphas:
        lines.append('  '.join([f'{alpha:>6}'] + [f'{coverage[v][alpha]:>12.4%}' for v in variants]))
    return lines


def _prepare(path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_backtest_csv(report: BacktestReport, path) -> Path:
    """Columns method, alpha, successes, s, probability, std_error; probabilities as fractions."""
    path = _prepare(path)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(REPORT_COLUMNS)
        for e in report.estimates:
            writer.writerow([e.method.value, repr(e.alpha), e.successes, e.s,
                             f'{e.probability:.6f}', f'{e.std_error:.6f}'])
    logger.info(f'Backtest report written to {path}')
    return path


def write_manifest(manifest: Dict, path) -> Path:
    path = _prepare(path)
    with open(path, 'w', encoding='utf-8') as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
    logger.info(f'Run manifest written to {path}')
    return path


def write_coverage_csv(coverage: Dict[str, Dict[float, float]], path) -> Path:
    """Columns alpha, coverage_fiducial, coverage_theoretical, coverage_plugin (blank if not run)."""
    path = _prepare(path)
    alphas = sorted(next(iter(coverage.values())))
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(COVERAGE_COLUMNS)
        for alpha in alphas:
            row = [repr(alpha)]
            for column in COVERAGE_COLUMNS[1:]:
                variant = column.split('_', 1)[1]
                row.append(f'{coverage[variant][alpha]:.6f}' if variant in coverage else '')
            writer.writerow(row)
    logger.info(f'Coverage table written to {path}')
    return path


def write_density_csv(grid: np.ndarray, path) -> Path:
    """Rows (x, density_A, density_B) for external plotting."""
    path = _prepare(path)
    with open(path, 'w', newline='', encoding='utf-8') as handle:
        writer = csv.writer(handle)
        writer.writerow(DENSITY_COLUMNS)
        for x, a, b in grid:
            writer.writerow([f'{x:.6g}', f'{a:.10e}', f'{b:.10e}'])
    logger.info(f'Density curves written to {path}')
    return path
