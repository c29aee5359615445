"""
Fiducial parameter distribution for N(0, sigma^2) with known mean.

Three ways of modelling the unknown variance behind a modelled loss X = sigma_sim * Z':

- fiducial: sigma2_sim = n sigma2hat / M', M' ~ chi2(n)  (X / sigmahat ~ Student-t(n))
- theoretical: sigma2_sim = sigma2hat M' / n               (distribution of the estimator itself)
- plugin: sigma_sim = sigmahat
"""
import logging
import math
from typing import Dict, Iterable, Sequence

import numpy as np
from scipy import integrate, optimize, stats

from app.models.fiducial import FiducialSetup
from app.services.scr_service import empirical_quantile, empirical_quantiles, order_rank
from app.utils.exceptions import ValidationError
from app.utils.rng import substream

logger = logging.getLogger('simulation')

FIDUCIAL = 'fiducial'
THEORETICAL = 'theoretical'
PLUGIN = 'plugin'
VARIANTS = (FIDUCIAL, THEORETICAL, PLUGIN)

# Replicates per generator in coverage_experiment
FIDUCIAL_CHUNK_SIZE = 10_000


def _chi2(rng, n, size):
    """chi2(n) draws as sums of n squared standard normals."""
    return np.sum(rng.standard_normal(tuple(np.atleast_1d(size)) + (n,)) ** 2, axis=-1)


def sample_sigma2_fiducial(setup: FiducialSetup, rng, size=None):
    """sigma2_sim = n sigma2hat / M' with M' ~ chi2(n); M' = 0 is redrawn."""
    batch = 1 if size is None else int(size)
    chi2 = _chi2(rng, setup.n, batch)
    zero = chi2 <= 0
    while np.any(zero):
        chi2[zero] = _chi2(rng, setup.n, int(zero.sum()))
        zero = chi2 <= 0
    draws = setup.n * setup.sigma2hat / chi2
    return float(draws[0]) if size is None else draws


def sample_sigma2_theoretical(setup: FiducialSetup, rng, size=None):
    """sigma2_sim = sigma2hat M' / n, the sampling law of the estimator."""
    batch = 1 if size is None else int(size)
    draws = setup.sigma2hat * _chi2(rng, setup.n, batch) / setup.n
    return float(draws[0]) if size is None else draws


def _modelled_losses(variant, setup: FiducialSetup, t, rng) -> np.ndarray:
    if variant == FIDUCIAL:
        sigma = np.sqrt(sample_sigma2_fiducial(setup, rng, t))
    elif variant == THEORETICAL:
        sigma = np.sqrt(sample_sigma2_theoretical(setup, rng, t))
    elif variant == PLUGIN:
        sigma = setup.sigmahat
    else:
        raise ValidationError(f'unknown variant {variant!r}', payload={'field': 'variant'})
    return sigma * rng.standard_normal(t)


def scr_fiducial(setup: FiducialSetup, t: int, rng, variant: str = FIDUCIAL) -> float:
    """
    Empirical alpha-quantile of t modelled losses sigma_sim * Z'.

    Args:
        setup: n, sigma2hat and alpha
        t: Scenario count
        rng: numpy Generator
        variant: fiducial, theoretical or plugin

    Returns:
        float: SCR in the units of X
    """
    if t < 1:
        raise ValidationError(f'scenario count must be at least 1, got {t}', payload={'field': 'scenarios'})
    return empirical_quantile(_modelled_losses(variant, setup, t, rng), setup.alpha)


def scr_fiducial_exact(setup: FiducialSetup) -> float:
    """sigmahat times the Student-t(n) alpha-quantile."""
    return setup.sigmahat * float(stats.t.ppf(setup.alpha, setup.n))


def _theoretical_cdf(q: float, n: int) -> float:
    """P(sqrt(V) Z <= q) with V ~ chi2(n) / n."""
    chi2 = stats.chi2(n)

    def integrand(v):
        if v <= 0:
            return 0.0
        return stats.norm.cdf(q / math.sqrt(v / n)) * chi2.pdf(v)

    value, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
    return value


def standardized_quantile(variant: str, n: int, alpha: float) -> float:
    """
    Analytic alpha-quantile of X / sigmahat under one variant.

    Raises:
        ValidationError: Unknown variant, n < 1 or alpha outside (0, 1)
    """
    FiducialSetup(n=n, sigma2hat=1.0, alpha=alpha)
    if variant == FIDUCIAL:
        return float(stats.t.ppf(alpha, n))
    if variant == PLUGIN:
        return float(stats.norm.ppf(alpha))
    if variant == THEORETICAL:
        if alpha == 0.5:
            return 0.0
        # symmetric law: solve in the upper tail
        level = max(alpha, 1.0 - alpha)
        upper = float(stats.norm.ppf(level))
        while _theoretical_cdf(upper, n) < level:
            upper *= 2.0
        q = float(optimize.brentq(lambda x: _theoretical_cdf(x, n) - level, 0.0, upper, xtol=1e-12))
        return q if alpha > 0.5 else -q
    raise ValidationError(f'unknown variant {variant!r}, expected one of {"|".join(VARIANTS)}',
                          payload={'field': 'variant'})


def coverage_experiment(sigma_true: float, n: int, alphas: Sequence[float], s: int, t: int, seed: int,
                        variants: Iterable[str] = VARIANTS) -> Dict[str, Dict[float, float]]:
    """
    Frequency of X <= SCR over s simulated data sets.

    Each replicate draws X_1..X_n ~ N(0, sigma_true^2), sets sigma2hat = mean of squares,
    computes the SCR of every variant at every alpha and draws an independent true loss X.
    With t = 0 the SCRs use the analytic standardized quantiles, otherwise empirical
    quantiles over t modelled scenarios per replicate.

    Returns:
        dict: variant -> {alpha: coverage}
    """
    if not sigma_true > 0:
        raise ValidationError(f'sigma_true must be positive, got {sigma_true}', payload={'field': 'sigma_true'})
    if s < 1:
        raise ValidationError(f'replicate count must be at least 1, got {s}', payload={'field': 'replicates'})
    if t < 0:
        raise ValidationError(f'scenario count must be non-negative, got {t}', payload={'field': 'scenarios'})
    variants = [v for v in VARIANTS if v in set(variants)]
    alphas = sorted(float(a) for a in alphas)
    for alpha in alphas:
        order_rank(1, alpha)
    if s < 10_000:
        logger.warning(f'Only {s} coverage replicates; at least 10,000 are recommended')

    logger.info(f'Coverage experiment: n={n} s={s} t={t} seed={seed} variants={",".join(variants)}')
    standard = {}
    if t == 0:
        standard = {v: np.array([standardized_quantile(v, n, a) for a in alphas]) for v in variants}

    hits = {v: np.zeros(len(alphas), dtype=np.int64) for v in variants}
    for chunk, start in enumerate(range(0, s, FIDUCIAL_CHUNK_SIZE)):
        size = min(FIDUCIAL_CHUNK_SIZE, s - start)
        rng = substream(seed, chunk)
        data = rng.normal(0.0, sigma_true, size=(size, n))
        sigma2hat = np.mean(data ** 2, axis=1)
        loss = rng.normal(0.0, sigma_true, size=size)
        for variant in variants:
            if t == 0:
                scr = np.sqrt(sigma2hat)[:, None] * standard[variant]
            else:
                scr = np.empty((size, len(alphas)))
                for j in range(size):
                    setup = FiducialSetup(n=n, sigma2hat=float(sigma2hat[j]), alpha=alphas[0])
                    sample = np.sort(_modelled_losses(variant, setup, t, rng))
                    scr[j] = empirical_quantiles(sample, alphas)
            hits[variant] += np.sum(loss[:, None] <= scr, axis=0)

    coverage = {v: {a: float(hits[v][i]) / s for i, a in enumerate(alphas)} for v in variants}
    for variant in variants:
        summary = ', '.join(f'{a}: {c:.4%}' for a, c in coverage[variant].items())
        logger.info(f'Coverage {variant}: {summary}')
    return coverage


def density_AB(x, n: int):
    """
    Unnormalized densities of the estimator law (A) and of the fiducial law (B):
    A(x) = x^(n/2-1) exp(-x/2) and B(x) = x^(-n/2-1) exp(-1/(2x)) = A(1/x) / x^2.

    Raises:
        ValidationError: Any x <= 0
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(~(x > 0)):
        raise ValidationError('densities are defined for x > 0 only', payload={'field': 'x'})
    log_x = np.log(x)
    density_a = np.exp((n / 2.0 - 1.0) * log_x - x / 2.0)
    density_b = np.exp((-n / 2.0 - 1.0) * log_x - 1.0 / (2.0 * x))
    if density_a.ndim == 0:
        return float(density_a), float(density_b)
    return density_a, density_b


def density_grid(n: int, upper: float = 60.0, points: int = 600):
    """x grid on (0, upper] with both densities, rows (x, density_A, density_B)."""
    x = np.linspace(upper / points, upper, points)
    density_a, density_b = density_AB(x, n)
    return np.column_stack((x, density_a, density_b))
