"""
Modelled one-year loss engines and empirical SCR quantiles.

Three parameter-uncertainty methods share one scenario layout:

- WITHOUT: next-year factors drawn around the point estimates (fhat, sigmahat).
- BOOTSTRAP: parameters re-estimated from ratios rebuilt with resampled, variance-adjusted
  residues, then next-year factors drawn around them.
- INVERSION_ADJ: parameters from the inverted estimator relation with fresh pivots (R', M'),
  next-year payments blended with the deterministic drift by the correction factor a_hat.

Every engine is vectorized over a leading batch axis; one generator feeds one batch.
"""
import logging
import math
from typing import Optional

import numpy as np

from app.models.estimates import DevFactorEstimates
from app.models.risk import InversionDraw, MethodTag, ScrResult
from app.models.triangle import Triangle
from app.services.chain_ladder_service import OneYearRevaluation, estimate
from app.services.true_world_service import reset_factors
from app.utils.exceptions import ConfigurationError, EmptyResiduePoolError, ValidationError
from app.utils.rng import substream

logger = logging.getLogger('simulation')

SCR_BLOCK_SIZE = 10_000
# Pivots M' below this are redrawn
MIN_PIVOT = 1e-300


def order_rank(t: int, alpha: float) -> int:
    """1-based rank ceil(alpha * t) of the lower empirical alpha-quantile."""
    if not 0.0 < alpha < 1.0:
        raise ValidationError(f'alpha must lie in (0, 1), got {alpha}', payload={'field': 'alpha'})
    # rounding guards products such as 0.95 * 100 = 95.00000000000001
    return min(t, max(1, math.ceil(round(alpha * t, 9))))


def empirical_quantile(samples, alpha: float) -> float:
    """
    The ceil(alpha * t)-th smallest of t samples.

    Raises:
        ValidationError: Empty sample or alpha outside (0, 1)
    """
    samples = np.asarray(samples, dtype=np.float64).ravel()
    if samples.size == 0:
        raise ValidationError('cannot take a quantile of an empty sample')
    rank = order_rank(samples.size, alpha)
    return float(np.partition(samples, rank - 1)[rank - 1])


def empirical_quantiles(sorted_samples, alphas) -> np.ndarray:
    """Several order statistics read from one already sorted sample."""
    if sorted_samples.size == 0:
        raise ValidationError('cannot take a quantile of an empty sample')
    ranks = [order_rank(sorted_samples.size, a) for a in alphas]
    return sorted_samples[np.asarray(ranks) - 1]


class ColumnLayout:
    """
    Flattened ratio cells (i, k) for k = 1..n-1, i = 0..n-k, ordered by column then row.

    Column reductions over a trailing cell axis use ``np.add.reduceat`` on ``starts``.
    """

    def __init__(self, tri: Triangle, gamma):
        n = tri.n
        gamma = int(gamma)
        weights, columns, starts, ratios = [], [], [], []
        for k in range(1, n):
            previous = tri.column(k - 1)[:n - k + 1]
            starts.append(len(weights))
            weights.extend(previous ** gamma)
            columns.extend([k - 1] * previous.size)
            ratios.extend(tri.column(k) / previous)
        self.n = n
        self.weights = np.asarray(weights)
        self.sqrt_weights = np.sqrt(self.weights)
        self.columns = np.asarray(columns)
        self.starts = np.asarray(starts)
        self.ratios = np.asarray(ratios)
        self.weight_sums = np.add.reduceat(self.weights, self.starts)
        self.dof = n - np.arange(1, n).astype(np.float64)

    @property
    def cells(self) -> int:
        return int(self.weights.size)

    def column_sum(self, values) -> np.ndarray:
        return np.add.reduceat(values, self.starts, axis=-1)

    def flatten(self, residues) -> np.ndarray:
        """Residues of a ResidueSet in layout order."""
        return np.concatenate([residues.column(k) for k in range(1, self.n)])


def pivot_statistics(layout: ColumnLayout, zeta):
    """
    R_k = sum_i zeta_ik sqrt(w_ik) / W_k and
    M_k = 1/(n-k) sum_i w_ik (zeta_ik / sqrt(w_ik) - R_k)^2 per column k = 1..n-1.

    With the true residues of a triangle these satisfy fhat_k = f_k + sigma_k R_k and
    sigma2hat_k = sigma_k^2 M_k exactly; with fresh residues they are the inversion pivots.
    """
    zeta = np.asarray(zeta, dtype=np.float64)
    R = layout.column_sum(zeta * layout.sqrt_weights) / layout.weight_sums
    deviation = zeta / layout.sqrt_weights - R[..., layout.columns]
    M = layout.column_sum(layout.weights * deviation ** 2) / layout.dof
    return R, M


def build_residue_pool(tri: Triangle, est: DevFactorEstimates) -> np.ndarray:
    """
    Variance-adjusted residues of all columns k < n with sigma2hat_k > 0.

    zeta_hat = (F - fhat) / sigmahat * sqrt(w), scaled by (1 - w / W)^(-1/2).

    Raises:
        EmptyResiduePoolError: If every column has zero estimated variance
    """
    layout = ColumnLayout(tri, est.gamma)
    keep = est.sigma2hat[layout.columns] > 0
    if not np.any(keep):
        raise EmptyResiduePoolError('every development column has zero estimated variance, '
                                    'no residues to bootstrap')
    cols = layout.columns[keep]
    weights = layout.weights[keep]
    raw = (layout.ratios[keep] - est.fhat[cols]) / est.sigmahat[cols] * np.sqrt(weights)
    return raw / np.sqrt(1.0 - weights / layout.weight_sums[cols])


class ScenarioEngine:
    """Shared next-year layout and loss assembly for one observed triangle."""

    method: Optional[MethodTag] = None

    def __init__(self, tri: Triangle, est: DevFactorEstimates):
        if est.n != tri.n:
            raise ValidationError(f'estimates cover {est.n} development years, triangle has n={tri.n}')
        self.tri = tri
        self.est = est
        self.n = tri.n
        self.layout = ColumnLayout(tri, est.gamma)
        self.latest = tri.diagonal()[1:]
        # cell (i, n-i+1) for i = 1..n develops with factor index n-i
        self.next_index = self.n - np.arange(1, self.n + 1)
        self.next_scale = 1.0 / np.sqrt(self.latest ** int(est.gamma))
        self.resets = 0
        self._kernel = None

    @property
    def kernel(self) -> OneYearRevaluation:
        if self._kernel is None:
            self._kernel = OneYearRevaluation.from_estimates(self.tri, self.est)
        return self._kernel

    def with_last_factor(self, fsim, sigma2sim):
        """Append the observed last factor fhat_n with zero variance to per-scenario k = 1..n-1 stacks."""
        size = fsim.shape[0]
        last = np.full((size, 1), self.est.fhat[-1])
        return np.hstack((fsim, last)), np.hstack((sigma2sim, np.zeros((size, 1))))

    def drift(self) -> np.ndarray:
        """Deterministic payments (fhat_k - 1) * C[i,n-i]."""
        return (self.est.fhat[self.next_index] - 1.0) * self.latest

    def next_year_payments(self, fsim, sigma2sim, zeta) -> np.ndarray:
        """Z = (F - 1) * C with F = f + sigma / sqrt(C^gamma) * zeta, non-positive F reset."""
        fsim = np.atleast_2d(fsim)
        sigma = np.sqrt(np.atleast_2d(sigma2sim))
        factors = fsim[:, self.next_index] + sigma[:, self.next_index] * self.next_scale * zeta
        factors, mask = reset_factors(factors)
        self.resets += int(mask.sum())
        return (factors - 1.0) * self.latest

    def payments(self, rng, size: int) -> np.ndarray:
        raise NotImplementedError

    def simulate(self, rng, size: Optional[int] = None):
        """Draw modelled losses X; a float when size is None, else an array of length size."""
        batch = 1 if size is None else int(size)
        losses = self.kernel.cdr(self.payments(rng, batch))
        return float(losses[0]) if size is None else losses


class WithoutEngine(ScenarioEngine):
    """Point estimates used as if they were the true parameters."""

    method = MethodTag.WITHOUT

    def payments(self, rng, size):
        zeta = rng.standard_normal((size, self.n))
        return self.next_year_payments(self.est.fhat, self.est.sigma2hat, zeta)


class BootstrapEngine(ScenarioEngine):
    """Conditional bootstrap of (f, sigma^2) from one global pool of adjusted residues."""

    method = MethodTag.BOOTSTRAP

    def __init__(self, tri, est, pool=None):
        super().__init__(tri, est)
        pool = build_residue_pool(tri, est) if pool is None else np.asarray(pool, dtype=np.float64)
        if pool.size < 2:
            raise ConfigurationError(f'bootstrap pool needs at least 2 residues, got {pool.size}')
        self.pool = pool

    def parameters(self, rng, size):
        layout = self.layout
        cols = layout.columns
        picks = self.pool[rng.integers(0, self.pool.size, size=(size, layout.cells))]
        ratios = self.est.fhat[cols] + self.est.sigmahat[cols] / layout.sqrt_weights * picks
        fsim = layout.column_sum(layout.weights * ratios) / layout.weight_sums
        sigma2sim = layout.column_sum(layout.weights * (ratios - fsim[:, cols]) ** 2) / layout.dof
        return self.with_last_factor(fsim, sigma2sim)

    def payments(self, rng, size):
        fsim, sigma2sim = self.parameters(rng, size)
        zeta = rng.standard_normal((size, self.n))
        return self.next_year_payments(fsim, sigma2sim, zeta)


class InversionAdjEngine(ScenarioEngine):
    """
    Inversion method with the stochastic correction factor.

    ``weight_sigma2`` replaces sigma2hat in the second factor of the correction (the exact
    a_sim of the fixed-weight coverage experiment); ``adjusted=False`` gives the unadjusted
    method (a = 1).
    """

    method = MethodTag.INVERSION_ADJ

    def __init__(self, tri, est, weight_sigma2=None, adjusted=True):
        super().__init__(tri, est)
        self.adjusted = adjusted
        n = self.n
        # accident year n-k+1 carries column k in the next diagonal
        carrier = tri.diagonal()[n:1:-1]
        self.exposure = carrier ** 2 * (1.0 / carrier ** int(est.gamma) + 1.0 / self.layout.weight_sums)
        self.weight_hat = self._normalise(est.sigma2hat[:n - 1] * self.exposure)
        if weight_sigma2 is None:
            self.weight = self.weight_hat
        else:
            self.weight = self._normalise(np.asarray(weight_sigma2, dtype=np.float64)[:n - 1] * self.exposure)

    @staticmethod
    def _normalise(raw):
        total = raw.sum()
        return raw / total if total > 0 else None

    def correction(self, Mprime) -> np.ndarray:
        """a_hat = (sum w_hat / M' * sum w M')^(-1/2); 1 when no column carries variance."""
        if not self.adjusted or self.weight_hat is None or self.weight is None:
            return np.ones(Mprime.shape[:-1])
        return (np.sum(self.weight_hat / Mprime, axis=-1) * np.sum(self.weight * Mprime, axis=-1)) ** -0.5

    def parameters(self, Rprime, Mprime) -> InversionDraw:
        """Invert fhat = f + sigma R, sigma2hat = sigma^2 M at the drawn pivots."""
        Rprime = np.atleast_2d(Rprime)
        Mprime = np.atleast_2d(Mprime)
        n = self.n
        sigma2sim = self.est.sigma2hat[:n - 1] / Mprime
        fsim = self.est.fhat[:n - 1] - np.sqrt(sigma2sim) * Rprime
        return InversionDraw(Rprime=Rprime, Mprime=Mprime, fsim=fsim, sigma2sim=sigma2sim,
                             ahat=self.correction(Mprime))

    def draw(self, rng, size) -> InversionDraw:
        zeta = rng.standard_normal((size, self.layout.cells))
        Rprime, Mprime = pivot_statistics(self.layout, zeta)
        bad = np.flatnonzero(np.any(Mprime < MIN_PIVOT, axis=-1))
        while bad.size:
            zeta[bad] = rng.standard_normal((bad.size, self.layout.cells))
            Rprime[bad], Mprime[bad] = pivot_statistics(self.layout, zeta[bad])
            bad = bad[np.any(Mprime[bad] < MIN_PIVOT, axis=-1)]
        return self.parameters(Rprime, Mprime)

    def blend(self, draw: InversionDraw, zeta) -> np.ndarray:
        """(1 - a) * drift + a * Z_model per accident year."""
        fsim, sigma2sim = self.with_last_factor(draw.fsim, draw.sigma2sim)
        modelled = self.next_year_payments(fsim, sigma2sim, zeta)
        a = draw.ahat[:, None]
        return (1.0 - a) * self.drift() + a * modelled

    def payments(self, rng, size):
        draw = self.draw(rng, size)
        zeta = rng.standard_normal((size, self.n))
        return self.blend(draw, zeta)


ENGINES = {
    MethodTag.WITHOUT: WithoutEngine,
    MethodTag.BOOTSTRAP: BootstrapEngine,
    MethodTag.INVERSION_ADJ: InversionAdjEngine,
}


def build_engine(method, tri: Triangle, est: DevFactorEstimates) -> ScenarioEngine:
    return ENGINES[MethodTag.coerce(method)](tri, est)


def scenario_without(tri, est, rng, size=None):
    """X_model without parameter risk."""
    return WithoutEngine(tri, est).simulate(rng, size)


def scenario_bootstrap(tri, est, pool, rng, size=None):
    """X_model with bootstrapped parameters drawn from ``pool``."""
    return BootstrapEngine(tri, est, pool=pool).simulate(rng, size)


def draw_inversion(tri, est, rng, size=None) -> InversionDraw:
    """Inversion-method parameter draw(s) with the estimated correction factor."""
    draw = InversionAdjEngine(tri, est).draw(rng, 1 if size is None else size)
    if size is None:
        return InversionDraw(Rprime=draw.Rprime[0], Mprime=draw.Mprime[0], fsim=draw.fsim[0],
                             sigma2sim=draw.sigma2sim[0], ahat=draw.ahat[0])
    return draw


def scenario_inversion_adj(tri, est, rng, size=None):
    """X_model under the adjusted inversion method."""
    return InversionAdjEngine(tri, est).simulate(rng, size)


def simulate_losses(engine: ScenarioEngine, t: int, seed: int, block_size: int = SCR_BLOCK_SIZE) -> np.ndarray:
    """t modelled losses drawn in blocks; block b uses substream (seed, b)."""
    if t < 1:
        raise ValidationError(f'scenario count must be at least 1, got {t}', payload={'field': 'scenarios'})
    blocks = []
    for b, start in enumerate(range(0, t, block_size)):
        size = min(block_size, t - start)
        blocks.append(engine.simulate(substream(seed, b), size))
    return np.concatenate(blocks)


def compute_scr(tri: Triangle, method, gamma, alpha: float, t: int, seed: int,
                block_size: int = SCR_BLOCK_SIZE) -> ScrResult:
    """
    Empirical alpha-quantile of t modelled one-year losses.

    Bit-reproducible for fixed (seed, t, method, gamma, alpha, block_size).
    """
    method = MethodTag.coerce(method)
    order_rank(1, alpha)
    if t < 1000 and alpha >= 0.99:
        logger.warning(f'Only {t} scenarios for alpha={alpha}; at least 1,000 are recommended')

    est = estimate(tri, gamma)
    engine = build_engine(method, tri, est)
    samples = simulate_losses(engine, t, seed, block_size)
    deterministic = bool(np.ptp(samples) == 0)
    if deterministic:
        logger.warning(f'{method.value}: all {t} modelled losses are equal, SCR is deterministic')
    if engine.resets:
        logger.info(f'{method.value}: {engine.resets} modelled factor(s) reset to 1.0')

    scr = empirical_quantile(samples, alpha)
    reserve = engine.kernel.reserve_t0
    logger.info(f'SCR {method.value} gamma={int(est.gamma)} alpha={alpha} t={t} seed={seed}: {scr:,.0f}')
    return ScrResult(method=method, alpha=alpha, scr=scr, scenarios=t, seed=seed,
                     reserve_t0=reserve, gamma=int(est.gamma), deterministic=deterministic)
