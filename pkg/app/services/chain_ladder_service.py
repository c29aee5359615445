"""Chain-ladder estimation and reserving at t = 0 and t = 1."""
from typing import Tuple

import numpy as np

from app.models.estimates import DevFactorEstimates, Gamma, Reserves
from app.models.triangle import ExtendedTriangle, NextDiagonal, Triangle
from app.utils.exceptions import EstimationError


def fit_column(ratios, weights) -> Tuple[float, float]:
    """
    Weighted mean and variance estimate of one column of development ratios.

    fhat = sum(w F) / sum(w),  sigma2hat = sum(w (F - fhat)^2) / (m - 1) for m ratios.

    Raises:
        EstimationError: If the weights sum to zero or fewer than two ratios are given
    """
    ratios = np.asarray(ratios, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    if ratios.size < 2:
        raise EstimationError('at least two ratios are needed to estimate a column')
    total = weights.sum()
    if not total > 0:
        raise EstimationError('weights of a development column sum to zero')
    if np.all(ratios == ratios[0]):
        return float(ratios[0]), 0.0
    fhat = float(np.dot(weights, ratios) / total)
    sigma2hat = float(np.dot(weights, (ratios - fhat) ** 2) / (ratios.size - 1))
    return fhat, sigma2hat


def _check_positive(tri: Triangle, gamma: Gamma):
    if gamma == Gamma.VOLUME_WEIGHTED and np.any(tri.cells <= 0):
        offsets = tri.offsets
        flat = int(np.flatnonzero(tri.cells <= 0)[0])
        i = int(np.searchsorted(offsets, flat, side='right') - 1)
        k = flat - int(offsets[i])
        raise EstimationError(f'C[{i},{k}] = {tri.cells[flat]} is not positive, volume weighting needs C > 0',
                              payload={'row': i, 'column': k})


def estimate(tri: Triangle, gamma) -> DevFactorEstimates:
    """
    Mack estimators for k = 1..n-1. The last column holds the single ratio C[0,n] / C[0,n-1],
    which becomes fhat_n with zero variance.

    Args:
        tri: Observed triangle
        gamma: 0 (unweighted) or 1 (volume weighted)

    Returns:
        DevFactorEstimates

    Raises:
        EstimationError: Zero weight sum, or non-positive cells with gamma = 1
    """
    gamma = Gamma.coerce(gamma)
    _check_positive(tri, gamma)
    n = tri.n
    fhat = np.empty(n)
    sigma2hat = np.zeros(n)
    for k in range(1, n + 1):
        previous = tri.column(k - 1)[:n - k + 1]
        if np.any(previous == 0):
            raise EstimationError(f'zero cell in development year {k - 1}, ratios of column {k} undefined',
                                  payload={'column': k})
        ratios = tri.column(k) / previous
        if k == n:
            fhat[n - 1] = ratios[0]
            continue
        try:
            fhat[k - 1], sigma2hat[k - 1] = fit_column(ratios, previous ** gamma)
        except EstimationError as e:
            raise EstimationError(f'column {k}: {e.message}', payload={'column': k})
    return DevFactorEstimates(gamma=gamma, fhat=fhat, sigma2hat=sigma2hat)


def _tail_products(factors):
    """tail[..., m-1] = prod_{k=m..n} f_k for m = 1..n, and tail[..., n] = 1."""
    tail = np.cumprod(factors[..., ::-1], axis=-1)[..., ::-1]
    ones = np.ones(tail.shape[:-1] + (1,))
    return np.concatenate((tail, ones), axis=-1)


def reserve_t0(tri: Triangle, est: DevFactorEstimates) -> Reserves:
    """Chain-ladder reserves R0^i = C[i,n-i] * prod_{k>n-i} fhat_k - C[i,n-i] and their total."""
    if est.n != tri.n:
        raise EstimationError(f'estimates cover {est.n} development years, triangle has n={tri.n}')
    n = tri.n
    latest = tri.diagonal()
    tail = _tail_products(est.fhat)
    ultimates = latest * tail[n - np.arange(n + 1)]
    return Reserves(by_year=ultimates - latest, ultimates=ultimates)


class OneYearRevaluation:
    """
    Re-reserving kernel for one observed triangle.

    Holds the column sums of the observed ratios so that the factors re-estimated after
    a new diagonal, R1 and the one-year loss X can be evaluated for whole batches of
    next-year payments (trailing axis of length n, entry i-1 = accident year i).
    """

    def __init__(self, tri: Triangle, gamma, reserve_t0: float = 0.0):
        self.gamma = Gamma.coerce(gamma)
        _check_positive(tri, self.gamma)
        self.n = n = tri.n
        self.reserve_t0 = float(reserve_t0)
        self.latest = tri.diagonal()

        sums = np.empty(n)
        weight_sums = np.empty(n)
        for k in range(1, n + 1):
            previous = tri.column(k - 1)[:n - k + 1]
            weights = previous ** self.gamma
            sums[k - 1] = np.dot(weights, tri.column(k) / previous)
            weight_sums[k - 1] = weights.sum()
        self.sums = sums
        self.weight_sums = weight_sums
        # accident year n-k+1 adds the new ratio of column k
        self.new_base = self.latest[n:0:-1]
        self.new_weight = self.new_base ** self.gamma

    @classmethod
    def from_estimates(cls, tri: Triangle, est: DevFactorEstimates) -> 'OneYearRevaluation':
        return cls(tri, est.gamma, reserve_t0=reserve_t0(tri, est).total)

    def refit_factors(self, payments) -> np.ndarray:
        """Development factors re-estimated on the extended trapezoid, k = 1..n."""
        payments = np.asarray(payments, dtype=np.float64)
        new_ratio = 1.0 + payments[..., ::-1] / self.new_base
        return (self.sums + self.new_weight * new_ratio) / (self.weight_sums + self.new_weight)

    def reserve_t1(self, payments) -> np.ndarray:
        """Total reserve R1 after the new diagonal (accident year 0 contributes 0)."""
        payments = np.asarray(payments, dtype=np.float64)
        tail = _tail_products(self.refit_factors(payments))
        latest = self.latest[1:] + payments
        return np.sum(latest * (tail[..., self.n:0:-1] - 1.0), axis=-1)

    def cdr(self, payments) -> np.ndarray:
        """One-year claims development loss X = sum Z + R1 - R0."""
        payments = np.asarray(payments, dtype=np.float64)
        return payments.sum(axis=-1) + self.reserve_t1(payments) - self.reserve_t0


def reserve_t1(ext: ExtendedTriangle, gamma) -> float:
    """
    Re-reserve on the extended triangle: all factors re-estimated, each year projected
    from its latest cumulative value.

    Raises:
        EstimationError: Non-positive extended cells with gamma = 1
    """
    gamma = Gamma.coerce(gamma)
    if gamma == Gamma.VOLUME_WEIGHTED and np.any(ext.new_cells <= 0):
        i = int(np.flatnonzero(ext.new_cells <= 0)[0]) + 1
        raise EstimationError(f'extended cell C[{i},{ext.n - i + 1}] is not positive',
                              payload={'row': i, 'column': ext.n - i + 1})
    kernel = OneYearRevaluation(ext.base, gamma)
    return float(kernel.reserve_t1(ext.diagonal.payments))


def cdr_loss(tri: Triangle, est: DevFactorEstimates, diag: NextDiagonal) -> float:
    """X = sum Z + R1(D, Z) - R0(D)."""
    ext = ExtendedTriangle(base=tri, diagonal=diag)
    return diag.total + reserve_t1(ext, est.gamma) - reserve_t0(tri, est).total
