"""Chain-ladder parameter estimates."""
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from app.utils.exceptions import ValidationError


class Gamma(IntEnum):
    """Weighting exponent of the variance assumption Var[F | C] = sigma^2 / C^gamma."""

    UNWEIGHTED = 0
    VOLUME_WEIGHTED = 1

    @classmethod
    def coerce(cls, value) -> 'Gamma':
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise ValidationError(f'gamma must be 0 or 1, got {value!r}', payload={'field': 'gamma'})


@dataclass(frozen=True)
class DevFactorEstimates:
    """
    Estimated development factors fhat[k-1] and variances sigma2hat[k-1] for k = 1..n.

    fhat[n-1] is the single observed ratio C[0,n] / C[0,n-1]; sigma2hat[n-1] = 0 always.
    """

    gamma: Gamma
    fhat: np.ndarray
    sigma2hat: np.ndarray
    sigmahat: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        fhat = np.array(self.fhat, dtype=np.float64)
        sigma2hat = np.array(self.sigma2hat, dtype=np.float64)
        if fhat.shape != sigma2hat.shape or fhat.ndim != 1:
            raise ValidationError('fhat and sigma2hat must be vectors of equal length')
        if sigma2hat[-1] != 0.0:
            raise ValidationError('the last development factor carries no variance estimate')
        if np.any(sigma2hat < 0):
            raise ValidationError('sigma2hat must be non-negative')
        for arr in (fhat, sigma2hat):
            arr.setflags(write=False)
        sigmahat = np.sqrt(sigma2hat)
        sigmahat.setflags(write=False)
        object.__setattr__(self, 'gamma', Gamma.coerce(self.gamma))
        object.__setattr__(self, 'fhat', fhat)
        object.__setattr__(self, 'sigma2hat', sigma2hat)
        object.__setattr__(self, 'sigmahat', sigmahat)

    @property
    def n(self) -> int:
        return int(self.fhat.size)

    def factor(self, k: int) -> float:
        return float(self.fhat[k - 1])

    def variance(self, k: int) -> float:
        return float(self.sigma2hat[k - 1])


@dataclass(frozen=True)
class Reserves:
    """Best-estimate reserves per accident year 0..n and their total."""

    by_year: np.ndarray
    ultimates: np.ndarray

    @property
    def total(self) -> float:
        return float(self.by_year[1:].sum())
