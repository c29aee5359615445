"""Parameters and residues of the simulated "true" normal-model world."""
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from app.models.estimates import Gamma
from app.utils.exceptions import ConfigurationError


@dataclass(frozen=True)
class TrueParams:
    """
    Generator parameters: C[i,0] ~ N(f0, sigma0^2) and
    F[i,k] | C[i,k-1] ~ N(f[k-1], sigma[k-1]^2 / C[i,k-1]^gamma).
    """

    f0: float
    sigma0: float
    f: np.ndarray
    sigma: np.ndarray
    gamma: Gamma

    def __post_init__(self):
        f = np.array(self.f, dtype=np.float64)
        sigma = np.array(self.sigma, dtype=np.float64)
        if f.ndim != 1 or f.shape != sigma.shape or f.size < 2:
            raise ConfigurationError('f and sigma must be vectors of equal length n >= 2')
        if not self.f0 > 0:
            raise ConfigurationError(f'f0 must be positive, got {self.f0}', payload={'key': 'f0'})
        if self.sigma0 < 0:
            raise ConfigurationError('sigma0 must be non-negative', payload={'key': 'sigma0'})
        if np.any(f <= 0):
            raise ConfigurationError('development factors must be positive', payload={'key': 'f'})
        if np.any(sigma < 0):
            raise ConfigurationError('sigma must be non-negative', payload={'key': 'sigma_scaled'})
        if f[-1] != 1.0 or sigma[-1] != 0.0:
            raise ConfigurationError('claims must settle after n years: f[n] = 1 and sigma[n] = 0')
        f.setflags(write=False)
        sigma.setflags(write=False)
        object.__setattr__(self, 'f', f)
        object.__setattr__(self, 'sigma', sigma)
        object.__setattr__(self, 'gamma', Gamma.coerce(self.gamma))
        object.__setattr__(self, 'f0', float(self.f0))
        object.__setattr__(self, 'sigma0', float(self.sigma0))

    @classmethod
    def from_table(cls, f0, sigma0, f: Sequence[float], sigma_scaled: Sequence[float], gamma) -> 'TrueParams':
        """
        Build parameters from table values quoted as sigma_k * f0^(-gamma/2).

        For gamma = 1 the table value is the standard deviation of F at a cell of size f0,
        so the stored sigma_k is the table value times f0^(1/2).
        """
        gamma = Gamma.coerce(gamma)
        sigma = np.asarray(sigma_scaled, dtype=np.float64) * float(f0) ** (gamma / 2.0)
        return cls(f0=f0, sigma0=sigma0, f=f, sigma=sigma, gamma=gamma)

    @property
    def n(self) -> int:
        return int(self.f.size)

    @property
    def sigma_scaled(self) -> np.ndarray:
        return self.sigma / self.f0 ** (self.gamma / 2.0)


@dataclass(frozen=True)
class ResidueSet:
    """
    Residues zeta[i, k] (k >= 1, i + k <= n) actually used to build a simulated triangle.

    ``values`` is an (n+1) x (n+1) matrix, NaN outside the ratio cells.
    ``reset_cells`` lists the (i, k) cells whose factor was reset to 1.0.
    """

    values: np.ndarray = field(repr=False)
    reset_cells: Tuple[Tuple[int, int], ...] = ()

    @property
    def n(self) -> int:
        return self.values.shape[0] - 1

    def get(self, i: int, k: int) -> float:
        return float(self.values[i, k])

    def column(self, k: int) -> np.ndarray:
        return self.values[:self.n - k + 1, k]
