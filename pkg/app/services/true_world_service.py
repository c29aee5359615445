"""The simulated "true" normal-model world: triangles and next-year diagonals."""
import logging
from typing import Tuple

import numpy as np

from app.models.triangle import NextDiagonal, Triangle
from app.models.world import ResidueSet, TrueParams
from app.utils.exceptions import ValidationError

logger = logging.getLogger('simulation')

# Negative development factors are replaced by this value
RESET_FACTOR = 1.0


def reset_factors(factors):
    """Replace non-positive development factors by 1.0; returns (factors, reset mask)."""
    factors = np.asarray(factors, dtype=np.float64)
    mask = factors <= 0
    if np.any(mask):
        factors = np.where(mask, RESET_FACTOR, factors)
    return factors, mask


def draw_starting_values(params: TrueParams, rng, size: int) -> np.ndarray:
    """C[i,0] ~ N(f0, sigma0^2), redrawing non-positive values."""
    values = rng.normal(params.f0, params.sigma0, size=size)
    bad = values <= 0
    while np.any(bad):
        logger.info(f'Redrawing {int(bad.sum())} non-positive starting value(s)')
        values[bad] = rng.normal(params.f0, params.sigma0, size=int(bad.sum()))
        bad = values <= 0
    return values


def simulate_triangle(params: TrueParams, rng) -> Tuple[Triangle, ResidueSet]:
    """
    Draw one observed triangle under the true parameters.

    F[i,k] = f_k + sigma_k / sqrt(C[i,k-1]^gamma) * zeta[i,k] column by column; a factor
    <= 0 is reset to 1.0 and its stored residue recomputed from the reset factor.

    Args:
        params: True generator parameters
        rng: numpy Generator

    Returns:
        (Triangle, ResidueSet)
    """
    n = params.n
    gamma = int(params.gamma)
    square = np.full((n + 1, n + 1), np.nan)
    residues = np.full((n + 1, n + 1), np.nan)
    resets = []

    square[:, 0] = draw_starting_values(params, rng, n + 1)
    for k in range(1, n + 1):
        rows = n - k + 1
        previous = square[:rows, k - 1]
        zeta = rng.standard_normal(rows)
        scale = params.sigma[k - 1] / np.sqrt(previous ** gamma)
        factors, mask = reset_factors(params.f[k - 1] + scale * zeta)
        if np.any(mask):
            for i in np.flatnonzero(mask):
                logger.info(f'Development factor F[{i},{k}] <= 0 reset to {RESET_FACTOR}')
                resets.append((int(i), k))
                zeta[i] = (RESET_FACTOR - params.f[k - 1]) / scale[i]
        square[:rows, k] = previous * factors
        residues[:rows, k] = zeta

    rows = [square[i, :n - i + 1] for i in range(n + 1)]
    return Triangle.from_rows(rows), ResidueSet(values=residues, reset_cells=tuple(resets))


def simulate_next_diagonal(tri: Triangle, params: TrueParams, rng) -> NextDiagonal:
    """
    True next-year payments Z[i,n-i+1] = (F[i,n-i+1] - 1) * C[i,n-i] for i = 1..n.

    Raises:
        ValidationError: If the triangle horizon differs from the parameters
    """
    if tri.n != params.n:
        raise ValidationError(f'triangle has n={tri.n}, parameters describe n={params.n}')
    n = tri.n
    latest = tri.diagonal()[1:]
    columns = n - np.arange(n)  # k = n-i+1 for i = 1..n
    zeta = rng.standard_normal(n)
    factors = params.f[columns - 1] + params.sigma[columns - 1] / np.sqrt(latest ** int(params.gamma)) * zeta
    factors, mask = reset_factors(factors)
    if np.any(mask):
        for i in np.flatnonzero(mask):
            logger.info(f'Next-year factor F[{i + 1},{n - i}] <= 0 reset to {RESET_FACTOR}')
    return NextDiagonal(payments=(factors - 1.0) * latest, resets=int(mask.sum()))
