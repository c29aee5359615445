"""Setup of the one-parameter N(0, sigma^2) fiducial example."""
from dataclasses import dataclass

from app.utils.exceptions import ValidationError


@dataclass(frozen=True)
class FiducialSetup:
    """n observations of N(0, sigma^2), their estimate sigma2hat = mean of squares, and alpha."""

    n: int
    sigma2hat: float
    alpha: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValidationError(f'n must be a positive integer, got {self.n}', payload={'field': 'n'})
        if not self.sigma2hat > 0:
            raise ValidationError(f'sigma2hat must be positive, got {self.sigma2hat}',
                                  payload={'field': 'sigma2hat'})
        if not 0.0 < self.alpha < 1.0:
            raise ValidationError(f'alpha must lie in (0, 1), got {self.alpha}', payload={'field': 'alpha'})

    @property
    def sigmahat(self) -> float:
        return self.sigma2hat ** 0.5
