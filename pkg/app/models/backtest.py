"""Backtest run configuration and report."""
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

import numpy as np

from app.models.risk import MethodTag
from app.models.world import TrueParams
from app.utils.exceptions import ConfigurationError


@dataclass(frozen=True)
class BacktestConfig:
    """Nested Monte-Carlo run: s outer worlds, t modelled scenarios per world and method."""

    true_params: TrueParams
    methods: Tuple[MethodTag, ...]
    alphas: Tuple[float, ...]
    s: int
    t: int
    master_seed: int
    workers: int = 1

    def __post_init__(self):
        methods = tuple(sorted({MethodTag.coerce(m) for m in self.methods}, key=lambda m: m.stream))
        alphas = tuple(sorted(float(a) for a in self.alphas))
        if not methods:
            raise ConfigurationError('at least one method is required', payload={'key': 'methods'})
        if not alphas or any(not 0.0 < a < 1.0 for a in alphas):
            raise ConfigurationError('alphas must lie in (0, 1)', payload={'key': 'alphas'})
        if self.s < 1 or self.t < 1:
            raise ConfigurationError('s and t must be at least 1')
        if self.master_seed < 0:
            raise ConfigurationError('master_seed must be non-negative', payload={'key': 'master_seed'})
        if self.workers < 1:
            raise ConfigurationError('workers must be at least 1', payload={'key': 'workers'})
        object.__setattr__(self, 'methods', methods)
        object.__setattr__(self, 'alphas', alphas)

    @property
    def gamma(self) -> int:
        return int(self.true_params.gamma)

    def thin_alphas(self) -> List[float]:
        """Confidence levels whose tail holds less than one scenario."""
        return [a for a in self.alphas if self.t * (1.0 - a) < 1.0]

    def echo(self) -> Dict:
        params = self.true_params
        return {
            'gamma': self.gamma,
            'f0': params.f0,
            'sigma0': params.sigma0,
            'f': params.f.tolist(),
            'sigma_scaled': params.sigma_scaled.tolist(),
            'methods': [m.value for m in self.methods],
            'alphas': list(self.alphas),
            's': self.s,
            't': self.t,
            'master_seed': self.master_seed,
            'workers': self.workers,
        }


@dataclass(frozen=True)
class SolvencyEstimate:
    method: MethodTag
    alpha: float
    successes: int
    s: int
    probability: float
    std_error: float


@dataclass
class BacktestReport:
    """Per (method, alpha) solvency-probability estimates plus the run manifest."""

    estimates: List[SolvencyEstimate]
    manifest: Dict = field(default_factory=dict)

    def get(self, method, alpha) -> SolvencyEstimate:
        method = MethodTag.coerce(method)
        for estimate in self.estimates:
            if estimate.method is method and np.isclose(estimate.alpha, alpha):
                return estimate
        raise KeyError((method.value, alpha))

    def probability(self, method, alpha) -> float:
        return self.get(method, alpha).probability
