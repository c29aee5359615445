"""Modelled-risk types: engine tags, inversion draws and SCR results."""
from dataclasses import asdict, dataclass
from enum import Enum

import numpy as np

from app.utils.exceptions import ValidationError


class MethodTag(Enum):
    """Parameter-uncertainty method behind a modelled one-year loss."""

    WITHOUT = 'without'
    BOOTSTRAP = 'bootstrap'
    INVERSION_ADJ = 'inversion'

    @property
    def stream(self) -> int:
        """Fixed position of the method's scenario substream."""
        return list(MethodTag).index(self)

    @property
    def label(self) -> str:
        return {
            MethodTag.WITHOUT: 'without parameter uncertainty',
            MethodTag.BOOTSTRAP: 'bootstrap',
            MethodTag.INVERSION_ADJ: 'adjusted inversion',
        }[self]

    @classmethod
    def coerce(cls, value) -> 'MethodTag':
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = '|'.join(m.value for m in cls)
            raise ValidationError(f'unknown method {value!r}, expected one of {names}',
                                  payload={'field': 'method'})


@dataclass(frozen=True)
class InversionDraw:
    """
    One batch of inversion-method parameter draws.

    Column arrays have a trailing axis over k = 1..n-1; ``ahat`` has the batch shape.
    """

    Rprime: np.ndarray
    Mprime: np.ndarray
    fsim: np.ndarray
    sigma2sim: np.ndarray
    ahat: np.ndarray


@dataclass(frozen=True)
class ScrResult:
    """Empirical alpha-quantile of a modelled one-year loss sample."""

    method: MethodTag
    alpha: float
    scr: float
    scenarios: int
    seed: int
    reserve_t0: float
    gamma: int = 0
    deterministic: bool = False

    def to_dict(self):
        rv = asdict(self)
        rv['method'] = self.method.value
        return rv
