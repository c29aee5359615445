"""Claims development triangle models."""
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from app.utils.exceptions import TriangleFormatError, ValidationError


def _frozen(values):
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


def _row_offsets(n):
    lengths = np.arange(n + 1, 0, -1)
    return np.concatenate(([0], np.cumsum(lengths)))


@dataclass(frozen=True)
class Triangle:
    """
    Cumulative payments C[i, k] for 0 <= i, k <= n with i + k <= n.

    Cells are stored as one flat row-major array; row i holds n - i + 1 values.
    Cells below the latest diagonal do not exist.
    """

    n: int
    cells: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, 'cells', _frozen(self.cells))
        if self.n < 2:
            raise TriangleFormatError(f'development horizon n={self.n} < 2 is unsupported')
        expected = (self.n + 1) * (self.n + 2) // 2
        if self.cells.shape != (expected,):
            raise TriangleFormatError(
                f'trapezoid with n={self.n} needs {expected} cells, got {self.cells.size}'
            )
        if not np.all(np.isfinite(self.cells)):
            raise TriangleFormatError('triangle contains non-finite cells')
        first_column = self.column(0)
        bad = np.flatnonzero(first_column <= 0)
        if bad.size:
            i = int(bad[0])
            raise TriangleFormatError(
                f'C[{i},0] = {first_column[i]} must be positive', line=i + 1, column=1
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]]) -> 'Triangle':
        """Build a triangle from ragged rows; row i must hold n - i + 1 values."""
        n = len(rows) - 1
        if n < 2:
            raise TriangleFormatError(f'development horizon n={n} < 2 is unsupported')
        for i, row in enumerate(rows):
            if len(row) != n - i + 1:
                raise TriangleFormatError(
                    f'row {i} has {len(row)} values, a trapezoid with n={n} needs {n - i + 1}',
                    line=i + 1,
                )
        return cls(n=n, cells=np.concatenate([np.asarray(r, dtype=np.float64) for r in rows]))

    @property
    def offsets(self):
        return _row_offsets(self.n)

    def row(self, i: int) -> np.ndarray:
        offsets = self.offsets
        return self.cells[offsets[i]:offsets[i + 1]]

    def rows(self) -> List[np.ndarray]:
        return [self.row(i) for i in range(self.n + 1)]

    def cell(self, i: int, k: int) -> float:
        if i < 0 or k < 0 or i + k > self.n:
            raise ValidationError(f'cell ({i},{k}) lies outside the observed trapezoid')
        return float(self.cells[self.offsets[i] + k])

    def column(self, k: int) -> np.ndarray:
        """C[i, k] for i = 0..n-k."""
        offsets = self.offsets
        return self.cells[offsets[:self.n - k + 1] + k]

    def diagonal(self) -> np.ndarray:
        """Latest observed values C[i, n-i] for i = 0..n."""
        offsets = self.offsets
        return self.cells[offsets[1:] - 1]

    def weights(self, k: int, gamma: int) -> np.ndarray:
        """Estimator weights C[i, k-1]^gamma for the n-k+1 ratios of column k."""
        base = self.column(k - 1)[:self.n - k + 1]
        return base ** gamma

    def scaled(self, factor: float) -> 'Triangle':
        return Triangle(n=self.n, cells=self.cells * factor)

    def to_square(self) -> np.ndarray:
        """(n+1) x (n+1) matrix with NaN below the latest diagonal."""
        square = np.full((self.n + 1, self.n + 1), np.nan)
        for i, row in enumerate(self.rows()):
            square[i, :row.size] = row
        return square


@dataclass(frozen=True)
class NextDiagonal:
    """Payments Z[i, n-i+1] of the next calendar year; payments[i-1] belongs to accident year i."""

    payments: np.ndarray
    resets: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'payments', _frozen(self.payments))
        if self.payments.ndim != 1:
            raise ValidationError('next diagonal must be a vector')

    @property
    def n(self) -> int:
        return int(self.payments.size)

    @property
    def total(self) -> float:
        return float(self.payments.sum())


@dataclass(frozen=True)
class ExtendedTriangle:
    """Observed triangle plus one new calendar-year diagonal."""

    base: Triangle
    diagonal: NextDiagonal
    new_cells: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.diagonal.n != self.base.n:
            raise ValidationError(
                f'next diagonal has {self.diagonal.n} payments, triangle needs {self.base.n}'
            )
        # C[i, n-i+1] for i = 1..n
        latest = self.base.diagonal()[1:]
        object.__setattr__(self, 'new_cells', _frozen(latest + self.diagonal.payments))

    @property
    def n(self) -> int:
        return self.base.n

    def latest(self) -> np.ndarray:
        """Latest value per accident year 0..n after the new diagonal."""
        return np.concatenate(([self.base.cell(0, self.n)], self.new_cells))
