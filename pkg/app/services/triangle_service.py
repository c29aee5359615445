"""Triangle file I/O, development ratios and one-year extension."""
import logging
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np

from app.models.triangle import ExtendedTriangle, NextDiagonal, Triangle
from app.utils.exceptions import TriangleFormatError, ValidationError

logger = logging.getLogger('simulation')

REFERENCE_TRIANGLE = Path(__file__).resolve().parent.parent / 'data' / 'reference_triangle.csv'


def parse_triangle(text: Union[str, Iterable[str]]) -> Triangle:
    """
    Parse a comma-separated cumulative triangle.

    One row per accident year in increasing order; row i holds n - i + 1 values.
    Blank lines and lines starting with '#' are ignored.

    Args:
        text: File contents or an iterable of lines (e.g. an open file)

    Returns:
        Triangle: Validated triangle

    Raises:
        TriangleFormatError: With the offending file line (and column) number
    """
    lines = text.splitlines() if isinstance(text, str) else text
    rows: List[List[float]] = []
    line_numbers: List[int] = []

    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        values = []
        for col_no, token in enumerate(line.split(','), start=1):
            token = token.strip()
            if not token:
                raise TriangleFormatError(f'empty cell on line {line_no}, column {col_no}',
                                          line=line_no, column=col_no)
            try:
                value = float(token)
            except ValueError:
                raise TriangleFormatError(f'non-numeric cell {token!r} on line {line_no}, column {col_no}',
                                          line=line_no, column=col_no)
            if not np.isfinite(value):
                raise TriangleFormatError(f'non-finite cell on line {line_no}, column {col_no}',
                                          line=line_no, column=col_no)
            values.append(value)
        rows.append(values)
        line_numbers.append(line_no)

    n = len(rows) - 1
    if n < 2:
        raise TriangleFormatError(f'development horizon n={max(n, 0)} < 2 is unsupported '
                                  f'({len(rows)} accident years found)')

    for i, (row, line_no) in enumerate(zip(rows, line_numbers)):
        if len(row) != n - i + 1:
            raise TriangleFormatError(
                f'line {line_no}: accident year {i} has {len(row)} values, '
                f'a trapezoid with {n + 1} accident years needs {n - i + 1}',
                line=line_no,
            )
        if row[0] <= 0:
            raise TriangleFormatError(f'line {line_no}: first development value {row[0]} must be positive',
                                      line=line_no, column=1)

    return Triangle.from_rows(rows)


def read_triangle(path) -> Triangle:
    """Read and parse a triangle file."""
    with open(path, encoding='utf-8') as handle:
        triangle = parse_triangle(handle)
    logger.info(f'Triangle loaded from {path}: n={triangle.n}')
    return triangle


def load_reference_triangle() -> Triangle:
    """The bundled 9-accident-year paid triangle."""
    return read_triangle(REFERENCE_TRIANGLE)


def serialize_triangle(tri: Triangle) -> str:
    """Inverse of parse_triangle; 17 significant digits survive the round trip exactly."""
    return ''.join(','.join(format(v, '.17g') for v in row) + '\n' for row in tri.rows())


def dev_ratios(tri: Triangle) -> List[np.ndarray]:
    """
    Individual development ratios F[i,k] = C[i,k] / C[i,k-1].

    Returns:
        list: entry k-1 holds F[i,k] for i = 0..n-k (k = 1..n)

    Raises:
        ValidationError: On a zero denominator, naming the cell
    """
    ratios = []
    for k in range(1, tri.n + 1):
        previous = tri.column(k - 1)[:tri.n - k + 1]
        zero = np.flatnonzero(previous == 0)
        if zero.size:
            i = int(zero[0])
            raise ValidationError(f'C[{i},{k - 1}] = 0, ratio F[{i},{k}] undefined',
                                  payload={'row': i, 'column': k})
        ratios.append(tri.column(k) / previous)
    return ratios


def extend(tri: Triangle, diag: NextDiagonal) -> ExtendedTriangle:
    """Attach next-year payments; C[i,n-i+1] = C[i,n-i] + Z[i,n-i+1]."""
    return ExtendedTriangle(base=tri, diagonal=diag)
