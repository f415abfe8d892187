"""File formats for count vectors, correlation matrices and raw 0/1 data.

All formats are whitespace-tolerant plain text; lines starting with ``#``
(and inline ``#`` tails) are comments.  Count and raw files may start with a
header line of variable names, recognised by containing a non-numeric token.
Writing then reading any format reproduces the value exactly.
"""

from __future__ import annotations

import importlib.resources
import warnings
from pathlib import Path

import numpy as np

from .errors import (
    AsymmetryError,
    BadLength,
    NegativeCount,
    NonBinaryValue,
    NonUnitDiagonal,
    ParseError,
)
from .matrices import SquareMatrix
from .tables import CountTable

#: symmetry / unit-diagonal tolerance for correlation files
MATRIX_READ_TOL = 1e-9


class CorrelationRangeWarning(UserWarning):
    """An off-diagonal entry lies outside [-1, 1]; kept for the diagnostics."""


def _content_lines(path):
    """Yield (line_number, [(column, token), ...]) for non-comment content."""
    text = Path(path).read_text()
    for line_no, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0]
        tokens = []
        col = 0
        for token in body.split():
            col = body.index(token, col)
            tokens.append((col + 1, token))
            col += len(token)
        if tokens:
            yield line_no, tokens


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _split_header(lines):
    """Pop a leading name line if its tokens are not all numeric."""
    if lines and not all(_is_number(tok) for _, tok in lines[0][1]):
        header = tuple(tok for _, tok in lines[0][1])
        return header, lines[1:]
    return None, lines


def read_count_vector(path) -> CountTable:
    """Read a cell-count vector in the standard first-variable-fastest order.

    The number of counts must be a power of two; an optional header line
    names the variables, otherwise they are called ``V1..Vq``.

    Raises
    ------
    BadLength, NegativeCount, ParseError
    """
    lines = list(_content_lines(path))
    names, lines = _split_header(lines)
    counts = []
    for line_no, tokens in lines:
        for col, token in tokens:
            try:
                value = int(token)
            except ValueError:
                raise ParseError(f"expected an integer count, got {token!r}",
                                 line=line_no, column=col) from None
            if value < 0:
                raise NegativeCount(f"negative count {value}", line=line_no, column=col)
            counts.append(value)
    size = len(counts)
    if size < 2 or size & (size - 1):
        raise BadLength(f"{size} counts is not a power of two (>= 2)")
    q = size.bit_length() - 1
    if names is not None and len(names) != q:
        raise ParseError(f"header names {len(names)} variables but counts imply {q}")
    return CountTable(np.array(counts), names or ())


def read_correlation_matrix(path) -> SquareMatrix:
    """Read a full square correlation matrix, one row per line.

    The matrix must be symmetric and have unit diagonal within 1e-9; it is
    exactly symmetrised on return.  Off-diagonals outside [-1, 1] are
    accepted with a :class:`CorrelationRangeWarning` so the diagnostics can
    classify them.

    Raises
    ------
    AsymmetryError, NonUnitDiagonal, ParseError
    """
    rows = []
    for line_no, tokens in _content_lines(path):
        row = []
        for col, token in tokens:
            try:
                row.append(float(token))
            except ValueError:
                raise ParseError(f"expected a number, got {token!r}",
                                 line=line_no, column=col) from None
        rows.append((line_no, row))
    if not rows:
        raise ParseError("empty matrix file")
    dim = len(rows)
    for line_no, row in rows:
        if len(row) != dim:
            raise ParseError(f"row has {len(row)} entries, expected {dim}", line=line_no)
    arr = np.array([row for _, row in rows])
    if np.max(np.abs(arr - arr.T)) > MATRIX_READ_TOL:
        raise AsymmetryError(f"matrix asymmetric beyond {MATRIX_READ_TOL:g}")
    if np.max(np.abs(np.diag(arr) - 1.0)) > MATRIX_READ_TOL:
        raise NonUnitDiagonal(f"diagonal away from 1 beyond {MATRIX_READ_TOL:g}")
    arr = (arr + arr.T) / 2.0
    np.fill_diagonal(arr, 1.0)
    off = arr[~np.eye(dim, dtype=bool)]
    if np.any(np.abs(off) > 1.0):
        warnings.warn("off-diagonal entries outside [-1, 1]", CorrelationRangeWarning,
                      stacklevel=2)
    return SquareMatrix(arr)


def read_raw_binary(path) -> CountTable:
    """Aggregate rows of 0/1 observations (comma or whitespace separated).

    Raises
    ------
    NonBinaryValue, ParseError
    """
    lines = []
    for line_no, tokens in _content_lines(path):
        split = []
        for col, token in tokens:
            for piece in token.split(","):
                if piece:
                    split.append((col, piece))
        lines.append((line_no, split))
    names, lines = _split_header(lines)
    rows = []
    for line_no, tokens in lines:
        row = []
        for col, token in tokens:
            if token not in ("0", "1"):
                raise NonBinaryValue(f"expected 0 or 1, got {token!r}",
                                     line=line_no, column=col)
            row.append(int(token))
        rows.append((line_no, row))
    if not rows:
        raise ParseError("empty data file")
    q = len(rows[0][1])
    counts = np.zeros(2 ** q, dtype=np.int64)
    for line_no, row in rows:
        if len(row) != q:
            raise ParseError(f"row has {len(row)} values, expected {q}", line=line_no)
        counts[sum(v << p for p, v in enumerate(row))] += 1
    if names is not None and len(names) != q:
        raise ParseError(f"header names {len(names)} variables but rows have {q}")
    return CountTable(counts, names or ())


def write_count_vector(table: CountTable, path) -> None:
    lines = [" ".join(table.names), " ".join(str(c) for c in table.counts())]
    Path(path).write_text("\n".join(lines) + "\n")


def write_correlation_matrix(matrix: SquareMatrix, path) -> None:
    lines = [" ".join(repr(v) for v in row) for row in matrix.values]
    Path(path).write_text("\n".join(lines) + "\n")


def write_raw_binary(table: CountTable, path) -> None:
    """Expand a count table back into one 0/1 row per observation."""
    lines = [" ".join(table.names)]
    for levels, count in zip(table.levels(), table.counts()):
        lines.extend(" ".join(str(l) for l in levels) for _ in range(count))
    Path(path).write_text("\n".join(lines) + "\n")


def dataset_path(name: str) -> Path:
    """Path of a bundled dataset file, e.g. ``eph_gestosis.txt``."""
    resource = importlib.resources.files("stardiag") / "data" / name
    return Path(str(resource))
