"""Dense symmetric-matrix arithmetic on labelled square matrices.

The central object is :class:`SquareMatrix`, a small immutable wrapper around
a dense array whose rows and columns carry index labels (item numbers, plus
optionally a root label such as ``"L"``).  On top of it the module provides

* ``partial_invert`` - the partial inversion (sweep-like) operator, applied
  index by index with the single-index rule

      [[m, v], [w', s]]  ->  [[m - v w'/s, v/s], [-w'/s, 1/s]]

  where the swept index is ordered last.  Applying the operator twice on the
  same set restores the input, and applications on disjoint sets commute.
* ``invert`` - full inversion through LAPACK with a condition-number guard;
  partial inversion on the full label set agrees with it and the test-suite
  keeps the two routes independent.
* ``rank_one_residual`` - how far a unit-diagonal matrix is from
  "diagonal plus rank one" with the deflated diagonal inside (0, 1).
* ``principal_submatrix`` - label-based restriction.

All functions are pure; matrices are never mutated in place.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import (
    DimensionTooSmall,
    SingularMatrix,
    SingularPivot,
    UnknownLabel,
)

#: relative pivot tolerance for partial inversion
PIVOT_TOL = 1e-12

#: condition-estimate bound above which ``invert`` refuses to proceed
DEFAULT_CONDITION_BOUND = 1e12

#: tolerance used to flag a matrix as symmetric at construction
SYMMETRY_TOL = 1e-12

Label = int | str


@dataclass(frozen=True)
class SquareMatrix:
    """A dense square matrix with distinct index labels.

    Parameters
    ----------
    values : ndarray
        Square array of float entries.  A read-only copy is stored.
    labels : tuple
        One hashable label per row/column, defaults to ``1..dim``.
    """

    values: np.ndarray
    labels: tuple = field(default=())

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"values must be square, got shape {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("dimension must be at least 1")
        labels = tuple(self.labels) if self.labels else tuple(range(1, arr.shape[0] + 1))
        if len(labels) != arr.shape[0]:
            raise ValueError(f"{len(labels)} labels for dimension {arr.shape[0]}")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "labels", labels)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def is_symmetric(self) -> bool:
        return bool(np.all(np.abs(self.values - self.values.T) <= SYMMETRY_TOL))

    def position(self, label: Label) -> int:
        """Row/column position of ``label``; raises ``UnknownLabel``."""
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(label) from None

    def positions(self, labels: Iterable[Label]) -> list[int]:
        return [self.position(lab) for lab in labels]

    def entry(self, row: Label, col: Label) -> float:
        return float(self.values[self.position(row), self.position(col)])

    def offdiag(self):
        """Iterate ``(row_label, col_label, value)`` over i < j pairs."""
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                yield self.labels[i], self.labels[j], float(self.values[i, j])

    def with_values(self, values: np.ndarray) -> "SquareMatrix":
        return SquareMatrix(values, self.labels)

    def __repr__(self):
        return f"SquareMatrix(dim={self.dim}, labels={self.labels})"


def as_square(values, labels: Sequence[Label] | None = None) -> SquareMatrix:
    """Coerce an array-like (or pass through a SquareMatrix) to SquareMatrix."""
    if isinstance(values, SquareMatrix):
        return values
    return SquareMatrix(np.asarray(values, dtype=float), tuple(labels) if labels else ())


@dataclass(frozen=True)
class PartialInversionResult:
    """A partially inverted matrix together with the swept label set."""

    matrix: SquareMatrix
    inverted_set: frozenset

    def __post_init__(self):
        if not self.inverted_set <= set(self.matrix.labels):
            raise UnknownLabel(set(self.inverted_set) - set(self.matrix.labels))


def _sweep_index(arr: np.ndarray, k: int, label: Label) -> np.ndarray:
    """One application of the single-index rule at position ``k``.

    The swept index plays the role of the last row/column: its column is
    divided by the pivot, its row is divided by the pivot and negated, the
    remaining block receives the Schur-complement update.
    """
    scale = np.max(np.abs(arr))
    pivot = arr[k, k]
    if abs(pivot) <= PIVOT_TOL * scale:
        raise SingularPivot(label, float(pivot))
    out = arr.copy()
    rest = np.arange(arr.shape[0]) != k
    col = arr[rest, k]
    row = arr[k, rest]
    out[np.ix_(rest, rest)] -= np.outer(col, row) / pivot
    out[rest, k] = col / pivot
    out[k, rest] = -row / pivot
    out[k, k] = 1.0 / pivot
    return out


def partial_invert(matrix: SquareMatrix, on: Iterable[Label]) -> PartialInversionResult:
    """Partially invert ``matrix`` on the label set ``on``.

    The operator is its own inverse on a fixed set and commutes across
    disjoint sets; sweeping every label produces the matrix inverse.

    Parameters
    ----------
    matrix : SquareMatrix
        Input matrix; every principal submatrix indexed by subsets of ``on``
        must be invertible so that all pivots stay away from zero.
    on : iterable of labels
        Subset of ``matrix.labels`` to invert on.

    Returns
    -------
    PartialInversionResult
        The swept matrix (generally no longer symmetric: the rows of the
        swept set change sign relative to their columns) and the set.

    Raises
    ------
    UnknownLabel
        If ``on`` is not a subset of the matrix labels.
    SingularPivot
        If a pivot magnitude falls below ``PIVOT_TOL`` relative to the
        current matrix scale.
    """
    on = list(on)
    positions = matrix.positions(on)
    arr = matrix.values.copy()
    for pos, lab in sorted(zip(positions, on)):
        arr = _sweep_index(arr, pos, lab)
    return PartialInversionResult(matrix.with_values(arr), frozenset(on))


def invert(matrix: SquareMatrix, cond_bound: float = DEFAULT_CONDITION_BOUND) -> SquareMatrix:
    """Invert a square matrix with a condition-number guard.

    Raises
    ------
    SingularMatrix
        If the two-norm condition estimate exceeds ``cond_bound`` or the
        matrix is exactly singular.
    """
    arr = matrix.values
    try:
        cond = np.linalg.cond(arr)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - cond rarely raises
        raise SingularMatrix(str(exc)) from exc
    if not np.isfinite(cond) or cond > cond_bound:
        raise SingularMatrix(f"condition estimate {cond:.3g} exceeds bound {cond_bound:.3g}")
    inv = np.linalg.inv(arr)
    return matrix.with_values(inv)


def principal_submatrix(matrix: SquareMatrix, keep: Iterable[Label]) -> SquareMatrix:
    """Restrict rows and columns to ``keep``, preserving the matrix label order."""
    keep = set(keep)
    if not keep:
        raise DimensionTooSmall("keep must be a nonempty label subset")
    for lab in keep:
        if lab not in matrix.labels:
            raise UnknownLabel(lab)
    pos = [i for i, lab in enumerate(matrix.labels) if lab in keep]
    values = matrix.values[np.ix_(pos, pos)]
    labels = tuple(matrix.labels[i] for i in pos)
    return SquareMatrix(values, labels)


class RankOneDeflation(NamedTuple):
    """Result of the diagonal-deflation rank-one fit."""

    delta: np.ndarray
    residual: float
    delta_inside_unit: bool


def rank_one_residual(matrix: SquareMatrix, max_iter: int = 200,
                      tol: float = 1e-10) -> RankOneDeflation:
    """Fit ``matrix ~ diag(delta) + v v'`` and report the leftover.

    The deflation ``delta`` is estimated by fixed-point iteration: from the
    current loading vector ``lam`` set ``delta_ii = 1 - lam_i**2``, take the
    leading eigenpair of ``matrix - diag(delta)`` as the next rank-one
    factor, and repeat until ``delta`` is stable.  The residual is the
    max-abs difference between the deflated matrix and its best rank-one
    symmetric approximation at the fitted ``delta``.

    Matrices of the form ``diag(1 - lam**2) + lam lam'`` give residual zero
    and recover ``delta`` exactly; ``delta_inside_unit`` reports whether
    ``0 < delta_ii < 1`` holds for every index, which is what makes the
    deflation a witness for proper loadings.
    """
    arr = matrix.values
    if not matrix.is_symmetric:
        raise ValueError("rank_one_residual needs a symmetric matrix")

    def leading(mat):
        w, v = np.linalg.eigh(mat)
        vec = v[:, -1]
        if vec.sum() < 0:
            vec = -vec
        lam = np.sqrt(max(w[-1], 0.0)) * vec
        return w[-1], vec, lam

    _, _, lam = leading(arr)
    delta = 1.0 - lam ** 2
    for _ in range(max_iter):
        _, _, lam = leading(arr - np.diag(delta))
        new_delta = 1.0 - lam ** 2
        if np.max(np.abs(new_delta - delta)) < tol:
            delta = new_delta
            break
        delta = new_delta

    deflated = arr - np.diag(delta)
    top, vec, _ = leading(deflated)
    residual = float(np.max(np.abs(deflated - top * np.outer(vec, vec))))
    inside = bool(np.all(delta > 0.0) and np.all(delta < 1.0))
    return RankOneDeflation(delta=delta, residual=residual, delta_inside_unit=inside)


def max_abs_difference(a: SquareMatrix | np.ndarray, b: SquareMatrix | np.ndarray) -> float:
    """Entrywise max-abs distance, the comparison norm used throughout."""
    av = a.values if isinstance(a, SquareMatrix) else np.asarray(a)
    bv = b.values if isinstance(b, SquareMatrix) else np.asarray(b)
    return float(np.max(np.abs(av - bv)))
