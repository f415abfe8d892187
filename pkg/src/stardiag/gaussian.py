"""The Gaussian one-factor star model: loadings to matrices and back.

A star model with root ``L`` and items ``1..Q`` is parameterised by the
loadings ``lam_i``, the item-root correlations.  Proper positive loadings
(``0 < lam_i < 1``) induce the item correlation matrix

    P = diag(1 - lam**2) + lam lam'

whose inverse has the closed form ``diag(1/(1 - lam**2)) - d d'`` with
``d_i = lam_i / (sqrt(s) (1 - lam_i**2))`` and ``s = 1 + sum lam_i**2 / (1 -
lam_i**2)``, the precision of the root.

Fitting goes the other way: for three items the loadings have the unique
closed form ``lam_1 = sqrt(r12 r13 / r23)`` (and cyclic), for more items a
least-squares fit on the off-diagonal correlations is used.  Estimates at or
beyond 1 mark Heywood cases: correlation matrices that admit no permissible
single-root explanation.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .errors import ImproperLoadings, NegativeCorrelation, ZeroDenominator
from .matrices import SquareMatrix, as_square

#: estimates closer than this to 0 or 1 are classified Boundary
BOUNDARY_TOL = 1e-9

#: root label used for joint (items + root) matrices
ROOT_LABEL = "L"


class LoadingStatus(enum.Enum):
    PROPER = "proper"        # strictly inside (0, 1)
    BOUNDARY = "boundary"    # at 0 or 1: the item collapses onto noise or the root
    HEYWOOD = "heywood"      # above 1, or squared estimate from a negative ratio


def classify_loading(value: float) -> LoadingStatus:
    """Status of one loading estimate under the boundary tolerance."""
    if math.isnan(value):
        return LoadingStatus.HEYWOOD
    if abs(value) <= BOUNDARY_TOL or abs(value - 1.0) <= BOUNDARY_TOL:
        return LoadingStatus.BOUNDARY
    if 0.0 < value < 1.0:
        return LoadingStatus.PROPER
    return LoadingStatus.HEYWOOD


@dataclass(frozen=True)
class Loadings:
    """A vector of item-root correlations with per-entry validity status.

    ``nan`` values record estimates whose square came out negative; they are
    always Heywood.
    """

    values: tuple[float, ...]
    statuses: tuple[LoadingStatus, ...]

    def __post_init__(self):
        if len(self.values) < 3:
            raise ValueError("a star model needs at least 3 items")
        if len(self.statuses) != len(self.values):
            raise ValueError("one status per loading required")

    @classmethod
    def from_values(cls, values) -> "Loadings":
        vals = tuple(float(v) for v in values)
        return cls(vals, tuple(classify_loading(v) for v in vals))

    @property
    def q(self) -> int:
        return len(self.values)

    @property
    def is_proper(self) -> bool:
        return all(s is LoadingStatus.PROPER for s in self.statuses)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=float)

    def worst_status(self) -> LoadingStatus:
        order = (LoadingStatus.HEYWOOD, LoadingStatus.BOUNDARY, LoadingStatus.PROPER)
        for status in order:
            if status in self.statuses:
                return status
        return LoadingStatus.PROPER


@dataclass(frozen=True)
class FactorFit:
    """A fitted one-factor model: loadings, implied correlations, fit error."""

    loadings: Loadings
    fitted_correlations: SquareMatrix
    max_offdiag_residual: float


def build_correlation(loadings: Loadings) -> SquareMatrix:
    """Item correlation matrix implied by the loadings.

    Off-diagonal ``(i, j)`` is exactly ``lam_i * lam_j``; the diagonal is one.
    Heywood inputs are accepted, the output is then no valid correlation
    matrix but still the algebraic ``diag(1 - lam**2) + lam lam'``.
    """
    lam = loadings.array
    values = np.outer(lam, lam)
    np.fill_diagonal(values, 1.0)
    return SquareMatrix(values, tuple(range(1, loadings.q + 1)))


def root_precision(loadings: Loadings) -> float:
    """``s = 1 + sum lam_i**2 / (1 - lam_i**2)``, the precision of the root."""
    lam = loadings.array
    return float(1.0 + np.sum(lam ** 2 / (1.0 - lam ** 2)))


def build_concentration(loadings: Loadings) -> SquareMatrix:
    """Closed-form inverse of :func:`build_correlation` for proper loadings.

    Raises
    ------
    ImproperLoadings
        If any loading is outside (0, 1); the closed form needs positive
        unique variances and a positive root precision.
    """
    if not loadings.is_proper:
        raise ImproperLoadings(f"loadings {loadings.values} are not all inside (0, 1)")
    lam = loadings.array
    unique = 1.0 - lam ** 2
    s = root_precision(loadings)
    d = lam / (np.sqrt(s) * unique)
    values = np.diag(1.0 / unique) - np.outer(d, d)
    return SquareMatrix(values, tuple(range(1, loadings.q + 1)))


def build_joint_correlation(loadings: Loadings) -> SquareMatrix:
    """Correlation matrix of the items together with the root (label ``L``)."""
    q = loadings.q
    lam = loadings.array
    values = np.ones((q + 1, q + 1))
    values[:q, :q] = build_correlation(loadings).values
    values[:q, q] = lam
    values[q, :q] = lam
    return SquareMatrix(values, tuple(range(1, q + 1)) + (ROOT_LABEL,))


def fit_loadings_triple(r12: float, r13: float, r23: float) -> Loadings:
    """Closed-form loadings for three items from their three correlations.

    ``lam_1 = sqrt(r12 r13 / r23)`` and cyclically for the other two.  A
    negative ratio leaves the estimate undefined (stored as ``nan``) and is
    classified Heywood, as is any estimate above one.

    Raises
    ------
    ZeroDenominator
        If any correlation is numerically zero (below 1e-12).
    """
    rs = (r12, r13, r23)
    if any(abs(r) < 1e-12 for r in rs):
        raise ZeroDenominator(f"correlations {rs} contain a numerical zero")
    ratios = (r12 * r13 / r23, r12 * r23 / r13, r13 * r23 / r12)
    values = tuple(math.sqrt(a) if a >= 0.0 else math.nan for a in ratios)
    return Loadings.from_values(values)


def _triad_initial(corr: np.ndarray) -> np.ndarray:
    """Average of the closed-form triple estimates over all triples per item."""
    q = corr.shape[0]
    init = np.empty(q)
    for i in range(q):
        others = [j for j in range(q) if j != i]
        estimates = [
            math.sqrt(corr[i, j] * corr[i, k] / corr[j, k])
            for j, k in itertools.combinations(others, 2)
        ]
        init[i] = float(np.mean(estimates))
    return init


def fit_loadings(matrix: SquareMatrix | np.ndarray) -> FactorFit:
    """Least-squares one-factor fit of a positive correlation matrix.

    Minimises ``sum_{i<j} (P_ij - lam_i lam_j)**2`` by quasi-Newton descent
    from the triad-average start, with gradient max-abs convergence 1e-10 and
    at most 500 iterations.  For three items this reproduces the closed form
    of :func:`fit_loadings_triple`.

    Raises
    ------
    NegativeCorrelation
        If any off-diagonal entry is not strictly positive.  The fit is not
        attempted; recoding items is a decision left to the caller.
    """
    matrix = as_square(matrix)
    corr = matrix.values
    q = matrix.dim
    if q < 3:
        raise ValueError("fit needs at least 3 items")
    bad = [((matrix.labels[i], matrix.labels[j]), float(corr[i, j]))
           for i in range(q) for j in range(i + 1, q) if corr[i, j] <= 0.0]
    if bad:
        raise NegativeCorrelation(bad)

    offdiag = ~np.eye(q, dtype=bool)

    def objective(lam):
        err = (np.outer(lam, lam) - corr) * offdiag
        return 0.5 * float(np.sum(err ** 2))

    def gradient(lam):
        err = (np.outer(lam, lam) - corr) * offdiag
        return 2.0 * err @ lam

    start = _triad_initial(corr)
    result = minimize(objective, start, jac=gradient, method="BFGS",
                      options={"gtol": 1e-10, "maxiter": 500})
    lam = result.x
    loadings = Loadings.from_values(lam)
    fitted = np.outer(lam, lam)
    np.fill_diagonal(fitted, 1.0)
    residual = float(np.max(np.abs((fitted - corr) * offdiag)))
    return FactorFit(
        loadings=loadings,
        fitted_correlations=SquareMatrix(fitted, matrix.labels),
        max_offdiag_residual=residual,
    )


def partial_given_root(r_ij: float, lam_i: float, lam_j: float) -> float:
    """Partial correlation of an item pair given the root.

    Zero exactly when ``r_ij = lam_i * lam_j``, the single-root induction.
    """
    return (r_ij - lam_i * lam_j) / math.sqrt((1.0 - lam_i ** 2) * (1.0 - lam_j ** 2))
