"""Observable-distribution condition battery for single-root star models.

For four or more positively correlated items the following are equivalent
for a Gaussian distribution generated over a star graph with proper positive
loadings, and necessary for binary items:

* the correlation matrix minus a diagonal in (0, 1) has rank one,
* the correlations form a positive tetrad matrix,
* the concentration matrix is a complete M-matrix with vanishing tetrads,
* the partial correlations given all remaining items form a positive tetrad
  matrix.

``proposition_battery`` evaluates these conditions and aggregates them into
one of three verdicts: ``consistent``, ``heywood`` (tetrad pattern intact
but no permissible loadings) or ``inconsistent``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from . import gaussian
from .errors import DimensionTooSmall, LabelClash
from .matrices import (
    SquareMatrix,
    as_square,
    invert,
    principal_submatrix,
    rank_one_residual,
)

#: default tolerance on tetrad residuals of model-generated matrices
EXACT_TOL = 1e-8

#: default tolerance on tetrad residuals of observed (sampled) matrices
STATISTICAL_TOL = 0.05


@dataclass(frozen=True)
class TetradReport:
    """All distinct tetrad differences of a symmetric matrix.

    ``residuals`` holds one entry per ordered quadruple ``(i, j, h, k)`` with
    ``i < j``, ``h < k``, ``i < h`` and disjoint pairs, in lexicographic
    order: the value ``s_ih s_jk - s_jh s_ik``.  That enumeration covers the
    3 * C(Q, 4) distinct differences exactly once each.
    """

    residuals: tuple
    max_abs_residual: float
    is_tetrad: bool
    all_positive: bool
    tolerance: float


def tetrad_quadruples(dim: int):
    """Ordered position quadruples (i, j, h, k) indexing the distinct tetrad differences."""
    out = []
    for (a, b) in itertools.combinations(range(dim), 2):
        for (c, d) in itertools.combinations(range(dim), 2):
            if a < c and not {a, b} & {c, d}:
                out.append((a, b, c, d))
    out.sort()
    return out


def tetrad_check(matrix: SquareMatrix | np.ndarray, tol: float = EXACT_TOL) -> TetradReport:
    """Evaluate every distinct tetrad difference of a symmetric matrix.

    ``is_tetrad`` holds when the largest residual magnitude is within
    ``tol``; ``all_positive`` when every off-diagonal entry lies strictly in
    (0, 1).  Both are reported, neither is required of the input, so the
    check applies to correlation and concentration matrices alike.

    Raises
    ------
    DimensionTooSmall
        For fewer than four indices, where no tetrad exists.
    """
    matrix = as_square(matrix)
    if matrix.dim < 4:
        raise DimensionTooSmall(f"tetrads need at least 4 items, got {matrix.dim}")
    arr = matrix.values
    labs = matrix.labels
    residuals = []
    for (i, j, h, k) in tetrad_quadruples(matrix.dim):
        value = arr[i, h] * arr[j, k] - arr[j, h] * arr[i, k]
        residuals.append(((labs[i], labs[j], labs[h], labs[k]), float(value)))
    max_abs = max(abs(v) for _, v in residuals)
    off = arr[~np.eye(matrix.dim, dtype=bool)]
    return TetradReport(
        residuals=tuple(residuals),
        max_abs_residual=float(max_abs),
        is_tetrad=bool(max_abs <= tol),
        all_positive=bool(np.all(off > 0.0) and np.all(off < 1.0)),
        tolerance=tol,
    )


def m_matrix_check(matrix: SquareMatrix | np.ndarray, strict: bool = True,
                   tol: float = 1e-12) -> bool:
    """Is the matrix a complete M-matrix (positive diagonal, negative off-diagonal)?

    In strict mode off-diagonals must fall below ``-tol``; otherwise zeros
    are allowed, the analogue of merely nonnegative partial associations.
    """
    matrix = as_square(matrix)
    arr = matrix.values
    if np.any(np.diag(arr) <= tol):
        return False
    off = arr[~np.eye(matrix.dim, dtype=bool)]
    if strict:
        return bool(np.all(off < -tol))
    return bool(np.all(off <= tol))


def partial_correlations_given_rest(matrix: SquareMatrix | np.ndarray) -> SquareMatrix:
    """Matrix of pairwise partial correlations given all remaining indices.

    Entry ``(i, j)`` is ``-k_ij / sqrt(k_ii k_jj)`` for ``K`` the inverse of
    the input; the diagonal is set to one.
    """
    matrix = as_square(matrix)
    conc = invert(matrix).values
    scale = np.sqrt(np.outer(np.diag(conc), np.diag(conc)))
    values = -conc / scale
    np.fill_diagonal(values, 1.0)
    return SquareMatrix(values, matrix.labels)


def partial_correlation_subset(matrix: SquareMatrix | np.ndarray, i, j,
                               given=()) -> float:
    """Partial correlation of ``i`` and ``j`` given exactly the labels in ``given``.

    Computed from the inverse of the principal submatrix on ``{i, j} | given``;
    an empty conditioning set returns the marginal entry.

    Raises
    ------
    LabelClash
        If ``i`` or ``j`` occurs in ``given`` or ``i == j``.
    """
    matrix = as_square(matrix)
    given = set(given)
    if i == j or {i, j} & given:
        raise LabelClash(f"target pair ({i!r}, {j!r}) overlaps conditioning set {given!r}")
    sub = principal_submatrix(matrix, {i, j} | given)
    conc = invert(sub).values
    a, b = sub.position(i), sub.position(j)
    return float(-conc[a, b] / np.sqrt(conc[a, a] * conc[b, b]))


class Verdict(enum.Enum):
    CONSISTENT = "consistent"
    INCONSISTENT = "inconsistent"
    HEYWOOD = "heywood"


@dataclass(frozen=True)
class ConditionResult:
    """Outcome of one condition: pass/fail plus the witnessing values."""

    name: str
    passed: bool
    decisive: bool
    witnesses: tuple
    detail: str


@dataclass(frozen=True)
class ConditionBattery:
    """All condition outcomes with the aggregated verdict.

    ``overall`` is ``consistent`` only if every decisive condition passed.
    In binary mode the conditions are necessary but not sufficient, recorded
    by ``necessary_only``.
    """

    mode: str
    q: int
    tolerance: float
    conditions: tuple[ConditionResult, ...]
    overall: Verdict
    necessary_only: bool
    notes: tuple[str, ...]

    def condition(self, name: str) -> ConditionResult:
        for cond in self.conditions:
            if cond.name == name:
                return cond
        raise KeyError(name)

    def failing(self) -> tuple[ConditionResult, ...]:
        return tuple(c for c in self.conditions if not c.passed)


def _positivity_condition(matrix: SquareMatrix, decisive: bool) -> ConditionResult:
    witnesses = tuple((f"({i},{j})", v) for i, j, v in matrix.offdiag()
                      if not 0.0 < v < 1.0)
    return ConditionResult(
        name="positive_correlations",
        passed=not witnesses,
        decisive=decisive,
        witnesses=witnesses,
        detail="every off-diagonal entry strictly between 0 and 1",
    )


def _battery_q3(matrix: SquareMatrix, mode: str, tol: float,
                notes: list[str]) -> ConditionBattery:
    """Three items: closed-form loadings plus subset positivity, no tetrads."""
    notes = notes + ["tetrad conditions skipped: they need at least 4 items"]
    labels = matrix.labels
    conditions = [_positivity_condition(matrix, decisive=True)]

    arr = matrix.values
    loadings = gaussian.fit_loadings_triple(arr[0, 1], arr[0, 2], arr[1, 2])
    conditions.append(ConditionResult(
        name="proper_loadings",
        passed=loadings.is_proper,
        decisive=True,
        witnesses=tuple(zip(loadings.values, (s.value for s in loadings.statuses))),
        detail="closed-form loading estimates strictly inside (0, 1)",
    ))

    partial_witnesses = []
    for a, b in itertools.combinations(labels, 2):
        rest = [lab for lab in labels if lab not in (a, b)]
        for size in range(len(rest) + 1):
            for cond_set in itertools.combinations(rest, size):
                value = partial_correlation_subset(matrix, a, b, cond_set)
                if value <= 0.0:
                    partial_witnesses.append((f"({a},{b}|{set(cond_set) or '{}'})", value))
    conditions.append(ConditionResult(
        name="positive_subset_partials",
        passed=not partial_witnesses,
        decisive=True,
        witnesses=tuple(partial_witnesses),
        detail="partial correlation of every pair positive for every conditioning set",
    ))

    if not conditions[0].passed:
        overall = Verdict.INCONSISTENT
    elif not conditions[1].passed:
        overall = Verdict.HEYWOOD
    elif not conditions[2].passed:
        overall = Verdict.INCONSISTENT
    else:
        overall = Verdict.CONSISTENT
    return ConditionBattery(
        mode=mode, q=3, tolerance=tol, conditions=tuple(conditions),
        overall=overall, necessary_only=(mode == "binary"), notes=tuple(notes),
    )


def proposition_battery(matrix: SquareMatrix | np.ndarray, mode: str = "gaussian",
                        tol: float = EXACT_TOL,
                        tetrad_decisive: bool = True) -> ConditionBattery:
    """Run the full star-compatibility condition battery on a correlation matrix.

    Parameters
    ----------
    matrix : SquareMatrix
        Symmetric matrix with unit diagonal (three or more items; with three
        the tetrad conditions are skipped and noted).
    mode : str
        ``"gaussian"`` marks the conditions as sufficient, ``"binary"`` as
        necessary only.
    tol : float
        Tolerance for tetrad residuals and the rank-one residual.
    tetrad_decisive : bool
        When False, residual-magnitude conditions are still evaluated and
        reported but do not enter the verdict; sign and properness
        conditions always do.  Observed frequency tables have sampling noise
        in every correlation, so magnitude conditions have no calibrated
        test and are advisory there.

    Raises
    ------
    Errors of the component operations (singular matrices etc.) propagate.
    """
    if mode not in ("gaussian", "binary"):
        raise ValueError(f"unknown mode {mode!r}")
    matrix = as_square(matrix)
    if matrix.dim < 3:
        raise DimensionTooSmall("the battery needs at least 3 items")
    notes: list[str] = []
    if mode == "binary":
        notes.append("binary items: conditions are necessary only")
    if matrix.dim == 3:
        return _battery_q3(matrix, mode, tol, notes)

    conditions = [_positivity_condition(matrix, decisive=True)]

    corr_tetrads = tetrad_check(matrix, tol)
    conditions.append(ConditionResult(
        name="tetrad_correlations",
        passed=corr_tetrads.is_tetrad,
        decisive=tetrad_decisive,
        witnesses=(corr_tetrads.max_abs_residual,),
        detail=f"largest tetrad residual of the correlations within {tol:g}",
    ))

    deflation = rank_one_residual(matrix)
    rank_one_pass = deflation.delta_inside_unit and (
        deflation.residual <= tol if tetrad_decisive else True)
    conditions.append(ConditionResult(
        name="rank_one_deflation",
        passed=rank_one_pass,
        decisive=True,
        witnesses=(deflation.residual, tuple(float(d) for d in deflation.delta)),
        detail="correlations minus a diagonal inside (0, 1) have rank one",
    ))

    conc = invert(matrix)
    m_witnesses = tuple((f"({i},{j})", v) for i, j, v in conc.offdiag() if v >= 0.0)
    conditions.append(ConditionResult(
        name="concentration_m_matrix",
        passed=m_matrix_check(conc, strict=True),
        decisive=True,
        witnesses=m_witnesses,
        detail="concentration matrix has positive diagonal and negative off-diagonals",
    ))

    conc_tetrads = tetrad_check(conc, tol)
    conditions.append(ConditionResult(
        name="tetrad_concentrations",
        passed=conc_tetrads.is_tetrad,
        decisive=tetrad_decisive,
        witnesses=(conc_tetrads.max_abs_residual,),
        detail=f"largest tetrad residual of the concentrations within {tol:g}",
    ))

    partials = partial_correlations_given_rest(matrix)
    partial_tetrads = tetrad_check(partials, tol)
    sign_witnesses = tuple((f"({i},{j})", v) for i, j, v in partials.offdiag()
                           if not 0.0 < v < 1.0)
    conditions.append(ConditionResult(
        name="positive_partial_correlations",
        passed=not sign_witnesses,
        decisive=True,
        witnesses=sign_witnesses,
        detail="partial correlations given the remaining items strictly in (0, 1)",
    ))
    conditions.append(ConditionResult(
        name="tetrad_partial_correlations",
        passed=partial_tetrads.is_tetrad,
        decisive=tetrad_decisive,
        witnesses=(partial_tetrads.max_abs_residual,),
        detail=f"largest tetrad residual of the partial correlations within {tol:g}",
    ))

    decisive_failed = [c for c in conditions if c.decisive and not c.passed]
    positivity_ok = conditions[0].passed
    tetrad_ok = corr_tetrads.is_tetrad or not tetrad_decisive
    if not decisive_failed:
        overall = Verdict.CONSISTENT
    elif positivity_ok and tetrad_ok:
        overall = Verdict.HEYWOOD
    else:
        overall = Verdict.INCONSISTENT

    return ConditionBattery(
        mode=mode, q=matrix.dim, tolerance=tol, conditions=tuple(conditions),
        overall=overall, necessary_only=(mode == "binary"), notes=tuple(notes),
    )
