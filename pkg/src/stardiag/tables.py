"""Exact arithmetic on binary contingency tables.

Cell vectors follow one fixed ordering throughout the package: levels run
from 0 to 1 and the level of the first variable changes fastest, the second
next, and so on.  For three variables A, B, C the vector is therefore

    (000, 100, 010, 110, 001, 101, 011, 111)

with levels written in variable order A, B, C.  Variables are addressed by
1-based position in all public operations, matching the labels used on the
correlation matrices.

The module provides point correlations (phi) computed through three
algebraically equivalent routes, odds-ratios and relative risks on arbitrary
margins and slices, studentized saturated log-linear interactions, the nine
inequality constraints for three items under a binary single-root model,
MTP2 positivity checks, exact star-model marginals, and reconstruction of a
trivariate joint from its pairwise margins under a vanishing third central
moment.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    DegenerateMargin,
    EmptySlice,
    InconsistentMargins,
    ZeroCell,
)
from .matrices import SquareMatrix

#: agreement required between the three phi formulas
PHI_FORMULA_TOL = 1e-12

#: normalisation tolerance of probability tables
PROB_SUM_TOL = 1e-12

#: cells more negative than this make a reconstruction infeasible
RECONSTRUCTION_TOL = -1e-12


def _default_names(q: int) -> tuple[str, ...]:
    return tuple(f"V{i}" for i in range(1, q + 1))


def cell_levels(q: int) -> tuple[tuple[int, ...], ...]:
    """Level tuples of all 2**q cells, first variable fastest."""
    return tuple(tuple((i >> v) & 1 for v in range(q)) for i in range(2 ** q))


class _Table:
    """Shared behaviour of count and probability tables."""

    values: np.ndarray
    names: tuple[str, ...]

    @property
    def q(self) -> int:
        return len(self.names)

    @property
    def total(self) -> float:
        return float(self.values.sum())

    def levels(self) -> tuple[tuple[int, ...], ...]:
        return cell_levels(self.q)

    def _positions(self, variables) -> list[int]:
        out = []
        for v in variables:
            if not 1 <= v <= self.q:
                raise ValueError(f"variable {v} outside 1..{self.q}")
            out.append(v - 1)
        return out

    def collapse(self, variables) -> "_Table":
        """Margin over the given variables (1-based), in the order given."""
        keep = self._positions(variables)
        out = np.zeros(2 ** len(keep), dtype=self.values.dtype)
        for idx, lv in enumerate(self.levels()):
            key = sum(lv[v] << p for p, v in enumerate(keep))
            out[key] += self.values[idx]
        names = tuple(self.names[v] for v in keep)
        return self._build(out, names)

    def condition(self, assignment: dict) -> "_Table":
        """Sub-table of cells where the assigned variables (1-based) hold fixed levels.

        Raises ``EmptySlice`` when no observation (or probability mass) falls
        in the requested slice.
        """
        fixed = {v - 1: level for v, level in assignment.items()}
        self._positions(assignment)
        keep = [v for v in range(self.q) if v not in fixed]
        out = np.zeros(2 ** len(keep), dtype=self.values.dtype)
        for idx, lv in enumerate(self.levels()):
            if all(lv[v] == level for v, level in fixed.items()):
                key = sum(lv[v] << p for p, v in enumerate(keep))
                out[key] += self.values[idx]
        if out.sum() <= 0:
            raise EmptySlice(f"no observations at {assignment}")
        names = tuple(self.names[v] for v in keep)
        return self._build(out, names)

    def cell(self, levels: tuple[int, ...]) -> float:
        idx = sum(l << p for p, l in enumerate(levels))
        return float(self.values[idx])

    def _build(self, values, names):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class CountTable(_Table):
    """Nonnegative integer counts over the cells of q binary variables."""

    values: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        arr = np.asarray(self.values)
        if not np.issubdtype(arr.dtype, np.integer):
            if np.any(arr != np.round(arr)):
                raise ValueError("counts must be integers")
            arr = arr.astype(np.int64)
        else:
            arr = arr.astype(np.int64)
        if arr.ndim != 1 or arr.size < 2 or (arr.size & (arr.size - 1)) != 0:
            raise ValueError(f"cell vector length {arr.size} is not a power of two >= 2")
        if np.any(arr < 0):
            raise ValueError("counts must be nonnegative")
        if arr.sum() < 1:
            raise ValueError("the table must contain at least one observation")
        q = arr.size.bit_length() - 1
        names = tuple(self.names) if self.names else _default_names(q)
        if len(names) != q:
            raise ValueError(f"{len(names)} names for {q} variables")
        if len(set(names)) != len(names):
            raise ValueError("variable names must be distinct")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "names", names)

    def _build(self, values, names):
        return CountTable(values, names)

    def counts(self) -> tuple[int, ...]:
        return tuple(int(c) for c in self.values)

    def probabilities(self) -> "ProbTable":
        return ProbTable(self.values / self.values.sum(), self.names)

    def __eq__(self, other):
        return (isinstance(other, CountTable) and self.names == other.names
                and np.array_equal(self.values, other.values))


@dataclass(frozen=True, eq=False)
class ProbTable(_Table):
    """Cell probabilities over q binary variables, summing to one."""

    values: np.ndarray
    names: tuple[str, ...] = ()

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 2 or (arr.size & (arr.size - 1)) != 0:
            raise ValueError(f"cell vector length {arr.size} is not a power of two >= 2")
        if np.any(arr < 0.0):
            raise ValueError("probabilities must be nonnegative")
        if abs(arr.sum() - 1.0) > PROB_SUM_TOL:
            raise ValueError(f"probabilities sum to {arr.sum()!r}, not 1")
        q = arr.size.bit_length() - 1
        names = tuple(self.names) if self.names else _default_names(q)
        if len(names) != q:
            raise ValueError(f"{len(names)} names for {q} variables")
        if len(set(names)) != len(names):
            raise ValueError("variable names must be distinct")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "names", names)

    def _build(self, values, names):
        # renormalise to absorb float summation error in collapsed margins
        vals = np.asarray(values, dtype=float)
        return ProbTable(vals / vals.sum(), names)

    def __eq__(self, other):
        return (isinstance(other, ProbTable) and self.names == other.names
                and np.array_equal(self.values, other.values))


# --- phi correlations ---------------------------------------------------- #

def _margins_2x2(values: np.ndarray):
    n00, n10, n01, n11 = (float(v) for v in values)
    row0, row1 = n00 + n01, n10 + n11     # first variable at level 0 / 1
    col0, col1 = n00 + n10, n01 + n11     # second variable at level 0 / 1
    return (n00, n10, n01, n11), (row0, row1, col0, col1)


def phi_correlation(table: _Table) -> float:
    """Point correlation of a 2x2 table, computed three equivalent ways.

    The three routes are the cross-product difference over the geometric
    mean of the margins, the covariance over the same denominator, and the
    determinant of the margin-standardised joint matrix.  They must agree to
    1e-12; the cross-product value is returned.

    Raises
    ------
    DegenerateMargin
        If a univariate margin is empty, where the correlation is undefined.
    """
    if table.q != 2:
        raise ValueError(f"phi needs a 2x2 table, got {table.q} variables")
    (n00, n10, n01, n11), (row0, row1, col0, col1) = _margins_2x2(table.values)
    if min(row0, row1, col0, col1) <= 0.0:
        raise DegenerateMargin(f"margins {(row0, row1, col0, col1)} of pair {table.names}")
    n = n00 + n10 + n01 + n11
    kappa = math.sqrt(row0 * row1 * col0 * col1)

    cross = (n00 * n11 - n10 * n01) / kappa
    covariance = (n11 / n - (row1 / n) * (col1 / n)) / (kappa / n ** 2)

    joint = np.array([[n00, n01], [n10, n11]]) / n
    da = np.diag([math.sqrt(n / row0), math.sqrt(n / row1)])
    db = np.diag([math.sqrt(n / col0), math.sqrt(n / col1)])
    determinant = float(np.linalg.det(da @ joint @ db))

    spread = max(cross, covariance, determinant) - min(cross, covariance, determinant)
    if spread > PHI_FORMULA_TOL:
        raise AssertionError(
            f"phi formulas disagree by {spread:.3g}: {cross}, {covariance}, {determinant}")
    return cross


def correlation_matrix(table: _Table) -> SquareMatrix:
    """Pairwise phi correlations of all variables, labels 1..q.

    Raises
    ------
    DegenerateMargin
        Identifying the offending pair, if any 2x2 margin is degenerate.
    """
    if table.q < 2:
        raise ValueError("need at least two variables")
    out = np.eye(table.q)
    for i, j in itertools.combinations(range(1, table.q + 1), 2):
        out[i - 1, j - 1] = out[j - 1, i - 1] = phi_correlation(table.collapse((i, j)))
    return SquareMatrix(out, tuple(range(1, table.q + 1)))


# --- odds-ratios and relative risks --------------------------------------- #

def _maybe_correct(cells: np.ndarray, continuity: bool) -> np.ndarray:
    cells = cells.astype(float)
    if np.any(cells == 0.0):
        if not continuity:
            raise ZeroCell(f"zero cell in {tuple(cells)}; enable the continuity correction")
        cells = cells + 0.5
    return cells


def odds_ratio(table: _Table, pair: tuple[int, int], given: dict | None = None,
               continuity: bool = False) -> float:
    """Cross-product ratio of a 2x2 slice or margin.

    Parameters
    ----------
    pair : (int, int)
        The two variables (1-based) of the 2x2 table.
    given : dict or None
        Levels at which to fix some of the remaining variables; variables
        neither in ``pair`` nor in ``given`` are collapsed.  ``None`` gives
        the marginal odds-ratio.
    continuity : bool
        Add 0.5 to every cell of the slice when a zero cell occurs.
    """
    given = dict(given or {})
    if set(pair) & set(given):
        raise ValueError(f"pair {pair} overlaps conditioning assignment {given}")
    sliced = table.condition(given) if given else table
    # positions shift after conditioning: recover via names
    names = [table.names[v - 1] for v in pair]
    pos = tuple(sliced.names.index(nm) + 1 for nm in names)
    margin = sliced.collapse(pos)
    cells = _maybe_correct(margin.values, continuity)
    return float(cells[0] * cells[3] / (cells[1] * cells[2]))


def conditional_relative_risks(table: _Table) -> tuple[float, float]:
    """Relative risks of the first variable on the second, at each level of the third.

    For level ``l`` of the third variable this is
    ``P(first=1 | second=1, third=l) / P(first=1 | second=0, third=l)``.

    Raises
    ------
    EmptySlice
        If one of the four conditioning groups contains no observations.
    """
    if table.q != 3:
        raise ValueError("relative risks are defined on a 2x2x2 table")
    out = []
    for level in (0, 1):
        probs = []
        for second in (1, 0):
            group = table.condition({2: second, 3: level})
            if group.total <= 0.0:
                raise EmptySlice(f"no observations with second={second}, third={level}")
            probs.append(group.values[1] / group.total)
        if probs[1] == 0.0:
            raise EmptySlice("baseline group has success probability zero")
        out.append(float(probs[0] / probs[1]))
    return out[0], out[1]


# --- studentized log-linear interactions ---------------------------------- #

@dataclass(frozen=True)
class InteractionTerm:
    """One saturated log-linear interaction with its studentized value."""

    variables: tuple[int, ...]
    estimate: float
    std_error: float
    studentized: float


@dataclass(frozen=True)
class LogLinearTerms:
    """All interactions of order two and higher of a 2x2x2 table."""

    terms: tuple[InteractionTerm, ...]

    def term(self, variables: tuple[int, ...]) -> InteractionTerm:
        for t in self.terms:
            if t.variables == variables:
                return t
        raise KeyError(variables)


def studentized_interactions(table: _Table, continuity: bool = False) -> LogLinearTerms:
    """Studentized saturated log-linear interactions of a 2x2x2 table.

    With effect coding (+1 at level 1, -1 at level 0) the interaction for a
    variable subset ``h`` is ``u_h = (1/8) sum_cells sign_h(cell) ln n_cell``
    with delta-method standard error ``(1/8) sqrt(sum_cells 1/n_cell)``,
    identical for every ``h``.  Reported is the signed estimate, the error
    and their ratio.

    Raises
    ------
    ZeroCell
        If a cell is zero and the continuity correction is off.
    """
    if table.q != 3:
        raise ValueError("interactions are computed per 2x2x2 table")
    cells = _maybe_correct(table.values, continuity)
    logs = np.log(cells)
    se = math.sqrt(float(np.sum(1.0 / cells))) / 8.0
    levels = table.levels()
    terms = []
    for size in (2, 3):
        for combo in itertools.combinations(range(3), size):
            signs = np.array([
                math.prod(1 if lv[v] == 1 else -1 for v in combo) for lv in levels
            ])
            estimate = float(signs @ logs) / 8.0
            terms.append(InteractionTerm(
                variables=tuple(v + 1 for v in combo),
                estimate=estimate,
                std_error=se,
                studentized=estimate / se,
            ))
    return LogLinearTerms(tuple(terms))


# --- star-model marginalisation ------------------------------------------- #

def star_marginal(model) -> tuple[ProbTable, ProbTable]:
    """Exact joint (items and root) and leaf tables of a binary star model.

    Thin wrapper over :func:`stardiag.simulate.exact_tables`, kept here so
    table-level code can marginalise models without importing the simulator.
    """
    from . import simulate

    return simulate.exact_tables(model)


# --- the nine constraints for three items --------------------------------- #

@dataclass(frozen=True)
class InequalitySlack:
    """One inequality of the three-item battery with its observed slack."""

    name: str
    slack: float

    @property
    def holds(self) -> bool:
        return self.slack >= 0.0


@dataclass(frozen=True)
class Q3StarVerdict:
    """Outcome of the nine three-item star-compatibility inequalities."""

    slacks: tuple[InequalitySlack, ...]
    passed: bool


def q3_star_conditions(table: _Table) -> Q3StarVerdict:
    """The nine inequalities a three-item table must satisfy under a binary root.

    Three level-matching constraints: for each item, the odds of level 1 to
    level 0 when the other two items sit at level 0 must not exceed the odds
    when they sit at level 1.  Six positivity constraints: the odds-ratio of
    each pair given the third item (at either level) must be at least one;
    their slack is reported as ``odds_ratio - 1``.

    Raises
    ------
    ZeroCell
        If a cell needed by one of the ratio forms is zero.
    """
    if table.q != 3:
        raise ValueError("the battery applies to exactly three items")
    probs = table.values / table.values.sum()
    if np.any(probs == 0.0):
        raise ZeroCell("the inequality forms need all eight cells positive")
    p = {lv: probs[i] for i, lv in enumerate(table.levels())}
    slacks = [
        InequalitySlack("odds(V1) matched at 1 vs 0",
                        p[1, 1, 1] / p[0, 1, 1] - p[1, 0, 0] / p[0, 0, 0]),
        InequalitySlack("odds(V2) matched at 1 vs 0",
                        p[1, 1, 1] / p[1, 0, 1] - p[0, 1, 0] / p[0, 0, 0]),
        InequalitySlack("odds(V3) matched at 1 vs 0",
                        p[1, 1, 1] / p[1, 1, 0] - p[0, 0, 1] / p[0, 0, 0]),
    ]
    for i, j in itertools.combinations((1, 2, 3), 2):
        third = ({1, 2, 3} - {i, j}).pop()
        for level in (0, 1):
            ratio = odds_ratio(table, (i, j), {third: level})
            slacks.append(InequalitySlack(f"OR(V{i},V{j} | V{third}={level}) >= 1",
                                          ratio - 1.0))
    return Q3StarVerdict(tuple(slacks), all(s.holds for s in slacks))


# --- MTP2 ------------------------------------------------------------------ #

@dataclass(frozen=True)
class Mtp2Slice:
    """One pairwise conditional association at a full assignment of the rest."""

    pair: tuple[int, int]
    assignment: tuple[tuple[int, int], ...]
    cross_difference: float     # n00*n11 - n10*n01 on the slice
    odds_ratio: float | None    # None when a zero cell leaves it undefined


@dataclass(frozen=True)
class Mtp2Verdict:
    strict: bool
    passed: bool
    slices: tuple[Mtp2Slice, ...]


def mtp2_check(table: _Table, strict: bool = False) -> Mtp2Verdict:
    """No pair negatively associated given full levels of all remaining variables.

    Association per slice is judged by the cross-product difference, which
    agrees in sign with the log odds-ratio wherever the latter is defined.
    ``strict`` additionally forbids conditional independence (zero
    difference).

    Raises
    ------
    EmptySlice
        If any conditioning assignment has no observations.
    """
    slices = []
    ok = True
    for i, j in itertools.combinations(range(1, table.q + 1), 2):
        rest = [v for v in range(1, table.q + 1) if v not in (i, j)]
        for levels in itertools.product((0, 1), repeat=len(rest)):
            assignment = dict(zip(rest, levels))
            sliced = table.condition(assignment) if assignment else table
            if sliced.total <= 0.0:
                raise EmptySlice(f"no observations at {assignment}")
            pos = tuple(sliced.names.index(table.names[v - 1]) + 1 for v in (i, j))
            cells = sliced.collapse(pos).values.astype(float)
            diff = cells[0] * cells[3] - cells[1] * cells[2]
            ratio = None
            if cells[1] * cells[2] > 0.0:
                ratio = float(cells[0] * cells[3] / (cells[1] * cells[2]))
            slices.append(Mtp2Slice((i, j), tuple(sorted(assignment.items())),
                                    float(diff), ratio))
            if diff < 0.0 or (strict and diff <= 0.0):
                ok = False
    return Mtp2Verdict(strict=strict, passed=ok, slices=tuple(slices))


# --- reconstruction from pairwise margins ---------------------------------- #

@dataclass(frozen=True)
class MarginSystem:
    """Three 2x2 tables for the pairs (A,B), (A,C), (B,C) of three variables."""

    ab: CountTable
    ac: CountTable
    bc: CountTable
    names: tuple[str, str, str] = ("A", "B", "C")

    def __post_init__(self):
        for part in (self.ab, self.ac, self.bc):
            if part.q != 2:
                raise ValueError("each margin must be a 2x2 table")


@dataclass(frozen=True)
class Reconstruction:
    """Trivariate cell probabilities implied by pairwise margins alone.

    Treating only the pairwise distributions as known fixes every moment
    except the top one, which is completed by setting the third central
    moment to zero.  ``raw_cells`` holds the resulting signed cell values in
    the standard ordering; ``cells`` clamps noise-level negatives to zero.
    ``feasible`` is False when a cell is genuinely negative, in which case
    ``negative_cells`` lists the witnesses and no joint distribution with
    the given margins and a vanishing third-order interaction exists.
    """

    names: tuple[str, str, str]
    raw_cells: tuple[float, ...]
    feasible: bool
    negative_cells: tuple[tuple[tuple[int, int, int], float], ...]

    @property
    def cells(self) -> tuple[float, ...]:
        return tuple(max(c, 0.0) for c in self.raw_cells)

    def table(self) -> ProbTable:
        if not self.feasible:
            raise ValueError("reconstruction is infeasible; no probability table exists")
        return ProbTable(np.array(self.cells) / sum(self.cells), self.names)


def _pair_moments(margin: CountTable):
    """(total, mu_first, mu_second, mu_both) of a 2x2 count table, exact."""
    n00, n10, n01, n11 = (int(c) for c in margin.values)
    total = n00 + n10 + n01 + n11
    return (total,
            Fraction(n10 + n11, total),
            Fraction(n01 + n11, total),
            Fraction(n11, total))


def reconstruct_from_pairwise(margins: MarginSystem,
                              margin_tol: float = 1e-9) -> Reconstruction:
    """Complete three pairwise margins to a joint with zero third central moment.

    The raw moments are taken from the margins, the triple moment is fixed by
    ``E[(A - muA)(B - muB)(C - muC)] = 0``, i.e.

        m_ABC = muC m_AB + muB m_AC + muA m_BC - 2 muA muB muC,

    and the eight cells follow by inclusion-exclusion, computed in exact
    rational arithmetic.

    Raises
    ------
    InconsistentMargins
        If the three tables imply different univariate margins (beyond
        ``margin_tol`` on relative frequencies) or different totals.
    """
    n_ab, mu_a1, mu_b1, m_ab = _pair_moments(margins.ab)
    n_ac, mu_a2, mu_c1, m_ac = _pair_moments(margins.ac)
    n_bc, mu_b2, mu_c2, m_bc = _pair_moments(margins.bc)
    if not n_ab == n_ac == n_bc:
        raise InconsistentMargins(f"totals differ: {n_ab}, {n_ac}, {n_bc}")
    for name, left, right in (("A", mu_a1, mu_a2), ("B", mu_b1, mu_b2), ("C", mu_c1, mu_c2)):
        if abs(left - right) > margin_tol:
            raise InconsistentMargins(
                f"margin of {name} differs between tables: {float(left)} vs {float(right)}")
    mu_a, mu_b, mu_c = mu_a1, mu_b1, mu_c1

    m_abc = mu_c * m_ab + mu_b * m_ac + mu_a * m_bc - 2 * mu_a * mu_b * mu_c
    cell = {
        (1, 1, 1): m_abc,
        (1, 1, 0): m_ab - m_abc,
        (1, 0, 1): m_ac - m_abc,
        (0, 1, 1): m_bc - m_abc,
        (1, 0, 0): mu_a - m_ab - m_ac + m_abc,
        (0, 1, 0): mu_b - m_ab - m_bc + m_abc,
        (0, 0, 1): mu_c - m_ac - m_bc + m_abc,
    }
    cell[(0, 0, 0)] = 1 - sum(cell.values())

    ordered = cell_levels(3)
    raw = tuple(float(cell[lv]) for lv in ordered)
    negative = tuple((lv, float(cell[lv])) for lv in ordered
                     if cell[lv] < RECONSTRUCTION_TOL)
    return Reconstruction(
        names=margins.names,
        raw_cells=raw,
        feasible=not negative,
        negative_cells=negative,
    )


def third_central_moment(table: _Table) -> float:
    """``E[(A - muA)(B - muB)(C - muC)]`` of a trivariate table."""
    if table.q != 3:
        raise ValueError("needs exactly three variables")
    probs = table.values / table.values.sum()
    mus = [float(sum(p for p, lv in zip(probs, table.levels()) if lv[v] == 1))
           for v in range(3)]
    out = 0.0
    for p, lv in zip(probs, table.levels()):
        out += p * math.prod(lv[v] - mus[v] for v in range(3))
    return float(out)
