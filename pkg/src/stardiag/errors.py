"""Exception types raised by the stardiag library.

Every failure mode of the numerical operations and of the file readers has
its own class so callers can react to the exact condition instead of
matching message strings.
"""

from __future__ import annotations


class StardiagError(Exception):
    """Base class for all stardiag errors."""


# --- matrix operations -------------------------------------------------- #

class SingularPivot(StardiagError):
    """A partial-inversion pivot fell below the pivot tolerance."""

    def __init__(self, label, pivot):
        self.label = label
        self.pivot = pivot
        super().__init__(f"pivot for index {label!r} is too small ({pivot!r})")


class SingularMatrix(StardiagError):
    """The matrix is singular or too ill-conditioned to invert."""


class UnknownLabel(StardiagError):
    """A requested index label is not part of the matrix."""

    def __init__(self, label):
        self.label = label
        super().__init__(f"unknown index label {label!r}")


class LabelClash(StardiagError):
    """The target pair overlaps the conditioning set."""


class DimensionTooSmall(StardiagError):
    """The operation needs a larger index set than was supplied."""


# --- loadings and fitting ----------------------------------------------- #

class ImproperLoadings(StardiagError):
    """An operation that needs proper loadings (all in (0, 1)) got others."""


class ZeroDenominator(StardiagError):
    """A correlation used as a denominator is numerically zero."""


class NegativeCorrelation(StardiagError):
    """A fit that requires positive correlations saw one that is not."""

    def __init__(self, pairs):
        self.pairs = tuple(pairs)
        super().__init__(
            "non-positive off-diagonal correlations at " +
            ", ".join(f"{p}={v:.6g}" for p, v in self.pairs)
        )


# --- contingency tables -------------------------------------------------- #

class DegenerateMargin(StardiagError):
    """A univariate margin of a 2x2 table is empty."""

    def __init__(self, detail):
        super().__init__(f"degenerate margin: {detail}")


class ZeroCell(StardiagError):
    """A ratio-based statistic hit a zero cell with no continuity correction."""


class EmptySlice(StardiagError):
    """A conditioning slice of the table contains no observations."""


class InconsistentMargins(StardiagError):
    """The three pairwise margins do not share univariate margins."""


# --- file formats --------------------------------------------------------- #

class ParseError(StardiagError):
    """A data file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class BadLength(ParseError):
    """A count vector does not have a power-of-two number of entries."""


class NegativeCount(ParseError):
    """A count vector contains a negative entry."""


class AsymmetryError(ParseError):
    """A correlation matrix file is not symmetric within tolerance."""


class NonUnitDiagonal(ParseError):
    """A correlation matrix file has diagonal entries away from one."""


class NonBinaryValue(ParseError):
    """A raw data file contains a value other than 0 or 1."""
