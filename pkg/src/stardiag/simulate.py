"""Star-graph model generators: exact joint tables and seeded samples.

A binary star model has a Bernoulli root ``L`` and, for each item, success
probabilities given each root level.  Items are mutually independent given
the root, so the exact joint is the product of the item conditionals and
the root margin; every observable of the leaf distribution can be computed
from the exact tables, making this module the brute-force oracle for the
diagnostic checks.

Sampling uses numpy's PCG64 generator, constructed per call via
``numpy.random.default_rng(seed)``.  Stream discipline: a single uniform
(or standard-normal) block of shape ``(n, q + 1)`` is drawn in one call,
column 0 driving the root and column ``i`` item ``i``.  Outputs are
therefore bit-reproducible for a given (model, n, seed) across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMargin
from .gaussian import Loadings
from .tables import CountTable, ProbTable, cell_levels

ROOT_NAME = "L"


@dataclass(frozen=True)
class BinaryStarModel:
    """Binary root plus per-item success probabilities given each root level.

    ``succ_given_root[i] = (P(X_i=1 | L=0), P(X_i=1 | L=1))``.
    """

    root_prior: float
    succ_given_root: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not 0.0 <= self.root_prior <= 1.0:
            raise ValueError(f"root prior {self.root_prior} outside [0, 1]")
        probs = tuple((float(a), float(b)) for a, b in self.succ_given_root)
        if len(probs) < 1:
            raise ValueError("a star model needs at least one item")
        for pair in probs:
            if not all(0.0 <= p <= 1.0 for p in pair):
                raise ValueError(f"conditional probability {pair} outside [0, 1]")
        object.__setattr__(self, "succ_given_root", probs)

    @property
    def q(self) -> int:
        return len(self.succ_given_root)

    @property
    def positive_dependence(self) -> bool:
        """All items more likely to succeed under the high root level."""
        return all(p1 > p0 for p0, p1 in self.succ_given_root)


@dataclass(frozen=True)
class GaussianStarModel:
    """Gaussian star model: standardised items with proper positive loadings."""

    loadings: Loadings

    def __post_init__(self):
        if not self.loadings.is_proper:
            raise ValueError("Gaussian star models need loadings strictly inside (0, 1)")

    @property
    def q(self) -> int:
        return self.loadings.q


def exact_tables(model: BinaryStarModel) -> tuple[ProbTable, ProbTable]:
    """Exact joint table over items plus root, and the leaf table over items.

    The joint has the root as the last (slowest-changing) variable; each cell
    is the root term times the product of the item conditionals.  The leaf
    table is the sum over the two root levels.
    """
    q = model.q
    prior = model.root_prior
    joint = np.empty(2 ** (q + 1))
    leaves = np.zeros(2 ** q)
    for idx, lv in enumerate(cell_levels(q)):
        for root in (0, 1):
            weight = prior if root else 1.0 - prior
            for v in range(q):
                p = model.succ_given_root[v][root]
                weight *= p if lv[v] else 1.0 - p
            joint[idx + root * 2 ** q] = weight
            leaves[idx] += weight
    names = tuple(f"V{i}" for i in range(1, q + 1))
    return (ProbTable(joint, names + (ROOT_NAME,)),
            ProbTable(leaves, names))


def item_root_correlations(model: BinaryStarModel) -> np.ndarray:
    """Phi correlation of each item with the root, from the exact margins.

    Positive exactly when the item is more likely under the high root level.

    Raises
    ------
    DegenerateMargin
        If the root prior is 0 or 1 or an item margin is degenerate, where
        the correlation is undefined.
    """
    prior = model.root_prior
    if prior <= 0.0 or prior >= 1.0:
        raise DegenerateMargin(f"root prior {prior}")
    out = np.empty(model.q)
    for i, (p0, p1) in enumerate(model.succ_given_root):
        p_item = (1.0 - prior) * p0 + prior * p1
        if p_item <= 0.0 or p_item >= 1.0:
            raise DegenerateMargin(f"item {i + 1} margin {p_item}")
        cov = prior * p1 - prior * p_item
        out[i] = cov / np.sqrt(prior * (1.0 - prior) * p_item * (1.0 - p_item))
    return out


def sample(model: BinaryStarModel, n: int, seed: int) -> CountTable:
    """Draw ``n`` independent observations of the leaves and tabulate them.

    Root first, then items, all thresholded against one uniform block of
    shape ``(n, q + 1)``; see the module docstring for the stream contract.
    """
    if n < 1:
        raise ValueError("need at least one draw")
    rng = np.random.default_rng(seed)
    u = rng.random((n, model.q + 1))
    root = u[:, 0] < model.root_prior
    p0 = np.array([p for p, _ in model.succ_given_root])
    p1 = np.array([p for _, p in model.succ_given_root])
    thresholds = np.where(root[:, None], p1[None, :], p0[None, :])
    items = (u[:, 1:] < thresholds).astype(np.int64)
    weights = 1 << np.arange(model.q)
    cells = items @ weights
    counts = np.bincount(cells, minlength=2 ** model.q)
    return CountTable(counts, tuple(f"V{i}" for i in range(1, model.q + 1)))


def sample_gaussian(model: GaussianStarModel, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` rows of the standardised items of a Gaussian star model.

    Each item is ``lam_i * L + sqrt(1 - lam_i**2) * noise_i`` with the root
    and all noises independent standard normals, so columns have unit
    variance and population correlation ``lam_i * lam_j``.
    """
    if n < 1:
        raise ValueError("need at least one draw")
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, model.q + 1))
    lam = model.loadings.array
    return z[:, :1] * lam[None, :] + z[:, 1:] * np.sqrt(1.0 - lam ** 2)[None, :]
