"""Revealed-preference relations and the GARP consistency test.

Observation i is directly revealed weakly preferred to j when j's bundle
was affordable at i's prices and budget: p_i . x_j <= p_i . x_i.  An
efficiency level e in [0, 1] shrinks every budget before the comparison,
which is what the efficiency-index searches sweep over.  A small
absolute slack (1e-9) keeps conversion rounding from flipping relations
at exact-equality boundaries.

GARP holds when no observation is revealed (transitively, weakly)
preferred to another that is strictly directly preferred back over it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from .choice_data import ChoiceDataset
from .errors import EfficiencyOutOfRange

# Absolute slack applied to every budget comparison.
RELATION_SLACK = 1e-9


@dataclass(frozen=True)
class RelationMatrices:
    """Boolean relation matrices for one dataset at one efficiency level.

    Attributes:
        weak_direct: [i, j] true when i is directly revealed weakly
            preferred to j at efficiency ``efficiency``.
        strict_direct: [i, j] true when the preference is strict; always
            implies the weak relation, never holds on the diagonal.
        weak_closure: Transitive closure of ``weak_direct``.
        efficiency: The budget-shrink factor the matrices were built at.
    """

    weak_direct: NDArray[np.bool_]
    strict_direct: NDArray[np.bool_]
    weak_closure: NDArray[np.bool_]
    efficiency: float

    @property
    def size(self) -> int:
        return self.weak_direct.shape[0]


@dataclass(frozen=True)
class GarpResult:
    """Outcome of a GARP test.

    ``witness`` is a pair (i, j) with i transitively weakly preferred to
    j and j strictly directly preferred to i, or None when consistent.
    """

    passed: bool
    witness: Optional[tuple[int, int]]

    def __bool__(self) -> bool:
        return self.passed


def _check_efficiency(e: float) -> float:
    e = float(e)
    if not 0.0 <= e <= 1.0:
        raise EfficiencyOutOfRange(f"efficiency {e!r} outside [0, 1]")
    return e


def cross_expenditure(dataset: ChoiceDataset) -> tuple[np.ndarray, np.ndarray]:
    """Return (C, E): C[i, j] = p_i . x_j and E[i] = C[i, i].

    Everything downstream (relations, GARP sweeps, index searches) is a
    function of these two arrays, so computing them once per dataset
    avoids rebuilding matrices inside bisection loops.
    """
    prices = dataset.prices_matrix()
    bundles = dataset.bundles_matrix()
    if prices.size == 0:
        return np.zeros((0, 0)), np.zeros(0)
    cross = prices @ bundles.T
    return cross, np.diagonal(cross).copy()


def transitive_closure(adjacency: NDArray[np.bool_]) -> NDArray[np.bool_]:
    """Boolean transitive closure by repeated squaring."""
    closure = adjacency.copy()
    while True:
        extended = closure | (closure @ closure)
        if np.array_equal(extended, closure):
            return closure
        closure = extended


def relations_from_cross(
    cross: np.ndarray, expenditure: np.ndarray, e: float
) -> tuple[NDArray[np.bool_], NDArray[np.bool_]]:
    """Direct weak/strict relations from precomputed cross expenditures."""
    budget = e * expenditure[:, None]
    weak = cross <= budget + RELATION_SLACK
    strict = cross < budget - RELATION_SLACK
    n = cross.shape[0]
    idx = np.arange(n)
    # The self relation only survives at full efficiency; a strict self
    # relation is never meaningful.
    weak[idx, idx] = e >= 1.0 - RELATION_SLACK
    strict[idx, idx] = False
    return weak, strict


def build_relations(dataset: ChoiceDataset, e: float = 1.0) -> RelationMatrices:
    """Build direct relations and their transitive closure at level ``e``."""
    e = _check_efficiency(e)
    cross, expenditure = cross_expenditure(dataset)
    weak, strict = relations_from_cross(cross, expenditure, e)
    return RelationMatrices(
        weak_direct=weak,
        strict_direct=strict,
        weak_closure=transitive_closure(weak),
        efficiency=e,
    )


def _violation_witness(
    weak: NDArray[np.bool_], strict: NDArray[np.bool_]
) -> Optional[tuple[int, int]]:
    """First (row-major) pair (i, j) with i >=* j transitively and j >* i."""
    closure = transitive_closure(weak)
    conflicts = closure & strict.T
    if not conflicts.any():
        return None
    flat = int(np.flatnonzero(conflicts)[0])
    n = weak.shape[0]
    return divmod(flat, n)


def garp_satisfied(dataset: ChoiceDataset, e: float = 1.0) -> GarpResult:
    """Test GARP at efficiency ``e``.

    Args:
        dataset: The session to test.
        e: Budget-shrink factor in [0, 1]; 1 is the plain GARP test.

    Returns:
        A :class:`GarpResult`; falsy when a violation exists, with the
        first violating pair as witness.
    """
    e = _check_efficiency(e)
    cross, expenditure = cross_expenditure(dataset)
    weak, strict = relations_from_cross(cross, expenditure, e)
    witness = _violation_witness(weak, strict)
    return GarpResult(passed=witness is None, witness=witness)
