"""Rationality indices: how far a session is from GARP consistency.

Four complementary measures:

* CCEI: the largest uniform budget shrink that restores consistency.
* Houtman-Maks: the largest consistent subset of observations.
* Money pump: average fractional surplus extractable from preference
  cycles.
* Minimum cost: cheapest set of revealed-preference relations whose
  deletion removes every violation.

Money-pump and minimum-cost quantities are measured on per-observation
normalized expenditures (every budget rescaled to 1), so all four
indices are invariant to rescaling any single observation's prices.
For sessions where every round has the same budget (the allocation
tasks in this package) the normalization is the identity up to a
constant factor.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from .choice_data import ChoiceDataset
from .errors import InvalidParameter
from .relations import (
    RELATION_SLACK,
    cross_expenditure,
    relations_from_cross,
    transitive_closure,
)

FLAG_EXACT = "exact"
FLAG_HEURISTIC = "heuristic"
FLAG_TRUNCATED = "truncated"


# ---------------------------------------------------------------------------
# Shared cycle machinery


def _violating_edges(
    weak: NDArray[np.bool_], strict: NDArray[np.bool_]
) -> NDArray[np.bool_]:
    """Strict edges (u, v) that sit on some weak cycle (v reaches u)."""
    closure = transitive_closure(weak)
    return strict & closure.T


def _shortest_path(
    weak: NDArray[np.bool_], start: int, goal: int
) -> Optional[list[int]]:
    """Vertices of a shortest directed path start -> goal (BFS)."""
    n = weak.shape[0]
    parent = np.full(n, -1, dtype=np.int64)
    parent[start] = start
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if u == goal:
            path = [u]
            while path[-1] != start:
                path.append(int(parent[path[-1]]))
            path.reverse()
            return path
        for w in np.flatnonzero(weak[u]):
            w = int(w)
            if w != u and parent[w] < 0:
                parent[w] = u
                queue.append(w)
    return None


def _shortest_violating_cycle(
    weak: NDArray[np.bool_], strict: NDArray[np.bool_]
) -> Optional[list[int]]:
    """A shortest directed weak cycle carrying at least one strict edge.

    Returned as a vertex list [v, ..., u] whose edges are the path steps
    plus the closing strict edge (u, v).  None when the data are
    consistent.  Ties break toward the first strict edge in row-major
    order, so the result is deterministic.
    """
    viol = _violating_edges(weak, strict)
    if not viol.any():
        return None
    best: Optional[list[int]] = None
    for u, v in zip(*np.nonzero(viol)):
        path = _shortest_path(weak, int(v), int(u))
        if path is None:  # unreachable given the closure test
            continue
        if best is None or len(path) < len(best):
            best = path
        if len(best) == 2:
            break
    return best


def _submatrix(mat: NDArray[np.bool_], keep: Sequence[int]) -> NDArray[np.bool_]:
    idx = np.asarray(keep, dtype=np.int64)
    return mat[np.ix_(idx, idx)]


def _implicated_observations(
    weak: NDArray[np.bool_], strict: NDArray[np.bool_]
) -> list[int]:
    """Observations lying in a strongly connected component that
    contains a violating strict edge.  Every violating cycle is confined
    to such components, so removals outside this set never help."""
    closure = transitive_closure(weak)
    viol = strict & closure.T
    if not viol.any():
        return []
    mutual = closure & closure.T
    sources = viol.any(axis=1)
    implicated = mutual[:, sources].any(axis=1) | sources
    return [int(i) for i in np.flatnonzero(implicated)]


# ---------------------------------------------------------------------------
# CCEI


def ccei(dataset: ChoiceDataset, tol: float = 1e-6) -> float:
    """Critical cost-efficiency index.

    The supremum of efficiency levels e at which the dataset satisfies
    GARP, located by bisection.  The returned value e* is consistent
    (GARP holds at e*) and e* + tol is not, unless the data are fully
    consistent, in which case e* is exactly 1.0.

    Args:
        dataset: Session to score.
        tol: Guarantee granularity; must be positive.
    """
    if not tol > 0.0:
        raise InvalidParameter(f"tol must be positive, got {tol!r}")
    cross, expenditure = cross_expenditure(dataset)

    def consistent(e: float) -> bool:
        weak, strict = relations_from_cross(cross, expenditure, e)
        return not _violating_edges(weak, strict).any()

    if consistent(1.0):
        return 1.0
    lo, hi = 0.0, 1.0
    iterations = max(40, int(math.ceil(-math.log2(tol))) + 1)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if consistent(mid):
            lo = mid
        else:
            hi = mid
    return lo


# ---------------------------------------------------------------------------
# Houtman-Maks


@dataclass(frozen=True)
class HoutmanMaksResult:
    """Largest consistent subset summary.

    Attributes:
        retained: Size of the largest GARP-consistent subset found.
        removed: Indices dropped, ascending.
        exact: True when found by exhaustive branch and bound, False for
            the greedy fallback on heavily tangled sessions.
    """

    retained: int
    removed: tuple[int, ...]
    exact: bool

    @property
    def flag(self) -> str:
        return FLAG_EXACT if self.exact else FLAG_HEURISTIC


def _bounded_removal(
    weak: NDArray[np.bool_], strict: NDArray[np.bool_], budget: int
) -> Optional[tuple[int, ...]]:
    """A removal set of size <= budget restoring GARP, or None.

    Branches over the vertices of a shortest violating cycle (one of
    them must go), in ascending order so low indices are preferred.
    """
    cycle = _shortest_violating_cycle(weak, strict)
    if cycle is None:
        return ()
    if budget == 0:
        return None
    n = weak.shape[0]
    for v in sorted(cycle):
        keep = [i for i in range(n) if i != v]
        sub = _bounded_removal(_submatrix(weak, keep), _submatrix(strict, keep),
                               budget - 1)
        if sub is not None:
            return (v,) + tuple(keep[i] for i in sub)
    return None


def _greedy_removal(
    weak: NDArray[np.bool_], strict: NDArray[np.bool_]
) -> tuple[int, ...]:
    """Drop the observation in the most violating pairs until consistent.

    Ties break to the lowest index.  Indices are reported in the
    original numbering.
    """
    n = weak.shape[0]
    alive = list(range(n))
    removed: list[int] = []
    w, s = weak, strict
    while True:
        closure = transitive_closure(w)
        pairs = closure & s.T
        if not pairs.any():
            return tuple(sorted(removed))
        participation = pairs.sum(axis=0) + pairs.sum(axis=1)
        worst = int(np.argmax(participation))  # argmax takes the first max
        removed.append(alive[worst])
        del alive[worst]
        keep = [i for i in range(w.shape[0]) if i != worst]
        w = _submatrix(w, keep)
        s = _submatrix(s, keep)


def houtman_maks(dataset: ChoiceDataset, exact_limit: int = 20) -> HoutmanMaksResult:
    """Largest GARP-consistent subset of the observations.

    Exhaustive branch and bound runs when at most ``exact_limit``
    observations are implicated in violations; beyond that a greedy
    heuristic is used and flagged as such.
    """
    if exact_limit < 0:
        raise InvalidParameter(f"exact_limit must be >= 0, got {exact_limit!r}")
    n = len(dataset)
    cross, expenditure = cross_expenditure(dataset)
    weak, strict = relations_from_cross(cross, expenditure, 1.0)
    implicated = _implicated_observations(weak, strict)
    if not implicated:
        return HoutmanMaksResult(retained=n, removed=(), exact=True)
    if len(implicated) > exact_limit:
        removed = _greedy_removal(weak, strict)
        return HoutmanMaksResult(retained=n - len(removed), removed=removed,
                                 exact=False)
    for budget in range(1, len(implicated) + 1):
        found = _bounded_removal(weak, strict, budget)
        if found is not None:
            removed = tuple(sorted(found))
            return HoutmanMaksResult(retained=n - len(removed), removed=removed,
                                     exact=True)
    raise AssertionError("removal search failed to terminate")  # pragma: no cover


# ---------------------------------------------------------------------------
# Money pump


@dataclass(frozen=True)
class MoneyPumpResult:
    """Money-pump summary over enumerated violation cycles.

    Attributes:
        mean: Mean per-cycle pump fraction (0 when no cycles).
        median: Median per-cycle pump fraction.
        cycle_costs: Individual pump fractions, in enumeration order.
        cycles_examined: Simple cycles inspected before any cap bound.
        truncated: True when a cap (length or count) cut the
            enumeration short, so the summary may be partial.
    """

    mean: float
    median: float
    cycle_costs: tuple[float, ...]
    cycles_examined: int
    truncated: bool

    @property
    def flag(self) -> str:
        return FLAG_TRUNCATED if self.truncated else FLAG_EXACT


def money_pump_index(
    dataset: ChoiceDataset,
    max_cycle_len: int = 6,
    max_cycles: int = 10000,
) -> MoneyPumpResult:
    """Average fractional surplus a trader could pump from cycles.

    Enumerates simple directed cycles of the weak relation that carry at
    least one strict edge.  Each cycle's pump fraction is the summed
    per-edge surplus (chooser's budget minus the cost of the next bundle,
    with budgets normalized to 1) divided by the number of edges.

    Args:
        dataset: Session to score.
        max_cycle_len: Longest cycle examined.
        max_cycles: Cap on simple cycles examined.
    """
    if max_cycle_len < 2:
        raise InvalidParameter(f"max_cycle_len must be >= 2, got {max_cycle_len!r}")
    if max_cycles < 1:
        raise InvalidParameter(f"max_cycles must be >= 1, got {max_cycles!r}")
    cross, expenditure = cross_expenditure(dataset)
    n = cross.shape[0]
    if n == 0:
        return MoneyPumpResult(0.0, 0.0, (), 0, False)
    weak, strict = relations_from_cross(cross, expenditure, 1.0)
    implicated = _implicated_observations(weak, strict)
    if not implicated:
        # GARP holds: no weak cycle carries a strict edge, MPI is 0 exactly.
        return MoneyPumpResult(0.0, 0.0, (), 0, False)
    norm_cross = cross / expenditure[:, None]

    # Qualifying cycles live entirely inside the implicated strongly
    # connected components, so the walk can ignore everything else.
    allowed = np.zeros(n, dtype=bool)
    allowed[implicated] = True
    off_diag = weak & ~np.eye(n, dtype=bool) & allowed[:, None] & allowed[None, :]
    adjacency = [tuple(int(j) for j in np.flatnonzero(off_diag[i]))
                 for i in range(n)]

    costs: list[float] = []
    examined = 0
    truncated = False
    on_path = np.zeros(n, dtype=bool)
    path: list[int] = []

    def extend(u: int, start: int, strict_seen: bool, surplus: float) -> bool:
        """Depth-first cycle extension; False aborts the enumeration."""
        nonlocal examined, truncated
        for w in adjacency[u]:
            if w == start and len(path) >= 2:
                if examined >= max_cycles:
                    truncated = True
                    return False
                examined += 1
                if strict_seen or strict[u, start]:
                    total = surplus + (1.0 - norm_cross[u, start])
                    costs.append(max(0.0, total / len(path)))
                continue
            if w <= start or on_path[w]:
                continue
            if len(path) >= max_cycle_len:
                truncated = True
                continue
            on_path[w] = True
            path.append(w)
            keep_going = extend(w, start, strict_seen or strict[u, w],
                                surplus + (1.0 - norm_cross[u, w]))
            path.pop()
            on_path[w] = False
            if not keep_going:
                return False
        return True

    for s in range(n):
        on_path[:] = False
        on_path[s] = True
        path = [s]
        if not extend(s, s, False, 0.0):
            break

    if costs:
        mean = float(np.mean(costs))
        median = float(np.median(costs))
    else:
        mean = median = 0.0
    return MoneyPumpResult(mean=mean, median=median, cycle_costs=tuple(costs),
                           cycles_examined=examined, truncated=truncated)


# ---------------------------------------------------------------------------
# Minimum cost


@dataclass(frozen=True)
class MinimumCostResult:
    """Cheapest relation-deletion summary.

    Attributes:
        mci: Total normalized cost of the deleted relations divided by
            the number of observations.
        removed_relations: Deleted (i, j) relation pairs.
        exact: True when found by exhaustive branch and bound.
    """

    mci: float
    removed_relations: tuple[tuple[int, int], ...]
    exact: bool

    @property
    def flag(self) -> str:
        return FLAG_EXACT if self.exact else FLAG_HEURISTIC


def _cycle_edges(cycle: list[int]) -> list[tuple[int, int]]:
    return [(cycle[k], cycle[(k + 1) % len(cycle)]) for k in range(len(cycle))]


def _candidate_relations(
    weak: NDArray[np.bool_], strict: NDArray[np.bool_]
) -> int:
    """Count relations that can appear on a violating cycle."""
    closure = transitive_closure(weak)
    viol = strict & closure.T
    if not viol.any():
        return 0
    mutual = closure & closure.T
    sources = viol.any(axis=1)
    implicated = mutual[:, sources].any(axis=1) | sources
    n = weak.shape[0]
    candidates = weak & mutual & ~np.eye(n, dtype=bool) & implicated[:, None]
    return int(candidates.sum())


def _greedy_deletion(
    weak: NDArray[np.bool_],
    strict: NDArray[np.bool_],
    edge_cost: np.ndarray,
) -> tuple[float, list[tuple[int, int]]]:
    """Delete the cheapest edge of a shortest violating cycle, repeat."""
    w = weak.copy()
    s = strict.copy()
    total = 0.0
    removed: list[tuple[int, int]] = []
    while True:
        cycle = _shortest_violating_cycle(w, s)
        if cycle is None:
            return total, removed
        edges = _cycle_edges(cycle)
        a, b = min(edges, key=lambda uv: (edge_cost[uv], uv))
        total += float(edge_cost[a, b])
        removed.append((a, b))
        w[a, b] = False
        s[a, b] = False


def minimum_cost_index(dataset: ChoiceDataset, exact_limit: int = 25) -> MinimumCostResult:
    """Cheapest relation deletions that remove every GARP violation.

    Deleting relation (i, j) costs the surplus i left on the table
    relative to j's bundle, as a fraction of i's budget.  The index is
    the minimum total cost over deletion sets that leave no violating
    cycle, divided by the number of observations.

    Exact branch and bound runs when at most ``exact_limit`` relations
    could sit on a violating cycle; otherwise a greedy pass is used and
    flagged heuristic.
    """
    if exact_limit < 0:
        raise InvalidParameter(f"exact_limit must be >= 0, got {exact_limit!r}")
    cross, expenditure = cross_expenditure(dataset)
    n = cross.shape[0]
    if n == 0:
        return MinimumCostResult(0.0, (), True)
    weak, strict = relations_from_cross(cross, expenditure, 1.0)
    if not _violating_edges(weak, strict).any():
        return MinimumCostResult(0.0, (), True)
    norm_cross = cross / expenditure[:, None]
    edge_cost = np.maximum(0.0, 1.0 - norm_cross)

    greedy_total, greedy_removed = _greedy_deletion(weak, strict, edge_cost)
    if _candidate_relations(weak, strict) > exact_limit:
        return MinimumCostResult(mci=greedy_total / n,
                                 removed_relations=tuple(greedy_removed),
                                 exact=False)

    best_cost = greedy_total + 1e-12
    best_removed = list(greedy_removed)

    def search(w: NDArray[np.bool_], s: NDArray[np.bool_],
               removed: list[tuple[int, int]], cost: float) -> None:
        nonlocal best_cost, best_removed
        if cost >= best_cost:
            return
        cycle = _shortest_violating_cycle(w, s)
        if cycle is None:
            best_cost = cost
            best_removed = list(removed)
            return
        for a, b in _cycle_edges(cycle):
            step = float(edge_cost[a, b])
            if cost + step >= best_cost:
                continue
            w2 = w.copy()
            s2 = s.copy()
            w2[a, b] = False
            s2[a, b] = False
            removed.append((a, b))
            search(w2, s2, removed, cost + step)
            removed.pop()

    search(weak, strict, [], 0.0)
    return MinimumCostResult(mci=best_cost / n,
                             removed_relations=tuple(best_removed),
                             exact=True)


# ---------------------------------------------------------------------------
# Combined report


@dataclass(frozen=True)
class IndexReport:
    """All four indices for one trial, plus provenance labels.

    ``garp_pass`` is exactly equivalent to ``ccei == 1.0``: a consistent
    session scores perfect on every index, and any violation pulls CCEI
    strictly below 1.
    """

    trial_id: str
    domain: str
    variant: str
    n_observations: int
    ccei: float
    garp_pass: bool
    hmi_retained: int
    hmi_fraction: float
    mpi_mean: float
    mpi_median: float
    mci: float
    flags: tuple[str, ...]

    def flags_text(self) -> str:
        return ";".join(self.flags)


def score_all(
    dataset: ChoiceDataset,
    tol: float = 1e-6,
    hmi_exact_limit: int = 20,
    mci_exact_limit: int = 25,
    max_cycle_len: int = 6,
    max_cycles: int = 10000,
) -> IndexReport:
    """Compute every index for one session and bundle them up."""
    n = len(dataset)
    cross, expenditure = cross_expenditure(dataset)
    weak, strict = relations_from_cross(cross, expenditure, 1.0)
    garp_ok = not _violating_edges(weak, strict).any()
    efficiency = ccei(dataset, tol=tol)
    hmi = houtman_maks(dataset, exact_limit=hmi_exact_limit)
    mpi = money_pump_index(dataset, max_cycle_len=max_cycle_len,
                           max_cycles=max_cycles)
    mci = minimum_cost_index(dataset, exact_limit=mci_exact_limit)
    return IndexReport(
        trial_id=dataset.metadata.trial_id,
        domain=dataset.metadata.domain,
        variant=dataset.metadata.variant,
        n_observations=n,
        ccei=efficiency,
        garp_pass=garp_ok,
        hmi_retained=hmi.retained,
        hmi_fraction=hmi.retained / n if n else 1.0,
        mpi_mean=mpi.mean,
        mpi_median=mpi.median,
        mci=mci.mci,
        flags=(f"hmi={hmi.flag}", f"mpi={mpi.flag}", f"mci={mci.flag}"),
    )
