"""Brute-force reference implementations used only by the tests.

Everything here favors obvious correctness over speed: quadratic loops,
full enumeration of subsets, cycles via permutations, and a hitting-set
recursion for minimum deletion cost.  Nothing imports from the package
internals except the dataset container, so agreement between these and
the library is evidence, not circularity.
"""

from __future__ import annotations

import itertools
import math
import statistics

EPS = 1e-9


def cross_matrix(prices, bundles):
    """C[i][j] = p_i . x_j as plain nested lists."""
    n = len(prices)
    return [
        [sum(p * x for p, x in zip(prices[i], bundles[j])) for j in range(n)]
        for i in range(n)
    ]


def relations_at(cross, e):
    """(weak, strict) boolean matrices at efficiency e."""
    n = len(cross)
    weak = [[False] * n for _ in range(n)]
    strict = [[False] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == j:
                weak[i][j] = e >= 1.0 - EPS
                continue
            weak[i][j] = cross[i][j] <= e * cross[i][i] + EPS
            strict[i][j] = cross[i][j] < e * cross[i][i] - EPS
    return weak, strict


def reachable(weak):
    """reach[i][j]: j reachable from i along weak edges (path length >= 1)."""
    n = len(weak)
    reach = [row[:] for row in weak]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            for k in range(n):
                if reach[i][k]:
                    for j in range(n):
                        if reach[k][j] and not reach[i][j]:
                            reach[i][j] = True
                            changed = True
    return reach


def garp_consistent(cross, e=1.0):
    weak, strict = relations_at(cross, e)
    reach = reachable(weak)
    n = len(cross)
    for i in range(n):
        for j in range(n):
            if reach[i][j] and strict[j][i]:
                return False
    return True


def ccei_grid(cross, step=1e-4):
    """Largest e on the descending grid 1.0, 1-step, ... that satisfies GARP."""
    k = 0
    while True:
        e = 1.0 - k * step
        if e < 0.0:
            return 0.0
        if garp_consistent(cross, e):
            return e
        k += 1


def hmi_exhaustive(cross):
    """(retained, removed) via subsets of increasing removal size."""
    n = len(cross)
    if garp_consistent(cross):
        return n, ()
    for r in range(1, n + 1):
        for removed in itertools.combinations(range(n), r):
            keep = [i for i in range(n) if i not in removed]
            sub = [[cross[i][j] for j in keep] for i in keep]
            if garp_consistent(sub):
                return n - r, removed
    return 0, tuple(range(n))


def all_simple_cycles(weak):
    """Every directed simple cycle, as a vertex tuple starting at its
    smallest vertex.  Complete enumeration via permutations."""
    n = len(weak)
    cycles = []
    for size in range(2, n + 1):
        for combo in itertools.combinations(range(n), size):
            first, rest = combo[0], combo[1:]
            for perm in itertools.permutations(rest):
                order = (first,) + perm
                ok = all(
                    weak[order[k]][order[(k + 1) % size]] for k in range(size)
                )
                if ok:
                    cycles.append(order)
    return cycles


def _normalized(cross):
    n = len(cross)
    return [[cross[i][j] / cross[i][i] for j in range(n)] for i in range(n)]


def violating_cycles(cross):
    """Weak simple cycles carrying at least one strict edge."""
    weak, strict = relations_at(cross, 1.0)
    result = []
    for cycle in all_simple_cycles(weak):
        size = len(cycle)
        if any(strict[cycle[k]][cycle[(k + 1) % size]] for k in range(size)):
            result.append(cycle)
    return result


def mpi_exhaustive(cross):
    """(mean, median, per-cycle costs) over all violating cycles."""
    norm = _normalized(cross)
    costs = []
    for cycle in violating_cycles(cross):
        size = len(cycle)
        total = sum(
            1.0 - norm[cycle[k]][cycle[(k + 1) % size]] for k in range(size)
        )
        costs.append(max(0.0, total / size))
    if not costs:
        return 0.0, 0.0, []
    return (
        sum(costs) / len(costs),
        float(statistics.median(costs)),
        costs,
    )


def mci_exhaustive(cross):
    """(mci, removed edges) via exact hitting-set over violating cycles.

    Deleting an edge set leaves the data consistent iff it hits every
    violating cycle of the original relation, so the minimum deletion
    cost is the minimum-cost hitting set.
    """
    n = len(cross)
    cycles = violating_cycles(cross)
    if not cycles:
        return 0.0, ()
    norm = _normalized(cross)
    cycle_edge_sets = [
        frozenset(
            (cycle[k], cycle[(k + 1) % len(cycle)]) for k in range(len(cycle))
        )
        for cycle in cycles
    ]

    def edge_cost(edge):
        i, j = edge
        return max(0.0, 1.0 - norm[i][j])

    best_cost = math.inf
    best_set = None

    def search(index_unhit, chosen, chosen_cost):
        nonlocal best_cost, best_set
        if chosen_cost >= best_cost:
            return
        unhit = None
        for edges in index_unhit:
            if not (edges & chosen):
                unhit = edges
                break
        if unhit is None:
            best_cost = chosen_cost
            best_set = frozenset(chosen)
            return
        for edge in sorted(unhit):
            search(index_unhit, chosen | {edge}, chosen_cost + edge_cost(edge))

    search(cycle_edge_sets, frozenset(), 0.0)
    return best_cost / n, tuple(sorted(best_set))


def spearman_reference(x, y):
    """Average-rank Spearman via explicit rank construction."""
    def ranks(values):
        order = sorted(range(len(values)), key=lambda i: values[i])
        out = [0.0] * len(values)
        i = 0
        while i < len(values):
            j = i
            while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
                j += 1
            rank = (i + j) / 2.0 + 1.0
            for k in range(i, j + 1):
                out[order[k]] = rank
            i = j + 1
        return out

    rx, ry = ranks(list(x)), ranks(list(y))
    n = len(rx)
    mx = sum(rx) / n
    my = sum(ry) / n
    num = sum((a - mx) * (b - my) for a, b in zip(rx, ry))
    den = math.sqrt(
        sum((a - mx) ** 2 for a in rx) * sum((b - my) ** 2 for b in ry)
    )
    if den == 0.0:
        return math.nan
    return num / den
