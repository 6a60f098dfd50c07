"""Shared fixtures: small hand-checked datasets and seeded random ones.

The two-observation crossing fixture (``d2``) is the smallest dataset
that violates consistency, so most index tests anchor on it.  Expected
values for it were worked out by hand and cross-checked against the
brute-force reference implementations in ``oracles.py``.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Make `import oracles` work regardless of how pytest was invoked.
sys.path.insert(0, str(Path(__file__).resolve().parent))

from revpref.choice_data import ChoiceDataset, DatasetMeta, make_observation


def build_dataset(pairs, **meta):
    """pairs: iterable of (prices, bundle) tuples."""
    obs = tuple(make_observation(p, x) for p, x in pairs)
    return ChoiceDataset(observations=obs, metadata=DatasetMeta(**meta))


def random_budget_line_dataset(rng, n, spend=10.0):
    # Bundles drawn on the budget line so crossings (and violations)
    # are common but not universal.
    pairs = []
    for _ in range(n):
        p = rng.uniform(0.2, 5.0, 2)
        share = rng.uniform(0.0, 1.0)
        x = (share * spend / p[0], (1.0 - share) * spend / p[1])
        pairs.append((tuple(p), x))
    return build_dataset(pairs)


def case_rng(*entropy):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(entropy))))


@pytest.fixture
def d2():
    # Two crossing corner choices: each bundle is strictly cheaper at the
    # other observation's prices, the canonical 2-cycle.
    return build_dataset([((1.0, 2.0), (0.0, 2.0)), ((2.0, 1.0), (2.0, 0.0))])


@pytest.fixture
def h3():
    # d2 plus an interior observation that stays out of the cycle.
    return build_dataset(
        [
            ((1.0, 2.0), (0.0, 2.0)),
            ((2.0, 1.0), (2.0, 0.0)),
            ((1.0, 1.0), (0.5, 0.5)),
        ]
    )


@pytest.fixture
def dup():
    # d2 plus a rescaled copy of the whole pair (prices x100, quantities
    # /100). The copy forms its own 2-cycle of identical normalized cost,
    # so expenditure-normalizing indices must score it exactly like d2.
    return build_dataset(
        [
            ((1.0, 2.0), (0.0, 2.0)),
            ((2.0, 1.0), (2.0, 0.0)),
            ((100.0, 200.0), (0.0, 0.02)),
            ((200.0, 100.0), (0.02, 0.0)),
        ]
    )


@pytest.fixture
def asym():
    # Asymmetric two-cycle: observation 1 overspends, so the two directions
    # of the cycle carry different costs and the cheapest single-edge cut
    # is strictly cheaper than half the pump.
    return build_dataset([((1.0, 2.0), (0.0, 2.0)), ((2.0, 1.0), (3.0, 0.0))])


@pytest.fixture
def consistent3():
    # Same bundle proportions chosen under three price regimes; satisfies
    # consistency because relative spending never crosses.
    return build_dataset(
        [
            ((1.0, 1.0), (5.0, 5.0)),
            ((2.0, 1.0), (2.0, 6.0)),
            ((1.0, 2.0), (6.0, 2.0)),
        ]
    )
