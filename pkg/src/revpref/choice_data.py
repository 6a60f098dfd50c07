"""Data model for observed budget-allocation choices.

An :class:`Observation` pairs the price vector an agent faced with the
commodity bundle it picked; a :class:`ChoiceDataset` is the ordered list
of observations from one experimental session.  Points-denominated
answers (the native unit of the allocation tasks) are converted into
commodity units with :func:`points_to_units`.

Datasets serialize to a versioned JSON layout in which every number is
written as decimal text with 12 significant digits, so files compare
byte-for-byte across platforms and languages.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    BudgetMismatch,
    DimensionMismatch,
    NegativeAllocation,
    NonPositivePrice,
    ParseError,
    SchemaVersionMismatch,
    ZeroExpenditure,
)

DATASET_SCHEMA = "revpref-dataset/1"

# Relative tolerance between the cached expenditure and the dot product
# of prices and bundle.
EXPENDITURE_RTOL = 1e-9

#: A commodity bundle: non-negative quantities, at least one positive.
Bundle = tuple[float, ...]

#: Per-unit prices: strictly positive and finite.
PriceVector = tuple[float, ...]


def _as_float_tuple(values: Iterable[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


def validate_prices(prices: Sequence[float]) -> PriceVector:
    """Check price-vector invariants and return a frozen copy."""
    out = _as_float_tuple(prices)
    if not out:
        raise DimensionMismatch("price vector is empty")
    for p in out:
        if not math.isfinite(p) or p <= 0.0:
            raise NonPositivePrice(f"price {p!r} is not a positive finite number")
    return out


def validate_bundle(bundle: Sequence[float]) -> Bundle:
    """Check bundle invariants and return a frozen copy."""
    out = _as_float_tuple(bundle)
    if not out:
        raise DimensionMismatch("bundle is empty")
    for q in out:
        if not math.isfinite(q):
            raise NegativeAllocation(f"quantity {q!r} is not finite")
        if q < 0.0:
            raise NegativeAllocation(f"quantity {q!r} is negative")
    return out


@dataclass(frozen=True)
class Observation:
    """One priced choice: the bundle picked at a given price vector.

    Attributes:
        prices: Per-unit prices the chooser faced.
        bundle: Quantities of each commodity the chooser took.
        expenditure: Cost of ``bundle`` at ``prices``.  Cached at
            construction and checked against the dot product to a
            relative tolerance of 1e-9.
    """

    prices: PriceVector
    bundle: Bundle
    expenditure: float

    def __post_init__(self) -> None:
        prices = validate_prices(self.prices)
        bundle = validate_bundle(self.bundle)
        if len(prices) != len(bundle):
            raise DimensionMismatch(
                f"{len(prices)} prices vs {len(bundle)} quantities"
            )
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "bundle", bundle)
        cost = float(np.dot(prices, bundle))
        if cost <= 0.0:
            raise ZeroExpenditure("bundle costs nothing at its own prices")
        if abs(cost - self.expenditure) > EXPENDITURE_RTOL * max(cost, self.expenditure):
            raise ZeroExpenditure(
                f"cached expenditure {self.expenditure!r} disagrees with "
                f"dot product {cost!r}"
            )


def make_observation(prices: Sequence[float], bundle: Sequence[float]) -> Observation:
    """Build an observation, deriving expenditure from the dot product."""
    p = validate_prices(prices)
    x = validate_bundle(bundle)
    if len(p) != len(x):
        raise DimensionMismatch(f"{len(p)} prices vs {len(x)} quantities")
    return Observation(prices=p, bundle=x, expenditure=float(np.dot(p, x)))


def points_to_units(
    points_alloc: Sequence[float],
    returns_per_point: Sequence[float],
    budget: float = 100.0,
) -> Observation:
    """Convert a points allocation into a commodity-unit observation.

    Each point spent on commodity k buys ``returns_per_point[k]`` units,
    so the unit quantity is points*return and the unit price is
    1/return.  The observation's expenditure then equals the budget in
    points (up to float rounding, which downstream slack absorbs).

    Args:
        points_alloc: Points placed on each commodity; must be
            non-negative and sum to ``budget`` within 1e-6.
        returns_per_point: Units bought per point, all > 0.
        budget: Total points available per round.

    Raises:
        NegativeAllocation: A points entry is negative.
        BudgetMismatch: The points do not sum to the budget.
        NonPositivePrice: A return is not strictly positive.
        DimensionMismatch: Input lengths differ.
    """
    pts = _as_float_tuple(points_alloc)
    rets = _as_float_tuple(returns_per_point)
    if len(pts) != len(rets):
        raise DimensionMismatch(f"{len(pts)} allocations vs {len(rets)} returns")
    for a in pts:
        if not math.isfinite(a) or a < 0.0:
            raise NegativeAllocation(f"allocation {a!r} is negative or non-finite")
    total = math.fsum(pts)
    if abs(total - budget) > 1e-6:
        raise BudgetMismatch(f"allocation sums to {total!r}, budget is {budget!r}")
    for r in rets:
        if not math.isfinite(r) or r <= 0.0:
            raise NonPositivePrice(f"return {r!r} is not a positive finite number")
    bundle = tuple(a * r for a, r in zip(pts, rets))
    prices = tuple(1.0 / r for r in rets)
    return make_observation(prices, bundle)


@dataclass(frozen=True)
class DatasetMeta:
    """Provenance labels carried alongside a dataset."""

    domain: str = ""
    trial_id: str = ""
    variant: str = ""

    def to_dict(self) -> dict[str, str]:
        return {"domain": self.domain, "trial_id": self.trial_id,
                "variant": self.variant}


@dataclass(frozen=True)
class ChoiceDataset:
    """An ordered session of priced choices over a common commodity space.

    Attributes:
        observations: The choices, in presentation order.
        metadata: Domain / trial / variant labels, blank when unknown.
    """

    observations: tuple[Observation, ...]
    metadata: DatasetMeta = field(default_factory=DatasetMeta)

    def __post_init__(self) -> None:
        obs = tuple(self.observations)
        if obs:
            k = len(obs[0].prices)
            for i, o in enumerate(obs):
                if len(o.prices) != k:
                    raise DimensionMismatch(
                        f"observation {i} has {len(o.prices)} commodities, "
                        f"expected {k}"
                    )
        object.__setattr__(self, "observations", obs)

    def __len__(self) -> int:
        return len(self.observations)

    @property
    def num_goods(self) -> int:
        if not self.observations:
            return 0
        return len(self.observations[0].prices)

    def prices_matrix(self) -> np.ndarray:
        """All price vectors stacked into an (N, K) float array."""
        return np.array([o.prices for o in self.observations], dtype=np.float64)

    def bundles_matrix(self) -> np.ndarray:
        """All bundles stacked into an (N, K) float array."""
        return np.array([o.bundle for o in self.observations], dtype=np.float64)

    def expenditures(self) -> np.ndarray:
        return np.array([o.expenditure for o in self.observations],
                        dtype=np.float64)

    def without(self, indices: Iterable[int]) -> "ChoiceDataset":
        """A copy with the given observation indices dropped."""
        drop = set(indices)
        kept = tuple(o for i, o in enumerate(self.observations) if i not in drop)
        return ChoiceDataset(observations=kept, metadata=self.metadata)


def format_number(x: float) -> str:
    """Render a float as decimal text with 12 significant digits.

    This is the canonical on-disk number format: parsing the text and
    re-rendering it reproduces the same bytes, so serialization is a
    fixpoint after one round trip.
    """
    return format(float(x), ".12g")


def _parse_number(text: object, *, source: str, field_name: str) -> float:
    if isinstance(text, bool) or not isinstance(text, (str, int, float)):
        raise ParseError(f"expected a number, got {text!r}",
                         source=source, field=field_name)
    try:
        value = float(text)
    except ValueError as exc:
        raise ParseError(f"bad numeric literal {text!r}",
                         source=source, field=field_name) from exc
    if not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r}",
                         source=source, field=field_name)
    return value


def dataset_to_dict(dataset: ChoiceDataset) -> dict:
    """The JSON-ready form of a dataset (numbers as decimal text)."""
    return {
        "schema": DATASET_SCHEMA,
        "K": dataset.num_goods,
        "metadata": dataset.metadata.to_dict(),
        "observations": [
            {
                "prices": [format_number(p) for p in o.prices],
                "bundle": [format_number(q) for q in o.bundle],
            }
            for o in dataset.observations
        ],
    }


def dataset_from_dict(payload: dict, *, source: str = "<dict>") -> ChoiceDataset:
    """Rebuild a dataset from its JSON form, validating as it goes."""
    if not isinstance(payload, dict):
        raise ParseError("top level is not an object", source=source)
    schema = payload.get("schema")
    if schema != DATASET_SCHEMA:
        raise SchemaVersionMismatch(
            f"{source}: expected schema {DATASET_SCHEMA!r}, found {schema!r}"
        )
    raw_obs = payload.get("observations")
    if not isinstance(raw_obs, list):
        raise ParseError("missing observation list", source=source,
                         field="observations")
    observations = []
    for idx, entry in enumerate(raw_obs):
        if not isinstance(entry, dict):
            raise ParseError(f"observation {idx} is not an object", source=source)
        prices = entry.get("prices")
        bundle = entry.get("bundle")
        if not isinstance(prices, list) or not isinstance(bundle, list):
            raise ParseError(f"observation {idx} lacks prices/bundle arrays",
                             source=source)
        p = [_parse_number(v, source=source, field_name=f"observations[{idx}].prices")
             for v in prices]
        x = [_parse_number(v, source=source, field_name=f"observations[{idx}].bundle")
             for v in bundle]
        observations.append(make_observation(p, x))
    declared_k = payload.get("K")
    if observations and declared_k != len(observations[0].prices):
        raise ParseError(
            f"K={declared_k!r} disagrees with observation width "
            f"{len(observations[0].prices)}",
            source=source, field="K",
        )
    meta_raw = payload.get("metadata") or {}
    if not isinstance(meta_raw, dict):
        raise ParseError("metadata is not an object", source=source,
                         field="metadata")
    meta = DatasetMeta(
        domain=str(meta_raw.get("domain", "")),
        trial_id=str(meta_raw.get("trial_id", "")),
        variant=str(meta_raw.get("variant", "")),
    )
    return ChoiceDataset(observations=tuple(observations), metadata=meta)


def save_dataset(dataset: ChoiceDataset, path: str | os.PathLike[str]) -> None:
    """Write a dataset to ``path`` in the versioned JSON layout."""
    payload = dataset_to_dict(dataset)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")


def load_dataset(path: str | os.PathLike[str]) -> ChoiceDataset:
    """Read a dataset written by :func:`save_dataset`.

    Raises:
        SchemaVersionMismatch: The file declares a different schema.
        ParseError: The file structure or a numeric field is malformed.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", source=str(path)) from exc
    return dataset_from_dict(payload, source=str(path))
