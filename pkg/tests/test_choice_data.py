"""Data model, points conversion, and serialization round trips."""

import json
import math

import numpy as np
import pytest

from revpref.choice_data import (
    ChoiceDataset,
    DATASET_SCHEMA,
    DatasetMeta,
    dataset_from_dict,
    dataset_to_dict,
    format_number,
    load_dataset,
    make_observation,
    points_to_units,
    save_dataset,
)
from revpref.errors import (
    BudgetMismatch,
    DimensionMismatch,
    NegativeAllocation,
    NonPositivePrice,
    ParseError,
    SchemaVersionMismatch,
    ZeroExpenditure,
)

from conftest import build_dataset


def test_make_observation_derives_expenditure():
    obs = make_observation((2.0, 3.0), (1.0, 4.0))
    assert obs.expenditure == pytest.approx(14.0)
    assert obs.prices == (2.0, 3.0)
    assert obs.bundle == (1.0, 4.0)


def test_observation_rejects_bad_cached_expenditure():
    with pytest.raises(ZeroExpenditure):
        from revpref.choice_data import Observation
        Observation(prices=(1.0, 1.0), bundle=(1.0, 1.0), expenditure=3.0)


@pytest.mark.parametrize("prices", [(0.0, 1.0), (-1.0, 1.0), (math.inf, 1.0)])
def test_nonpositive_price_rejected(prices):
    with pytest.raises(NonPositivePrice):
        make_observation(prices, (1.0, 1.0))


def test_negative_bundle_rejected():
    with pytest.raises(NegativeAllocation):
        make_observation((1.0, 1.0), (-0.1, 1.0))


def test_dimension_mismatch_rejected():
    with pytest.raises(DimensionMismatch):
        make_observation((1.0, 1.0, 1.0), (1.0, 1.0))
    with pytest.raises(DimensionMismatch):
        make_observation((), ())


def test_zero_expenditure_rejected():
    with pytest.raises(ZeroExpenditure):
        make_observation((1.0, 1.0), (0.0, 0.0))


def test_dataset_rejects_ragged_observations():
    good = make_observation((1.0, 1.0), (1.0, 1.0))
    bad = make_observation((1.0, 1.0, 1.0), (1.0, 1.0, 1.0))
    with pytest.raises(DimensionMismatch):
        ChoiceDataset(observations=(good, bad))


def test_points_to_units_values():
    # 60 points at 0.5 units/point -> 30 units at price 2 points/unit.
    obs = points_to_units((60.0, 40.0), (0.5, 0.8))
    assert obs.bundle == pytest.approx((30.0, 32.0))
    assert obs.prices == pytest.approx((2.0, 1.25))
    # Expenditure comes back in points: the whole budget.
    assert obs.expenditure == pytest.approx(100.0)


def test_points_to_units_validation():
    with pytest.raises(BudgetMismatch):
        points_to_units((60.0, 50.0), (0.5, 0.5))
    with pytest.raises(NegativeAllocation):
        points_to_units((-1.0, 101.0), (0.5, 0.5))
    with pytest.raises(NonPositivePrice):
        points_to_units((50.0, 50.0), (0.5, 0.0))
    with pytest.raises(DimensionMismatch):
        points_to_units((50.0, 50.0), (0.5,))
    # custom budget
    obs = points_to_units((3.0, 7.0), (1.0, 1.0), budget=10.0)
    assert obs.expenditure == pytest.approx(10.0)


def test_without_drops_indices(d2):
    kept = d2.without([0])
    assert len(kept) == 1
    assert kept.observations[0] == d2.observations[1]
    assert kept.metadata == d2.metadata


def test_matrices_shapes(d2):
    assert d2.prices_matrix().shape == (2, 2)
    assert d2.bundles_matrix().shape == (2, 2)
    assert d2.expenditures().shape == (2,)
    assert d2.num_goods == 2


def test_empty_dataset():
    empty = ChoiceDataset(observations=())
    assert len(empty) == 0
    assert empty.num_goods == 0


def test_format_number_is_parse_stable():
    rng = np.random.Generator(np.random.PCG64(7))
    for _ in range(200):
        x = float(rng.uniform(-1e6, 1e6)) * 10.0 ** int(rng.integers(-8, 9))
        text = format_number(x)
        assert format_number(float(text)) == text


def test_save_load_round_trip(tmp_path, d2):
    path = tmp_path / "d2.dataset.json"
    save_dataset(d2, path)
    loaded = load_dataset(path)
    assert loaded.observations == d2.observations
    # a second save is a byte-for-byte fixpoint
    path2 = tmp_path / "again.dataset.json"
    save_dataset(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_metadata_survives_round_trip(tmp_path):
    data = build_dataset(
        [((1.0, 2.0), (3.0, 4.0))],
        domain="risk", trial_id="risk_baseline_t000", variant="baseline",
    )
    path = tmp_path / "meta.dataset.json"
    save_dataset(data, path)
    loaded = load_dataset(path)
    assert loaded.metadata == DatasetMeta(
        domain="risk", trial_id="risk_baseline_t000", variant="baseline"
    )


def test_schema_mismatch_raises(tmp_path, d2):
    path = tmp_path / "bad.dataset.json"
    payload = dataset_to_dict(d2)
    payload["schema"] = "revpref-dataset/999"
    path.write_text(json.dumps(payload))
    with pytest.raises(SchemaVersionMismatch):
        load_dataset(path)


def test_parse_error_carries_location():
    payload = {
        "schema": DATASET_SCHEMA,
        "K": 2,
        "observations": [{"prices": ["1.0", "oops"], "bundle": ["1", "1"]}],
    }
    with pytest.raises(ParseError) as err:
        dataset_from_dict(payload, source="unit-test")
    assert err.value.source == "unit-test"
    assert "prices" in (err.value.field or "")


def test_parse_rejects_bool_and_none_numbers():
    payload = {
        "schema": DATASET_SCHEMA,
        "K": 2,
        "observations": [{"prices": [True, "1"], "bundle": ["1", "1"]}],
    }
    with pytest.raises(ParseError):
        dataset_from_dict(payload)


def test_parse_rejects_wrong_k(d2):
    payload = dataset_to_dict(d2)
    payload["K"] = 3
    with pytest.raises(ParseError):
        dataset_from_dict(payload)


def test_invalid_json_file(tmp_path):
    path = tmp_path / "broken.dataset.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_dataset(path)
