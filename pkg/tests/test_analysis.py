"""Statistics layer: ranks, demand diagnostics, t tests, power, reports.

The frozen t-test expectations were produced once with scipy.stats
(ttest_1samp / ttest_ind with equal_var=False) and are asserted to
1e-6; separate tests re-derive them against scipy live so the two
routes stay in agreement.
"""

import json
import math

import numpy as np
import pytest
from scipy import stats as scipy_stats

import oracles
from conftest import build_dataset, case_rng

from revpref.analysis import (
    BronarsResult,
    HUMAN_BENCHMARK_CCEI,
    average_ranks,
    bronars_simulation,
    compare_to_benchmark,
    demand_diagnostics,
    emit_report,
    empirical_cdf,
    one_sample_ttest,
    spearman_rho,
    welch_ttest,
    write_cdf,
)
from revpref.choice_data import points_to_units, ChoiceDataset
from revpref.errors import InsufficientData, InvalidParameter
from revpref.harness import run_trial
from revpref.subjects import CobbDouglasAgent, CornerMaxReturnAgent, build_prompts
from revpref.tasks import generate_sheet


# ---------------------------------------------------------------------------
# Ranks and Spearman


def test_average_ranks_basic():
    assert average_ranks([30.0, 10.0, 20.0]).tolist() == [3.0, 1.0, 2.0]


def test_average_ranks_ties():
    assert average_ranks([1.0, 2.0, 2.0, 3.0]).tolist() == [1.0, 2.5, 2.5, 4.0]
    assert average_ranks([5.0, 5.0, 5.0]).tolist() == [2.0, 2.0, 2.0]


def test_spearman_monotone():
    x = [1.0, 2.0, 3.0, 4.0]
    assert spearman_rho(x, [10.0, 20.0, 30.0, 40.0]) == pytest.approx(1.0)
    assert spearman_rho(x, [9.0, 7.0, 5.0, 1.0]) == pytest.approx(-1.0)


def test_spearman_undefined_cases():
    assert math.isnan(spearman_rho([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))
    assert math.isnan(spearman_rho([1.0], [2.0]))
    with pytest.raises(InvalidParameter):
        spearman_rho([1.0, 2.0], [1.0])


def test_spearman_matches_scipy_and_reference():
    for case in range(50):
        rng = case_rng(44, case)
        n = int(rng.integers(3, 40))
        if case % 2:
            x = rng.normal(size=n)
            y = rng.normal(size=n)
        else:  # integer draws force ties
            x = rng.integers(0, 5, size=n).astype(float)
            y = rng.integers(0, 5, size=n).astype(float)
        ours = spearman_rho(x, y)
        ref = oracles.spearman_reference(list(x), list(y))
        if math.isnan(ours):
            assert math.isnan(ref)
            continue
        assert ours == pytest.approx(ref, abs=1e-12)
        scipy_rho = scipy_stats.spearmanr(x, y).statistic
        assert ours == pytest.approx(scipy_rho, abs=1e-10)


# ---------------------------------------------------------------------------
# Demand diagnostics


def test_demand_diagnostics_counts_corners():
    data = ChoiceDataset(observations=(
        points_to_units((100.0, 0.0), (0.8, 0.4)),
        points_to_units((50.0, 50.0), (0.5, 0.5)),
        points_to_units((0.0, 100.0), (0.4, 0.8)),
    ))
    diag = demand_diagnostics(data)
    assert diag.n_rounds == 3
    assert diag.corner_rounds == 2
    assert len(diag.log_price_ratios) == 3
    assert not math.isnan(diag.quantity_shares[0])
    assert diag.quantity_shares[0] == 1.0
    assert diag.quantity_shares[2] == 0.0


def test_demand_diagnostics_floor_value():
    # A zero quantity is floored at what 0.1% of the budget buys.
    data = ChoiceDataset(observations=(
        points_to_units((100.0, 0.0), (0.5, 0.5)),
        points_to_units((40.0, 60.0), (0.8, 0.2)),
    ))
    diag = demand_diagnostics(data)
    # obs 0: bundle (50, 0) at prices (2, 2); floor = 0.001*100/2 = 0.05
    expected = math.log(50.0 / 0.05)
    assert diag.log_quantity_ratios[0] == pytest.approx(expected)


def test_demand_diagnostics_requires_two_goods():
    data = ChoiceDataset(observations=(
        points_to_units((50.0, 25.0, 25.0), (1.0, 1.0, 1.0)),
    ))
    with pytest.raises(InvalidParameter):
        demand_diagnostics(data)


def test_corner_chaser_has_strongly_negative_rho():
    sheet = generate_sheet("risk", seed=12, rounds=20)
    record = run_trial(build_prompts(sheet), CornerMaxReturnAgent(),
                       include_comprehension=False)
    diag = demand_diagnostics(record.dataset)
    assert diag.corner_rounds == 20
    assert diag.rho <= -0.9


# ---------------------------------------------------------------------------
# t tests


def test_one_sample_ttest_frozen_fixture():
    sample = [12.9, 13.5, 12.8, 15.6, 17.2, 19.2, 12.6, 15.3, 14.4, 11.3]
    result = one_sample_ttest(sample, 14.0)
    assert result.statistic == pytest.approx(0.634318150204, abs=1e-6)
    assert result.pvalue == pytest.approx(0.541658637764, abs=1e-6)
    assert result.df == 9.0
    assert result.mean == pytest.approx(14.48, abs=1e-12)
    assert result.sd == pytest.approx(2.392952615958, abs=1e-6)
    assert result.ci_low == pytest.approx(12.768184820471, abs=1e-6)
    assert result.ci_high == pytest.approx(16.191815179529, abs=1e-6)


def test_one_sample_ttest_matches_scipy():
    for case in range(25):
        rng = case_rng(45, case)
        sample = rng.normal(loc=0.9, scale=0.05, size=int(rng.integers(2, 30)))
        benchmark = float(rng.uniform(0.8, 1.0))
        ours = one_sample_ttest(sample, benchmark)
        ref = scipy_stats.ttest_1samp(sample, benchmark)
        assert ours.statistic == pytest.approx(ref.statistic, abs=1e-10)
        assert ours.pvalue == pytest.approx(ref.pvalue, abs=1e-10)


def test_one_sample_ttest_degenerate():
    flat = one_sample_ttest([0.918, 0.918, 0.918], 0.918)
    assert flat.statistic == 0.0
    assert flat.pvalue == 1.0
    above = one_sample_ttest([1.0, 1.0], 0.918)
    assert above.statistic == math.inf
    assert above.pvalue == 0.0
    below = one_sample_ttest([0.5, 0.5], 0.918)
    assert below.statistic == -math.inf
    with pytest.raises(InsufficientData):
        one_sample_ttest([1.0], 0.918)


def test_welch_ttest_frozen_fixture():
    a = [27.1, 22.0, 20.8, 23.4, 23.4, 23.5, 25.8, 22.0, 24.8, 20.2]
    b = [27.1, 26.6, 25.3, 23.7, 28.5, 30.9, 25.6, 22.8, 29.9, 27.5]
    result = welch_ttest(a, b)
    assert result.statistic == pytest.approx(-3.286850806919, abs=1e-6)
    assert result.pvalue == pytest.approx(0.004218283449, abs=1e-6)
    assert result.df == pytest.approx(17.509166336839, abs=1e-6)
    assert result.mean == pytest.approx(-3.49, abs=1e-12)


def test_welch_ttest_matches_scipy():
    for case in range(25):
        rng = case_rng(46, case)
        a = rng.normal(loc=0.9, scale=0.1, size=int(rng.integers(2, 25)))
        b = rng.normal(loc=0.85, scale=0.05, size=int(rng.integers(2, 25)))
        ours = welch_ttest(a, b)
        ref = scipy_stats.ttest_ind(a, b, equal_var=False)
        assert ours.statistic == pytest.approx(ref.statistic, abs=1e-10)
        assert ours.pvalue == pytest.approx(ref.pvalue, abs=1e-10)


def test_welch_ttest_degenerate():
    same = welch_ttest([1.0, 1.0], [1.0, 1.0])
    assert same.statistic == 0.0 and same.pvalue == 1.0
    apart = welch_ttest([1.0, 1.0], [0.5, 0.5])
    assert apart.statistic == math.inf and apart.pvalue == 0.0
    with pytest.raises(InsufficientData):
        welch_ttest([1.0], [1.0, 2.0])


def test_compare_to_benchmark_direction():
    cmp_above = compare_to_benchmark([0.99, 0.98, 0.97])
    assert cmp_above.benchmark == HUMAN_BENCHMARK_CCEI
    assert cmp_above.above
    cmp_below = compare_to_benchmark([0.5, 0.6, 0.55])
    assert not cmp_below.above


# ---------------------------------------------------------------------------
# Power simulation and CDFs


def test_bronars_deterministic_per_seed():
    sheet = generate_sheet("risk", seed=2, rounds=8)
    a = bronars_simulation(sheet, draws=20, seed=7)
    b = bronars_simulation(sheet, draws=20, seed=7)
    c = bronars_simulation(sheet, draws=20, seed=8)
    assert a == b
    assert a != c
    assert a.draws == 20
    assert len(a.ccei) == 20
    assert 0.0 <= a.pass_fraction <= 1.0
    assert all(0.0 <= v <= 1.0 for v in a.ccei)


def test_bronars_discrete_sheet():
    sheet = generate_sheet("food", variant="discrete", seed=2, rounds=8)
    result = bronars_simulation(sheet, draws=10, seed=1)
    assert result.sheet_variant == "discrete"
    assert len(result.mci) == 10


def test_bronars_validation():
    sheet = generate_sheet("risk", seed=2, rounds=4)
    with pytest.raises(InvalidParameter):
        bronars_simulation(sheet, draws=0)


def test_empirical_cdf_properties():
    assert empirical_cdf([]) == []
    assert empirical_cdf([2.0, 1.0, 1.0]) == [(1.0, 2.0 / 3.0), (2.0, 1.0)]
    pairs = empirical_cdf(case_rng(47).uniform(0, 1, 100))
    values = [v for v, _ in pairs]
    fractions = [f for _, f in pairs]
    assert values == sorted(values)
    assert fractions == sorted(fractions)
    assert fractions[-1] == 1.0


def test_write_cdf_format(tmp_path):
    path = tmp_path / "x.cdf.csv"
    write_cdf([0.5, 0.25, 0.5], path)
    lines = path.read_text().splitlines()
    assert lines[0] == "value,cum_fraction"
    assert lines[1].startswith("0.25,")
    assert lines[-1] == "0.5,1"


# ---------------------------------------------------------------------------
# Report emission


def _records_for_report():
    records = []
    for variant in ("baseline", "price_reframed"):
        for i, alpha in enumerate((0.4, 0.55, 0.7)):
            sheet = generate_sheet("risk", variant=variant, seed=100 + i,
                                   rounds=6)
            script = build_prompts(sheet)
            record = run_trial(script, CobbDouglasAgent(alpha=alpha),
                               trial_id=f"risk_{variant}_t{i:03d}",
                               include_comprehension=False)
            records.append(record)
    return records


def test_emit_report_bundle(tmp_path):
    records = _records_for_report()
    payload = emit_report(records, tmp_path / "report", benchmark=0.9)

    out = tmp_path / "report"
    assert (out / "reports.csv").exists()
    assert (out / "summary.csv").exists()
    assert (out / "summary.txt").exists()
    for variant in ("baseline", "price_reframed"):
        for index_name in ("ccei", "hmi", "mpi", "mci"):
            cdf = out / f"risk_{variant}_{index_name}.cdf.csv"
            assert cdf.exists()
            last = cdf.read_text().splitlines()[-1]
            assert last.endswith(",1")
        scatter = out / f"demand_risk_{variant}.scatter.csv"
        header, *rows = scatter.read_text().splitlines()
        assert header == "trial_id,log_price_ratio,quantity_share"
        assert len(rows) == 18  # 3 trials x 6 rounds

    on_disk = json.loads((out / "summary.json").read_text())
    assert on_disk == payload
    assert payload["benchmark"] == 0.9
    assert set(payload["groups"]) == {"risk/baseline", "risk/price_reframed"}
    group = payload["groups"]["risk/baseline"]
    assert group["n_trials"] == 3
    assert group["ccei_mean"] == 1.0  # Cobb-Douglas subjects are consistent
    assert group["ttest"] is not None
    assert payload["pooled"]["n_trials"] == 6
    assert "risk:baseline_vs_price_reframed" in payload["variant_contrasts"]
    assert len(payload["rows"]) == 2

    reports_lines = (out / "reports.csv").read_text().splitlines()
    assert len(reports_lines) == 7
    assert reports_lines[0].startswith("trial_id,domain,variant,ccei")
    assert reports_lines[1].split(",")[9] == "true"  # garp_pass column


def test_emit_report_csv_json_rows_agree(tmp_path):
    records = _records_for_report()
    payload = emit_report(records, tmp_path / "r")
    csv_lines = (tmp_path / "r" / "summary.csv").read_text().splitlines()
    header = csv_lines[0].split(",")
    for line, row in zip(csv_lines[1:], payload["rows"]):
        assert line.split(",") == [row[k] for k in header]


def test_emit_report_single_trial_group(tmp_path):
    # one trial per group: no t test, CI collapses to the mean
    sheet = generate_sheet("food", seed=5, rounds=4)
    record = run_trial(build_prompts(sheet), CobbDouglasAgent(alpha=0.5),
                       trial_id="food_baseline_t000",
                       include_comprehension=False)
    payload = emit_report([record], tmp_path / "solo")
    group = payload["groups"]["food/baseline"]
    assert group["ttest"] is None
    assert payload["pooled"] is None
    assert payload["variant_contrasts"] == {}
