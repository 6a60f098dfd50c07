"""Statistical layer: power, demand diagnostics, benchmarks, reports.

Three groups of tools sit here:

* Bronars-style power: score many uniform-random subjects on the same
  task sheet to estimate how discriminating it is (fraction passing
  GARP should be tiny) and to trace index CDFs under random behavior.
* Demand diagnostics: rank correlation between relative log prices and
  relative quantities, the cheap sanity check that subjects respond to
  prices at all.
* Benchmark comparisons: one- and two-sample t statistics against a
  reference efficiency level, plus CSV/JSON report emission.

The Spearman and t statistics are computed from first principles (the
t distribution itself comes from scipy).
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats as _scipy_stats

from .choice_data import ChoiceDataset, format_number, points_to_units
from .errors import InsufficientData, InvalidParameter
from .harness import TrialRecord
from .indices import IndexReport, score_all
from .tasks import TaskSheet, round_to_prompt_parameters

# Reference points from a prior evaluation of a hosted chat model on
# these allocation tasks.  They serve as fixtures and report defaults,
# not as assertions about any particular endpoint.
HUMAN_BENCHMARK_CCEI = 0.918
HUMAN_BENCHMARK_RANGE = (0.81, 0.99)

REFERENCE_CCEI_MEANS = {
    ("risk", "baseline"): 0.998,
    ("time", "baseline"): 0.997,
    ("social", "baseline"): 0.997,
    ("food", "baseline"): 0.999,
    ("risk", "price_reframed"): 0.901,
    ("time", "price_reframed"): 0.884,
    ("social", "price_reframed"): 0.698,
    ("food", "price_reframed"): 0.894,
    ("risk", "discrete"): 0.843,
    ("time", "discrete"): 0.908,
    ("social", "discrete"): 0.871,
    ("food", "discrete"): 0.780,
}

REFERENCE_SPEARMAN = {
    "risk": -0.984,
    "time": -0.966,
    "social": -0.951,
    "food": -0.992,
}

# Observed invalid-reply rates by sampling temperature.
REFERENCE_INVALID_RATES = {0.5: 0.047, 1.0: 0.098}

# Quantity floor used for corner observations in log-ratio diagnostics,
# as a fraction of the budget.
CORNER_EXPENDITURE_SHARE = 0.001


# ---------------------------------------------------------------------------
# Rank correlation

def average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(arr.shape[0], dtype=np.float64)
    sorted_vals = arr[order]
    i = 0
    n = arr.shape[0]
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman_rho(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation with average ranks for ties.

    Returns nan when either input is constant (the correlation is
    undefined there, not zero).
    """
    x_arr = np.asarray(x, dtype=np.float64)
    y_arr = np.asarray(y, dtype=np.float64)
    if x_arr.shape != y_arr.shape:
        raise InvalidParameter(
            f"length mismatch: {x_arr.shape[0]} vs {y_arr.shape[0]}"
        )
    if x_arr.shape[0] < 2:
        return math.nan
    rx = average_ranks(x_arr)
    ry = average_ranks(y_arr)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    denom = math.sqrt(float((dx * dx).sum()) * float((dy * dy).sum()))
    if denom == 0.0:
        return math.nan
    return float((dx * dy).sum()) / denom


@dataclass(frozen=True)
class DemandDiagnostics:
    """Price responsiveness of one session.

    ``rho`` correlates ln(p_A/p_B) with ln(x_A/x_B); a price-sensitive
    subject shows a strongly negative value.  Corner bundles get a
    small quantity floor before the logs so they stay in the sample;
    ``corner_rounds`` counts them.  ``quantity_shares`` keeps the raw
    (unfloored) share of commodity A for plotting.
    """

    rho: float
    corner_rounds: int
    n_rounds: int
    log_price_ratios: tuple[float, ...]
    log_quantity_ratios: tuple[float, ...]
    quantity_shares: tuple[float, ...]

    @property
    def undefined(self) -> bool:
        return math.isnan(self.rho)


def demand_diagnostics(dataset: ChoiceDataset) -> DemandDiagnostics:
    """Rank-correlate relative prices with relative quantities.

    Requires two commodities.  Zero quantities are floored at the
    bundle that CORNER_EXPENDITURE_SHARE of the budget would buy, so
    corner choices contribute finite log ratios instead of dropping
    out.
    """
    if dataset.num_goods != 2:
        raise InvalidParameter(
            f"demand diagnostics need 2 commodities, got {dataset.num_goods}"
        )
    prices = dataset.prices_matrix()
    bundles = dataset.bundles_matrix()
    expenditures = dataset.expenditures()
    corner_rounds = int(np.sum(np.any(bundles == 0.0, axis=1)))

    floor = (CORNER_EXPENDITURE_SHARE * expenditures[:, None]) / prices
    adjusted = np.where(bundles == 0.0, floor, bundles)

    log_price = np.log(prices[:, 0] / prices[:, 1])
    log_quantity = np.log(adjusted[:, 0] / adjusted[:, 1])
    totals = bundles.sum(axis=1)
    safe_totals = np.where(totals > 0.0, totals, 1.0)
    shares = np.where(totals > 0.0, bundles[:, 0] / safe_totals, math.nan)

    rho = spearman_rho(log_price, log_quantity) if len(dataset) >= 2 else math.nan
    return DemandDiagnostics(
        rho=rho,
        corner_rounds=corner_rounds,
        n_rounds=len(dataset),
        log_price_ratios=tuple(float(v) for v in log_price),
        log_quantity_ratios=tuple(float(v) for v in log_quantity),
        quantity_shares=tuple(float(v) for v in shares),
    )


# ---------------------------------------------------------------------------
# t statistics

@dataclass(frozen=True)
class TTestResult:
    """A t statistic with its context.

    ``ci_low``/``ci_high`` bound the mean (one-sample) or the mean
    difference (two-sample) at 95%.
    """

    statistic: float
    pvalue: float
    df: float
    mean: float
    sd: float
    n: int
    ci_low: float
    ci_high: float


def _two_sided_p(statistic: float, df: float) -> float:
    if math.isinf(statistic):
        return 0.0
    return float(2.0 * _scipy_stats.t.sf(abs(statistic), df))


def one_sample_ttest(values: Sequence[float], benchmark: float) -> TTestResult:
    """Student's one-sample t test of mean(values) against `benchmark`.

    A zero-variance sample is handled explicitly: the statistic is 0
    (p = 1) when the common value equals the benchmark, and signed
    infinity (p = 0) otherwise.
    """
    arr = np.asarray(values, dtype=np.float64)
    n = arr.shape[0]
    if n < 2:
        raise InsufficientData(f"need at least 2 values, got {n}")
    mean = float(arr.mean())
    sd = float(arr.std(ddof=1))
    df = n - 1
    if sd == 0.0:
        statistic = 0.0 if mean == benchmark else math.copysign(
            math.inf, mean - benchmark
        )
        return TTestResult(
            statistic=statistic,
            pvalue=1.0 if statistic == 0.0 else 0.0,
            df=float(df), mean=mean, sd=sd, n=n, ci_low=mean, ci_high=mean,
        )
    sem = sd / math.sqrt(n)
    statistic = (mean - benchmark) / sem
    half_width = float(_scipy_stats.t.ppf(0.975, df)) * sem
    return TTestResult(
        statistic=float(statistic),
        pvalue=_two_sided_p(statistic, df),
        df=float(df),
        mean=mean,
        sd=sd,
        n=n,
        ci_low=mean - half_width,
        ci_high=mean + half_width,
    )


def welch_ttest(sample_a: Sequence[float], sample_b: Sequence[float]) -> TTestResult:
    """Welch's unequal-variance two-sample t test (mean_a - mean_b)."""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.shape[0] < 2 or b.shape[0] < 2:
        raise InsufficientData(
            f"need at least 2 values per sample, got {a.shape[0]} and {b.shape[0]}"
        )
    mean_a, mean_b = float(a.mean()), float(b.mean())
    var_a = float(a.var(ddof=1))
    var_b = float(b.var(ddof=1))
    n_a, n_b = a.shape[0], b.shape[0]
    se_sq = var_a / n_a + var_b / n_b
    diff = mean_a - mean_b
    if se_sq == 0.0:
        statistic = 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
        return TTestResult(
            statistic=statistic,
            pvalue=1.0 if statistic == 0.0 else 0.0,
            df=float(n_a + n_b - 2), mean=diff, sd=0.0, n=n_a + n_b,
            ci_low=diff, ci_high=diff,
        )
    df = se_sq**2 / (
        (var_a / n_a) ** 2 / (n_a - 1) + (var_b / n_b) ** 2 / (n_b - 1)
    )
    se = math.sqrt(se_sq)
    statistic = diff / se
    half_width = float(_scipy_stats.t.ppf(0.975, df)) * se
    return TTestResult(
        statistic=float(statistic),
        pvalue=_two_sided_p(statistic, df),
        df=float(df),
        mean=diff,
        sd=se,
        n=n_a + n_b,
        ci_low=diff - half_width,
        ci_high=diff + half_width,
    )


@dataclass(frozen=True)
class BenchmarkComparison:
    """How a group of sessions compares to a reference efficiency."""

    benchmark: float
    ttest: TTestResult

    @property
    def above(self) -> bool:
        return self.ttest.mean > self.benchmark


def compare_to_benchmark(
    ccei_values: Sequence[float], benchmark: float = HUMAN_BENCHMARK_CCEI
) -> BenchmarkComparison:
    """One-sample comparison of observed CCEIs to a reference level."""
    return BenchmarkComparison(
        benchmark=benchmark,
        ttest=one_sample_ttest(ccei_values, benchmark),
    )


# ---------------------------------------------------------------------------
# Power simulation

@dataclass(frozen=True)
class BronarsResult:
    """Index distributions for uniform-random subjects on one sheet.

    ``pass_fraction`` is the share of draws with CCEI exactly 1 (GARP
    satisfied); a discriminating design keeps it near zero.
    """

    sheet_domain: str
    sheet_variant: str
    draws: int
    pass_fraction: float
    ccei: tuple[float, ...]
    hmi_fraction: tuple[float, ...]
    mpi_mean: tuple[float, ...]
    mci: tuple[float, ...]


def _random_points(rng: np.random.Generator, options, budget: float) -> tuple[float, float]:
    if options is not None:
        picked = options[int(rng.integers(0, len(options)))]
        return float(picked[0]), float(picked[1])
    a = float(rng.uniform(0.0, budget))
    return a, budget - a


def bronars_simulation(
    sheet: TaskSheet,
    draws: int = 1000,
    seed: int = 0,
    max_cycle_len: int = 4,
    max_cycles: int = 2000,
) -> BronarsResult:
    """Score `draws` uniform-random subjects on one task sheet.

    Each draw allocates every round uniformly at random (uniform over
    the option menu for discrete sheets), converts the allocations to
    unit bundles exactly as a real trial would, and runs the full index
    battery.  Draw d uses its own child stream of ``seed`` so results
    do not depend on draw order.  The cycle caps keep the money-pump
    search bounded; they affect only that index's tail precision.
    """
    if draws <= 0:
        raise InvalidParameter(f"draws must be positive, got {draws!r}")
    framed = [round_to_prompt_parameters(spec, sheet.variant)
              for spec in sheet.rounds]
    returns = [(f.effective_return_a, f.effective_return_b) for f in framed]
    option_menus = [spec.options for spec in sheet.rounds]

    ccei_values = []
    hmi_values = []
    mpi_values = []
    mci_values = []
    passes = 0
    for draw in range(draws):
        rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([seed, draw]))
        )
        observations = []
        for spec_returns, options in zip(returns, option_menus):
            points = _random_points(rng, options, sheet.budget)
            observations.append(
                points_to_units(points, spec_returns, budget=sheet.budget)
            )
        dataset = ChoiceDataset(observations=tuple(observations))
        report = score_all(dataset, max_cycle_len=max_cycle_len,
                           max_cycles=max_cycles)
        ccei_values.append(report.ccei)
        hmi_values.append(report.hmi_fraction)
        mpi_values.append(report.mpi_mean)
        mci_values.append(report.mci)
        if report.garp_pass:
            passes += 1

    return BronarsResult(
        sheet_domain=sheet.domain,
        sheet_variant=sheet.variant,
        draws=draws,
        pass_fraction=passes / draws,
        ccei=tuple(ccei_values),
        hmi_fraction=tuple(hmi_values),
        mpi_mean=tuple(mpi_values),
        mci=tuple(mci_values),
    )


def empirical_cdf(values: Sequence[float]) -> list[tuple[float, float]]:
    """Sorted (value, cumulative fraction) pairs; the last fraction is 1."""
    arr = np.sort(np.asarray(values, dtype=np.float64))
    n = arr.shape[0]
    if n == 0:
        return []
    pairs = []
    for i in range(n):
        if i + 1 < n and arr[i + 1] == arr[i]:
            continue  # keep only the last occurrence of a tied value
        pairs.append((float(arr[i]), (i + 1) / n))
    return pairs


def write_cdf(values: Sequence[float], path: str | os.PathLike[str]) -> None:
    """Write an empirical CDF as a two-column CSV ending at 1."""
    pairs = empirical_cdf(values)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("value,cum_fraction\n")
        for value, fraction in pairs:
            fh.write(f"{format_number(value)},{format_number(fraction)}\n")


# ---------------------------------------------------------------------------
# Report emission

REPORT_COLUMNS = (
    "trial_id", "domain", "variant", "ccei", "hmi_retained", "hmi_fraction",
    "mpi_mean", "mpi_median", "mci", "garp_pass", "flags",
)

SUMMARY_COLUMNS = (
    "domain", "variant", "n_trials", "ccei_mean", "ccei_sd", "ccei_ci_low",
    "ccei_ci_high", "hmi_fraction_mean", "mpi_mean", "mci_mean",
    "garp_pass_rate", "invalid_rate", "spearman_mean",
)


def write_reports_csv(
    reports: Sequence[IndexReport], path: str | os.PathLike[str]
) -> None:
    """One row per trial, in the order given."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(REPORT_COLUMNS) + "\n")
        for report in reports:
            row = [
                report.trial_id,
                report.domain,
                report.variant,
                format_number(report.ccei),
                str(report.hmi_retained),
                format_number(report.hmi_fraction),
                format_number(report.mpi_mean),
                format_number(report.mpi_median),
                format_number(report.mci),
                "true" if report.garp_pass else "false",
                report.flags_text(),
            ]
            fh.write(",".join(row) + "\n")


def _ols_line(x: Sequence[float], y: Sequence[float]) -> Optional[tuple[float, float]]:
    """(slope, intercept) of y on x, or None when degenerate."""
    x_arr = np.asarray(x, dtype=np.float64)
    y_arr = np.asarray(y, dtype=np.float64)
    keep = np.isfinite(x_arr) & np.isfinite(y_arr)
    if keep.sum() < 2 or np.ptp(x_arr[keep]) == 0.0:
        return None
    slope, intercept = np.polyfit(x_arr[keep], y_arr[keep], 1)
    return float(slope), float(intercept)


def emit_report(
    records: Sequence[TrialRecord],
    out_dir: str | os.PathLike[str],
    benchmark: float = HUMAN_BENCHMARK_CCEI,
    score_kwargs: Optional[dict] = None,
) -> dict:
    """Score a batch of trial records and write the report bundle.

    Writes, under ``out_dir``:

    * reports.csv: per-trial index rows.
    * summary.csv: per (domain, variant) means with 95% t intervals.
    * summary.json: the same rows plus one-sample comparisons to
      ``benchmark`` per group and pooled, and demand-fit lines.
    * {domain}_{variant}_{index}.cdf.csv: empirical CDF of each index
      across the group's trials.
    * demand_{domain}_{variant}.scatter.csv: per-round log price ratio
      and quantity share for plotting.
    * summary.txt: human-readable digest.

    Returns the summary structure that was written to summary.json.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    kwargs = score_kwargs or {}

    scored: list[tuple[TrialRecord, IndexReport]] = []
    for record in records:
        scored.append((record, score_all(record.dataset, **kwargs)))
    write_reports_csv([report for _, report in scored], out / "reports.csv")

    groups: dict[tuple[str, str], list[tuple[TrialRecord, IndexReport]]] = {}
    for record, report in scored:
        groups.setdefault((record.domain, record.variant), []).append(
            (record, report)
        )

    summary_rows = []
    payload: dict = {"benchmark": benchmark, "groups": {}, "pooled": None,
                     "rows": []}
    text_lines = ["Rationality summary", "==================", ""]

    for (domain, variant), members in sorted(groups.items()):
        cceis = [report.ccei for _, report in members]
        group_key = f"{domain}/{variant}"
        n = len(members)

        index_series = {
            "ccei": cceis,
            "hmi": [report.hmi_fraction for _, report in members],
            "mpi": [report.mpi_mean for _, report in members],
            "mci": [report.mci for _, report in members],
        }
        for index_name, series in index_series.items():
            write_cdf(series, out / f"{domain}_{variant}_{index_name}.cdf.csv")
        rhos = []
        scatter_rows = []
        corner_total = 0
        for record, _ in members:
            if len(record.dataset) >= 2 and record.dataset.num_goods == 2:
                diag = demand_diagnostics(record.dataset)
                if not diag.undefined:
                    rhos.append(diag.rho)
                corner_total += diag.corner_rounds
                for i in range(diag.n_rounds):
                    scatter_rows.append(
                        (record.trial_id, diag.log_price_ratios[i],
                         diag.quantity_shares[i])
                    )
        scatter_path = out / f"demand_{domain}_{variant}.scatter.csv"
        with open(scatter_path, "w", encoding="utf-8", newline="") as fh:
            fh.write("trial_id,log_price_ratio,quantity_share\n")
            for trial_id, lpr, share in scatter_rows:
                fh.write(f"{trial_id},{format_number(lpr)},"
                         f"{format_number(share)}\n")
        fit = _ols_line([r[1] for r in scatter_rows],
                        [r[2] for r in scatter_rows])

        asked = sum(len(record.rounds) for record, _ in members)
        invalid = sum(record.invalid_count for record, _ in members)
        invalid_rate = invalid / asked if asked else 0.0

        group_entry: dict = {
            "n_trials": n,
            "ccei_mean": float(np.mean(cceis)),
            "invalid_rate": invalid_rate,
            "corner_rounds": corner_total,
            "spearman_mean": float(np.mean(rhos)) if rhos else None,
            "demand_fit": {"slope": fit[0], "intercept": fit[1]} if fit else None,
        }
        if n >= 2:
            comparison = compare_to_benchmark(cceis, benchmark)
            t = comparison.ttest
            group_entry["ttest"] = {
                "statistic": t.statistic, "pvalue": t.pvalue, "df": t.df,
                "ci_low": t.ci_low, "ci_high": t.ci_high,
            }
            ci_low, ci_high = t.ci_low, t.ci_high
            sd = t.sd
        else:
            group_entry["ttest"] = None
            ci_low = ci_high = float(np.mean(cceis))
            sd = 0.0
        payload["groups"][group_key] = group_entry

        row = [
            domain, variant, str(n),
            format_number(float(np.mean(cceis))),
            format_number(sd),
            format_number(ci_low),
            format_number(ci_high),
            format_number(float(np.mean([rep.hmi_fraction for _, rep in members]))),
            format_number(float(np.mean([rep.mpi_mean for _, rep in members]))),
            format_number(float(np.mean([rep.mci for _, rep in members]))),
            format_number(float(np.mean([1.0 if rep.garp_pass else 0.0
                                         for _, rep in members]))),
            format_number(invalid_rate),
            format_number(float(np.mean(rhos))) if rhos else "",
        ]
        summary_rows.append(row)
        payload["rows"].append(dict(zip(SUMMARY_COLUMNS, row)))
        mean_ccei = float(np.mean(cceis))
        line = (f"{group_key}: n={n} mean CCEI {mean_ccei:.3f} "
                f"[{ci_low:.3f}, {ci_high:.3f}]")
        if group_entry["ttest"] is not None:
            line += (f" vs benchmark {benchmark:g}: "
                     f"t={group_entry['ttest']['statistic']:.3f}, "
                     f"p={group_entry['ttest']['pvalue']:.4f}")
        if group_entry["spearman_mean"] is not None:
            line += f"; mean demand rho {group_entry['spearman_mean']:.3f}"
        text_lines.append(line)

    # Welch contrasts between variants observed within the same domain.
    by_domain: dict[str, dict[str, list[float]]] = {}
    for (domain, variant), members in groups.items():
        by_domain.setdefault(domain, {})[variant] = [
            report.ccei for _, report in members
        ]
    contrasts: dict = {}
    for domain, variants in sorted(by_domain.items()):
        names = sorted(variants)
        for i, first in enumerate(names):
            for second in names[i + 1:]:
                if len(variants[first]) < 2 or len(variants[second]) < 2:
                    continue
                t = welch_ttest(variants[first], variants[second])
                contrasts[f"{domain}:{first}_vs_{second}"] = {
                    "mean_diff": t.mean, "statistic": t.statistic,
                    "pvalue": t.pvalue, "df": t.df,
                    "ci_low": t.ci_low, "ci_high": t.ci_high,
                }
    payload["variant_contrasts"] = contrasts

    all_ccei = [report.ccei for _, report in scored]
    if len(all_ccei) >= 2:
        pooled = compare_to_benchmark(all_ccei, benchmark)
        t = pooled.ttest
        payload["pooled"] = {
            "n_trials": len(all_ccei),
            "ccei_mean": t.mean,
            "ttest": {"statistic": t.statistic, "pvalue": t.pvalue,
                      "df": t.df, "ci_low": t.ci_low, "ci_high": t.ci_high},
        }
        text_lines.append("")
        text_lines.append(
            f"pooled: n={len(all_ccei)} mean CCEI {t.mean:.3f} "
            f"[{t.ci_low:.3f}, {t.ci_high:.3f}] vs benchmark {benchmark:g}: "
            f"t={t.statistic:.3f}, p={t.pvalue:.4f}"
        )

    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for row in summary_rows:
            fh.write(",".join(row) + "\n")

    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")

    with open(out / "summary.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(text_lines) + "\n")

    return payload
