"""Command-line pipeline: generate -> run -> score -> power -> report.

Every stage reads and writes plain files under one output root, so
partial reruns, audits, and resumption are all just file operations:

    out/sheets/       {domain}_{variant}_tNNN.sheet.json
    out/transcripts/  {trial_id}.jsonl
    out/trials/       {trial_id}.trial.json
    out/datasets/     {trial_id}.dataset.json
    out/reports.csv   per-trial indices
    out/power/        Bronars CDFs + pass rates
    out/report/       summary tables, CDFs, demand scatters

With a synthetic agent the whole pipeline is deterministic per seed;
rerunning any stage reproduces its files byte for byte.  The API
credential for remote endpoints is read only from the REVPREF_API_KEY
environment variable; there deliberately is no flag for it.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import analysis
from .choice_data import load_dataset
from .errors import MissingInput, RevprefError
from .harness import RetryPolicy, TrialJob, TrialStore, run_trials
from .indices import score_all
from .relations import build_relations
from .subjects import HttpChatEndpoint, build_prompts, synthetic_agent
from .tasks import (
    CONSTRAINT_MAX_AT_LEAST_HALF,
    CONSTRAINT_MAX_AT_MOST_HALF,
    DEFAULT_ROUNDS,
    DOMAINS,
    VARIANTS,
    derive_trial_seed,
    generate_sheet,
    load_sheet,
    save_sheet,
)

_REJECTED_KEY_FLAG = click.option(
    "--api-key",
    default=None,
    hidden=True,
    expose_value=False,
    callback=lambda ctx, param, value: _reject_api_key(value),
    help="Rejected; set REVPREF_API_KEY in the environment instead.",
)


def _reject_api_key(value):
    if value is not None:
        raise click.UsageError(
            "credentials are accepted only via the REVPREF_API_KEY "
            "environment variable, never as a flag"
        )


def _parse_domains(text: str) -> list[str]:
    domains = [d.strip() for d in text.split(",") if d.strip()]
    for domain in domains:
        if domain not in DOMAINS:
            raise click.UsageError(
                f"unknown domain {domain!r}; choose from {', '.join(DOMAINS)}"
            )
    if not domains:
        raise click.UsageError("no domains given")
    return domains


def _trial_id(domain: str, variant: str, trial: int) -> str:
    return f"{domain}_{variant}_t{trial:03d}"


def _trial_index(trial_id: str) -> int:
    try:
        return int(trial_id.rsplit("_t", 1)[1])
    except (IndexError, ValueError):
        return 0


def _sheets_in(out: Path) -> list[Path]:
    sheet_dir = out / "sheets"
    paths = sorted(sheet_dir.glob("*.sheet.json"))
    if not paths:
        raise MissingInput(f"no sheet files under {sheet_dir}")
    return paths


def _run_guarded(func, *args, **kwargs):
    try:
        return func(*args, **kwargs)
    except RevprefError as exc:
        raise click.ClickException(f"{type(exc).__name__}: {exc}") from exc


@click.group(name="revpref")
@click.version_option(package_name="revpref")
def main() -> None:
    """Measure the economic rationality of decision-making agents."""


@main.command()
@click.option("--out", required=True, type=click.Path(path_type=Path),
              help="Output root; sheets land in OUT/sheets/.")
@click.option("--domains", default=",".join(DOMAINS), show_default=True,
              help="Comma-separated task domains.")
@click.option("--variant", default="baseline", show_default=True,
              type=click.Choice(VARIANTS))
@click.option("--trials", default=1, show_default=True,
              type=click.IntRange(min=1), help="Sheets per domain.")
@click.option("--seed", default=0, show_default=True, type=int,
              help="Master seed; every sheet derives its own stream.")
@click.option("--rounds", default=DEFAULT_ROUNDS, show_default=True,
              type=click.IntRange(min=1))
@click.option("--constraint-mode", default=CONSTRAINT_MAX_AT_LEAST_HALF,
              show_default=True,
              type=click.Choice([CONSTRAINT_MAX_AT_LEAST_HALF,
                                 CONSTRAINT_MAX_AT_MOST_HALF]))
def generate(out: Path, domains: str, variant: str, trials: int, seed: int,
             rounds: int, constraint_mode: str) -> None:
    """Write task sheets, one file per (domain, trial)."""
    domain_list = _parse_domains(domains)
    sheet_dir = out / "sheets"
    sheet_dir.mkdir(parents=True, exist_ok=True)
    count = 0
    for domain in domain_list:
        for trial in range(trials):
            trial_seed = derive_trial_seed(seed, domain, variant, trial)
            sheet = _run_guarded(
                generate_sheet, domain, variant=variant, seed=trial_seed,
                constraint_mode=constraint_mode, rounds=rounds,
            )
            path = sheet_dir / f"{_trial_id(domain, variant, trial)}.sheet.json"
            save_sheet(sheet, path)
            count += 1
    click.echo(f"wrote {count} sheet(s) under {sheet_dir}")


@main.command()
@click.option("--out", required=True, type=click.Path(path_type=Path),
              help="Output root holding OUT/sheets/ from the generate stage.")
@click.option("--agent", required=True,
              help="Agent spec: endpoint:MODEL for a remote chat endpoint, "
                   "or a synthetic spec like cobb_douglas:0.5, "
                   "ces:-1,0.5, leontief:0.5, random_uniform, "
                   "corner_max_return, tremble:0.1:cobb_douglas:0.5.")
@click.option("--endpoint-url", default=None,
              help="Chat completions URL (required with endpoint:MODEL).")
@click.option("--temperature", default=0.0, show_default=True,
              type=click.FloatRange(0.0, 1.0))
@click.option("--seed", default=0, show_default=True, type=int,
              help="Master seed for per-trial synthetic agent streams.")
@click.option("--concurrency", default=4, show_default=True,
              type=click.IntRange(min=1), help="Trials in flight at once.")
@click.option("--no-comprehension", is_flag=True,
              help="Skip the comprehension questions.")
@click.option("--stateless-rounds", is_flag=True,
              help="Reset the conversation before every decision round.")
@click.option("--age", default=None, type=int,
              help="Demographic preamble age (needs --gender).")
@click.option("--gender", default=None,
              help="Demographic preamble gender (needs --age).")
@_REJECTED_KEY_FLAG
def run(out: Path, agent: str, endpoint_url: str | None, temperature: float,
        seed: int, concurrency: int, no_comprehension: bool,
        stateless_rounds: bool, age: int | None, gender: str | None) -> None:
    """Run one trial per sheet; completed trials are skipped on rerun."""
    sheet_paths = _run_guarded(_sheets_in, out)
    demographics = None
    if (age is None) != (gender is None):
        raise click.UsageError("--age and --gender go together")
    if age is not None:
        demographics = {"age": age, "gender": gender}

    is_endpoint = agent.startswith("endpoint:")
    endpoint = None
    if is_endpoint:
        model = agent.partition(":")[2]
        if not model:
            raise click.UsageError("endpoint spec needs a model: endpoint:MODEL")
        if not endpoint_url:
            raise click.UsageError("--endpoint-url is required with endpoint:MODEL")
        endpoint = HttpChatEndpoint(endpoint_url, model)

    jobs = []
    for path in sheet_paths:
        sheet = _run_guarded(load_sheet, path)
        trial_id = path.name[: -len(".sheet.json")]
        script = _run_guarded(build_prompts, sheet, demographics=demographics,
                              temperature=temperature)
        jobs.append(TrialJob(trial_id=trial_id, script=script))

    def agent_factory(job: TrialJob):
        if endpoint is not None:
            return endpoint
        trial_seed = derive_trial_seed(seed, job.script.domain,
                                       job.script.variant,
                                       _trial_index(job.trial_id))
        return synthetic_agent(agent, seed=int(trial_seed))

    store = TrialStore(out)
    skipped = sum(1 for job in jobs if store.is_complete(job.trial_id))
    records = _run_guarded(
        run_trials, jobs, agent_factory,
        store=store,
        policy=RetryPolicy(),
        concurrency=concurrency,
        include_comprehension=not no_comprehension,
        stateless_rounds=stateless_rounds,
        record_time=is_endpoint,
    )
    aborted = sum(1 for r in records if r.aborted)
    invalid = sum(r.invalid_count for r in records)
    asked = sum(len(r.rounds) for r in records)
    rate = invalid / asked if asked else 0.0
    click.echo(
        f"ran {len(records) - skipped} trial(s), reused {skipped}, "
        f"aborted {aborted}; invalid replies {invalid}/{asked} ({rate:.1%})"
    )


@main.command()
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--dump-relations", is_flag=True,
              help="Also write weak/strict relation matrices per trial.")
def score(out: Path, dump_relations: bool) -> None:
    """Score every dataset and write OUT/reports.csv."""
    dataset_dir = out / "datasets"
    paths = sorted(dataset_dir.glob("*.dataset.json"))
    if not paths:
        raise click.ClickException(
            f"MissingInput: no dataset files under {dataset_dir}"
        )
    reports = []
    for path in paths:
        dataset = _run_guarded(load_dataset, path)
        reports.append(_run_guarded(score_all, dataset))
        if dump_relations:
            relations = _run_guarded(build_relations, dataset)
            dump_dir = out / "relations"
            dump_dir.mkdir(parents=True, exist_ok=True)
            trial_id = path.name[: -len(".dataset.json")]
            payload = {
                "trial_id": trial_id,
                "weak": relations.weak_direct.astype(int).tolist(),
                "strict": relations.strict_direct.astype(int).tolist(),
                "weak_closure": relations.weak_closure.astype(int).tolist(),
            }
            with open(dump_dir / f"{trial_id}.relations.json", "w",
                      encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")
    analysis.write_reports_csv(reports, out / "reports.csv")
    passes = sum(1 for r in reports if r.garp_pass)
    click.echo(
        f"scored {len(reports)} trial(s) -> {out / 'reports.csv'}; "
        f"{passes} satisfy GARP"
    )


@main.command()
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--draws", default=1000, show_default=True,
              type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int)
def power(out: Path, draws: int, seed: int) -> None:
    """Bronars power: score uniform-random subjects on each sheet family.

    Uses the first sheet of every (domain, variant) group and writes one
    CDF file per index under OUT/power/.
    """
    sheet_paths = _run_guarded(_sheets_in, out)
    power_dir = out / "power"
    power_dir.mkdir(parents=True, exist_ok=True)

    first_by_group: dict[tuple[str, str], Path] = {}
    for path in sheet_paths:
        sheet = _run_guarded(load_sheet, path)
        first_by_group.setdefault((sheet.domain, sheet.variant), path)

    summary = {}
    for (domain, variant), path in sorted(first_by_group.items()):
        sheet = _run_guarded(load_sheet, path)
        result = _run_guarded(analysis.bronars_simulation, sheet,
                              draws=draws, seed=seed)
        series = {
            "ccei": result.ccei,
            "hmi": result.hmi_fraction,
            "mpi": result.mpi_mean,
            "mci": result.mci,
        }
        for index_name, values in series.items():
            analysis.write_cdf(
                values, power_dir / f"{domain}_{variant}_{index_name}.cdf.csv"
            )
        summary[f"{domain}/{variant}"] = {
            "draws": result.draws,
            "pass_fraction": result.pass_fraction,
            "sheet": path.name,
        }
        click.echo(
            f"{domain}/{variant}: {result.draws} draws, "
            f"GARP pass fraction {result.pass_fraction:.3%}"
        )
    with open(power_dir / "power.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


@main.command()
@click.option("--out", required=True, type=click.Path(path_type=Path))
@click.option("--benchmark", default=analysis.HUMAN_BENCHMARK_CCEI,
              show_default=True, type=float,
              help="Reference efficiency level for the one-sample tests.")
def report(out: Path, benchmark: float) -> None:
    """Aggregate completed trials into OUT/report/."""
    store = TrialStore(out)
    trial_dir = out / "trials"
    paths = sorted(trial_dir.glob("*.trial.json"))
    if not paths:
        raise click.ClickException(
            f"MissingInput: no trial records under {trial_dir}"
        )
    records = []
    for path in paths:
        trial_id = path.name[: -len(".trial.json")]
        records.append(_run_guarded(store.load_record, trial_id))
    payload = _run_guarded(analysis.emit_report, records, out / "report",
                           benchmark=benchmark)
    click.echo(f"report for {len(records)} trial(s) -> {out / 'report'}")
    pooled = payload.get("pooled")
    if pooled:
        click.echo(
            f"pooled mean CCEI {pooled['ccei_mean']:.3f} vs benchmark "
            f"{benchmark:g} (p={pooled['ttest']['pvalue']:.4f})"
        )


if __name__ == "__main__":
    sys.exit(main())
