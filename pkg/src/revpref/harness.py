"""Trial execution: conversations, retries, persistence, and resume.

A trial is one scripted conversation with one agent: system and
background messages, optional comprehension questions (asked in a
separate conversation so they never contaminate the scored context),
then the decision questions in order within a single growing message
history.  Each reply is classified on arrival; valid rounds become the
trial's choice dataset, in round order.

Everything a trial produces is written before :func:`run_trial`
returns: an append-only JSONL transcript, a trial record, and the
derived dataset.  Completed trials are skipped on resume, so
re-running a partially finished batch adds exactly the missing trials
and never duplicates rows.  With synthetic agents and timestamps
disabled the artifacts are byte-identical across runs.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Optional, Sequence

from .choice_data import (
    ChoiceDataset,
    DatasetMeta,
    load_dataset,
    points_to_units,
    save_dataset,
)
from .errors import EndpointError, ParseError, TransientEndpointError
from .subjects import (
    AgentEndpoint,
    ParsedReply,
    PromptScript,
    STATUS_VALID,
    parse_reply,
)

TRIAL_SCHEMA = "revpref-trial/1"
TRANSCRIPT_SCHEMA = "revpref-transcript/1"

COMPREHENSION_PHASE = -1


@dataclass(frozen=True)
class RetryPolicy:
    """Exponential backoff for transient endpoint failures.

    ``attempts`` bounds total tries per question.  A server-supplied
    Retry-After always wins over the computed backoff.
    """

    attempts: int = 5
    base_delay: float = 1.0
    max_delay: float = 60.0

    def delay(self, attempt: int, retry_after: Optional[float] = None) -> float:
        """Seconds to wait after the (attempt+1)-th failure."""
        if retry_after is not None:
            return max(float(retry_after), 0.0)
        return min(self.base_delay * 2.0**attempt, self.max_delay)


@dataclass(frozen=True)
class RetryEvent:
    """One backoff taken while asking a question.

    ``round_index`` is the decision round, or -1 during comprehension.
    """

    round_index: int
    attempt: int
    delay: float
    reason: str


@dataclass(frozen=True)
class RoundOutcome:
    """One decision question with its raw and parsed reply."""

    round_index: int
    question: str
    reply: ParsedReply


@dataclass(frozen=True)
class TrialRecord:
    """Everything one trial produced.

    ``dataset`` covers the valid rounds only, in round order;
    ``invalid_count`` counts refusals plus malformed replies among the
    decision rounds that were actually asked.  ``aborted`` marks trials
    cut short by a permanent endpoint failure; their partial rounds are
    kept.  Timestamps are None when timing was not recorded (synthetic
    runs stay byte-deterministic that way).
    """

    trial_id: str
    domain: str
    variant: str
    model: str
    temperature: float
    rounds: tuple[RoundOutcome, ...]
    comprehension: tuple[tuple[str, str], ...]
    dataset: ChoiceDataset
    invalid_count: int
    aborted: bool
    retry_events: tuple[RetryEvent, ...] = ()
    started_at: Optional[str] = None
    finished_at: Optional[str] = None

    @property
    def valid_count(self) -> int:
        return sum(1 for r in self.rounds if r.reply.status == STATUS_VALID)


def _dataset_from_outcomes(
    script: PromptScript, outcomes: Sequence[RoundOutcome], trial_id: str
) -> ChoiceDataset:
    observations = []
    for outcome in outcomes:
        if outcome.reply.status != STATUS_VALID:
            continue
        returns = script.effective_returns[outcome.round_index]
        observations.append(
            points_to_units(outcome.reply.points, returns, budget=script.budget)
        )
    meta = DatasetMeta(domain=script.domain, trial_id=trial_id,
                       variant=script.variant)
    return ChoiceDataset(observations=tuple(observations), metadata=meta)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


class _Conversation:
    """One message history with retrying ask semantics."""

    def __init__(
        self,
        agent: AgentEndpoint,
        temperature: float,
        policy: RetryPolicy,
        sleeper: Callable[[float], None],
        events: list[RetryEvent],
    ) -> None:
        self.messages: list[dict] = []
        self._agent = agent
        self._temperature = temperature
        self._policy = policy
        self._sleeper = sleeper
        self._events = events

    def seed(self, script: PromptScript) -> None:
        self.messages = [
            {"role": "system", "content": script.system_text},
            {"role": "assistant", "content": script.assistant_text},
        ]

    def ask(self, question: str, round_index: int) -> str:
        """Ask one question, retrying transient failures per policy.

        Raises EndpointError once retries are exhausted or on a
        permanent failure; the pending user message is rolled back so
        the history stays consistent for any caller that continues.
        """
        self.messages.append({"role": "user", "content": question})
        attempt = 0
        while True:
            try:
                reply = self._agent.complete(self.messages, self._temperature)
            except TransientEndpointError as exc:
                attempt += 1
                if attempt >= self._policy.attempts:
                    self.messages.pop()
                    raise EndpointError(
                        f"gave up after {attempt} attempts: {exc}"
                    ) from exc
                delay = self._policy.delay(attempt - 1, exc.retry_after)
                self._events.append(RetryEvent(round_index=round_index,
                                               attempt=attempt, delay=delay,
                                               reason=str(exc)))
                self._sleeper(delay)
            except EndpointError:
                self.messages.pop()
                raise
            else:
                self.messages.append({"role": "assistant", "content": reply})
                return reply


def run_trial(
    script: PromptScript,
    agent: AgentEndpoint,
    policy: Optional[RetryPolicy] = None,
    *,
    trial_id: str = "trial",
    store: Optional["TrialStore"] = None,
    include_comprehension: bool = True,
    stateless_rounds: bool = False,
    record_time: bool = False,
    sleeper: Callable[[float], None] = time.sleep,
) -> TrialRecord:
    """Run one trial conversation end to end.

    Comprehension questions (when included) run in their own
    conversation; decision questions share one history unless
    ``stateless_rounds`` resets the context every round (an ablation
    that removes cross-round memory).  A permanent endpoint failure
    aborts the trial but keeps and persists the partial record.
    Unparseable replies never abort anything; they are classified and
    counted.

    Rerunning with the same script and a same-seeded agent reproduces
    the record exactly; with ``record_time=False`` the persisted bytes
    are identical too.
    """
    policy = policy or RetryPolicy()
    events: list[RetryEvent] = []
    started_at = _now() if record_time else None
    model = getattr(agent, "model_name", type(agent).__name__)

    comprehension: list[tuple[str, str]] = []
    outcomes: list[RoundOutcome] = []
    aborted = False

    conv = _Conversation(agent, script.temperature, policy, sleeper, events)
    if include_comprehension and script.comprehension_questions:
        conv.seed(script)
        try:
            for question in script.comprehension_questions:
                raw = conv.ask(question, COMPREHENSION_PHASE)
                comprehension.append((question, raw))
        except EndpointError:
            aborted = True

    if not aborted:
        conv.seed(script)
        for index, question in enumerate(script.decision_questions):
            if stateless_rounds:
                conv.seed(script)
            try:
                raw = conv.ask(question, index)
            except EndpointError:
                aborted = True
                break
            reply = parse_reply(raw, budget=script.budget,
                                variant=script.variant, options=script.options)
            outcomes.append(RoundOutcome(round_index=index, question=question,
                                         reply=reply))

    record = TrialRecord(
        trial_id=trial_id,
        domain=script.domain,
        variant=script.variant,
        model=model,
        temperature=script.temperature,
        rounds=tuple(outcomes),
        comprehension=tuple(comprehension),
        dataset=_dataset_from_outcomes(script, outcomes, trial_id),
        invalid_count=sum(1 for o in outcomes
                          if o.reply.status != STATUS_VALID),
        aborted=aborted,
        retry_events=tuple(events),
        started_at=started_at,
        finished_at=_now() if record_time else None,
    )
    if store is not None:
        store.save(record)
    return record


# ---------------------------------------------------------------------------
# Persistence

class TrialStore:
    """File layout for a batch of trials under one output root.

    sheets/       {trial_id}.sheet.json       (written by the CLI)
    transcripts/  {trial_id}.jsonl            one row per decision round
    trials/       {trial_id}.trial.json       full record
    datasets/     {trial_id}.dataset.json     valid rounds as units
    """

    def __init__(self, root: str | os.PathLike[str]) -> None:
        self.root = Path(root)

    def sheet_path(self, trial_id: str) -> Path:
        return self.root / "sheets" / f"{trial_id}.sheet.json"

    def transcript_path(self, trial_id: str) -> Path:
        return self.root / "transcripts" / f"{trial_id}.jsonl"

    def trial_path(self, trial_id: str) -> Path:
        return self.root / "trials" / f"{trial_id}.trial.json"

    def dataset_path(self, trial_id: str) -> Path:
        return self.root / "datasets" / f"{trial_id}.dataset.json"

    def is_complete(self, trial_id: str) -> bool:
        """True when the trial ran to the end (aborted trials rerun)."""
        path = self.trial_path(trial_id)
        if not path.exists():
            return False
        try:
            with open(path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
        except (OSError, json.JSONDecodeError):
            return False
        return payload.get("schema") == TRIAL_SCHEMA and not payload.get("aborted")

    def save(self, record: TrialRecord) -> None:
        for path in (self.transcript_path(record.trial_id),
                     self.trial_path(record.trial_id),
                     self.dataset_path(record.trial_id)):
            path.parent.mkdir(parents=True, exist_ok=True)

        with open(self.transcript_path(record.trial_id), "w",
                  encoding="utf-8") as fh:
            for outcome in record.rounds:
                row = {
                    "trial_id": record.trial_id,
                    "domain": record.domain,
                    "variant": record.variant,
                    "round": outcome.round_index,
                    "question": outcome.question,
                    "raw_reply": outcome.reply.raw_text,
                    "status": outcome.reply.status,
                    "points": list(outcome.reply.points)
                    if outcome.reply.points is not None else None,
                }
                fh.write(json.dumps(row, sort_keys=True) + "\n")

        payload = {
            "schema": TRIAL_SCHEMA,
            "trial_id": record.trial_id,
            "domain": record.domain,
            "variant": record.variant,
            "model": record.model,
            "temperature": record.temperature,
            "aborted": record.aborted,
            "invalid_count": record.invalid_count,
            "started_at": record.started_at,
            "finished_at": record.finished_at,
            "comprehension": [
                {"question": q, "raw_reply": r} for q, r in record.comprehension
            ],
            "retry_events": [
                {"round": e.round_index, "attempt": e.attempt,
                 "delay": e.delay, "reason": e.reason}
                for e in record.retry_events
            ],
            "rounds": [
                {
                    "round": o.round_index,
                    "question": o.question,
                    "raw_reply": o.reply.raw_text,
                    "status": o.reply.status,
                    "points": list(o.reply.points)
                    if o.reply.points is not None else None,
                }
                for o in record.rounds
            ],
        }
        with open(self.trial_path(record.trial_id), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")

        save_dataset(record.dataset, self.dataset_path(record.trial_id))

    def load_record(self, trial_id: str) -> TrialRecord:
        """Rebuild a TrialRecord from its persisted files."""
        path = self.trial_path(trial_id)
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("schema") != TRIAL_SCHEMA:
            raise ParseError(
                f"expected schema {TRIAL_SCHEMA}, got {payload.get('schema')!r}",
                source=str(path),
            )
        rounds = tuple(
            RoundOutcome(
                round_index=int(row["round"]),
                question=row["question"],
                reply=ParsedReply(
                    status=row["status"],
                    points=tuple(row["points"])
                    if row.get("points") is not None else None,
                    raw_text=row["raw_reply"],
                ),
            )
            for row in payload.get("rounds", ())
        )
        dataset = load_dataset(self.dataset_path(trial_id))
        return TrialRecord(
            trial_id=payload["trial_id"],
            domain=payload["domain"],
            variant=payload["variant"],
            model=payload.get("model", ""),
            temperature=float(payload.get("temperature", 0.0)),
            rounds=rounds,
            comprehension=tuple(
                (row["question"], row["raw_reply"])
                for row in payload.get("comprehension", ())
            ),
            dataset=dataset,
            invalid_count=int(payload.get("invalid_count", 0)),
            aborted=bool(payload.get("aborted", False)),
            retry_events=tuple(
                RetryEvent(round_index=int(row["round"]),
                           attempt=int(row["attempt"]),
                           delay=float(row["delay"]),
                           reason=row["reason"])
                for row in payload.get("retry_events", ())
            ),
            started_at=payload.get("started_at"),
            finished_at=payload.get("finished_at"),
        )


# ---------------------------------------------------------------------------
# Batch execution

@dataclass(frozen=True)
class TrialJob:
    """One unit of batch work: a script ready to run under an id."""

    trial_id: str
    script: PromptScript


def run_trials(
    jobs: Sequence[TrialJob],
    agent_factory: Callable[[TrialJob], AgentEndpoint],
    *,
    store: Optional[TrialStore] = None,
    policy: Optional[RetryPolicy] = None,
    concurrency: int = 4,
    include_comprehension: bool = True,
    stateless_rounds: bool = False,
    record_time: bool = False,
    sleeper: Callable[[float], None] = time.sleep,
) -> list[TrialRecord]:
    """Run a batch of trials with bounded concurrency.

    Trials already complete in ``store`` are loaded, not rerun, so a
    resumed batch fills in only what is missing.  Each trial gets a
    fresh agent from ``agent_factory`` (stateful synthetic subjects
    must not be shared across trials).  Rounds within a trial stay
    sequential; only whole trials run in parallel.  Results come back
    in job order regardless of completion order.
    """
    results: dict[str, TrialRecord] = {}
    pending: list[TrialJob] = []
    for job in jobs:
        if store is not None and store.is_complete(job.trial_id):
            results[job.trial_id] = store.load_record(job.trial_id)
        else:
            pending.append(job)

    def _one(job: TrialJob) -> TrialRecord:
        return run_trial(
            job.script,
            agent_factory(job),
            policy,
            trial_id=job.trial_id,
            store=store,
            include_comprehension=include_comprehension,
            stateless_rounds=stateless_rounds,
            record_time=record_time,
            sleeper=sleeper,
        )

    if pending:
        workers = max(1, min(int(concurrency), len(pending)))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for job, record in zip(pending, pool.map(_one, pending)):
                results[job.trial_id] = record

    return [results[job.trial_id] for job in jobs]
