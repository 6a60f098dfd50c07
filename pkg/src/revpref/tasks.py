"""Budget-allocation task sheets.

A sheet is 25 rounds of "split 100 points between two commodities",
where every point placed on commodity A yields M units and every point
on B yields N units.  M and N are drawn uniformly from [0.1, 1.0],
rounded to two decimals (the precision the agent actually sees), and
re-drawn as a pair until the configured constraint holds.

Generation uses numpy's PCG64 generator, which is seed-stable across
platforms, so a (seed, domain, variant) triple always reproduces the
same sheet bytes.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    InvalidParameter,
    ParseError,
    SchemaVersionMismatch,
    UnknownDomain,
)
from .choice_data import format_number

SHEET_SCHEMA = "revpref-sheet/1"

DOMAINS = ("risk", "time", "social", "food")
VARIANTS = ("baseline", "price_reframed", "discrete")

CONSTRAINT_MAX_AT_LEAST_HALF = "max_at_least_half"
CONSTRAINT_MAX_AT_MOST_HALF = "max_at_most_half"
CONSTRAINT_MODES = (CONSTRAINT_MAX_AT_LEAST_HALF, CONSTRAINT_MAX_AT_MOST_HALF)

#: The 11 point splits offered in the discrete variant: every multiple
#: of 10 for commodity A, remainder on B.
OPTION_GRID: tuple[tuple[int, int], ...] = tuple(
    (a, 100 - a) for a in range(0, 101, 10)
)

DEFAULT_ROUNDS = 25
DEFAULT_BUDGET = 100.0


@dataclass(frozen=True)
class RoundSpec:
    """One round's per-point returns, as shown to the agent.

    ``options`` is the discrete point grid when the sheet's variant is
    discrete, else None.
    """

    return_a: float
    return_b: float
    options: Optional[tuple[tuple[int, int], ...]] = None


@dataclass(frozen=True)
class TaskSheet:
    """A full session's worth of allocation rounds."""

    domain: str
    variant: str
    seed: int
    budget: float
    constraint_mode: str
    rounds: tuple[RoundSpec, ...]

    def __len__(self) -> int:
        return len(self.rounds)


@dataclass(frozen=True)
class FramedRound:
    """Numeric strings for one round under a framing variant.

    Attributes:
        text_a / text_b: Exactly what the prompt shows for each
            commodity (a per-point return, or a points-per-unit price).
        effective_return_a / effective_return_b: Units obtained per
            point as implied by the *rendered* strings; scoring uses
            these, so the agent and the scorer see the same numbers.
    """

    text_a: str
    text_b: str
    effective_return_a: float
    effective_return_b: float


def _constraint_holds(m: float, n: float, mode: str) -> bool:
    if mode == CONSTRAINT_MAX_AT_LEAST_HALF:
        return max(m, n) >= 0.5
    return max(m, n) <= 0.5


def generate_sheet(
    domain: str,
    variant: str = "baseline",
    seed: int = 0,
    constraint_mode: str = CONSTRAINT_MAX_AT_LEAST_HALF,
    rounds: int = DEFAULT_ROUNDS,
    budget: float = DEFAULT_BUDGET,
) -> TaskSheet:
    """Generate a seeded task sheet.

    Each round draws (M, N) independently uniform on [0.1, 1.0], rounds
    both to 2 decimals, and redraws the pair until the constraint mode
    accepts it.  ``max_at_least_half`` (the default) keeps at least one
    steep return per round; ``max_at_most_half`` restricts both returns
    to [0.1, 0.5].

    Raises:
        UnknownDomain: ``domain`` has no registered templates.
        InvalidParameter: Bad variant, constraint mode, seed, round
            count, or budget.
    """
    if domain not in DOMAINS:
        raise UnknownDomain(f"unknown domain {domain!r}; expected one of {DOMAINS}")
    if variant not in VARIANTS:
        raise InvalidParameter(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if constraint_mode not in CONSTRAINT_MODES:
        raise InvalidParameter(
            f"unknown constraint mode {constraint_mode!r}; "
            f"expected one of {CONSTRAINT_MODES}"
        )
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise InvalidParameter(f"seed must be an integer in [0, 2**64), got {seed!r}")
    if rounds < 1:
        raise InvalidParameter(f"rounds must be >= 1, got {rounds!r}")
    if not budget > 0:
        raise InvalidParameter(f"budget must be positive, got {budget!r}")

    rng = np.random.Generator(np.random.PCG64(seed))
    options = OPTION_GRID if variant == "discrete" else None
    specs = []
    for _ in range(rounds):
        while True:
            m = round(float(rng.uniform(0.1, 1.0)), 2)
            n = round(float(rng.uniform(0.1, 1.0)), 2)
            if _constraint_holds(m, n, constraint_mode):
                break
        specs.append(RoundSpec(return_a=m, return_b=n, options=options))
    return TaskSheet(
        domain=domain,
        variant=variant,
        seed=seed,
        budget=float(budget),
        constraint_mode=constraint_mode,
        rounds=tuple(specs),
    )


def round_to_prompt_parameters(spec: RoundSpec, variant: str) -> FramedRound:
    """Render one round's numbers under a framing variant.

    Baseline and discrete framings show the per-point return directly.
    The reframed variant shows points-per-unit (the reciprocal) rounded
    to two decimals, and the effective return is recomputed from that
    rendered value: what the agent saw is what gets scored.
    """
    if variant not in VARIANTS:
        raise InvalidParameter(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if variant == "price_reframed":
        text_a = f"{1.0 / spec.return_a:.2f}"
        text_b = f"{1.0 / spec.return_b:.2f}"
        return FramedRound(
            text_a=text_a,
            text_b=text_b,
            effective_return_a=1.0 / float(text_a),
            effective_return_b=1.0 / float(text_b),
        )
    return FramedRound(
        text_a=f"{spec.return_a:g}",
        text_b=f"{spec.return_b:g}",
        effective_return_a=spec.return_a,
        effective_return_b=spec.return_b,
    )


def derive_trial_seed(master_seed: int, domain: str, variant: str, trial: int) -> int:
    """A stable per-trial child seed.

    Mixes the master seed with the domain/variant indices and the trial
    number through numpy's SeedSequence, so every trial gets an
    independent stream and the whole run stays reproducible from one
    integer.
    """
    if domain not in DOMAINS:
        raise UnknownDomain(f"unknown domain {domain!r}")
    if variant not in VARIANTS:
        raise InvalidParameter(f"unknown variant {variant!r}")
    if trial < 0:
        raise InvalidParameter(f"trial must be >= 0, got {trial!r}")
    sequence = np.random.SeedSequence(
        [int(master_seed), DOMAINS.index(domain), VARIANTS.index(variant), int(trial)]
    )
    return int(sequence.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# Serialization


def sheet_to_dict(sheet: TaskSheet) -> dict:
    payload: dict = {
        "schema": SHEET_SCHEMA,
        "domain": sheet.domain,
        "variant": sheet.variant,
        "seed": sheet.seed,
        "budget": format_number(sheet.budget),
        "constraint_mode": sheet.constraint_mode,
        "rounds": [],
    }
    for spec in sheet.rounds:
        entry: dict = {
            "M": format_number(spec.return_a),
            "N": format_number(spec.return_b),
        }
        if spec.options is not None:
            entry["options"] = [list(pair) for pair in spec.options]
        payload["rounds"].append(entry)
    return payload


def save_sheet(sheet: TaskSheet, path: str | os.PathLike[str]) -> None:
    """Write a sheet to ``path`` in the versioned JSON layout."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(sheet_to_dict(sheet), fh, indent=2)
        fh.write("\n")


def sheet_from_dict(payload: dict, *, source: str = "<dict>") -> TaskSheet:
    if not isinstance(payload, dict):
        raise ParseError("top level is not an object", source=source)
    schema = payload.get("schema")
    if schema != SHEET_SCHEMA:
        raise SchemaVersionMismatch(
            f"{source}: expected schema {SHEET_SCHEMA!r}, found {schema!r}"
        )
    domain = payload.get("domain")
    variant = payload.get("variant")
    if domain not in DOMAINS:
        raise ParseError(f"unknown domain {domain!r}", source=source, field="domain")
    if variant not in VARIANTS:
        raise ParseError(f"unknown variant {variant!r}", source=source, field="variant")
    constraint_mode = payload.get("constraint_mode", CONSTRAINT_MAX_AT_LEAST_HALF)
    if constraint_mode not in CONSTRAINT_MODES:
        raise ParseError(f"unknown constraint mode {constraint_mode!r}",
                         source=source, field="constraint_mode")
    raw_rounds = payload.get("rounds")
    if not isinstance(raw_rounds, list) or not raw_rounds:
        raise ParseError("missing round list", source=source, field="rounds")
    specs = []
    for idx, entry in enumerate(raw_rounds):
        if not isinstance(entry, dict):
            raise ParseError(f"round {idx} is not an object", source=source)
        try:
            m = float(entry["M"])
            n = float(entry["N"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"round {idx} has bad returns",
                             source=source, field="rounds") from exc
        options = None
        if "options" in entry:
            try:
                options = tuple(
                    (int(pair[0]), int(pair[1])) for pair in entry["options"]
                )
            except (TypeError, ValueError, IndexError) as exc:
                raise ParseError(f"round {idx} has bad options",
                                 source=source, field="options") from exc
        specs.append(RoundSpec(return_a=m, return_b=n, options=options))
    try:
        seed = int(payload.get("seed", 0))
        budget = float(payload.get("budget", DEFAULT_BUDGET))
    except (TypeError, ValueError) as exc:
        raise ParseError("bad seed or budget", source=source) from exc
    return TaskSheet(
        domain=domain,
        variant=variant,
        seed=seed,
        budget=budget,
        constraint_mode=constraint_mode,
        rounds=tuple(specs),
    )


def load_sheet(path: str | os.PathLike[str]) -> TaskSheet:
    """Read a sheet written by :func:`save_sheet`."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", source=str(path)) from exc
    return sheet_from_dict(payload, source=str(path))
