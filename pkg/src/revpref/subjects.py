"""Subjects: prompt construction, reply parsing, and agent adapters.

The prompt protocol mirrors the chat structure used for the allocation
tasks: a system message assigning the human-decision-maker role, an
assistant message holding the task background, three comprehension
questions (logged, never scored), then the 25 decision questions in
order.  Template texts are reproduced verbatim, idiosyncrasies included,
since the exact wording is part of the protocol under test.

Agents are anything with a ``complete(messages, temperature) -> str``
method: a remote chat endpoint, or one of the synthetic subjects used
for calibration and power analysis.  Synthetic subjects read the same
question text a remote model would see and answer in plain English, so
they exercise the full prompt-and-parse path.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass
from typing import Optional, Protocol, Sequence

import httpx
import numpy as np

from .errors import (
    EndpointError,
    InvalidParameter,
    TransientEndpointError,
    UnknownDomain,
)
from .tasks import (
    DOMAINS,
    TaskSheet,
    VARIANTS,
    round_to_prompt_parameters,
)

STATUS_VALID = "valid"
STATUS_REFUSAL = "refusal"
STATUS_MALFORMED = "malformed"

POINT_SUM_TOL = 1e-6

ENV_API_KEY = "REVPREF_API_KEY"

# ---------------------------------------------------------------------------
# Templates

SYSTEM_TEXT = (
    "I want to you act as a human decision maker. You will be given "
    "{rounds} rounds of decision-making tasks, and will be responsible for "
    "making decisions. You should use your best judgment to come up with "
    "solutions that you like most. My first request is 'You must provide "
    "your answers in every round.' If you do not provide an answer, I will "
    "assume that you make a random choice."
)

DEMOGRAPHIC_TEMPLATE = "You are a {age}-year-old {gender}."

_ASSISTANT_TEXTS = {
    "risk": (
        "In every round, the decision maker has 100 points that need to be "
        "invested between A asset and asset B. The decision maker will get a "
        "return from one of the rounds randomly. In the selected paying "
        "round, the decision maker has a 50% chance to get the return from "
        "Asset A or the other 50% chance to get the return from Asset B. "
        "First please only tell me the number of points for investing Asset "
        "A, then please only tell me the number of points for investing "
        "Asset B."
    ),
    "time": (
        "In every round, the decision maker has 100 points that need to be "
        "invested between today and one month later. The decision maker will "
        "get dollars today from the points invested today and will get a "
        "check that can be cashed in one month later from the points "
        "invested one month later. Please first only tell me the number of "
        "points for investing today, then only tell me the number of points "
        "for investing one month later."
    ),
    "social": (
        "In every round, the decision maker is randomly matched with a new "
        "anonymous subject and there is no feedback across rounds. The "
        "decision maker has 100 points that need to be allocated between "
        "him/herself and the other one. The decision maker will get a return "
        "from the points allocated to him/herself and the other one will get "
        "a return from the points allocated. First please only tell me the "
        "number of points for the self of decision-maker, then please only "
        "tell me the number of points for the other"
    ),
    "food": (
        "In every round, the decision maker has 100 points that need to be "
        "spent between meat and tomatoes. The decision maker will get the "
        "amount of meat and tomatoes he/she spends on. First please only "
        "tell me the number of points for meat, then please only tell me the "
        "number of points for tomatoes."
    ),
}

# The clause carrying the round's numbers, completed per variant below.
_BASELINE_CLAUSES = {
    "risk": (
        "investing every 1 point for Asset A returns {M} dollars and "
        "investing every 1 point for Asset B returns {N} dollars"
    ),
    "time": (
        "investing every 1 point for today returns {M} dollars today and "
        "investing every 1 point for one month later returns an {N} dollars "
        "check that can be cashed one month later"
    ),
    "social": (
        "allocating every 1 point for yourself returns {M} dollars for "
        "yourself and allocating every 1 point for the other one returns "
        "{N} dollars for him/her"
    ),
    "food": (
        "spending every 1 point will get {M} kg meat and spending every 1 "
        "point will get {N} kg tomatoes"
    ),
}

# Points-per-unit framing of the same budgets.
_REFRAMED_CLAUSES = {
    "risk": (
        "investing {M} points for Asset A returns 1 dollar and investing "
        "{N} points for Asset B returns 1 dollar"
    ),
    "time": (
        "investing {M} points for today returns 1 dollar today and "
        "investing {N} points for one month later returns a 1 dollar check "
        "that can be cashed one month later"
    ),
    "social": (
        "allocating {M} points for yourself returns 1 dollar for yourself "
        "and allocating {N} points for the other one returns 1 dollar for "
        "him/her"
    ),
    "food": (
        "spending {M} points will get 1 kg meat and spending {N} points "
        "will get 1 kg tomatoes"
    ),
}

COMPREHENSION_QUESTIONS = {
    "risk": (
        "What is the probability you will get a return from asset A?",
        "If you invest 90 points to Asset A, and 10 points to Asset B. In "
        "this round, investing every 1 point for Asset A returns 0.8 "
        "dollars, investing every 1 point for Asset B return 0.2 dollars. "
        "What return will you get?",
        "If you invest 90 points to Asset A, and 10 points to Asset B. In "
        "this round, investing every 1 point for Asset A returns 0.8 "
        "dollars, investing every 1 point for Asset B returns 0.2 dollars. "
        "Is there a chance to get 72 dollars?",
    ),
    "time": (
        "If you invest 90 points to today, and 10 points to one month "
        "later. In this round, investing every 1 point for today returns "
        "0.8 dollars cash today, investing every 1 point for one month "
        "later returns 0.2 dollars check which can be cashed one month "
        "later. What return will you get?",
        "In this round, investing every 1 point for today returns 0.8 "
        "dollars cash today, investing every 1 point for one month later "
        "returns 0.2 dollars check which can be cashed one month later. "
        "What is your allocation? Why?",
        "If you invest 90 points to today, and 10 points to one month "
        "later. In this round, investing every 1 point for today returns "
        "0.8 dollars cash today, investing every 1 point for one month "
        "later return 0.2 dollars check which can be cashed one month "
        "later. What time can you get just the 2 dollars cash?",
    ),
    "social": (
        "If you invest 90 points to yourself, and 10 points the other. In "
        "this round, investing every 1 point to yourself return 0.8 dollars "
        "for yourself, investing every 1 point to the other return 0.2 "
        "dollars for the other. What return will you get?",
        "If you invest 90 points to yourself, and 10 points to the other. "
        "In this round, investing every 1 point for yourself return 0.8 "
        "dollars for yourself, investing every 1 point for the other return "
        "0.2 dollars for the other. Who will get just 2 dollars?",
        "In this round, investing every 1 point for Asset A return 0.8 "
        "dollars, investing every 1 point for Asset B return 0.2 dollars. "
        "Will you invest to the other? Why?",
    ),
    "food": (
        "What goods can you get from decisions?",
        "If you spend 90 points to meat, and 10 points to tomatoes later. "
        "In this round, spending every 1 point for meat will get 0.8 kg "
        "meat, spending every 1 point for meat will get 0.2 kg tomatoes, "
        "What will you get?",
        "In this round, spending every 1 point for meat will get 0.8 kg "
        "meat, spending every 1 point for meat will get 0.2 kg tomatoes. "
        "What is your allocation? Why?",
    ),
}


def _options_listing(options: Sequence[tuple[int, int]]) -> str:
    rendered = [f"({a}, {b})" for a, b in options]
    return ", ".join(rendered[:-1]) + ", and " + rendered[-1]


@dataclass(frozen=True)
class PromptScript:
    """Everything needed to run and score one trial's conversation.

    ``effective_returns`` holds the per-round units-per-point implied by
    the rendered question text (they differ from the sheet's raw returns
    only under price reframing); ``options`` is the discrete menu or
    None.
    """

    domain: str
    variant: str
    budget: float
    system_text: str
    assistant_text: str
    comprehension_questions: tuple[str, ...]
    decision_questions: tuple[str, ...]
    effective_returns: tuple[tuple[float, float], ...]
    options: Optional[tuple[tuple[int, int], ...]]
    demographic_preamble: Optional[str]
    temperature: float


def build_prompts(
    sheet: TaskSheet,
    domain: Optional[str] = None,
    demographics: Optional[dict] = None,
    temperature: float = 0.0,
) -> PromptScript:
    """Render a sheet into the full conversation script.

    Args:
        sheet: The generated task sheet.
        domain: Override for the sheet's domain; rarely needed.
        demographics: Optional {"age": ..., "gender": ...} mapping; when
            given, a one-sentence preamble is prepended to the system
            text and recorded verbatim.
        temperature: Sampling temperature forwarded to the agent.

    Raises:
        UnknownDomain: No templates exist for the domain.
        InvalidParameter: Temperature outside [0, 1].
    """
    domain = domain or sheet.domain
    if domain not in DOMAINS:
        raise UnknownDomain(f"no templates for domain {domain!r}")
    if not 0.0 <= temperature <= 1.0:
        raise InvalidParameter(f"temperature {temperature!r} outside [0, 1]")

    preamble = None
    system_text = SYSTEM_TEXT.format(rounds=len(sheet.rounds))
    if demographics is not None:
        try:
            preamble = DEMOGRAPHIC_TEMPLATE.format(**demographics)
        except KeyError as exc:
            raise InvalidParameter(f"demographics missing key {exc}") from exc
        system_text = f"{preamble} {system_text}"

    questions = []
    effective = []
    options = None
    for spec in sheet.rounds:
        framed = round_to_prompt_parameters(spec, sheet.variant)
        effective.append((framed.effective_return_a, framed.effective_return_b))
        if sheet.variant == "price_reframed":
            clause = _REFRAMED_CLAUSES[domain].format(M=framed.text_a,
                                                      N=framed.text_b)
            questions.append(f"In this round, {clause}. What is your allocation?")
        elif sheet.variant == "discrete":
            options = spec.options
            clause = _BASELINE_CLAUSES[domain].format(M=framed.text_a,
                                                      N=framed.text_b)
            questions.append(
                f"In this round, {clause}. There are {len(spec.options)} "
                f"options, which are {_options_listing(spec.options)}. "
                "Please only tell me your best option in every round."
            )
        else:
            clause = _BASELINE_CLAUSES[domain].format(M=framed.text_a,
                                                      N=framed.text_b)
            questions.append(f"In this round, {clause}. What is your allocation?")

    return PromptScript(
        domain=domain,
        variant=sheet.variant,
        budget=sheet.budget,
        system_text=system_text,
        assistant_text=_ASSISTANT_TEXTS[domain],
        comprehension_questions=COMPREHENSION_QUESTIONS[domain],
        decision_questions=tuple(questions),
        effective_returns=tuple(effective),
        options=options,
        demographic_preamble=preamble,
        temperature=float(temperature),
    )


# ---------------------------------------------------------------------------
# Reply parsing

@dataclass(frozen=True)
class ParsedReply:
    """Classification of one raw reply.

    status is ``valid`` (two usable point numbers), ``refusal`` (no
    numbers at all), or ``malformed`` (numbers present but unusable);
    ``points`` is set only when valid.
    """

    status: str
    points: Optional[tuple[float, float]]
    raw_text: str


_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?(?:[eE][+-]?\d+)?")


def _extract_numbers(text: str) -> list[float]:
    """All numeric literals in order, skipping percentages."""
    values = []
    for match in _NUMBER_RE.finditer(text):
        end = match.end()
        if end < len(text) and text[end] == "%":
            continue
        values.append(float(match.group()))
    return values


def parse_reply(
    raw_text: str,
    budget: float = 100.0,
    variant: str = "baseline",
    options: Optional[Sequence[tuple[int, int]]] = None,
) -> ParsedReply:
    """Classify a reply and extract the point allocation.

    Continuous variants take the first two numeric literals as the
    points for commodities A and B; the pair is valid when both are
    non-negative and they sum to the budget within 1e-6.  The discrete
    variant scans consecutive number pairs for one that matches the
    option menu.  A reply with no numeric content at all (typically a
    refusal to answer) is classified ``refusal``; anything else that
    fails the checks is ``malformed``.  Percent-suffixed numbers are
    never treated as allocations.
    """
    if variant not in VARIANTS:
        raise InvalidParameter(f"unknown variant {variant!r}")
    numbers = _extract_numbers(raw_text)
    if not numbers:
        return ParsedReply(status=STATUS_REFUSAL, points=None, raw_text=raw_text)

    if variant == "discrete":
        menu = options if options is not None else ()
        for a, b in zip(numbers, numbers[1:]):
            for opt_a, opt_b in menu:
                if abs(a - opt_a) <= POINT_SUM_TOL and abs(b - opt_b) <= POINT_SUM_TOL:
                    return ParsedReply(status=STATUS_VALID,
                                       points=(float(opt_a), float(opt_b)),
                                       raw_text=raw_text)
        return ParsedReply(status=STATUS_MALFORMED, points=None, raw_text=raw_text)

    if len(numbers) < 2:
        return ParsedReply(status=STATUS_MALFORMED, points=None, raw_text=raw_text)
    a, b = numbers[0], numbers[1]
    if a < 0.0 or b < 0.0 or abs((a + b) - budget) > POINT_SUM_TOL:
        return ParsedReply(status=STATUS_MALFORMED, points=None, raw_text=raw_text)
    return ParsedReply(status=STATUS_VALID, points=(a, b), raw_text=raw_text)


# ---------------------------------------------------------------------------
# Agent protocol and the HTTP client

class AgentEndpoint(Protocol):
    """Anything that can answer one more message in a conversation."""

    def complete(self, messages: list[dict], temperature: float) -> str:
        """Return the assistant reply to ``messages``."""
        ...


class HttpChatEndpoint:
    """Chat-completions client for an OpenAI-style JSON endpoint.

    Sends {model, temperature, messages} and reads the first choice's
    message content.  Rate limits (429) and server errors (5xx) raise
    :class:`TransientEndpointError` carrying any Retry-After hint so the
    harness can back off; other failures are permanent.

    The bearer credential is read from the ``REVPREF_API_KEY``
    environment variable at request time and never appears in logs,
    records, or error messages.
    """

    def __init__(
        self,
        url: str,
        model: str,
        timeout: float = 60.0,
        transport: Optional[httpx.BaseTransport] = None,
    ) -> None:
        self.url = url
        self.model = model
        self.model_name = model
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def complete(self, messages: list[dict], temperature: float) -> str:
        headers = {}
        api_key = os.environ.get(ENV_API_KEY)
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        payload = {
            "model": self.model,
            "temperature": temperature,
            "messages": messages,
        }
        try:
            response = self._client.post(self.url, json=payload, headers=headers)
        except httpx.HTTPError as exc:
            raise TransientEndpointError(f"transport failure: {exc}") from exc
        if response.status_code == 429 or response.status_code >= 500:
            retry_after = None
            header = response.headers.get("Retry-After")
            if header is not None:
                try:
                    retry_after = float(header)
                except ValueError:
                    retry_after = None
            raise TransientEndpointError(
                f"endpoint returned HTTP {response.status_code}",
                retry_after=retry_after,
            )
        if response.status_code != 200:
            raise EndpointError(f"endpoint returned HTTP {response.status_code}")
        try:
            return response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise EndpointError(f"malformed endpoint response: {exc}") from exc

    def close(self) -> None:
        self._client.close()


# ---------------------------------------------------------------------------
# Synthetic subjects

REFUSAL_TEXT = (
    "As an AI language model, I am not capable of making decisions on my own."
)

_ACK_TEXT = "Understood. I will use my best judgment in every round."

# Per-point returns in the baseline framing ("... returns 0.8 dollars",
# "... will get 0.8 kg meat").
_RETURNS_RE = re.compile(r"(?:returns|will get)\s+(?:an?\s+)?(\d+(?:\.\d+)?)")
# Points-per-unit in the reframed framing ("investing 2.00 points ...").
_POINTS_PER_UNIT_RE = re.compile(
    r"(?:investing|allocating|spending)\s+(\d+(?:\.\d+)?)\s+points"
)
_OPTION_PAIR_RE = re.compile(r"\((\d+(?:\.\d+)?),\s*(\d+(?:\.\d+)?)\)")


@dataclass(frozen=True)
class RoundView:
    """What a synthetic subject gleans from one decision question."""

    return_a: float
    return_b: float
    options: Optional[tuple[tuple[float, float], ...]]


def read_round_from_question(question: str) -> Optional[RoundView]:
    """Recover the round parameters a question text communicates.

    Returns None when the text does not look like a decision question
    (comprehension questions and small talk land here).
    """
    pairs = _OPTION_PAIR_RE.findall(question)
    options = None
    if len(pairs) >= 2:
        options = tuple((float(a), float(b)) for a, b in pairs)
    # Points-per-unit must be checked first: reframed questions also say
    # "returns 1 dollar", which would read as a (1, 1) returns pair.
    per_unit = _POINTS_PER_UNIT_RE.findall(question)
    if len(per_unit) >= 2:
        return RoundView(1.0 / float(per_unit[0]), 1.0 / float(per_unit[1]),
                         options)
    returns = _RETURNS_RE.findall(question)
    if len(returns) >= 2:
        return RoundView(float(returns[0]), float(returns[1]), options)
    return None


def _format_continuous(a: float, b: float) -> str:
    return (f"I allocate {a!r} points to the first option and {b!r} points "
            "to the second option.")


def _format_discrete(a: float, b: float) -> str:
    return f"My best option is ({a:g}, {b:g})."


class SyntheticAgent:
    """Base class for deterministic text-level subjects.

    Subclasses implement :meth:`decide`, mapping a parsed round to a
    points pair.  The base class handles reading the question, picking
    the nearest discrete option when a menu is present, and formatting
    the reply text.
    """

    model_name = "synthetic"

    def decide(self, view: RoundView) -> tuple[float, float]:
        raise NotImplementedError

    def choose_option(self, view: RoundView) -> tuple[float, float]:
        """Discrete-menu choice; default maximizes :meth:`utility`."""
        best = None
        best_value = -math.inf
        for a, b in view.options or ():
            value = self.utility(a * view.return_a, b * view.return_b)
            if value > best_value:
                best_value = value
                best = (a, b)
        assert best is not None
        return best

    def utility(self, units_a: float, units_b: float) -> float:
        raise NotImplementedError(
            f"{type(self).__name__} has no discrete-choice utility"
        )

    def complete(self, messages: list[dict], temperature: float) -> str:
        question = ""
        for message in reversed(messages):
            if message.get("role") == "user":
                question = message.get("content", "")
                break
        view = read_round_from_question(question)
        if view is None:
            return _ACK_TEXT
        if view.options is not None:
            a, b = self.choose_option(view)
            return _format_discrete(a, b)
        a, b = self.decide(view)
        return _format_continuous(a, b)


class CobbDouglasAgent(SyntheticAgent):
    """Spends a fixed budget share on each commodity.

    With utility x_A^alpha * x_B^(1-alpha), the optimal expenditure
    share on A is alpha regardless of prices, so the points answer is
    constant across rounds.
    """

    def __init__(self, alpha: float, budget: float = 100.0) -> None:
        if not 0.0 < alpha < 1.0:
            raise InvalidParameter(f"alpha must be in (0, 1), got {alpha!r}")
        self.alpha = alpha
        self.budget = budget
        self.model_name = f"synthetic:cobb_douglas({alpha:g})"

    def decide(self, view: RoundView) -> tuple[float, float]:
        a = self.alpha * self.budget
        return a, self.budget - a

    def utility(self, units_a: float, units_b: float) -> float:
        if units_a <= 0.0 or units_b <= 0.0:
            return -math.inf
        return self.alpha * math.log(units_a) + (1.0 - self.alpha) * math.log(units_b)


class CESAgent(SyntheticAgent):
    """Maximizes CES utility (alpha*x_A^rho + (1-alpha)*x_B^rho)^(1/rho).

    rho < 1 and rho != 0; rho = -inf is the Leontief limit, which
    equalizes the two unit quantities.
    """

    def __init__(self, rho: float, alpha: float, budget: float = 100.0) -> None:
        if not 0.0 < alpha < 1.0:
            raise InvalidParameter(f"alpha must be in (0, 1), got {alpha!r}")
        if math.isnan(rho) or rho >= 1.0 or rho == 0.0:
            raise InvalidParameter(
                f"rho must be < 1 and nonzero (or -inf), got {rho!r}"
            )
        self.rho = rho
        self.alpha = alpha
        self.budget = budget
        self.model_name = f"synthetic:ces({rho:g},{alpha:g})"

    def decide(self, view: RoundView) -> tuple[float, float]:
        price_a = 1.0 / view.return_a
        price_b = 1.0 / view.return_b
        if math.isinf(self.rho):
            ratio = 1.0  # Leontief: x_A = x_B
        else:
            base = (price_a * (1.0 - self.alpha)) / (price_b * self.alpha)
            ratio = base ** (1.0 / (self.rho - 1.0))
        # Points on A out of the budget; the ratio form keeps this
        # stable when ratio is extreme.
        points_a = self.budget / (1.0 + price_b / (price_a * ratio))
        points_a = min(max(points_a, 0.0), self.budget)
        return points_a, self.budget - points_a

    def utility(self, units_a: float, units_b: float) -> float:
        if math.isinf(self.rho):
            return min(units_a, units_b)
        if self.rho < 0.0 and (units_a <= 0.0 or units_b <= 0.0):
            return 0.0  # x^rho diverges at the corner; CES limit is 0
        inner = (self.alpha * units_a**self.rho
                 + (1.0 - self.alpha) * units_b**self.rho)
        return inner ** (1.0 / self.rho)


class RandomUniformAgent(SyntheticAgent):
    """Points on A drawn Uniform[0, 100]; the Bronars power benchmark."""

    def __init__(self, seed: int = 0, budget: float = 100.0) -> None:
        self.budget = budget
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self.model_name = f"synthetic:random_uniform({seed})"

    def decide(self, view: RoundView) -> tuple[float, float]:
        a = float(self._rng.uniform(0.0, self.budget))
        return a, self.budget - a

    def choose_option(self, view: RoundView) -> tuple[float, float]:
        options = view.options or ()
        return options[int(self._rng.integers(0, len(options)))]


class CornerMaxReturnAgent(SyntheticAgent):
    """Puts every point on the commodity with the higher return (ties: A)."""

    model_name = "synthetic:corner_max_return"

    def __init__(self, budget: float = 100.0) -> None:
        self.budget = budget

    def decide(self, view: RoundView) -> tuple[float, float]:
        if view.return_a >= view.return_b:
            return self.budget, 0.0
        return 0.0, self.budget

    def utility(self, units_a: float, units_b: float) -> float:
        return units_a + units_b


class TrembleAgent(SyntheticAgent):
    """Wraps another agent, replacing each answer with a uniform-random
    one with probability p."""

    def __init__(self, inner: SyntheticAgent, p: float, seed: int = 0) -> None:
        if not 0.0 <= p <= 1.0:
            raise InvalidParameter(f"p must be in [0, 1], got {p!r}")
        self.inner = inner
        self.p = p
        self._rng = np.random.Generator(np.random.PCG64(seed))
        self._noise = RandomUniformAgent(seed=seed + 1)
        self.model_name = f"tremble({inner.model_name},{p:g})"

    def decide(self, view: RoundView) -> tuple[float, float]:
        if float(self._rng.uniform()) < self.p:
            return self._noise.decide(view)
        return self.inner.decide(view)

    def choose_option(self, view: RoundView) -> tuple[float, float]:
        if float(self._rng.uniform()) < self.p:
            return self._noise.choose_option(view)
        return self.inner.choose_option(view)


class RefusingAgent(SyntheticAgent):
    """Wraps another agent but refuses on scheduled decision rounds.

    ``refuse_rounds`` indexes decision questions in the order this agent
    sees them (comprehension questions do not advance the counter only
    when they fail to parse as rounds; run trials without comprehension
    for exact accounting).
    """

    def __init__(self, inner: SyntheticAgent, refuse_rounds: Sequence[int],
                 text: str = REFUSAL_TEXT) -> None:
        self.inner = inner
        self.refuse_rounds = frozenset(int(r) for r in refuse_rounds)
        self.text = text
        self._seen = 0
        self.model_name = f"refusing({inner.model_name})"

    def complete(self, messages: list[dict], temperature: float) -> str:
        question = ""
        for message in reversed(messages):
            if message.get("role") == "user":
                question = message.get("content", "")
                break
        if read_round_from_question(question) is None:
            return _ACK_TEXT
        index = self._seen
        self._seen += 1
        if index in self.refuse_rounds:
            return self.text
        return self.inner.complete(messages, temperature)


def synthetic_agent(kind: str, seed: int = 0) -> SyntheticAgent:
    """Build a synthetic subject from a spec string.

    Accepted forms: ``cobb_douglas:ALPHA``, ``ces:RHO,ALPHA`` (RHO may
    be ``-inf``), ``leontief:ALPHA``, ``random_uniform``,
    ``corner_max_return``, and ``tremble:P:INNER_SPEC``.
    """
    name, _, rest = kind.partition(":")
    try:
        if name == "cobb_douglas":
            return CobbDouglasAgent(alpha=float(rest))
        if name == "ces":
            rho_text, alpha_text = rest.split(",")
            return CESAgent(rho=float(rho_text), alpha=float(alpha_text))
        if name == "leontief":
            return CESAgent(rho=-math.inf, alpha=float(rest))
        if name == "random_uniform":
            return RandomUniformAgent(seed=seed)
        if name == "corner_max_return":
            return CornerMaxReturnAgent()
        if name == "tremble":
            p_text, _, inner_spec = rest.partition(":")
            inner = synthetic_agent(inner_spec, seed=seed + 1)
            return TrembleAgent(inner, p=float(p_text), seed=seed)
    except (ValueError, TypeError) as exc:
        raise InvalidParameter(f"bad agent spec {kind!r}: {exc}") from exc
    raise InvalidParameter(f"unknown agent kind {kind!r}")
