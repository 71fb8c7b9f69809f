"""Hardy-type constraint systems: one event with positive probability plus
a list of events that must have probability zero.

Three families are generated for a scenario with ``d_i`` outcomes per party:

GeneralizedQudit
    positive: (1..1 | u..u)
    Z1: for each party r and outcome c < d_r: (1..c..1 | u..v_r..u)
    Z2: for each i != j (j fixed): v at i and j, outcomes d_i and d_j there, 1 elsewhere
ChenQubit
    GeneralizedQudit restricted to d_i = 2.
Conventional
    same positive event and Z1, Z2 replaced by (d_1..d_N | v..v).
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .behavior import DEFAULT_TOL, Behavior, Scenario, event_index
from .errors import FamilyError, InputError, ParseError

ARGUMENT_FORMAT = "gnst-argument/1"


class HardyFamily(enum.Enum):
    GENERALIZED_QUDIT = "GeneralizedQudit"
    CHEN_QUBIT = "ChenQubit"
    CONVENTIONAL = "Conventional"

    @classmethod
    def parse(cls, name: str) -> HardyFamily:
        aliases = {"general": cls.GENERALIZED_QUDIT, "generalized": cls.GENERALIZED_QUDIT,
                   "chen": cls.CHEN_QUBIT, "conventional": cls.CONVENTIONAL}
        if name in aliases:
            return aliases[name]
        try:
            return cls(name)
        except ValueError:
            raise FamilyError(f"unknown Hardy family {name!r}") from None


@dataclass(frozen=True)
class JointEvent:
    """(outcomes | settings); outcomes are 1-based."""

    settings: tuple[int, ...]
    outcomes: tuple[int, ...]

    def index(self, scenario: Scenario) -> int:
        return event_index(scenario, self.settings, self.outcomes)

    def __str__(self):
        labels = "".join("uv"[s] for s in self.settings)
        return f"P({','.join(map(str, self.outcomes))}|{labels})"


@dataclass(frozen=True)
class HardyArgument:
    scenario: Scenario
    family: HardyFamily
    fixed_j: int
    positive_event: JointEvent
    zero_events: tuple[JointEvent, ...]

    def __post_init__(self):
        for ev in (self.positive_event, *self.zero_events):
            ev.index(self.scenario)  # validates lengths and ranges
        if len(set(self.zero_events)) != len(self.zero_events):
            raise InputError("zero events must be pairwise distinct")

    @property
    def positive_index(self) -> int:
        return self.positive_event.index(self.scenario)

    @property
    def zero_indices(self) -> list[int]:
        return [ev.index(self.scenario) for ev in self.zero_events]


def build_argument(family: HardyFamily | str, scenario: Scenario, fixed_j: int | None = None) -> HardyArgument:
    """Generate the event system of ``family``; ``fixed_j`` is 0-based and defaults to the last party."""
    if isinstance(family, str):
        family = HardyFamily.parse(family)
    n = scenario.num_parties
    dims = scenario.outcomes
    j = n - 1 if fixed_j is None else int(fixed_j)
    if not 0 <= j < n:
        raise InputError(f"fixed_j must be a party index in 0..{n - 1}, got {fixed_j}")
    if family is HardyFamily.CHEN_QUBIT and any(d != 2 for d in dims):
        raise FamilyError(f"ChenQubit requires two outcomes per party, got {dims}")

    ones = (1,) * n
    positive = JointEvent((0,) * n, ones)
    zeros = []
    for r in range(n):
        settings = tuple(int(k == r) for k in range(n))
        for c in range(1, dims[r]):
            outcomes = tuple(c if k == r else 1 for k in range(n))
            zeros.append(JointEvent(settings, outcomes))
    if family is HardyFamily.CONVENTIONAL:
        zeros.append(JointEvent((1,) * n, dims))
    else:
        for i in range(n):
            if i == j:
                continue
            settings = tuple(int(k in (i, j)) for k in range(n))
            outcomes = tuple(dims[k] if k in (i, j) else 1 for k in range(n))
            zeros.append(JointEvent(settings, outcomes))
    return HardyArgument(scenario, family, j, positive, tuple(zeros))


@dataclass
class ArgumentEvaluation:
    q_value: object
    zero_violations: list[tuple[JointEvent, object]]
    satisfied: bool


def evaluate_argument(arg: HardyArgument, b: Behavior, tol: float | None = None) -> ArgumentEvaluation:
    """Read the Hardy probabilities off ``b``.  Exact behaviors use ``tol = 0``."""
    if b.scenario != arg.scenario:
        raise InputError(f"scenario mismatch: argument {arg.scenario.outcomes}, behavior {b.scenario.outcomes}")
    if b.arithmetic == "exact":
        tol = 0
    elif tol is None:
        tol = DEFAULT_TOL
    flat = b.flat
    q = flat[arg.positive_index]
    violations = [(ev, flat[idx]) for ev, idx in zip(arg.zero_events, arg.zero_indices) if flat[idx] > tol]
    return ArgumentEvaluation(q_value=q, zero_violations=violations, satisfied=bool(q > tol) and not violations)


def argument_to_doc(arg: HardyArgument) -> dict:
    return {"format": ARGUMENT_FORMAT, "family": arg.family.value, "parties": arg.scenario.num_parties,
            "outcomes": list(arg.scenario.outcomes), "fixed_j": arg.fixed_j + 1}


def argument_from_doc(doc) -> HardyArgument:
    if not isinstance(doc, dict) or doc.get("format") != ARGUMENT_FORMAT:
        raise ParseError(f"expected an object with format {ARGUMENT_FORMAT!r}", "format")
    outcomes = doc.get("outcomes")
    if not isinstance(outcomes, list) or not all(isinstance(d, int) for d in outcomes):
        raise ParseError("outcomes must be a list of integers", "outcomes")
    if doc.get("parties") != len(outcomes):
        raise ParseError("parties disagrees with the outcomes list", "parties")
    fixed_j = doc.get("fixed_j", len(outcomes))
    if not isinstance(fixed_j, int):
        raise ParseError("fixed_j must be a 1-based party index", "fixed_j")
    try:
        return build_argument(HardyFamily.parse(doc.get("family", "")), Scenario(tuple(outcomes)), fixed_j - 1)
    except InputError as exc:
        raise ParseError(str(exc)) from exc


def parse_argument(text: str) -> HardyArgument:
    try:
        return argument_from_doc(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}") from exc
