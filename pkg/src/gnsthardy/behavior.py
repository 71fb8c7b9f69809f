"""Scenarios and behaviors: joint tables P(outcomes | settings) for N parties.

Every party has two settings (0 = u, 1 = v) and ``d_i`` outcomes.  Outcome
labels are 1-based at the API and file boundary and 0-based inside tables.
Party indices are 0-based in the library API.

A behavior's table has shape ``(2**N, prod(d))``.  Rows are setting contexts
(party 0 most significant bit), columns are mixed-radix outcome indices
(party 0 most significant digit).  ``Behavior.tensor`` exposes the same data
with one axis per setting followed by one axis per outcome.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InputError, ParseError, SignalingError

BEHAVIOR_FORMAT = "gnst-behavior/1"
DEFAULT_TOL = 1e-9
ARITHMETICS = ("exact", "float")


@dataclass(frozen=True)
class Scenario:
    """N parties, two settings each, ``outcomes[i]`` outcomes for party i."""

    outcomes: tuple[int, ...]

    def __post_init__(self):
        try:
            dims = tuple(int(d) for d in self.outcomes)
        except (TypeError, ValueError) as exc:
            raise InputError(f"outcome counts must be integers, got {self.outcomes!r}") from exc
        if len(dims) < 2:
            raise InputError(f"need at least 2 parties, got {len(dims)}")
        if any(d < 2 for d in dims):
            raise InputError(f"every party needs at least 2 outcomes, got {dims}")
        object.__setattr__(self, "outcomes", dims)

    @classmethod
    def uniform(cls, num_parties: int, d: int) -> Scenario:
        return cls((d,) * num_parties)

    @property
    def num_parties(self) -> int:
        return len(self.outcomes)

    @property
    def num_contexts(self) -> int:
        return 2 ** self.num_parties

    @property
    def num_outcomes(self) -> int:
        return math.prod(self.outcomes)

    @property
    def size(self) -> int:
        return self.num_contexts * self.num_outcomes

    @property
    def tensor_shape(self) -> tuple[int, ...]:
        return (2,) * self.num_parties + self.outcomes

    def contexts(self) -> Iterable[tuple[int, ...]]:
        return itertools.product((0, 1), repeat=self.num_parties)

    def outcome_assignments(self) -> Iterable[tuple[int, ...]]:
        """All outcome tuples, 1-based, in outcome_index order."""
        return itertools.product(*(range(1, d + 1) for d in self.outcomes))


def _check_assignment(scenario: Scenario, settings, outcomes) -> tuple[tuple[int, ...], tuple[int, ...]]:
    n = scenario.num_parties
    settings = tuple(settings)
    outcomes = tuple(outcomes)
    if len(settings) != n:
        raise InputError(f"settings has length {len(settings)}, scenario has {n} parties")
    if len(outcomes) != n:
        raise InputError(f"outcomes has length {len(outcomes)}, scenario has {n} parties")
    for i, s in enumerate(settings):
        if s not in (0, 1):
            raise InputError(f"setting of party {i} must be 0 (u) or 1 (v), got {s!r}")
    for i, (o, d) in enumerate(zip(outcomes, scenario.outcomes)):
        if not isinstance(o, (int, np.integer)) or not 1 <= o <= d:
            raise InputError(f"outcome of party {i} must be in 1..{d}, got {o!r}")
    return settings, outcomes


def context_index(settings: Sequence[int]) -> int:
    idx = 0
    for s in settings:
        idx = 2 * idx + s
    return idx


def outcome_index(scenario: Scenario, outcomes: Sequence[int]) -> int:
    """Mixed-radix index of 1-based outcomes, party 0 most significant."""
    idx = 0
    for o, d in zip(outcomes, scenario.outcomes):
        idx = idx * d + (o - 1)
    return idx


def event_index(scenario: Scenario, settings: Sequence[int], outcomes: Sequence[int]) -> int:
    """Flat table position of the event (outcomes | settings).

    >>> event_index(Scenario((2, 2)), (1, 0), (2, 1))
    10
    """
    settings, outcomes = _check_assignment(scenario, settings, outcomes)
    return context_index(settings) * scenario.num_outcomes + outcome_index(scenario, outcomes)


def event_from_index(scenario: Scenario, flat: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Inverse of :func:`event_index`."""
    if not 0 <= flat < scenario.size:
        raise InputError(f"flat index {flat} out of range for table of size {scenario.size}")
    ctx, out = divmod(flat, scenario.num_outcomes)
    settings = tuple(int(b) for b in format(ctx, f"0{scenario.num_parties}b"))
    outcomes = []
    for d in reversed(scenario.outcomes):
        out, r = divmod(out, d)
        outcomes.append(r + 1)
    return settings, tuple(reversed(outcomes))


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (float, np.floating)):
        # exact binary value; callers wanting 1/3 should pass Fraction(1, 3)
        return Fraction(float(x))
    return Fraction(x)


@dataclass(frozen=True, eq=False)
class Behavior:
    """Joint conditional probability table.

    ``table`` is coerced to a read-only array: ``object`` dtype holding
    ``Fraction`` in exact mode, ``float64`` in float mode.
    """

    scenario: Scenario
    table: np.ndarray
    arithmetic: str = "exact"

    def __post_init__(self):
        if self.arithmetic not in ARITHMETICS:
            raise InputError(f"arithmetic must be one of {ARITHMETICS}, got {self.arithmetic!r}")
        sc = self.scenario
        arr = np.asarray(self.table, dtype=object if self.arithmetic == "exact" else float)
        if arr.size != sc.size:
            raise InputError(f"table length mismatch: expected {sc.size} entries, got {arr.size}")
        arr = arr.reshape(sc.num_contexts, sc.num_outcomes)
        if self.arithmetic == "exact":
            arr = np.vectorize(_as_fraction, otypes=[object])(arr)
        else:
            arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "table", arr)

    @classmethod
    def from_function(cls, scenario: Scenario, fn: Callable[[tuple, tuple], object],
                      arithmetic: str = "exact") -> Behavior:
        """Build from ``fn(settings, outcomes)`` with 1-based outcomes."""
        rows = [[fn(s, o) for o in scenario.outcome_assignments()] for s in scenario.contexts()]
        return cls(scenario, np.array(rows, dtype=object if arithmetic == "exact" else float), arithmetic)

    @classmethod
    def from_tensor(cls, scenario: Scenario, tensor, arithmetic: str = "exact") -> Behavior:
        return cls(scenario, np.asarray(tensor).reshape(scenario.num_contexts, scenario.num_outcomes), arithmetic)

    @property
    def tensor(self) -> np.ndarray:
        return self.table.reshape(self.scenario.tensor_shape)

    @property
    def flat(self) -> np.ndarray:
        return self.table.reshape(-1)

    def prob(self, settings: Sequence[int], outcomes: Sequence[int]):
        return self.flat[event_index(self.scenario, settings, outcomes)]

    def to_float(self) -> Behavior:
        if self.arithmetic == "float":
            return self
        return Behavior(self.scenario, self.table.astype(float), "float")

    def to_exact(self) -> Behavior:
        if self.arithmetic == "exact":
            return self
        return Behavior(self.scenario, self.table.astype(object), "exact")

    def __eq__(self, other):
        if not isinstance(other, Behavior):
            return NotImplemented
        return (self.scenario == other.scenario and self.arithmetic == other.arithmetic
                and bool(np.all(self.table == other.table)))

    def __repr__(self):
        return f"Behavior(outcomes={self.scenario.outcomes}, arithmetic={self.arithmetic!r})"


def uniform_behavior(scenario: Scenario, arithmetic: str = "exact") -> Behavior:
    p = Fraction(1, scenario.num_outcomes)
    return Behavior.from_function(scenario, lambda s, o: p, arithmetic)


def deterministic_behavior(scenario: Scenario, strategy: Callable[[int, int], int],
                           arithmetic: str = "exact") -> Behavior:
    """Local deterministic behavior; ``strategy(party, setting)`` returns a 1-based outcome."""
    def fn(s, o):
        return int(all(o[i] == strategy(i, s[i]) for i in range(len(s))))
    return Behavior.from_function(scenario, fn, arithmetic)


def mixture(behaviors: Sequence[Behavior], weights: Sequence) -> Behavior:
    """Convex combination; arithmetic follows the first behavior."""
    if len(behaviors) != len(weights) or not behaviors:
        raise InputError("mixture needs matching, nonempty behaviors and weights")
    sc, arith = behaviors[0].scenario, behaviors[0].arithmetic
    if any(b.scenario != sc for b in behaviors):
        raise InputError("mixture components must share a scenario")
    if arith == "exact":
        weights = [_as_fraction(w) for w in weights]
        total = sum(w * b.to_exact().table for w, b in zip(weights, behaviors))
    else:
        total = sum(float(w) * b.to_float().table for w, b in zip(weights, behaviors))
    return Behavior(sc, total, arith)


@dataclass
class ValidationReport:
    nonneg_ok: bool
    normalization_residual: object
    ns_residual: object
    violations: list[tuple[str, object]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.nonneg_ok and not self.violations


def _ns_differences(b: Behavior):
    """Yield (party, difference array) with difference = marginal(s_i=0) - marginal(s_i=1).

    The marginal sums out party i's outcome; the array is indexed by the other
    parties' settings then the other parties' outcomes.
    """
    n = b.scenario.num_parties
    t = b.tensor
    for i in range(n):
        summed = t.sum(axis=n + i)
        diff = np.take(summed, 0, axis=i) - np.take(summed, 1, axis=i)
        yield i, diff


def validate_behavior(b: Behavior, tol: float | None = None) -> ValidationReport:
    """Check nonnegativity, per-context normalization and no-signaling.

    Exact behaviors are checked with zero tolerance regardless of ``tol``.
    """
    if b.arithmetic == "exact":
        tol = 0
    elif tol is None:
        tol = DEFAULT_TOL
    sc = b.scenario
    n = sc.num_parties
    violations = []

    table = b.table
    neg = np.argwhere(table < 0)
    for ctx, out in neg:
        violations.append((f"nonneg[context={ctx},outcome={out}]", -table[ctx, out]))

    norm_dev = [abs(row.sum() - 1) for row in table]
    norm_res = max(norm_dev)
    for ctx, dev in enumerate(norm_dev):
        if dev > tol:
            violations.append((f"normalization[context={ctx}]", dev))

    ns_res = 0 * norm_res
    for i, diff in _ns_differences(b):
        mags = np.abs(diff)
        worst = mags.max()
        if worst > ns_res:
            ns_res = worst
        for pos in np.argwhere(mags > tol):
            others_s = tuple(int(x) for x in pos[: n - 1])
            others_o = tuple(int(x) + 1 for x in pos[n - 1:])
            violations.append((f"no-signaling[party={i},settings={others_s},outcomes={others_o}]",
                               mags[tuple(pos)]))

    return ValidationReport(nonneg_ok=len(neg) == 0, normalization_residual=norm_res,
                            ns_residual=ns_res, violations=violations)


def marginalize(b: Behavior, parties: Sequence[int], settings: Sequence[int],
                tol: float | None = None) -> np.ndarray:
    """Marginal table over ``parties`` (in the given order) at ``settings``.

    Result axis k ranges over the 0-based outcomes of ``parties[k]``.  Raises
    :class:`SignalingError` when the marginal depends on the complement's
    settings by more than ``tol``.
    """
    sc = b.scenario
    n = sc.num_parties
    parties = [int(p) for p in parties]
    if len(set(parties)) != len(parties) or any(not 0 <= p < n for p in parties):
        raise InputError(f"invalid party subset {parties} for {n} parties")
    if len(settings) != len(parties) or any(s not in (0, 1) for s in settings):
        raise InputError(f"settings {tuple(settings)} do not match parties {parties}")
    report = validate_behavior(b, tol)
    tol = 0 if b.arithmetic == "exact" else (DEFAULT_TOL if tol is None else tol)
    if report.ns_residual > tol:
        raise SignalingError(f"marginal ill-defined: no-signaling residual {report.ns_residual} exceeds {tol}")

    rest = [p for p in range(n) if p not in parties]
    t = b.tensor
    candidates = []
    for rest_settings in itertools.product((0, 1), repeat=len(rest)):
        full = [0] * n
        for p, s in zip(parties, settings):
            full[p] = s
        for p, s in zip(rest, rest_settings):
            full[p] = s
        block = t[tuple(full)]  # outcome axes, party order
        block = block.sum(axis=tuple(rest)) if rest else block
        # block axes follow ascending party order; reorder to the requested order
        ascending = sorted(parties)
        block = np.transpose(block, [ascending.index(p) for p in parties])
        candidates.append(block)
    first = candidates[0]
    for other in candidates[1:]:
        dev = np.abs(other - first).max()
        assert dev <= tol, f"marginal depends on complement settings (deviation {dev})"
    return first


def relabel_parties(b: Behavior, perm: Sequence[int]) -> Behavior:
    """Move party ``i`` to position ``perm[i]``.

    Requires ``d[perm[i]] == d[i]`` so that the scenario is unchanged.
    """
    n = b.scenario.num_parties
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(n)):
        raise InputError(f"{perm} is not a permutation of 0..{n - 1}")
    dims = b.scenario.outcomes
    if any(dims[perm[i]] != dims[i] for i in range(n)):
        raise InputError(f"permutation {perm} maps between parties with different outcome counts {dims}")
    inv = [0] * n
    for i, p in enumerate(perm):
        inv[p] = i
    axes = inv + [n + k for k in inv]
    return Behavior.from_tensor(b.scenario, np.transpose(b.tensor, axes), b.arithmetic)


# --- file format -----------------------------------------------------------

def _fraction_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def behavior_to_doc(b: Behavior) -> dict:
    if b.arithmetic == "exact":
        contexts = [[_fraction_str(x) for x in row] for row in b.table]
    else:
        contexts = [[float(x) for x in row] for row in b.table]
    return {"format": BEHAVIOR_FORMAT, "parties": b.scenario.num_parties,
            "outcomes": list(b.scenario.outcomes), "arithmetic": b.arithmetic,
            "contexts": contexts}


def serialize_behavior(b: Behavior) -> str:
    return json.dumps(behavior_to_doc(b))


def behavior_from_doc(doc) -> Behavior:
    if not isinstance(doc, dict):
        raise ParseError("behavior document must be a JSON object")
    if doc.get("format") != BEHAVIOR_FORMAT:
        raise ParseError(f"expected format {BEHAVIOR_FORMAT!r}, got {doc.get('format')!r}", "format")
    outcomes = doc.get("outcomes")
    if not isinstance(outcomes, list) or not all(isinstance(d, int) for d in outcomes):
        raise ParseError("outcomes must be a list of integers", "outcomes")
    try:
        scenario = Scenario(tuple(outcomes))
    except InputError as exc:
        raise ParseError(str(exc), "outcomes") from exc
    if doc.get("parties") != scenario.num_parties:
        raise ParseError(f"parties={doc.get('parties')!r} disagrees with {len(outcomes)} outcome counts", "parties")
    arith = doc.get("arithmetic")
    if arith not in ARITHMETICS:
        raise ParseError(f"arithmetic must be 'exact' or 'float', got {arith!r}", "arithmetic")
    contexts = doc.get("contexts")
    if not isinstance(contexts, list):
        raise ParseError("contexts must be a list of lists", "contexts")
    total = sum(len(row) if isinstance(row, list) else 1 for row in contexts)
    if total != scenario.size:
        raise ParseError(f"table length mismatch: expected {scenario.size} entries, got {total}", "contexts")
    if len(contexts) != scenario.num_contexts:
        raise ParseError(f"table length mismatch: expected {scenario.num_contexts} contexts, got {len(contexts)}",
                         "contexts")
    rows = []
    for c, row in enumerate(contexts):
        if not isinstance(row, list) or len(row) != scenario.num_outcomes:
            raise ParseError(f"table length mismatch: expected {scenario.num_outcomes} entries",
                             f"contexts[{c}]")
        parsed = []
        for k, entry in enumerate(row):
            loc = f"contexts[{c}][{k}]"
            if arith == "exact":
                if not isinstance(entry, str):
                    raise ParseError(f"exact entries must be strings 'a/b', got {entry!r}", loc)
                try:
                    val = Fraction(entry)
                except (ValueError, ZeroDivisionError) as exc:
                    raise ParseError(f"bad rational {entry!r}", loc) from exc
            else:
                if isinstance(entry, bool) or not isinstance(entry, (int, float)):
                    raise ParseError(f"float entries must be numbers, got {entry!r}", loc)
                val = float(entry)
                if not math.isfinite(val):
                    raise ParseError(f"non-finite entry {entry!r}", loc)
            if val < 0:
                raise ParseError(f"negative probability {entry!r}", loc)
            parsed.append(val)
        rows.append(parsed)
    return Behavior(scenario, np.array(rows, dtype=object if arith == "exact" else float), arith)


def parse_behavior(text: str) -> Behavior:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno} column {exc.colno}") from exc
    return behavior_from_doc(doc)
