"""Behaviors from pure states and rank-1 projective measurements.

A model holds a unit state vector over the product basis (party 0 most
significant, matching behavior outcome indices) and, per party and setting,
an orthonormal basis stored as a ``(d, d)`` array whose rows are the basis
vectors.  Row ``o - 1`` is the vector for outcome ``o``.

``search_hardy_model`` is a heuristic: random restarts, a penalty-ramped
Powell search over raw frames (re-orthonormalized by QR at every
evaluation), and an SLSQP polish that pins zero-event amplitudes to 0.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .behavior import Behavior, Scenario, validate_behavior
from .errors import GnstError, InputError, ParseError
from .hardy import ArgumentEvaluation, HardyArgument, evaluate_argument

QUANTUM_FORMAT = "gnst-quantum/1"
UNIT_TOL = 1e-10
SEARCH_MAX_DIM = 64
PENALTY_RAMP = (10.0, 100.0, 1000.0, 10000.0)
POWELL_SWEEPS = 8


@dataclass(frozen=True, eq=False)
class QuantumModel:
    state: np.ndarray
    bases: tuple  # bases[party][setting] -> (d, d) complex array, rows orthonormal

    def __post_init__(self):
        bases = []
        for p, pair in enumerate(self.bases):
            if len(pair) != 2:
                raise InputError(f"party {p}: need one basis per setting (2), got {len(pair)}")
            frames = []
            for s, frame in enumerate(pair):
                frame = np.array(frame, dtype=complex)
                if frame.ndim != 2 or frame.shape[0] != frame.shape[1] or frame.shape[0] < 2:
                    raise InputError(f"party {p} setting {s}: basis must be a square d x d array, d >= 2")
                err = np.abs(frame @ frame.conj().T - np.eye(frame.shape[0])).max()
                if err > UNIT_TOL:
                    raise InputError(f"party {p} setting {s}: basis not orthonormal (error {err:.3g})")
                if frames and frame.shape != frames[0].shape:
                    raise InputError(f"party {p}: both settings must use the same local dimension")
                frame.flags.writeable = False
                frames.append(frame)
            bases.append(tuple(frames))
        if len(bases) < 2:
            raise InputError(f"need at least 2 parties, got {len(bases)}")
        state = np.array(self.state, dtype=complex).reshape(-1)
        dims = tuple(pair[0].shape[0] for pair in bases)
        if state.size != math.prod(dims):
            raise InputError(f"state has {state.size} amplitudes, local dimensions {dims} need {math.prod(dims)}")
        if abs(np.linalg.norm(state) - 1) > UNIT_TOL:
            raise InputError(f"state norm {np.linalg.norm(state):.12g} is not 1")
        state.flags.writeable = False
        object.__setattr__(self, "state", state)
        object.__setattr__(self, "bases", tuple(bases))

    @property
    def scenario(self) -> Scenario:
        return Scenario(tuple(pair[0].shape[0] for pair in self.bases))


def computational_basis(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex)


def product_state(dims: Sequence[int], outcomes: Sequence[int]) -> np.ndarray:
    """|o_1, ..., o_N> with 1-based labels."""
    vec = np.zeros(math.prod(dims), dtype=complex)
    vec[np.ravel_multi_index(tuple(o - 1 for o in outcomes), tuple(dims))] = 1
    return vec


def ghz_state(dims: Sequence[int]) -> np.ndarray:
    """Equal superposition of |k, ..., k> for k up to the smallest local dimension."""
    vec = np.zeros(math.prod(dims), dtype=complex)
    m = min(dims)
    for k in range(m):
        vec[np.ravel_multi_index((k,) * len(dims), tuple(dims))] = 1 / math.sqrt(m)
    return vec


def _amplitudes(state: np.ndarray, frames: Sequence[np.ndarray], dims) -> np.ndarray:
    """Amplitudes <b_1 ... b_N | state> for every outcome tuple, flattened."""
    t = state.reshape(dims)
    for p, frame in enumerate(frames):
        t = np.moveaxis(np.tensordot(frame.conj(), t, axes=([1], [p])), 0, p)
    return t.reshape(-1)


def _born_table(state, bases, dims) -> np.ndarray:
    n = len(dims)
    rows = []
    for ctx in range(2 ** n):
        settings = [(ctx >> (n - 1 - p)) & 1 for p in range(n)]
        amp = _amplitudes(state, [bases[p][settings[p]] for p in range(n)], dims)
        rows.append(np.abs(amp) ** 2)
    return np.array(rows)


def born_behavior(m: QuantumModel) -> Behavior:
    """P(o|s) = |<b(1,s_1,o_1) x ... x b(N,s_N,o_N) | state>|^2 as a float behavior."""
    b = Behavior(m.scenario, _born_table(m.state, m.bases, m.scenario.outcomes), arithmetic="float")
    report = validate_behavior(b, tol=UNIT_TOL)
    if not report.ok:
        raise GnstError(f"Born behavior failed validation: {report.violations[:3]}")
    return b


def evaluate_quantum_hardy(m: QuantumModel, arg: HardyArgument, tol: float | None = None) -> ArgumentEvaluation:
    if m.scenario != arg.scenario:
        raise InputError(f"scenario mismatch: model {m.scenario.outcomes}, argument {arg.scenario.outcomes}")
    return evaluate_argument(arg, born_behavior(m), tol)


def random_model(scenario: Scenario, rng: np.random.Generator) -> QuantumModel:
    """Haar-like random state and bases (QR of complex Gaussian matrices)."""
    dims = scenario.outcomes
    state = rng.normal(size=math.prod(dims)) + 1j * rng.normal(size=math.prod(dims))
    bases = [[_orthonormalize(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) for _ in range(2)]
             for d in dims]
    return QuantumModel(state / np.linalg.norm(state), tuple(bases))


def _orthonormalize(frame: np.ndarray) -> np.ndarray:
    # rows of the result span the same flag as the rows of ``frame``
    q, r = np.linalg.qr(frame.T)
    phases = np.diag(r) / np.where(np.abs(np.diag(r)) > 0, np.abs(np.diag(r)), 1)
    return (q * phases).T


# --- search --------------------------------------------------------------------

class _Encoding:
    """Flat real vector <-> (state, frames)."""

    def __init__(self, scenario: Scenario):
        self.dims = scenario.outcomes
        self.state_len = math.prod(self.dims)
        self.sizes = [d * d for d in self.dims for _ in range(2)]
        self.length = 2 * (self.state_len + sum(self.sizes))

    def decode(self, x: np.ndarray):
        z = x[0::2] + 1j * x[1::2]
        state = z[:self.state_len]
        norm = np.linalg.norm(state)
        state = state / norm if norm > 0 else np.eye(self.state_len, 1).ravel().astype(complex)
        pos = self.state_len
        bases = []
        for d in self.dims:
            pair = []
            for _ in range(2):
                pair.append(_orthonormalize(z[pos:pos + d * d].reshape(d, d)))
                pos += d * d
            bases.append(pair)
        return state, bases

    def encode(self, state, bases) -> np.ndarray:
        z = np.concatenate([state] + [frame.reshape(-1) for pair in bases for frame in pair])
        x = np.empty(2 * z.size)
        x[0::2], x[1::2] = z.real, z.imag
        return x


def _zero_amplitudes(enc: _Encoding, arg: HardyArgument, x) -> np.ndarray:
    state, bases = enc.decode(x)
    out = []
    for ev in arg.zero_events:
        frames = [bases[p][ev.settings[p]] for p in range(len(enc.dims))]
        vecs = [frames[p][ev.outcomes[p] - 1] for p in range(len(enc.dims))]
        amp = _amplitudes(state, [v.reshape(1, -1) for v in vecs], enc.dims)[0]
        out.extend((amp.real, amp.imag))
    return np.array(out)


def _hardy_terms(enc: _Encoding, arg: HardyArgument, x):
    state, bases = enc.decode(x)
    flat = _born_table(state, bases, enc.dims).reshape(-1)
    return flat[arg.positive_index], float(sum(flat[i] for i in arg.zero_indices))


def _restart(scenario: Scenario, arg: HardyArgument, seed: int, index: int):
    rng = np.random.default_rng([seed, index])
    enc = _Encoding(scenario)
    x = rng.normal(size=enc.length)
    for lam in PENALTY_RAMP:
        def penalized(y, lam=lam):
            q, zero_mass = _hardy_terms(enc, arg, y)
            return zero_mass * lam - q
        x = minimize(penalized, x, method="Powell", options={"maxiter": POWELL_SWEEPS, "xtol": 1e-6}).x
    x = enc.encode(*enc.decode(x))
    if arg.zero_events:
        polished = minimize(lambda y: -_hardy_terms(enc, arg, y)[0], x, method="SLSQP",
                            constraints=[{"type": "eq", "fun": lambda y: _zero_amplitudes(enc, arg, y)}],
                            options={"maxiter": 500, "ftol": 1e-14})
        if np.abs(_zero_amplitudes(enc, arg, polished.x)).max(initial=0) < 1e-6:
            x = polished.x
    q, zero_mass = _hardy_terms(enc, arg, x)
    # rank feasible points by q, infeasible ones by their penalized value
    score = q if zero_mass <= 1e-9 else q - 1e4 * zero_mass - 1
    return score, index, x


@dataclass
class SearchResult:
    model: QuantumModel
    evaluation: ArgumentEvaluation
    restarts: int
    best_restart: int


def search_hardy_model(scenario: Scenario, arg: HardyArgument, seed: int = 0, budget: int = 8,
                       jobs: int = 1, tol: float = 1e-9) -> SearchResult:
    """Best model over ``budget`` random restarts; deterministic given ``seed``."""
    if budget < 1:
        raise InputError("search budget must be at least one restart")
    if arg.scenario != scenario:
        raise InputError(f"scenario mismatch: {scenario.outcomes} vs argument {arg.scenario.outcomes}")
    if math.prod(scenario.outcomes) > SEARCH_MAX_DIM:
        raise InputError(f"search limited to product dimension <= {SEARCH_MAX_DIM}")
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_restart, [scenario] * budget, [arg] * budget, [seed] * budget, range(budget)))
    else:
        runs = [_restart(scenario, arg, seed, i) for i in range(budget)]
    score, index, x = max(runs, key=lambda r: (r[0], -r[1]))
    state, bases = _Encoding(scenario).decode(x)
    model = QuantumModel(state, tuple(bases))
    return SearchResult(model, evaluate_quantum_hardy(model, arg, tol), budget, index)


# --- documents -----------------------------------------------------------------

def _complex_list(vec) -> list:
    return [[float(z.real), float(z.imag)] for z in vec]


def model_to_doc(m: QuantumModel) -> dict:
    return {"format": QUANTUM_FORMAT, "outcomes": list(m.scenario.outcomes), "state": _complex_list(m.state),
            "bases": [[[_complex_list(v) for v in frame] for frame in pair] for pair in m.bases]}


def _read_complex(items, where: str) -> np.ndarray:
    if not isinstance(items, list):
        raise ParseError("expected a list of [re, im] pairs", where)
    out = np.empty(len(items), dtype=complex)
    for k, z in enumerate(items):
        if (not isinstance(z, list) or len(z) != 2
                or not all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in z)):
            raise ParseError("expected [re, im]", f"{where}[{k}]")
        out[k] = complex(z[0], z[1])
    return out


def model_from_doc(doc) -> QuantumModel:
    if not isinstance(doc, dict) or doc.get("format") != QUANTUM_FORMAT:
        raise ParseError(f"expected an object with format {QUANTUM_FORMAT!r}", "format")
    outcomes = doc.get("outcomes")
    if not isinstance(outcomes, list) or not all(isinstance(d, int) for d in outcomes):
        raise ParseError("outcomes must be a list of integers", "outcomes")
    bases = doc.get("bases")
    if not isinstance(bases, list) or len(bases) != len(outcomes):
        raise ParseError("need one basis pair per party", "bases")
    frames = []
    for p, pair in enumerate(bases):
        if not isinstance(pair, list) or len(pair) != 2:
            raise ParseError("need two bases (u, v)", f"bases[{p}]")
        row = []
        for s, frame in enumerate(pair):
            if not isinstance(frame, list) or len(frame) != outcomes[p]:
                raise ParseError(f"need {outcomes[p]} vectors", f"bases[{p}][{s}]")
            vecs = [_read_complex(v, f"bases[{p}][{s}][{k}]") for k, v in enumerate(frame)]
            if any(v.size != outcomes[p] for v in vecs):
                raise ParseError(f"vectors must have {outcomes[p]} components", f"bases[{p}][{s}]")
            row.append(np.array(vecs))
        frames.append(row)
    state = _read_complex(doc.get("state"), "state")
    try:
        return QuantumModel(state, tuple(frames))
    except InputError as exc:
        raise ParseError(str(exc)) from exc


def parse_model(text: str) -> QuantumModel:
    try:
        return model_from_doc(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}") from exc
