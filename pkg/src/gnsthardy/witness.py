"""Hybrid-local (bilocal) decompositions of tripartite behaviors.

NS2-local behaviors are mixtures of products Q(group) x R(singleton) where
Q is a no-signaling two-party behavior.  Since R ranges over a product of
simplices, every such product is a mixture of Q x V with V a deterministic
singleton strategy (one outcome per setting).  The membership LP therefore
has one free, subnormalized, internally no-signaling block Q_{p,V} per
singleton party p and strategy V, and no vertex enumeration on the group
side.

Svetlichny-local behaviors drop the no-signaling requirement on Q.  The
set of all two-party conditional distributions is the convex hull of the
deterministic joint strategies, so the same block LP without the internal
no-signaling rows decides S2-locality.  Witnesses are still checked against
an explicit enumeration of the 3 x 256 x 4 deterministic generators.

If the LP is infeasible its Farkas ray gives a linear functional on cells
that is larger on the target than on every generator: a witness of genuine
tripartite nonlocality.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .behavior import (Behavior, Scenario, behavior_from_doc, behavior_to_doc, event_index, validate_behavior)
from .errors import ParseError, SignalingError, SolverError, UnsupportedScopeError
from .gnst import ns_row_cells
from .hardy import HardyArgument
from .lp import LinearProgram, LpSolution, solve_lp, verify_certificate

VERDICT_FORMAT = "gnst-verdict/1"
FLOAT_RECON_TOL = 1e-8
# float blocks lighter than this are solver noise; dividing by their mass amplifies roundoff
FLOAT_WEIGHT_FLOOR = 1e-12
WITNESS_DENOMINATOR = 10**6
# float primal entries above this define the support handed to the exact solver
SUPPORT_FLOOR = 1e-9


@dataclass(frozen=True)
class Bipartition:
    group: tuple[int, ...]
    complement: tuple[int, ...]

    def __post_init__(self):
        if not self.group or not self.complement or set(self.group) & set(self.complement):
            raise UnsupportedScopeError(f"invalid bipartition {self.group} | {self.complement}")

    @classmethod
    def singleton(cls, party: int, num_parties: int = 3) -> Bipartition:
        return cls(tuple(p for p in range(num_parties) if p != party), (party,))


@dataclass
class Component:
    """weight * group_behavior (x) deterministic singleton strategy."""

    bipartition: Bipartition
    weight: object
    group_behavior: Behavior
    strategy: tuple[int, int]  # 1-based outcome of the singleton party for settings u, v


@dataclass
class Decomposition:
    notion: str
    components: list[Component]

    def reconstruct(self, scenario: Scenario, arithmetic: str) -> Behavior:
        exact = arithmetic == "exact"
        table = np.array([Fraction(0)] * scenario.size, dtype=object) if exact else np.zeros(scenario.size)
        for comp in self.components:
            (p,) = comp.bipartition.complement
            g = comp.bipartition.group
            q = comp.group_behavior
            w = comp.weight if exact else float(comp.weight)
            for sg in itertools.product((0, 1), repeat=2):
                for og in itertools.product(*(range(1, scenario.outcomes[k] + 1) for k in g)):
                    val = q.prob(sg, og)
                    if not val:
                        continue
                    for sp in (0, 1):
                        s = [0, 0, 0]
                        o = [0, 0, 0]
                        s[p], o[p] = sp, comp.strategy[sp]
                        for k, sk, ok in zip(g, sg, og):
                            s[k], o[k] = sk, ok
                        table[event_index(scenario, s, o)] += w * val
        return Behavior(scenario, table, arithmetic)

    def verify(self, target: Behavior, tol: float = FLOAT_RECON_TOL) -> list[str]:
        """Re-check weights, group no-signaling (ns2 only) and cellwise reconstruction."""
        exact = target.arithmetic == "exact"
        tol = 0 if exact else tol
        problems = []
        weights = [c.weight for c in self.components]
        if any(w < 0 for w in weights):
            problems.append("negative weight")
        if abs(sum(weights) - 1) > tol:
            problems.append(f"weights sum to {sum(weights)}")
        for k, comp in enumerate(self.components):
            rep = validate_behavior(comp.group_behavior, None if exact else tol)
            # a float component perturbs the mixture by weight * residual, so that is what is bounded
            scale = 1 if exact else float(comp.weight)
            if not rep.nonneg_ok or scale * rep.normalization_residual > tol:
                problems.append(f"component {k} is not a normalized behavior")
            if self.notion == "ns2" and scale * rep.ns_residual > tol:
                problems.append(f"component {k} group behavior signals ({rep.ns_residual})")
        recon = self.reconstruct(target.scenario, target.arithmetic)
        dev = np.abs(recon.table - target.table).max()
        if dev > tol:
            problems.append(f"reconstruction deviates by {dev}")
        return problems


@dataclass
class FarkasWitness:
    """Linear functional on cells with max over generators <= bound < value on the target."""

    coefficients: list
    bound: object
    value: object
    generator_max: object = None

    def evaluate(self, b: Behavior):
        return sum(c * p for c, p in zip(self.coefficients, b.flat) if c)


@dataclass
class Verdict:
    notion: str
    status: str  # local | genuinely_nonlocal
    decomposition: Decomposition | None = None
    witness: FarkasWitness | None = None
    solution: LpSolution | None = field(default=None, repr=False)
    lp: LinearProgram | None = field(default=None, repr=False)

    @property
    def is_local(self) -> bool:
        return self.status == "local"


# --- NS2 model ---------------------------------------------------------------

@dataclass
class _Block:
    singleton: int
    group: tuple[int, int]
    strategy: tuple[int, int]  # 0-based outcomes
    offset: int
    scenario: Scenario  # two-party scenario of the group


class _HybridModel:
    """Variables and block constraints of the bilocal decomposition LP for N = 3.

    ``group_ns`` adds internal no-signaling rows to every block (NS2);
    without them the blocks are arbitrary conditional distributions (S2).
    """

    def __init__(self, scenario: Scenario, group_ns: bool = True):
        self.scenario = scenario
        self.group_ns = group_ns
        self.blocks: list[_Block] = []
        offset = 0
        for p in range(3):
            g = tuple(k for k in range(3) if k != p)
            sub = Scenario(tuple(scenario.outcomes[k] for k in g))
            d = scenario.outcomes[p]
            for v in itertools.product(range(d), repeat=2):
                self.blocks.append(_Block(p, g, v, offset, sub))
                offset += sub.size
        self.num_vars = offset
        # contributions[cell] = list of variables summing to that target cell
        self.contributions: list[list[int]] = [[] for _ in range(scenario.size)]
        for blk in self.blocks:
            sub = blk.scenario
            for local in range(sub.size):
                ctx, out = divmod(local, sub.num_outcomes)
                sg = ((ctx >> 1) & 1, ctx & 1)
                og = divmod(out, sub.outcomes[1])
                for sp in (0, 1):
                    s = [0, 0, 0]
                    o = [0, 0, 0]
                    s[blk.singleton], o[blk.singleton] = sp, blk.strategy[sp] + 1
                    for k, sk, ok in zip(blk.group, sg, og):
                        s[k], o[k] = sk, ok + 1
                    self.contributions[event_index(scenario, s, o)].append(blk.offset + local)

    def block_rows(self):
        """Internal no-signaling rows and equal mass across the four contexts."""
        rows = []
        for blk in self.blocks:
            sub = blk.scenario
            no = sub.num_outcomes
            if self.group_ns:
                for plus, minus in ns_row_cells(sub):
                    rows.append(([(blk.offset + c, 1) for c in plus] + [(blk.offset + c, -1) for c in minus], 0))
            base = [(blk.offset + c, -1) for c in range(no)]
            for ctx in range(1, sub.num_contexts):
                rows.append(([(blk.offset + ctx * no + c, 1) for c in range(no)] + base, 0))
        return rows

    def mass_row(self):
        row = []
        for blk in self.blocks:
            row += [(blk.offset + c, 1) for c in range(blk.scenario.num_outcomes)]
        return row, 1

    def decomposition(self, x, exact: bool) -> Decomposition:
        comps = []
        for blk in self.blocks:
            sub = blk.scenario
            vals = x[blk.offset: blk.offset + sub.size]
            w = sum(vals[: sub.num_outcomes])
            if w <= (0 if exact else FLOAT_WEIGHT_FLOOR):
                continue
            if exact:
                table = np.array([v / w for v in vals], dtype=object)
            else:
                table = np.clip(np.array([float(v) for v in vals]) / float(w), 0, None)
            comps.append(Component(Bipartition.singleton(blk.singleton), w, Behavior(sub, table,
                                   "exact" if exact else "float"), (blk.strategy[0] + 1, blk.strategy[1] + 1)))
        return Decomposition("ns2" if self.group_ns else "svetlichny", comps)


def _require_tripartite(scenario: Scenario, what: str):
    if scenario.num_parties != 3:
        raise UnsupportedScopeError(
            f"{what} supports exactly 3 parties (got {scenario.num_parties}); for N >= 4 some bipartitions "
            "are 2-vs-2 and would need the vertices of a multi-party no-signaling polytope, which are not "
            "enumerated here")


def _require_nosignaling(b: Behavior, tol):
    rep = validate_behavior(b, tol)
    if not rep.ok:
        raise SignalingError(f"behavior is not a valid no-signaling behavior: {rep.violations[:3]}")


def _ns2_generator_max(model: _HybridModel, coeffs, arithmetic: str):
    """max over blocks and normalized NS group behaviors Q of coeffs . (Q x V)."""
    best = None
    for blk in model.blocks:
        sub = blk.scenario
        lp = LinearProgram(sub.size)
        for ctx in range(sub.num_contexts):
            lp.add_equality({ctx * sub.num_outcomes + c: 1 for c in range(sub.num_outcomes)}, 1)
        for plus, minus in ns_row_cells(sub):
            lp.add_equality([(c, 1) for c in plus] + [(c, -1) for c in minus], 0)
        obj: dict[int, object] = {}
        for cell, vars_ in enumerate(model.contributions):
            if coeffs[cell]:
                for v in vars_:
                    if blk.offset <= v < blk.offset + sub.size:
                        obj[v - blk.offset] = obj.get(v - blk.offset, 0) + coeffs[cell]
        lp.set_objective(obj)
        sol = solve_lp(lp, arithmetic)
        if sol.status != "optimal" or not verify_certificate(lp, sol):
            raise SolverError(f"generator maximization ended with {sol.status}")
        if best is None or sol.objective_value > best:
            best = sol.objective_value
    return best


def _witness_from_farkas(y, size: int, mass_row: int, target: Behavior) -> FarkasWitness:
    coeffs = list(y[:size])
    bound = -y[mass_row]
    w = FarkasWitness(coeffs, bound, None)
    w.value = w.evaluate(target)
    return w


def _rounded_witness(model: _HybridModel, target: Behavior):
    """Exact witness from a float Farkas ray, or None when rounding loses separation.

    Also returns the float membership solve so a feasible outcome can seed
    the exact decomposition.

    The ray's cell coefficients are rounded to small rationals and the bound is
    recomputed exactly as the maximum over the NS2-local set, so a returned
    witness is a rigorous exact certificate regardless of float error.
    """
    lp = _membership_lp(model, target.to_float())
    sol = solve_lp(lp, "float", engine="highs")
    if sol.status != "infeasible" or not verify_certificate(lp, sol):
        return None, lp, sol
    head = sol.farkas[: target.scenario.size]
    scale = max(abs(v) for v in head)
    coeffs = [Fraction(v / scale).limit_denominator(WITNESS_DENOMINATOR) for v in head]
    bound = _ns2_generator_max(model, coeffs, "exact")
    wit = FarkasWitness(coeffs, bound, None, bound)
    wit.value = wit.evaluate(target)
    return (wit if wit.value > bound else None), lp, sol


def _support_decomposition(model: _HybridModel, target: Behavior, float_sol: LpSolution):
    """Exact decomposition using only the columns a float solve found in use.

    Returns (deco, lp, sol) or None when the restricted exact LP is infeasible.
    Any decomposition returned reconstructs the target exactly.
    """
    support = [v for v, x in enumerate(float_sol.primal) if x > SUPPORT_FLOOR]
    keep = {v: k for k, v in enumerate(support)}
    full = _membership_lp(model, target)
    lp = LinearProgram(len(support))
    for row, rhs in full.equalities:
        lp.add_equality({keep[v]: c for v, c in row.items() if v in keep}, rhs)
    sol = solve_lp(lp, "exact")
    if sol.status != "optimal" or not verify_certificate(lp, sol):
        return None
    x = [Fraction(0)] * model.num_vars
    for v, val in zip(support, sol.primal):
        x[v] = val
    deco = model.decomposition(x, True)
    return (deco, lp, sol) if not deco.verify(target) else None


def ns2_membership(b: Behavior, arithmetic: str | None = None, tol: float = FLOAT_RECON_TOL) -> Verdict:
    """Decide NS2-locality of a tripartite no-signaling behavior."""
    _require_tripartite(b.scenario, "ns2_membership")
    arithmetic = arithmetic or b.arithmetic
    _require_nosignaling(b, None if b.arithmetic == "exact" else tol)
    target = b.to_exact() if arithmetic == "exact" else b.to_float()
    model = _HybridModel(b.scenario)
    if arithmetic == "exact":
        # rational phase 1 on these LPs can take thousands of Bland pivots; try a rounded float ray first
        wit, lp, sol = _rounded_witness(model, target)
        if wit is not None:
            return Verdict("ns2", "genuinely_nonlocal", witness=wit, solution=sol, lp=lp)
        found = _support_decomposition(model, target, sol) if sol is not None and sol.status == "optimal" else None
        if found is not None:
            deco, lp, sol = found
            return Verdict("ns2", "local", decomposition=deco, solution=sol, lp=lp)
    lp = _membership_lp(model, target)
    sol = solve_lp(lp, arithmetic)
    check = verify_certificate(lp, sol)
    if not check:
        raise SolverError(f"NS2 membership certificate failed: {check.failures}")
    if sol.status == "optimal":
        deco = model.decomposition(sol.primal, arithmetic == "exact")
        problems = deco.verify(target, tol)
        if problems:
            raise SolverError(f"NS2 decomposition failed re-verification: {problems}")
        return Verdict("ns2", "local", decomposition=deco, solution=sol, lp=lp)
    if sol.status != "infeasible":
        raise SolverError(f"NS2 membership LP ended with {sol.status}")
    wit = _witness_from_farkas(sol.farkas, b.scenario.size, lp.num_rows - 1, target)
    wit.generator_max = _ns2_generator_max(model, wit.coefficients, arithmetic)
    slack = 0 if arithmetic == "exact" else tol
    if not (wit.generator_max <= wit.bound + slack and wit.value > wit.bound):
        raise SolverError("Farkas functional does not separate the target from the NS2-local set")
    return Verdict("ns2", "genuinely_nonlocal", witness=wit, solution=sol, lp=lp)


@dataclass
class ConstrainedMax:
    q_max: object
    solution: LpSolution
    lp: LinearProgram


def constrained_ns2_max(arg: HardyArgument, arithmetic: str = "exact") -> ConstrainedMax:
    """Largest P(positive event) over NS2-local behaviors obeying every zero event of ``arg``."""
    _require_tripartite(arg.scenario, "constrained_ns2_max")
    model = _HybridModel(arg.scenario)
    lp = LinearProgram(model.num_vars)
    for idx in arg.zero_indices:
        lp.add_equality([(v, 1) for v in model.contributions[idx]], 0)
    for row in model.block_rows():
        lp.add_equality(*row)
    lp.add_equality(*model.mass_row())
    lp.set_objective([(v, 1) for v in model.contributions[arg.positive_index]])
    sol = solve_lp(lp, arithmetic)
    if sol.status != "optimal":
        raise SolverError(f"constrained NS2 maximization ended with {sol.status}")
    check = verify_certificate(lp, sol)
    if not check:
        raise SolverError(f"constrained NS2 maximization certificate failed: {check.failures}")
    return ConstrainedMax(sol.objective_value, sol, lp)


# --- Svetlichny ----------------------------------------------------------------

def _svetlichny_generators(scenario: Scenario):
    """Yield (singleton, group strategy, singleton strategy, cells) for binary outcomes.

    group strategy maps each of the 4 group contexts to a joint 0-based outcome pair.
    """
    for p in range(3):
        g = tuple(k for k in range(3) if k != p)
        for gs in itertools.product(itertools.product((0, 1), repeat=2), repeat=4):
            for v in itertools.product((0, 1), repeat=2):
                cells = []
                for s in itertools.product((0, 1), repeat=3):
                    o = [0, 0, 0]
                    o[p] = v[s[p]] + 1
                    pair = gs[2 * s[g[0]] + s[g[1]]]
                    o[g[0]], o[g[1]] = pair[0] + 1, pair[1] + 1
                    cells.append(event_index(scenario, s, o))
                yield p, g, gs, v, cells


def _membership_lp(model: _HybridModel, target: Behavior) -> LinearProgram:
    lp = LinearProgram(model.num_vars)
    for cell, vars_ in enumerate(model.contributions):
        lp.add_equality([(v, 1) for v in vars_], target.flat[cell])
    for row in model.block_rows():
        lp.add_equality(*row)
    lp.add_equality(*model.mass_row())
    return lp


def svetlichny_membership(b: Behavior, arithmetic: str | None = None, tol: float = FLOAT_RECON_TOL) -> Verdict:
    """Decide Svetlichny (S2) locality for three parties with binary outcomes."""
    sc = b.scenario
    _require_tripartite(sc, "svetlichny_membership")
    if any(d != 2 for d in sc.outcomes):
        raise UnsupportedScopeError(f"svetlichny_membership supports binary outcomes only, got {sc.outcomes}")
    arithmetic = arithmetic or b.arithmetic
    exact = arithmetic == "exact"
    rep = validate_behavior(b, None if b.arithmetic == "exact" else tol)
    if not rep.nonneg_ok or rep.normalization_residual > (0 if b.arithmetic == "exact" else tol):
        raise SignalingError("behavior is not normalized")
    target = b.to_exact() if exact else b.to_float()
    model = _HybridModel(sc, group_ns=False)
    lp = _membership_lp(model, target)
    sol = solve_lp(lp, arithmetic)
    check = verify_certificate(lp, sol)
    if not check:
        raise SolverError(f"Svetlichny membership certificate failed: {check.failures}")
    if sol.status == "optimal":
        deco = model.decomposition(sol.primal, exact)
        problems = deco.verify(target, tol)
        if problems:
            raise SolverError(f"Svetlichny decomposition failed re-verification: {problems}")
        return Verdict("svetlichny", "local", decomposition=deco, solution=sol, lp=lp)
    if sol.status != "infeasible":
        raise SolverError(f"Svetlichny membership LP ended with {sol.status}")
    wit = _witness_from_farkas(sol.farkas, sc.size, lp.num_rows - 1, target)
    wit.generator_max = max(sum(wit.coefficients[c] for c in cells) for *_, cells in _svetlichny_generators(sc))
    slack = 0 if exact else tol
    if not (wit.generator_max <= wit.bound + slack and wit.value > wit.bound):
        raise SolverError("Farkas functional does not separate the target from the Svetlichny-local set")
    return Verdict("svetlichny", "genuinely_nonlocal", witness=wit, solution=sol, lp=lp)


# --- documents -----------------------------------------------------------------

def _num(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return float(x)


def _parse_num(x):
    return Fraction(x) if isinstance(x, str) else float(x)


def verdict_to_doc(v: Verdict) -> dict:
    deco = None
    if v.decomposition is not None:
        deco = [{"singleton": c.bipartition.complement[0] + 1,
                 "group": [k + 1 for k in c.bipartition.group],
                 "weight": _num(c.weight), "strategy": list(c.strategy),
                 "group_behavior": behavior_to_doc(c.group_behavior)} for c in v.decomposition.components]
    wit = None
    if v.witness is not None:
        wit = {"coefficients": [_num(c) for c in v.witness.coefficients], "bound": _num(v.witness.bound),
               "value": _num(v.witness.value)}
    return {"format": VERDICT_FORMAT, "notion": v.notion, "status": v.status, "decomposition": deco,
            "witness": wit}


def verdict_from_doc(doc) -> Verdict:
    if not isinstance(doc, dict) or doc.get("format") != VERDICT_FORMAT:
        raise ParseError(f"expected format {VERDICT_FORMAT!r}", "format")
    if doc.get("notion") not in ("ns2", "svetlichny") or doc.get("status") not in ("local", "genuinely_nonlocal"):
        raise ParseError("bad notion or status")
    deco = wit = None
    if doc.get("decomposition") is not None:
        comps = []
        for k, c in enumerate(doc["decomposition"]):
            try:
                comps.append(Component(Bipartition(tuple(g - 1 for g in c["group"]), (c["singleton"] - 1,)),
                                       _parse_num(c["weight"]), behavior_from_doc(c["group_behavior"]),
                                       tuple(c["strategy"])))
            except (KeyError, TypeError) as exc:
                raise ParseError(f"malformed component: {exc}", f"decomposition[{k}]") from exc
        deco = Decomposition(doc["notion"], comps)
    if doc.get("witness") is not None:
        w = doc["witness"]
        wit = FarkasWitness([_parse_num(c) for c in w["coefficients"]], _parse_num(w["bound"]),
                            _parse_num(w["value"]))
    return Verdict(doc["notion"], doc["status"], deco, wit)


def parse_verdict(text: str) -> Verdict:
    try:
        return verdict_from_doc(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}") from exc
