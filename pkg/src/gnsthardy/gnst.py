"""Maximum Hardy success probability over the no-signaling polytope.

The LP has one variable per table cell that is not forced to zero by the
argument, the 2**N normalization rows, and for every party i one
no-signaling row per (settings of the others, outcomes of the others)
equating the s_i = 0 and s_i = 1 marginals.  Redundant rows are kept.
"""
from __future__ import annotations

import csv
import json
import logging
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .behavior import Behavior, Scenario, behavior_from_doc, behavior_to_doc, validate_behavior
from .errors import ParseError, SolverError
from .hardy import HardyArgument, HardyFamily, argument_from_doc, argument_to_doc, build_argument, evaluate_argument
from .lp import CertificateCheck, LinearProgram, LpSolution, solve_lp, verify_certificate

log = logging.getLogger(__name__)

CERTIFICATE_FORMAT = "gnst-certificate/1"
EXACT_VAR_LIMIT = 1500
DEFAULT_MAX_CELLS = 20000


@dataclass
class GnstInstance:
    argument: HardyArgument
    lp: LinearProgram
    cell_of_var: list[int]
    var_of_cell: dict[int, int]
    num_normalization_rows: int
    num_ns_rows: int


def ns_row_cells(scenario: Scenario):
    """Yield (plus_cells, minus_cells) for every no-signaling equality.

    ``plus_cells`` are the flat cells summed at s_i = 0, ``minus_cells`` at
    s_i = 1, for a fixed choice of the other parties' settings and outcomes.
    """
    n = scenario.num_parties
    idx = np.arange(scenario.size).reshape(scenario.tensor_shape)
    for i in range(n):
        d = scenario.outcomes[i]
        blocks = []
        for s in (0, 1):
            sl = np.take(idx, s, axis=i)
            blocks.append(np.moveaxis(sl, n - 1 + i, -1).reshape(-1, d))
        for plus, minus in zip(*blocks):
            yield plus.tolist(), minus.tolist()


def build_gnst_lp(arg: HardyArgument) -> GnstInstance:
    sc = arg.scenario
    zeros = set(arg.zero_indices)
    cell_of_var = [c for c in range(sc.size) if c not in zeros]
    var_of_cell = {c: v for v, c in enumerate(cell_of_var)}
    lp = LinearProgram(len(cell_of_var))
    no = sc.num_outcomes
    for ctx in range(sc.num_contexts):
        lp.add_equality({var_of_cell[c]: 1 for c in range(ctx * no, (ctx + 1) * no) if c in var_of_cell}, 1)
    n_ns = 0
    for plus, minus in ns_row_cells(sc):
        row = [(var_of_cell[c], 1) for c in plus if c in var_of_cell]
        row += [(var_of_cell[c], -1) for c in minus if c in var_of_cell]
        lp.add_equality(row, 0)
        n_ns += 1
    pos = arg.positive_index
    if pos in var_of_cell:
        lp.set_objective({var_of_cell[pos]: 1})
    return GnstInstance(arg, lp, cell_of_var, var_of_cell, sc.num_contexts, n_ns)


def pick_arithmetic(inst: GnstInstance, arithmetic: str) -> str:
    if arithmetic == "auto":
        return "exact" if inst.lp.num_vars <= EXACT_VAR_LIMIT else "float"
    return arithmetic


def behavior_from_solution(inst: GnstInstance, sol: LpSolution) -> Behavior:
    sc = inst.argument.scenario
    if sol.arithmetic == "exact":
        table = np.array([Fraction(0)] * sc.size, dtype=object)
    else:
        table = np.zeros(sc.size)
    for v, c in enumerate(inst.cell_of_var):
        table[c] = sol.primal[v]
    if sol.arithmetic == "float":
        table = np.clip(table, 0.0, None)
    return Behavior(sc, table, sol.arithmetic)


@dataclass
class OptimizationResult:
    q_star: object
    optimal_behavior: Behavior
    solution: LpSolution
    certificate: CertificateCheck
    instance: GnstInstance
    arithmetic: str
    wall_ms: float

    @property
    def argument(self) -> HardyArgument:
        return self.instance.argument


def optimize_success(arg: HardyArgument, arithmetic: str = "auto") -> OptimizationResult:
    """Maximize P(positive event) under normalization, no-signaling and the zero events."""
    start = time.perf_counter()
    inst = build_gnst_lp(arg)
    arith = pick_arithmetic(inst, arithmetic)
    meta = f"{arg.family.value} outcomes={arg.scenario.outcomes} fixed_j={arg.fixed_j} arith={arith}"
    sol = solve_lp(inst.lp, arith)
    if sol.status != "optimal":
        raise SolverError(f"GNST LP for {meta} ended with status {sol.status!r} {sol.message}")
    check = verify_certificate(inst.lp, sol)
    if not check:
        raise SolverError(f"certificate check failed for {meta}: {check.failures}")
    behavior = behavior_from_solution(inst, sol)
    report = validate_behavior(behavior)
    if not report.ok:
        raise SolverError(f"optimal behavior for {meta} fails validation: {report.violations[:3]}")
    ev = evaluate_argument(arg, behavior)
    if ev.zero_violations or (arith == "exact" and ev.q_value != sol.objective_value):
        raise SolverError(f"optimal behavior for {meta} does not reproduce the LP optimum")
    wall = 1000 * (time.perf_counter() - start)
    log.info("optimize %s: q* = %s (%.0f ms)", meta, sol.objective_value, wall)
    return OptimizationResult(sol.objective_value, behavior, sol, check, inst, arith, wall)


def random_hardy_feasible(arg: HardyArgument, rng: random.Random, q_min=Fraction(1, 100),
                          vertices: int = 3, arithmetic: str = "exact") -> Behavior:
    """Random behavior satisfying ``arg`` with q >= q_min.

    Mixes ``vertices`` optima of random integer objectives over the Hardy
    feasible region; the mixture is again feasible.
    """
    inst = build_gnst_lp(arg)
    base = inst.lp
    slack = base.num_vars
    picks = []
    for _ in range(vertices):
        lp = LinearProgram(base.num_vars + 1, list(base.equalities),
                           {v: rng.randint(-5, 5) for v in range(base.num_vars)})
        lp.add_equality({inst.var_of_cell[arg.positive_index]: 1, slack: -1}, q_min)
        sol = solve_lp(lp, arithmetic)
        if sol.status != "optimal" or not verify_certificate(lp, sol):
            raise SolverError(f"random Hardy-feasible sampling failed: {sol.status}")
        picks.append(behavior_from_solution(inst, LpSolution(
            status="optimal", arithmetic=arithmetic, primal=sol.primal[: base.num_vars])))
    raw = [Fraction(rng.randint(1, 10)) for _ in picks]
    weights = [w / sum(raw) for w in raw]
    if arithmetic == "exact":
        table = sum(w * b.table for w, b in zip(weights, picks))
    else:
        table = sum(float(w) * b.table for w, b in zip(weights, picks))
    return Behavior(arg.scenario, table, arithmetic)


# --- documents ---------------------------------------------------------------

def _number_doc(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    return float(x)


def certificate_to_doc(res: OptimizationResult, timing: bool = True) -> dict:
    stats = {k: v for k, v in res.solution.stats.items() if k != "wall_ms"}
    return {"format": CERTIFICATE_FORMAT, "argument": argument_to_doc(res.argument),
            "arithmetic": res.arithmetic, "q_star": _number_doc(res.q_star),
            "behavior": behavior_to_doc(res.optimal_behavior), "verified": bool(res.certificate),
            "solver": stats, "wall_ms": round(res.wall_ms, 3) if timing else None}


def certificate_from_doc(doc) -> tuple[HardyArgument, object, Behavior]:
    """Parse a certificate and re-check that its behavior reproduces q_star."""
    if not isinstance(doc, dict) or doc.get("format") != CERTIFICATE_FORMAT:
        raise ParseError(f"expected format {CERTIFICATE_FORMAT!r}", "format")
    arg = argument_from_doc(doc.get("argument"))
    b = behavior_from_doc(doc.get("behavior"))
    q = doc.get("q_star")
    q = Fraction(q) if isinstance(q, str) else float(q)
    return arg, q, b


# --- sweep -------------------------------------------------------------------

@dataclass
class SweepRow:
    parties: int
    outcomes: tuple[int, ...]
    family: str
    arithmetic: str
    q_star: object = None
    wall_ms: float | None = None
    stats: dict = field(default_factory=dict)
    skipped: str | None = None
    certificate: dict | None = None

    @property
    def sort_key(self):
        return (self.parties, self.outcomes)


def _row_name(outcomes, family, arithmetic) -> str:
    return f"cert_N{len(outcomes)}_d{'-'.join(map(str, outcomes))}_{family}_{arithmetic}.json"


def _solve_row(outcomes: tuple[int, ...], family: str, arithmetic: str) -> SweepRow:
    arg = build_argument(HardyFamily(family), Scenario(outcomes))
    res = optimize_success(arg, arithmetic)
    doc = certificate_to_doc(res)
    return SweepRow(len(outcomes), outcomes, family, res.arithmetic, res.q_star, res.wall_ms,
                    doc["solver"], certificate=doc)


def _load_row(path: Path, outcomes, family) -> SweepRow | None:
    try:
        doc = json.loads(path.read_text())
        _, q, _ = certificate_from_doc(doc)
    except (OSError, ValueError, ParseError):
        return None
    if not doc.get("verified"):
        return None
    return SweepRow(len(outcomes), outcomes, family, doc["arithmetic"], q, doc.get("wall_ms"),
                    doc.get("solver", {}), certificate=doc)


def conjecture_sweep(parties: Sequence[int], dims: Sequence, arithmetic: str = "auto",
                     family: HardyFamily | str = HardyFamily.GENERALIZED_QUDIT,
                     max_cells: int = DEFAULT_MAX_CELLS, jobs: int | None = 1,
                     out_dir: str | os.PathLike | None = None) -> list[SweepRow]:
    """Optimize every (N, d) combination.

    ``dims`` entries are either an int (same d for every party) or a tuple of
    per-party outcome counts (used only where its length matches N).  With
    ``out_dir`` each finished row is written as a certificate immediately and
    existing verified certificates are reused, so interrupted sweeps resume.
    """
    if isinstance(family, str):
        family = HardyFamily.parse(family)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    rows: list[SweepRow] = []
    todo = []
    for n in parties:
        for d in dims:
            outcomes = (int(d),) * n if isinstance(d, int) else tuple(int(x) for x in d)
            if len(outcomes) != n:
                continue
            sc = Scenario(outcomes)
            if sc.size > max_cells:
                rows.append(SweepRow(n, outcomes, family.value, arithmetic,
                                     skipped=f"table size {sc.size} exceeds cap {max_cells}"))
                continue
            if out is not None:
                cached = None
                for arith in ([arithmetic] if arithmetic != "auto" else ["exact", "float"]):
                    cached = cached or _load_row(out / _row_name(outcomes, family.value, arith), outcomes,
                                                 family.value)
                if cached is not None:
                    rows.append(cached)
                    continue
            todo.append(outcomes)

    def record(row: SweepRow):
        rows.append(row)
        if out is not None:
            (out / _row_name(row.outcomes, row.family, row.arithmetic)).write_text(json.dumps(row.certificate))

    if jobs == 1 or len(todo) <= 1:
        for outcomes in todo:
            record(_solve_row(outcomes, family.value, arithmetic))
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(_solve_row, o, family.value, arithmetic) for o in todo]
            for fut in futures:
                record(fut.result())
    rows.sort(key=lambda r: r.sort_key)
    if out is not None:
        write_summary(rows, out / "summary.csv")
    return rows


def write_summary(rows: Sequence[SweepRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["N", "d", "family", "arith", "q_star", "wall_ms"])
        for r in rows:
            q = "" if r.q_star is None else _number_doc(r.q_star)
            w.writerow([r.parties, " ".join(map(str, r.outcomes)), r.family, r.arithmetic,
                        q if r.skipped is None else f"skipped: {r.skipped}",
                        "" if r.wall_ms is None else round(r.wall_ms, 3)])
