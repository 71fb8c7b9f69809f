"""Equality-form linear programs: maximize c.x subject to A x = b, x >= 0.

Two backends share one two-phase simplex driver shape:

* ``exact``: rational pivots (gmpy2 ``mpq``) on a sparse-row tableau with
  Bland's rule, so it cannot cycle.  Results are returned as ``Fraction``.
* ``float``: dense numpy tableau, Dantzig pricing with a 1e-9 pivot
  tolerance, Bland fallback after a run of degenerate pivots, and a final
  refactorization of the basis to recover accurate primal and dual values.
  Large float problems go to HiGHS (through scipy) instead; the dense
  tableau stalls on the massively degenerate no-signaling systems.

Every solution carries a certificate that :func:`verify_certificate` checks
against the original data: primal/dual pair for ``optimal``, a Farkas ray
``y`` (``y.A <= 0``, ``y.b > 0``) for ``infeasible``, a primal ray for
``unbounded``.

Rows of the form ``a * x_k = 0`` are presolved away before the tableau is
built; their duals are reconstructed afterwards.
"""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

import gmpy2
import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import InputError

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-9
FLOAT_CHECK_TOL = 1e-8
DEGENERATE_STREAK = 50
# reduced rows * columns above which float solves default to HiGHS
DENSE_FLOAT_LIMIT = 400_000
ENGINES = ("auto", "simplex", "highs")


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise InputError(f"non-finite coefficient {x!r}")
        return Fraction(float(x))
    if isinstance(x, type(gmpy2.mpq())):
        return Fraction(int(x.numerator), int(x.denominator))
    return Fraction(x)


def _merge_row(num_vars: int, row) -> dict[int, Fraction | float]:
    items = row.items() if isinstance(row, Mapping) else row
    merged: dict[int, object] = {}
    for k, v in items:
        k = int(k)
        if not 0 <= k < num_vars:
            raise InputError(f"variable index {k} outside 0..{num_vars - 1}")
        merged[k] = merged.get(k, 0) + v
    return {k: v for k, v in merged.items() if v != 0}


@dataclass
class LinearProgram:
    """maximize ``objective . x`` s.t. each ``(row, rhs)`` in ``equalities`` holds, ``x >= 0``.

    Rows and the objective are sparse: a mapping or an iterable of
    ``(index, coefficient)`` pairs.  Duplicate indices are summed.
    """

    num_vars: int
    equalities: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.num_vars < 0:
            raise InputError("num_vars must be nonnegative")
        eqs = []
        for entry in self.equalities:
            try:
                row, rhs = entry
            except (TypeError, ValueError) as exc:
                raise InputError(f"equality must be a (row, rhs) pair, got {entry!r}") from exc
            if isinstance(rhs, float) and not math.isfinite(rhs):
                raise InputError(f"non-finite right-hand side {rhs!r}")
            eqs.append((_merge_row(self.num_vars, row), rhs))
        self.equalities = eqs
        self.objective = _merge_row(self.num_vars, self.objective)

    def add_equality(self, row, rhs):
        self.equalities.append((_merge_row(self.num_vars, row), rhs))

    def set_objective(self, row):
        self.objective = _merge_row(self.num_vars, row)

    @property
    def num_rows(self) -> int:
        return len(self.equalities)

    def dense(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Float copies of (A, b, c)."""
        A = np.zeros((self.num_rows, self.num_vars))
        for i, (row, _) in enumerate(self.equalities):
            for k, v in row.items():
                A[i, k] = float(v)
        b = np.array([float(rhs) for _, rhs in self.equalities])
        c = np.zeros(self.num_vars)
        for k, v in self.objective.items():
            c[k] = float(v)
        return A, b, c


@dataclass
class LpSolution:
    status: str  # optimal | infeasible | unbounded | numerically-unstable
    arithmetic: str
    primal: list | None = None
    objective_value: object = None
    dual: list | None = None
    farkas: list | None = None
    ray: list | None = None
    stats: dict = field(default_factory=dict)
    message: str = ""


# --- presolve ----------------------------------------------------------------

@dataclass
class _Presolved:
    keep_vars: list[int]
    keep_rows: list[int]
    eliminated: list[tuple[int, int]]  # (var, row) in elimination order
    dropped_rows: list[int]
    infeasible_row: int | None


def _presolve(rows: list[dict], rhs: list, num_vars: int) -> _Presolved:
    col_rows: dict[int, list[int]] = {}
    for i, row in enumerate(rows):
        for k in row:
            col_rows.setdefault(k, []).append(i)
    nnz = [len(row) for row in rows]
    active_var = [True] * num_vars
    active_row = [True] * len(rows)
    eliminated, dropped = [], []
    infeasible = None

    queue = []
    for i in range(len(rows)):
        if nnz[i] == 0:
            active_row[i] = False
            if rhs[i] != 0:
                infeasible = i if infeasible is None else infeasible
            else:
                dropped.append(i)
        elif nnz[i] == 1 and rhs[i] == 0:
            queue.append(i)
    while queue:
        r = queue.pop()
        if not active_row[r] or nnz[r] != 1:
            continue
        (k,) = [k for k in rows[r] if active_var[k]]
        active_var[k] = False
        active_row[r] = False
        eliminated.append((k, r))
        for i in col_rows.get(k, ()):
            if not active_row[i]:
                continue
            nnz[i] -= 1
            if nnz[i] == 0:
                active_row[i] = False
                if rhs[i] != 0:
                    infeasible = i if infeasible is None else infeasible
                else:
                    dropped.append(i)
            elif nnz[i] == 1 and rhs[i] == 0:
                queue.append(i)
    return _Presolved([k for k in range(num_vars) if active_var[k]],
                      [i for i in range(len(rows)) if active_row[i]],
                      eliminated, dropped, infeasible)


def _postsolve_duals(rows, pre: _Presolved, y: dict, objective: dict, farkas: bool, zero):
    """Fill duals of eliminated rows so each eliminated column has zero reduced cost
    (optimal) or zero Farkas column sum (infeasible)."""
    col_rows: dict[int, list[int]] = {}
    for i, row in enumerate(rows):
        for k in row:
            col_rows.setdefault(k, []).append(i)
    for k, r in reversed(pre.eliminated):
        acc = zero if farkas else objective.get(k, zero)
        for i in col_rows[k]:
            if i != r:
                acc -= rows[i][k] * y.get(i, zero)
        y[r] = acc / rows[r][k]
    return y


# --- exact backend -----------------------------------------------------------

class _ExactTableau:
    """Sparse-row tableau over mpq with artificial columns n..n+m-1 kept as the B^-1 record."""

    def __init__(self, rows: list[dict], rhs: list, n: int):
        self.n = n
        self.m = len(rows)
        self.rows = []
        self.b = []
        self.sign = []
        for i, (row, bi) in enumerate(zip(rows, rhs)):
            s = -1 if bi < 0 else 1
            r = {k: s * v for k, v in row.items()}
            r[n + i] = gmpy2.mpq(1)
            self.rows.append(r)
            self.b.append(s * bi)
            self.sign.append(s)
        self.basis = [n + i for i in range(self.m)]
        self.pivots = 0

    def is_art(self, j: int) -> bool:
        return j >= self.n

    def set_objective(self, cost: dict):
        """Reduced costs r_j = c_j - c_B B^-1 A_j and objective value z."""
        r = dict(cost)
        z = gmpy2.mpq(0)
        for i, bv in enumerate(self.basis):
            cb = cost.get(bv, 0)
            if cb:
                for k, v in self.rows[i].items():
                    nv = r.get(k, 0) - cb * v
                    if nv:
                        r[k] = nv
                    else:
                        r.pop(k, None)
                z += cb * self.b[i]
        self.r, self.z = r, z

    def pivot(self, p: int, j: int):
        prow = self.rows[p]
        a = prow[j]
        if a != 1:
            inv = 1 / a
            prow = {k: v * inv for k, v in prow.items()}
            self.rows[p] = prow
            self.b[p] *= inv
        bp = self.b[p]
        for i, row in enumerate(self.rows):
            if i == p:
                continue
            f = row.get(j)
            if not f:
                continue
            for k, v in prow.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    del row[k]
            self.b[i] -= f * bp
        f = self.r.get(j)
        if f:
            for k, v in prow.items():
                nv = self.r.get(k, 0) - f * v
                if nv:
                    self.r[k] = nv
                else:
                    self.r.pop(k, None)
            self.z += f * bp
        self.basis[p] = j
        self.pivots += 1

    def run(self, allow_art: bool) -> tuple[str, int | None]:
        """Bland's rule until optimal or unbounded; returns (status, entering column if unbounded)."""
        while True:
            entering = None
            for j, v in self.r.items():
                if v > 0 and (allow_art or j < self.n) and (entering is None or j < entering):
                    entering = j
            if entering is None:
                return "optimal", None
            best = None
            for i, row in enumerate(self.rows):
                a = row.get(entering)
                if a is not None and a > 0:
                    key = (self.b[i] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return "unbounded", entering
            self.pivot(best[1], entering)

    def drive_out_artificials(self):
        for i in range(self.m):
            if not self.is_art(self.basis[i]):
                continue
            cols = [k for k in self.rows[i] if k < self.n]
            if cols:
                self.pivot(i, min(cols))

    def dual(self, cost_art) -> list:
        """y = c_B B^-1 in the original row signs; ``cost_art`` is the artificial cost."""
        return [self.sign[i] * (cost_art - self.r.get(self.n + i, 0)) for i in range(self.m)]


def _solve_exact(rows, rhs, cost, n):
    t = _ExactTableau(rows, rhs, n)
    t.set_objective({n + i: gmpy2.mpq(-1) for i in range(t.m)})
    t.run(allow_art=True)
    phase1 = t.pivots
    if t.z < 0:
        # phase-1 dual y has A^T y >= 0 and b.y < 0, so -y is a Farkas ray
        return {"status": "infeasible", "farkas": [-v for v in t.dual(-1)],
                "stats": {"phase1_pivots": phase1, "phase2_pivots": 0}}
    t.drive_out_artificials()
    t.set_objective(cost)
    status, entering = t.run(allow_art=False)
    stats = {"phase1_pivots": phase1, "phase2_pivots": t.pivots - phase1}
    x = [gmpy2.mpq(0)] * n
    for i, bv in enumerate(t.basis):
        if bv < n:
            x[bv] = t.b[i]
    if status == "unbounded":
        ray = [gmpy2.mpq(0)] * n
        ray[entering] = gmpy2.mpq(1)
        for i, bv in enumerate(t.basis):
            a = t.rows[i].get(entering)
            if a and bv < n:
                ray[bv] = -a
        return {"status": "unbounded", "primal": x, "ray": ray, "stats": stats}
    return {"status": "optimal", "primal": x, "dual": t.dual(0), "stats": stats}


# --- float backend -----------------------------------------------------------

class _FloatTableau:
    """Dense tableau without artificial columns; artificial basics are encoded as n + row."""

    def __init__(self, A: np.ndarray, b: np.ndarray):
        self.m, self.n = A.shape
        self.sign = np.where(b < 0, -1.0, 1.0)
        self.A = A * self.sign[:, None]
        self.rhs = b * self.sign
        self.T = self.A.copy()
        self.b = self.rhs.copy()
        self.basis = np.arange(self.n, self.n + self.m)
        self.pivots = 0

    def set_objective(self, c_full: np.ndarray):
        """``c_full`` has length n + m (artificial costs last)."""
        self.c_full = c_full
        cb = c_full[self.basis]
        self.r = c_full[: self.n] - cb @ self.T
        self.z = float(cb @ self.b)

    def pivot(self, p: int, j: int):
        a = self.T[p, j]
        self.T[p] /= a
        self.b[p] /= a
        col = self.T[:, j].copy()
        col[p] = 0.0
        nz = np.nonzero(col)[0]
        if nz.size:
            self.T[nz] -= np.outer(col[nz], self.T[p])
            self.b[nz] -= col[nz] * self.b[p]
        self.T[nz, j] = 0.0
        f = self.r[j]
        self.r -= f * self.T[p]
        self.r[j] = 0.0
        self.z += f * self.b[p]
        self.basis[p] = j
        self.pivots += 1
        np.maximum(self.b, 0.0, out=self.b, where=self.b > -PIVOT_TOL)

    def run(self, max_pivots: int) -> tuple[str, int | None]:
        streak = 0
        while True:
            if self.pivots >= max_pivots:
                return "iteration-limit", None
            candidates = np.nonzero(self.r > PIVOT_TOL)[0]
            if candidates.size == 0:
                return "optimal", None
            bland = streak >= DEGENERATE_STREAK
            j = int(candidates[0]) if bland else int(candidates[np.argmax(self.r[candidates])])
            col = self.T[:, j]
            rows = np.nonzero(col > PIVOT_TOL)[0]
            if rows.size == 0:
                return "unbounded", j
            ratios = self.b[rows] / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            if bland:
                p = int(tied[np.argmin(self.basis[tied])])
            else:
                p = int(tied[np.argmax(col[tied])])
            streak = streak + 1 if best <= PIVOT_TOL else 0
            self.pivot(p, j)

    def drive_out_artificials(self):
        for i in range(self.m):
            if self.basis[i] < self.n:
                continue
            row = np.abs(self.T[i])
            k = int(np.argmax(row))
            if row[k] > PIVOT_TOL:
                self.pivot(i, k)
            else:
                self.T[i] = 0.0  # redundant row
                self.b[i] = 0.0

    def basis_matrix(self) -> np.ndarray:
        B = np.zeros((self.m, self.m))
        for i, bv in enumerate(self.basis):
            if bv < self.n:
                B[:, i] = self.A[:, bv]
            else:
                B[bv - self.n, i] = 1.0
        return B

    def refactor(self):
        """Recompute T, b, r from the original data and the current basis."""
        B = self.basis_matrix()
        self.T = np.linalg.solve(B, self.A)
        self.b = np.linalg.solve(B, self.rhs)
        self.set_objective(self.c_full)

    def dual(self) -> np.ndarray:
        B = self.basis_matrix()
        y = np.linalg.solve(B.T, self.c_full[self.basis])
        return y * self.sign


def _solve_float(A: np.ndarray, b: np.ndarray, c: np.ndarray):
    m, n = A.shape
    t = _FloatTableau(A, b)
    max_pivots = 50 * (m + n) + 1000
    scale = max(1.0, float(np.abs(b).max(initial=0.0)))
    t.set_objective(np.concatenate([np.zeros(n), -np.ones(m)]))
    status, _ = t.run(max_pivots)
    if status == "iteration-limit":
        return {"status": "numerically-unstable", "message": "phase 1 hit the iteration limit"}
    t.refactor()
    phase1 = t.pivots
    if t.z < -FLOAT_CHECK_TOL * scale:
        y = t.dual()
        return {"status": "infeasible", "farkas": -y, "stats": {"phase1_pivots": phase1, "phase2_pivots": 0}}
    t.drive_out_artificials()
    t.set_objective(np.concatenate([c, np.zeros(m)]))
    for _ in range(4):
        status, entering = t.run(max_pivots)
        if status == "iteration-limit":
            return {"status": "numerically-unstable", "message": "phase 2 hit the iteration limit"}
        t.refactor()
        drift = (t.b < -FLOAT_CHECK_TOL).any()
        if status == "optimal" and not drift and not (t.r > PIVOT_TOL).any():
            break
        if status == "unbounded" and not drift:
            break
        np.maximum(t.b, 0.0, out=t.b)
    else:
        return {"status": "numerically-unstable", "message": "basis did not settle after refactorization"}
    stats = {"phase1_pivots": phase1, "phase2_pivots": t.pivots - phase1}
    x = np.zeros(n)
    mask = t.basis < n
    x[t.basis[mask]] = t.b[mask]
    if status == "unbounded":
        ray = np.zeros(n)
        ray[entering] = 1.0
        ray[t.basis[mask]] = -t.T[mask, entering]
        return {"status": "unbounded", "primal": x, "ray": ray, "stats": stats}
    return {"status": "optimal", "primal": x, "dual": t.dual(), "stats": stats}


def _solve_highs(A: sp.csr_matrix, b: np.ndarray, c: np.ndarray):
    m, n = A.shape
    res = linprog(-c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    stats = {"highs_iterations": int(getattr(res, "nit", 0))}
    if res.status == 0:
        # marginals are d(min -c.x)/db, so the max-problem dual is their negation
        return {"status": "optimal", "primal": np.clip(res.x, 0.0, None), "dual": -res.eqlin.marginals,
                "stats": stats}
    if res.status == 2:
        # Farkas ray: maximize b.y subject to A^T y <= 0 and b.y <= 1
        aux = linprog(-b, A_ub=sp.vstack([A.T, sp.csr_matrix(b.reshape(1, -1))]).tocsr(),
                      b_ub=np.concatenate([np.zeros(n), [1.0]]), bounds=(None, None), method="highs")
        if aux.status != 0 or -aux.fun <= FLOAT_CHECK_TOL:
            return {"status": "numerically-unstable", "message": "HiGHS reported infeasible but no Farkas ray found"}
        return {"status": "infeasible", "farkas": aux.x, "stats": stats}
    if res.status == 3:
        feas = linprog(np.zeros(n), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        ray = linprog(-c, A_eq=A, b_eq=np.zeros(m), A_ub=sp.csr_matrix(c.reshape(1, -1)), b_ub=[1.0],
                      bounds=(0, None), method="highs")
        if feas.status != 0 or ray.status != 0:
            return {"status": "numerically-unstable", "message": "HiGHS reported unbounded but no ray found"}
        return {"status": "unbounded", "primal": np.clip(feas.x, 0.0, None), "ray": np.clip(ray.x, 0.0, None),
                "stats": stats}
    return {"status": "numerically-unstable", "message": f"HiGHS status {res.status}: {res.message}"}


# --- driver ------------------------------------------------------------------

def solve_lp(lp: LinearProgram, arithmetic: str = "exact", engine: str = "auto") -> LpSolution:
    """Solve ``lp`` after presolve; see the module docstring.

    ``engine`` selects the float backend: ``simplex`` (dense tableau),
    ``highs``, or ``auto`` (tableau up to DENSE_FLOAT_LIMIT entries).
    Exact arithmetic always uses the rational simplex.
    """
    if arithmetic not in ("exact", "float"):
        raise InputError(f"arithmetic must be 'exact' or 'float', got {arithmetic!r}")
    if engine not in ENGINES:
        raise InputError(f"engine must be one of {ENGINES}, got {engine!r}")
    start = time.perf_counter()
    exact = arithmetic == "exact"
    if exact:
        conv = lambda v: gmpy2.mpq(_to_fraction(v))  # noqa: E731
        zero = gmpy2.mpq(0)
    else:
        conv = float
        zero = 0.0
    rows = [{k: conv(v) for k, v in row.items()} for row, _ in lp.equalities]
    rhs = [conv(v) for _, v in lp.equalities]
    cost = {k: conv(v) for k, v in lp.objective.items()}
    n = lp.num_vars

    pre = _presolve(rows, rhs, n)
    stats = {"rows": len(rows), "vars": n, "presolve_eliminated": len(pre.eliminated),
             "reduced_rows": len(pre.keep_rows), "reduced_vars": len(pre.keep_vars)}

    if pre.infeasible_row is not None:
        y = {pre.infeasible_row: conv(1 if rhs[pre.infeasible_row] > 0 else -1)}
        y = _postsolve_duals(rows, pre, y, cost, True, zero)
        res = {"status": "infeasible", "farkas_map": y, "stats": {}}
    else:
        var_pos = {k: p for p, k in enumerate(pre.keep_vars)}
        red_rows = [{var_pos[k]: v for k, v in rows[i].items() if k in var_pos} for i in pre.keep_rows]
        red_rhs = [rhs[i] for i in pre.keep_rows]
        red_cost = {var_pos[k]: v for k, v in cost.items() if k in var_pos}
        nr = len(pre.keep_vars)
        if exact:
            res = _solve_exact(red_rows, red_rhs, red_cost, nr)
        else:
            cvec = np.zeros(nr)
            for k, v in red_cost.items():
                cvec[k] = v
            bvec = np.array(red_rhs, dtype=float)
            if engine == "auto" or not (red_rows and nr):
                # empty reduced problems are trivial for the tableau and awkward for HiGHS
                engine = "simplex" if len(red_rows) * nr <= DENSE_FLOAT_LIMIT else "highs"
            ri = [i for i, row in enumerate(red_rows) for _ in row]
            ci = [k for row in red_rows for k in row]
            vals = [v for row in red_rows for v in row.values()]
            A = sp.csr_matrix((vals, (ri, ci)), shape=(len(red_rows), nr))
            if engine == "highs":
                res = _solve_highs(A, bvec, cvec)
            else:
                res = _solve_float(A.toarray(), bvec, cvec)
            stats["engine"] = engine

        def expand(vec):
            full = [zero] * n
            for p, k in enumerate(pre.keep_vars):
                full[k] = vec[p]
            return full

        for key in ("primal", "ray"):
            if key in res:
                res[key] = expand(res[key])
        for key, farkas in (("dual", False), ("farkas", True)):
            if key in res:
                y = {i: res[key][p] for p, i in enumerate(pre.keep_rows)}
                res[key + "_map"] = _postsolve_duals(rows, pre, y, cost, farkas, zero)

    stats.update(res.get("stats", {}))
    stats["wall_ms"] = round(1000 * (time.perf_counter() - start), 3)
    out = _to_fraction if exact else float

    def finish(vec):
        return None if vec is None else [out(v) for v in vec]

    def rows_vec(key):
        y = res.get(key)
        if y is None:
            return None
        return [out(y.get(i, zero)) for i in range(len(rows))]

    sol = LpSolution(status=res["status"], arithmetic=arithmetic, stats=stats, message=res.get("message", ""),
                     primal=finish(res.get("primal")), ray=finish(res.get("ray")),
                     dual=rows_vec("dual_map"), farkas=rows_vec("farkas_map"))
    if sol.primal is not None:
        sol.objective_value = sum((out(v) * sol.primal[k] for k, v in cost.items()), out(0))
    log.debug("solve_lp %s: %s %s", arithmetic, sol.status, stats)
    return sol


# --- certificate checking ----------------------------------------------------

@dataclass
class CertificateCheck:
    ok: bool
    failures: list[str] = field(default_factory=list)
    gap: object = None

    def __bool__(self):
        return self.ok


def _rowdot(row: dict, x) -> object:
    return sum((v * x[k] for k, v in row.items()), 0 * x[0] if x else 0)


def verify_certificate(lp: LinearProgram, sol: LpSolution, tol: float | None = None) -> CertificateCheck:
    """Re-check ``sol`` against ``lp`` from scratch.

    Exact solutions must satisfy every condition with equality (tolerance 0);
    float solutions use ``tol`` (default 1e-8) scaled by the data magnitude.
    """
    exact = sol.arithmetic == "exact"
    if exact:
        num = _to_fraction
        tol = Fraction(0)
    else:
        num = float
        tol = FLOAT_CHECK_TOL if tol is None else tol
    rows = [({k: num(v) for k, v in row.items()}, num(rhs)) for row, rhs in lp.equalities]
    cost = {k: num(v) for k, v in lp.objective.items()}
    n = lp.num_vars
    fails = []

    def columns_dot(y):
        acc = [num(0)] * n
        for (row, _), yi in zip(rows, y):
            if yi:
                for k, v in row.items():
                    acc[k] += v * yi
        return acc

    def check_primal(x):
        if x is None or len(x) != n:
            fails.append("primal vector missing or wrong length")
            return False
        worst_neg = max((-v for v in x), default=num(0))
        if worst_neg > tol:
            fails.append(f"primal negativity {worst_neg}")
        for i, (row, rhs) in enumerate(rows):
            res = abs(_rowdot(row, x) - rhs)
            if res > tol * max(1, abs(rhs)):
                fails.append(f"equality {i} residual {res}")
                break
        return True

    check = CertificateCheck(ok=False)
    if sol.status == "optimal":
        x, y = sol.primal, sol.dual
        if check_primal(x):
            cx = sum((v * x[k] for k, v in cost.items()), num(0))
            if sol.objective_value is None or abs(cx - num(sol.objective_value)) > tol * max(1, abs(cx)):
                fails.append(f"objective_value {sol.objective_value} != c.x {cx}")
            if y is None or len(y) != len(rows):
                fails.append("dual vector missing or wrong length")
            else:
                aty = columns_dot(y)
                by = sum((rhs * yi for (_, rhs), yi in zip(rows, y)), num(0))
                check.gap = abs(cx - by)
                if check.gap > tol * max(1, abs(cx)):
                    fails.append(f"duality gap {check.gap}")
                for k in range(n):
                    slack = aty[k] - cost.get(k, 0)
                    if slack < -tol:
                        fails.append(f"dual infeasible at column {k}: {slack}")
                        break
                    if abs(x[k] * slack) > tol:
                        fails.append(f"complementary slackness fails at column {k}")
                        break
    elif sol.status == "infeasible":
        y = sol.farkas
        if y is None or len(y) != len(rows):
            fails.append("Farkas ray missing or wrong length")
        else:
            aty = columns_dot(y)
            worst = max(aty, default=num(0))
            by = sum((rhs * yi for (_, rhs), yi in zip(rows, y)), num(0))
            scale = max((abs(v) for v in y), default=num(1)) or num(1)
            if worst > tol * scale:
                fails.append(f"Farkas y.A has positive entry {worst}")
            if not by > tol * scale:
                fails.append(f"Farkas y.b = {by} is not positive")
    elif sol.status == "unbounded":
        if check_primal(sol.primal):
            d = sol.ray
            if d is None or len(d) != n:
                fails.append("unbounded ray missing")
            else:
                if min(d, default=num(0)) < -tol:
                    fails.append("ray has negative entries")
                for i, (row, _) in enumerate(rows):
                    if abs(_rowdot(row, d)) > tol:
                        fails.append(f"ray violates homogeneous equality {i}")
                        break
                cd = sum((v * d[k] for k, v in cost.items()), num(0))
                if not cd > tol:
                    fails.append(f"ray does not improve the objective (c.d = {cd})")
    else:
        fails.append(f"no certificate for status {sol.status!r}")
    check.ok = not fails
    check.failures = fails
    return check


def lp_from_dense(A, b, c) -> LinearProgram:
    """Convenience for tests: build from dense nested sequences."""
    A = [list(r) for r in A]
    n = len(c)
    return LinearProgram(n, [({k: v for k, v in enumerate(r) if v != 0}, bi) for r, bi in zip(A, b)],
                         {k: v for k, v in enumerate(c) if v != 0})


def as_float_vector(values: Iterable) -> np.ndarray:
    return np.array([float(v) for v in values])
