"""Independent reference computations used to check the library.

Nothing here calls into the package's index arithmetic, LP engine or
membership models; each oracle works from first principles by brute force.
"""
import itertools
import math
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

HARDY_QUBIT_OPTIMUM = (5 * math.sqrt(5) - 11) / 2


def enumerate_events(dims):
    """(settings, outcomes) pairs in flat table order: contexts outermost."""
    n = len(dims)
    return [(s, o) for s in itertools.product((0, 1), repeat=n)
            for o in itertools.product(*(range(1, d + 1) for d in dims))]


def table_dict(dims, fn):
    return {(s, o): fn(s, o) for s, o in enumerate_events(dims)}


def ns_residual(dims, p):
    """Largest change of any marginal over N-1 parties when one party flips setting."""
    n = len(dims)
    worst = 0
    for i in range(n):
        others = [k for k in range(n) if k != i]
        for s_rest in itertools.product((0, 1), repeat=n - 1):
            for o_rest in itertools.product(*(range(1, dims[k] + 1) for k in others)):
                sums = []
                for si in (0, 1):
                    total = 0
                    for oi in range(1, dims[i] + 1):
                        s, o = [0] * n, [0] * n
                        s[i], o[i] = si, oi
                        for k, sk, ok in zip(others, s_rest, o_rest):
                            s[k], o[k] = sk, ok
                        total += p[(tuple(s), tuple(o))]
                    sums.append(total)
                worst = max(worst, abs(sums[0] - sums[1]))
    return worst


def anticorrelated_pr_box():
    """P(11|uu) = P(22|uu) = 1/2; every other context anti-correlated."""
    def fn(s, o):
        if s == (0, 0):
            return Fraction(1, 2) if o[0] == o[1] else Fraction(0)
        return Fraction(1, 2) if o[0] != o[1] else Fraction(0)
    return table_dict((2, 2), fn)


def svetlichny_box():
    """P(abc|xyz) = 1/4 iff a+b+c = xy+yz+zx (mod 2), outcome bits a = o - 1."""
    def fn(s, o):
        x, y, z = s
        bits = [k - 1 for k in o]
        return Fraction(1, 4) if sum(bits) % 2 == (x * y + y * z + z * x) % 2 else Fraction(0)
    return table_dict((2, 2, 2), fn)


def svetlichny_game_value(p):
    """Average over the 8 contexts of P(a+b+c = xy+yz+zx mod 2)."""
    total = 0
    for (s, o), v in p.items():
        x, y, z = s
        if sum(k - 1 for k in o) % 2 == (x * y + y * z + z * x) % 2:
            total += v
    return total / 8


def svetlichny_bilocal_bound():
    """Best game value of a deterministic two-party strategy times a deterministic third party.

    Hybrid models are mixtures of these, so this is the hybrid-local maximum.
    Any two-party joint strategy (even signaling) is a map from the pair's
    settings to a pair of bits; only their parity matters for the game.
    """
    best = 0
    for single in range(3):
        for parity in itertools.product((0, 1), repeat=4):
            for c in itertools.product((0, 1), repeat=2):
                wins = 0
                for s in itertools.product((0, 1), repeat=3):
                    x, y, z = s
                    pair = [k for k in range(3) if k != single]
                    total = parity[2 * s[pair[0]] + s[pair[1]]] + c[s[single]]
                    wins += total % 2 == (x * y + y * z + z * x) % 2
                best = max(best, Fraction(wins, 8))
    return best


def born_probability(state, bases, settings, outcomes):
    """|<b_1 x ... x b_N|state>|^2 via an explicit Kronecker product."""
    vec = np.array([1.0 + 0j])
    for p, (s, o) in enumerate(zip(settings, outcomes)):
        vec = np.kron(vec, np.asarray(bases[p][s])[o - 1])
    return abs(np.vdot(vec, state)) ** 2


def gnst_hardy_optimum(dims, positive, zeros):
    """Max P(positive) over no-signaling behaviors with the given zero events, via HiGHS.

    Variables are built directly from the event list; one normalization row per
    context and one no-signaling row per (party, other settings, other outcomes).
    """
    events = enumerate_events(dims)
    col = {e: k for k, e in enumerate(events)}
    n = len(dims)
    rows, rhs = [], []
    for s in itertools.product((0, 1), repeat=n):
        row = np.zeros(len(events))
        for o in itertools.product(*(range(1, d + 1) for d in dims)):
            row[col[(s, o)]] = 1
        rows.append(row)
        rhs.append(1)
    for i in range(n):
        others = [k for k in range(n) if k != i]
        for s_rest in itertools.product((0, 1), repeat=n - 1):
            for o_rest in itertools.product(*(range(1, dims[k] + 1) for k in others)):
                row = np.zeros(len(events))
                for si, sign in ((0, 1), (1, -1)):
                    for oi in range(1, dims[i] + 1):
                        s, o = [0] * n, [0] * n
                        s[i], o[i] = si, oi
                        for k, sk, ok in zip(others, s_rest, o_rest):
                            s[k], o[k] = sk, ok
                        row[col[(tuple(s), tuple(o))]] += sign
                rows.append(row)
                rhs.append(0)
    for z in zeros:
        row = np.zeros(len(events))
        row[col[z]] = 1
        rows.append(row)
        rhs.append(0)
    c = np.zeros(len(events))
    c[col[positive]] = -1
    res = linprog(c, A_eq=np.array(rows), b_eq=rhs, bounds=(0, None), method="highs")
    assert res.status == 0, res.message
    return -res.fun


def linprog_max(A, b, c):
    """(status, value) of max c.x s.t. Ax = b, x >= 0 with HiGHS."""
    res = linprog(-np.asarray(c, float), A_eq=np.asarray(A, float), b_eq=np.asarray(b, float),
                  bounds=(0, None), method="highs")
    status = {0: "optimal", 2: "infeasible", 3: "unbounded"}.get(res.status, "other")
    return status, (-res.fun if res.status == 0 else None)


def generalized_pr_box(d):
    """Two-party no-signaling box: P(a,b|x,y) = 1/d iff b - a = x*y (mod d)."""
    return lambda s, o: Fraction(1, d) if (o[1] - o[0]) % d == (s[0] * s[1]) % d else Fraction(0)


def random_group_behavior(rng, d):
    """Random no-signaling two-party behavior: mixture of PR-type boxes, products and uniform noise."""
    parts = [generalized_pr_box(d), lambda s, o: Fraction(1, d * d)]
    for _ in range(2):
        a = [int(v) for v in rng.integers(1, d + 1, size=2)]
        b = [int(v) for v in rng.integers(1, d + 1, size=2)]
        parts.append(lambda s, o, a=a, b=b: Fraction(int(o[0] == a[s[0]] and o[1] == b[s[1]])))
    raw = [Fraction(int(w)) for w in rng.integers(0, 4, size=len(parts))]
    raw[0] += 1
    weights = [w / sum(raw) for w in raw]
    return lambda s, o: sum(w * f(s, o) for w, f in zip(weights, parts))


def hybrid_product(dims, singleton, group_fn, strategy):
    """Table of Q(group) x V(singleton); ``strategy[s]`` is the singleton's 1-based outcome."""
    group = [k for k in range(3) if k != singleton]

    def fn(s, o):
        if o[singleton] != strategy[s[singleton]]:
            return Fraction(0)
        return group_fn(tuple(s[k] for k in group), tuple(o[k] for k in group))
    return table_dict(dims, fn)


def random_ns2_local(rng, d, components=3):
    """Random convex mixture of group-no-signaling x deterministic products over random bipartitions."""
    dims = (d, d, d)
    raw = [Fraction(int(w)) for w in rng.integers(1, 6, size=components)]
    total = {e: Fraction(0) for e in enumerate_events(dims)}
    for w in raw:
        p = int(rng.integers(0, 3))
        strategy = [int(v) for v in rng.integers(1, d + 1, size=2)]
        part = hybrid_product(dims, p, random_group_behavior(rng, d), strategy)
        for e, v in part.items():
            total[e] += w / sum(raw) * v
    return total
