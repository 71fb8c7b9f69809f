import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnsthardy.behavior import Scenario, validate_behavior
from gnsthardy.errors import InputError, ParseError
from gnsthardy.hardy import HardyArgument, HardyFamily, JointEvent, build_argument
from gnsthardy.quantum import (QuantumModel, born_behavior, computational_basis, evaluate_quantum_hardy,
                               ghz_state, model_to_doc, parse_model, product_state, random_model,
                               search_hardy_model)
from gnsthardy.witness import ns2_membership

import oracles


def computational_model(state, dims):
    return QuantumModel(state, tuple((computational_basis(d), computational_basis(d)) for d in dims))


def real_qubit_frame(angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, s], [-s, c]], dtype=complex)


class TestModel:
    def test_rejects_unnormalized_state(self):
        with pytest.raises(InputError):
            computational_model(np.array([1, 1, 0, 0], dtype=complex), (2, 2))

    def test_rejects_skewed_basis(self):
        skew = np.array([[1, 0], [1, 1]], dtype=complex) / math.sqrt(2)
        with pytest.raises(InputError):
            QuantumModel(product_state((2, 2), (1, 1)), ((skew, computational_basis(2)),) * 2)

    def test_rejects_wrong_state_length(self):
        with pytest.raises(InputError):
            computational_model(np.array([1, 0, 0], dtype=complex), (2, 2))


class TestBorn:
    def test_product_state_deterministic(self):
        b = born_behavior(computational_model(product_state((2, 2), (1, 1)), (2, 2)))
        for s in itertools.product((0, 1), repeat=2):
            assert b.prob(s, (1, 1)) == pytest.approx(1, abs=1e-15)

    def test_ghz(self):
        b = born_behavior(computational_model(ghz_state((2, 2, 2)), (2, 2, 2)))
        assert b.prob((0, 0, 0), (1, 1, 1)) == pytest.approx(0.5, abs=1e-15)
        assert b.prob((0, 0, 0), (2, 2, 2)) == pytest.approx(0.5, abs=1e-15)

    @settings(max_examples=100)
    @given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 2), (2, 3), (2, 2, 2), (3, 2, 2)]))
    def test_random_models_are_no_signaling(self, seed, dims):
        b = born_behavior(random_model(Scenario(dims), np.random.default_rng(seed)))
        rep = validate_behavior(b, 1e-10)
        assert rep.ok and rep.ns_residual <= 1e-10 and rep.normalization_residual <= 1e-10

    @settings(max_examples=25)
    @given(st.integers(0, 2**32 - 1))
    def test_matches_kronecker_oracle(self, seed):
        dims = (2, 3)
        m = random_model(Scenario(dims), np.random.default_rng(seed))
        b = born_behavior(m)
        for s, o in oracles.enumerate_events(dims):
            assert b.prob(s, o) == pytest.approx(oracles.born_probability(m.state, m.bases, s, o), abs=1e-12)

    @settings(max_examples=25)
    @given(st.integers(0, 2**32 - 1), st.integers(0, 2))
    def test_local_unitary_invariance(self, seed, party):
        dims = (2, 3, 2)
        rng = np.random.default_rng(seed)
        m = random_model(Scenario(dims), rng)
        d = dims[party]
        u, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
        ops = [np.eye(k) for k in dims]
        ops[party] = u
        full = ops[0]
        for op in ops[1:]:
            full = np.kron(full, op)
        bases = list(m.bases)
        bases[party] = tuple(frame @ u.T for frame in bases[party])
        moved = QuantumModel(full @ m.state, tuple(bases))
        assert np.allclose(born_behavior(moved).table, born_behavior(m).table, atol=1e-10)


class TestHardyEvaluation:
    def test_ghz_violates_z1(self):
        m = computational_model(ghz_state((2, 2, 2)), (2, 2, 2))
        ev = evaluate_quantum_hardy(m, build_argument(HardyFamily.CHEN_QUBIT, Scenario.uniform(3, 2)))
        assert ev.q_value == pytest.approx(0.5)
        assert ev.zero_violations and not ev.satisfied

    def test_scenario_mismatch(self):
        m = computational_model(ghz_state((2, 2)), (2, 2))
        with pytest.raises(InputError):
            evaluate_quantum_hardy(m, build_argument(HardyFamily.GENERALIZED_QUDIT, Scenario.uniform(3, 2)))

    def test_product_models_never_satisfy(self):
        # real qubit product states and measurement frames on a pi/4 grid
        arg = build_argument(HardyFamily.GENERALIZED_QUDIT, Scenario((2, 2)))
        angles = [k * math.pi / 4 for k in range(4)]
        local = list(itertools.product(angles, repeat=3))
        zeros_held = 0
        for (ta, ua, va), (tb, ub, vb) in itertools.product(local, repeat=2):
            state = np.kron([math.cos(ta), math.sin(ta)], [math.cos(tb), math.sin(tb)]).astype(complex)
            m = QuantumModel(state, ((real_qubit_frame(ua), real_qubit_frame(va)),
                                     (real_qubit_frame(ub), real_qubit_frame(vb))))
            ev = evaluate_quantum_hardy(m, arg)
            zeros_held += not ev.zero_violations
            assert not ev.satisfied
        assert zeros_held > 0


class TestSearch:
    def test_two_qubits_reach_hardy_optimum(self):
        sc = Scenario((2, 2))
        res = search_hardy_model(sc, build_argument(HardyFamily.GENERALIZED_QUDIT, sc), seed=0, budget=4)
        b = born_behavior(res.model)
        arg = build_argument(HardyFamily.GENERALIZED_QUDIT, sc)
        assert res.evaluation.satisfied
        assert res.evaluation.q_value == pytest.approx(oracles.HARDY_QUBIT_OPTIMUM, abs=1e-3)
        assert max(b.flat[i] for i in arg.zero_indices) <= 1e-9

    def test_deterministic_given_seed(self):
        sc = Scenario((2, 2))
        arg = build_argument(HardyFamily.GENERALIZED_QUDIT, sc)
        a = search_hardy_model(sc, arg, seed=3, budget=1)
        b = search_hardy_model(sc, arg, seed=3, budget=1)
        assert np.array_equal(a.model.state, b.model.state)

    def test_positive_event_required_zero(self):
        sc = Scenario((2, 2))
        cell = JointEvent((0, 0), (1, 1))
        toy = HardyArgument(sc, HardyFamily.GENERALIZED_QUDIT, 1, cell, (cell,))
        res = search_hardy_model(sc, toy, seed=0, budget=1)
        assert res.evaluation.q_value <= 1e-9

    def test_budget_validated(self):
        sc = Scenario((2, 2))
        with pytest.raises(InputError):
            search_hardy_model(sc, build_argument(HardyFamily.GENERALIZED_QUDIT, sc), budget=0)

    def test_three_qubit_model_is_genuinely_nonlocal(self):
        sc = Scenario.uniform(3, 2)
        arg = build_argument(HardyFamily.CHEN_QUBIT, sc)
        res = search_hardy_model(sc, arg, seed=0, budget=1)
        assert res.evaluation.satisfied
        print(f"three-qubit Hardy model: q = {res.evaluation.q_value:.6f}")
        assert ns2_membership(born_behavior(res.model)).status == "genuinely_nonlocal"


class TestModelDoc:
    @settings(max_examples=20)
    @given(st.integers(0, 2**32 - 1))
    def test_roundtrip(self, seed):
        m = random_model(Scenario((2, 3)), np.random.default_rng(seed))
        again = parse_model(json.dumps(model_to_doc(m)))
        assert np.array_equal(again.state, m.state)
        assert all(np.array_equal(x, y) for p, q in zip(again.bases, m.bases) for x, y in zip(p, q))

    def test_bad_pair(self):
        doc = model_to_doc(computational_model(ghz_state((2, 2)), (2, 2)))
        doc["state"][0] = [1.0]
        with pytest.raises(ParseError):
            parse_model(json.dumps(doc))

    def test_missing_basis(self):
        doc = model_to_doc(computational_model(ghz_state((2, 2)), (2, 2)))
        doc["bases"] = doc["bases"][:1]
        with pytest.raises(ParseError):
            parse_model(json.dumps(doc))
