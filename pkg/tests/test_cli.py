import json
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from gnsthardy.behavior import Scenario, deterministic_behavior, serialize_behavior, uniform_behavior
from gnsthardy.cli import main
from gnsthardy.quantum import QuantumModel, computational_basis, ghz_state, model_to_doc


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.fixture
def optimum_file(tmp_path, capsys):
    cert = tmp_path / "cert.json"
    code, _ = run(capsys, "optimize", "--family", "general", "--parties", "3", "--outcomes", "2,2,2",
                  "--arith", "exact", "--out", str(cert))
    assert code == 0
    path = tmp_path / "optimum.json"
    path.write_text(json.dumps(json.loads(cert.read_text())["behavior"]))
    return path


class TestOptimize:
    def test_three_qubits(self, capsys):
        code, doc = run(capsys, "optimize", "--family", "general", "--parties", "3", "--outcomes", "2,2,2",
                        "--arith", "exact")
        assert code == 0
        assert doc["format"] == "gnst-certificate/1" and doc["q_star"] == "1/3" and doc["verified"]

    def test_identical_bytes_in_exact_mode(self):
        cmd = [sys.executable, "-m", "gnsthardy", "optimize", "--parties", "3", "--outcomes", "2", "--arith", "exact"]
        first = subprocess.run(cmd, capture_output=True, check=True).stdout
        second = subprocess.run(cmd, capture_output=True, check=True).stdout
        assert first == second

    def test_fixed_j_is_one_based(self, capsys):
        code, doc = run(capsys, "optimize", "--outcomes", "2,2,2", "--fixed-j", "1", "--arith", "exact")
        assert code == 0 and doc["argument"]["fixed_j"] == 1 and doc["q_star"] == "1/3"

    def test_conventional(self, capsys):
        _, doc = run(capsys, "optimize", "--family", "conventional", "--outcomes", "3,3,3")
        assert doc["q_star"] == "1/2"

    def test_float(self, capsys):
        _, doc = run(capsys, "optimize", "--outcomes", "2,2,2", "--arith", "float")
        assert doc["arithmetic"] == "float" and abs(doc["q_star"] - 1 / 3) < 1e-9

    def test_mismatched_parties(self, capsys):
        code, doc = run(capsys, "optimize", "--parties", "3", "--outcomes", "2,2")
        assert code == 2 and doc["error"] == "invalid_input"

    def test_chen_with_qutrits(self, capsys):
        code, _ = run(capsys, "optimize", "--family", "chen", "--outcomes", "3,3,3")
        assert code == 2


class TestWitness:
    def test_product_is_local(self, tmp_path, capsys):
        path = tmp_path / "product.json"
        b = deterministic_behavior(Scenario.uniform(3, 2), lambda p, s: 1 + s)
        path.write_text(serialize_behavior(b))
        code, doc = run(capsys, "witness", "ns2", str(path))
        assert code == 0 and doc["status"] == "local" and doc["witness"] is None

    def test_optimum_is_genuinely_nonlocal(self, optimum_file, capsys):
        code, doc = run(capsys, "witness", "ns2", str(optimum_file))
        assert code == 3
        assert doc["status"] == "genuinely_nonlocal" and doc["decomposition"] is None
        w = doc["witness"]
        assert Fraction(w["value"]) > Fraction(w["bound"])

    def test_svetlichny_uniform(self, tmp_path, capsys):
        path = tmp_path / "uniform.json"
        path.write_text(serialize_behavior(uniform_behavior(Scenario.uniform(3, 2))))
        code, doc = run(capsys, "witness", "svetlichny", str(path))
        assert code == 0 and doc["notion"] == "svetlichny"

    def test_four_parties_out_of_scope(self, tmp_path, capsys):
        path = tmp_path / "four.json"
        path.write_text(serialize_behavior(uniform_behavior(Scenario.uniform(4, 2))))
        code, doc = run(capsys, "witness", "ns2", str(path))
        assert code == 4 and doc["error"] == "unsupported_scope"

    def test_missing_file(self, tmp_path, capsys):
        code, doc = run(capsys, "witness", "ns2", str(tmp_path / "nope.json"))
        assert code == 2

    def test_malformed_file(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{"format": "gnst-behavior/1", "parties": 2}')
        code, doc = run(capsys, "witness", "ns2", str(path))
        assert code == 2 and doc["format"] == "gnst-error/1"


class TestCheck:
    def test_with_family(self, optimum_file, capsys):
        code, doc = run(capsys, "check", str(optimum_file), "--family", "general")
        assert code == 0 and doc["valid"]
        assert doc["evaluation"]["q"] == "1/3" and doc["evaluation"]["satisfied"]

    def test_with_argument_file(self, optimum_file, tmp_path, capsys):
        arg = tmp_path / "arg.json"
        code, _ = run(capsys, "argument", "show", "--outcomes", "2,2,2", "--out", str(arg))
        assert code == 0
        code, doc = run(capsys, "check", str(optimum_file), "--argument", str(arg))
        assert doc["evaluation"]["satisfied"]

    def test_signaling_behavior(self, tmp_path, capsys):
        doc = json.loads(serialize_behavior(uniform_behavior(Scenario((2, 2)))))
        doc["contexts"][2] = ["1/2", "1/2", "0/1", "0/1"]  # Bob's marginal now depends on Alice's setting
        path = tmp_path / "sig.json"
        path.write_text(json.dumps(doc))
        code, out = run(capsys, "check", str(path))
        assert code == 2 and not out["valid"] and out["ns_residual"] > 0


class TestQuantum:
    def test_build(self, tmp_path, capsys):
        basis = computational_basis(2)
        m = QuantumModel(ghz_state((2, 2, 2)), ((basis, basis),) * 3)
        path = tmp_path / "ghz.json"
        path.write_text(json.dumps(model_to_doc(m)))
        code, doc = run(capsys, "quantum", "build", str(path))
        assert code == 0 and doc["format"] == "gnst-behavior/1" and doc["arithmetic"] == "float"
        assert np.isclose(doc["contexts"][0][0], 0.5) and np.isclose(doc["contexts"][0][7], 0.5)

    def test_search(self, capsys):
        code, doc = run(capsys, "quantum", "search", "--outcomes", "2,2", "--seed", "1", "--budget", "1")
        assert code == 0 and doc["format"] == "gnst-quantum-search/1"
        assert doc["model"]["format"] == "gnst-quantum/1"

    def test_search_budget_zero(self, capsys):
        code, _ = run(capsys, "quantum", "search", "--outcomes", "2,2", "--budget", "0")
        assert code == 2


class TestSweepAndArgument:
    def test_sweep(self, tmp_path, capsys):
        code, doc = run(capsys, "sweep", "--parties", "2,3", "--outcomes", "2", "--arith", "exact",
                        "--out", str(tmp_path), "--jobs", "1")
        assert code == 0
        assert [r["q_star"] for r in doc["rows"]] == ["1/2", "1/3"]
        assert (tmp_path / "summary.csv").exists()

    def test_argument_show(self, capsys):
        code, doc = run(capsys, "argument", "show", "--family", "chen", "--parties", "3", "--outcomes", "2")
        assert code == 0 and doc["positive_event"] == "P(1,1,1|uuu)" and len(doc["zero_events"]) == 5


class TestUsage:
    def test_unknown_command(self):
        proc = subprocess.run([sys.executable, "-m", "gnsthardy", "bogus"], capture_output=True, text=True)
        assert proc.returncode == 2 and "usage" in proc.stderr and proc.stdout == ""

    def test_unknown_flag(self):
        proc = subprocess.run([sys.executable, "-m", "gnsthardy", "optimize", "--bogus"], capture_output=True,
                              text=True)
        assert proc.returncode == 2 and "usage" in proc.stderr
