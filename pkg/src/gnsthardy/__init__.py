"""Hardy-type nonlocality arguments in generalized no-signaling theories.

Behavior tables, Hardy argument families, an exact/float LP engine with
verified certificates, hybrid-locality membership tests with Farkas
witnesses, and Born-rule behaviors.
"""
from .behavior import (Behavior, Scenario, deterministic_behavior, marginalize, mixture, parse_behavior,
                       relabel_parties, serialize_behavior, uniform_behavior, validate_behavior)
from .errors import (FamilyError, GnstError, InputError, ParseError, SignalingError, SolverError,
                     UnsupportedScopeError)
from .gnst import conjecture_sweep, optimize_success, random_hardy_feasible
from .hardy import HardyArgument, HardyFamily, build_argument, evaluate_argument
from .lp import LinearProgram, solve_lp, verify_certificate
from .quantum import QuantumModel, born_behavior, evaluate_quantum_hardy, search_hardy_model
from .witness import constrained_ns2_max, ns2_membership, svetlichny_membership

__all__ = [
    "Behavior", "Scenario", "deterministic_behavior", "marginalize", "mixture", "parse_behavior",
    "relabel_parties", "serialize_behavior", "uniform_behavior", "validate_behavior",
    "FamilyError", "GnstError", "InputError", "ParseError", "SignalingError", "SolverError",
    "UnsupportedScopeError", "conjecture_sweep", "optimize_success", "random_hardy_feasible",
    "HardyArgument", "HardyFamily", "build_argument", "evaluate_argument",
    "LinearProgram", "solve_lp", "verify_certificate",
    "QuantumModel", "born_behavior", "evaluate_quantum_hardy", "search_hardy_model",
    "constrained_ns2_max", "ns2_membership", "svetlichny_membership",
]
