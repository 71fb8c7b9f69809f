"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class GnstError(Exception):
    """Base class for all package errors."""


class InputError(GnstError, ValueError):
    """Invalid arguments: wrong lengths, out-of-range labels, mismatched scenarios."""


class ParseError(InputError):
    """Malformed document. ``location`` points at the offending field when known."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        if location:
            message = f"{location}: {message}"
        super().__init__(message)


class FamilyError(InputError):
    """Hardy family incompatible with the scenario (e.g. ChenQubit with d > 2)."""


class SignalingError(InputError):
    """Behavior violates no-signaling beyond tolerance where a marginal is required."""


class UnsupportedScopeError(GnstError):
    """Instance outside the supported scope of an operation."""


class SolverError(GnstError):
    """LP solver failed (numerical breakdown, unexpected status)."""
