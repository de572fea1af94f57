#!/usr/bin/env python3
"""
Cairn-Check Exceptions
One hierarchy for every failure the toolkit can report. The CLI maps these
onto its exit-code contract (see scripts/cairn_check.py).
"""

from typing import Any, Dict, Optional


class CairnCheckError(Exception):
    """Base class for all cairn-check errors"""
    pass


class ParseError(CairnCheckError, ValueError):
    """Malformed word or interval literal"""

    def __init__(self, message: str, text: str = "", position: Optional[int] = None):
        self.text = text
        self.position = position
        if position is not None:
            message = f"{message} (position {position} in {text!r})"
        super().__init__(message)


class ResourceLimitError(CairnCheckError):
    """A request exceeded a configured cap"""

    def __init__(self, limit: str, requested: int, cap: int):
        self.limit = limit
        self.requested = requested
        self.cap = cap
        super().__init__(f"{limit} {requested} exceeds configured cap {cap}")


class ConsistencyError(CairnCheckError):
    """An internal check that the theory guarantees has failed"""
    pass


class DimensionMismatchError(CairnCheckError, ValueError):
    """Vectors or subspaces live in different ambient spaces"""

    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"ambient dimension mismatch: expected {expected}, got {actual}")


class OutOfWindowError(CairnCheckError, KeyError):
    """Interval is not a subinterval of the model's window"""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "interval outside window"


class DecompositionError(CairnCheckError):
    """A decomposition residual exceeded its tolerance"""

    def __init__(self, message: str, worst: Dict[str, Any]):
        self.worst = worst
        super().__init__(f"{message}: {worst}")


class ConvergenceError(CairnCheckError):
    """Iterative eigensolver did not reach the residual target"""

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (last residual {residual:.3e})")


class ConfigError(CairnCheckError):
    """Invalid configuration file or flag combination"""
    pass


class CheckFailed(CairnCheckError):
    """Raised inside a sweep when one instance produces a counterexample"""

    def __init__(self, counterexample: Dict[str, Any]):
        self.counterexample = counterexample
        super().__init__(f"counterexample: {counterexample}")
