"""
Exceptions raised by the desattack packages.
"""

from typing import Optional


class AutomatonError(ValueError):
    """Malformed automaton, alphabet attribute conflict or unknown event."""


class AttackModelError(ValueError):
    """Invalid attack specification or attack automaton."""


class SynthesisError(RuntimeError):
    """A supervisor cannot be synthesized because a precondition fails."""

    def __init__(self, message: str, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class ModelParseError(ValueError):
    """Syntax or validation error in a model file, with its position."""

    def __init__(self, reason: str, line: int = 0, column: int = 0, source: Optional[str] = None):
        self.reason = reason
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {reason}")
