"""Exception hierarchy shared by every module."""

from __future__ import annotations


class PaperSurfError(Exception):
    """Base class for all library errors."""


class DomainError(PaperSurfError, ValueError):
    """An input lies outside the domain where an operation is defined."""


class SchemeError(PaperSurfError, ValueError):
    """A pairing scheme failed validation.

    ``diagnostics`` lists every failed invariant with its location.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics) or "invalid scheme")


class ConvergenceError(PaperSurfError):
    """An iterative refinement hit its cap without converging."""
