"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: input validation -> 2,
capacity guard -> 3, solver non-convergence -> 4, corrupt index -> 5.
"""

from __future__ import annotations


class KemenyError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class InputError(KemenyError):
    """Invalid user input: bad files, bad flags, bad graph arguments."""

    exit_code = 2


class ParseError(InputError):
    """Malformed edge-list or update-stream line."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class EmptyGraphError(InputError):
    """Graph has no nodes after parsing."""


class InvalidEdgeError(InputError):
    """Edge endpoints out of range, equal, or edge already/not present."""


class ConnectivityError(InputError):
    """Operation requires a connected graph (or would disconnect one)."""


class InvalidPathError(InputError):
    """Node sequence is not a simple path of the graph."""


class CapacityError(KemenyError):
    """Problem size exceeds a documented guard."""

    exit_code = 3


class ConvergenceError(KemenyError):
    """Iterative solver hit its iteration cap before the tolerance."""

    exit_code = 4


class CorruptIndexError(KemenyError):
    """Index bytes fail magic, structural, or revalidation checks."""

    exit_code = 5
