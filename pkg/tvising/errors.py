"""
Error types.

Each error carries the process exit code the CLI reports for it, the same
way an HTTP error carries its status code.
"""


class TvisingError(Exception):
    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class InvalidInputError(TvisingError, ValueError):
    """Bad shapes, values, or configuration."""
    exit_code = 1


class SolverError(TvisingError, ArithmeticError):
    """The optimizer produced a non-finite iterate."""
    exit_code = 2

    def __init__(self, detail: str, node: int | None = None):
        super().__init__(detail)
        self.node = node


class DataIOError(TvisingError, OSError):
    """A file could not be read, parsed, or written."""
    exit_code = 3
