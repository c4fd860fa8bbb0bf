"""Error taxonomy shared by the library and the CLI.

Each class carries a distinct process exit code so command failures are
machine-distinguishable (argument / parse / schema / validation / numeric).
"""


class ToolError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ArgumentError(ToolError):
    """A caller supplied an argument outside an operation's contract."""

    exit_code = 2


class ParseError(ToolError):
    """Malformed input text (ARFF, XML, checkpoint, config)."""

    exit_code = 3

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaError(ToolError):
    """Structurally valid input that does not match the expected schema."""

    exit_code = 4


class ValidationError(ToolError):
    """Well-formed input whose content violates a declared invariant."""

    exit_code = 5


class NumericError(ToolError):
    """Non-finite values where finite numbers are required."""

    exit_code = 6


class DivergenceError(NumericError):
    """Training produced a non-finite loss."""

    exit_code = 6


class UndefinedMetricError(ToolError):
    """A metric is undefined on the given inputs (e.g. no positive labels)."""

    exit_code = 7
