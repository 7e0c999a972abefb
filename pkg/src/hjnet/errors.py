"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (CLI exit code 2),
numerical failures from :class:`NumericalError` (CLI exit code 3).
"""


class HJNetError(Exception):
    """Base class for all package errors."""


class ValidationError(HJNetError, ValueError):
    pass


class NumericalError(HJNetError, ArithmeticError):
    pass


class GraphInvalid(ValidationError):
    pass


class ConcatMismatch(ValidationError):
    pass


class EnumerationCapExceeded(HJNetError):
    pass


class SchemaError(ValidationError):
    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class NotCoercive(NumericalError):
    pass


class QuasiconvexityRequired(ValidationError):
    pass


class ConvexityRequired(ValidationError):
    pass


class LevelBelowMin(ValidationError):
    pass


class H4Violated(ValidationError):
    pass


class NoConvergence(NumericalError):
    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)


class ForkConditionViolated(ValidationError):
    pass


class BracketFailure(NumericalError):
    pass


class EmptyAubry(NumericalError):
    pass


class TraceIncompatible(ValidationError):
    pass
