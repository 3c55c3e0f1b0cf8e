"""Exception types shared across the toolkit."""


class CodeAnonError(Exception):
    """Base class for all toolkit errors."""


class ParseError(CodeAnonError):
    """Malformed input record (bad JSON, wrong shape)."""


class StructuralError(CodeAnonError):
    """Syntactically valid record that does not encode a rooted tree."""


class CapacityError(CodeAnonError):
    """A snippet has more unique OOV values than the placeholder budget."""


class NotInvertibleError(CodeAnonError):
    """De-anonymization requested for a lossy regime."""


class CorruptionError(CodeAnonError):
    """Anonymized snippet references a placeholder absent from its map."""


class SplitError(CodeAnonError):
    """Repository split cannot satisfy the requested fraction."""


class InjectionError(CodeAnonError):
    """No eligible bug/fix position pair exists in a function."""


class EvalError(CodeAnonError):
    """Predictions and ground truth cannot be aligned."""
