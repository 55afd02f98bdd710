"""Exception types shared across the package."""


class PsmiluError(Exception):
    """Base class for all errors raised by this package."""


class StructureError(PsmiluError):
    """Malformed sparse structure: out-of-range index, bad pointer array,
    or a structurally singular input (empty row or column)."""


class MatrixMarketError(PsmiluError):
    """Matrix Market parse failure.  Carries the 1-based line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SingularFactorError(PsmiluError):
    """The dense trailing block of the multilevel factorization is exactly
    singular.  Carries the 1-based level index."""

    def __init__(self, level, message=None):
        self.level = level
        super().__init__(message or f"singular dense block at level {level}")
