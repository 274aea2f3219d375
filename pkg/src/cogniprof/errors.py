"""Exception hierarchy shared across the package."""


class CogniprofError(Exception):
    """Base class for all package errors."""


class CorpusParseError(CogniprofError):
    """A corpus file could not be parsed (carries the offending line number)."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ValidationError(CogniprofError):
    """Input violated a documented invariant (duplicate ids, bad ranges, ...)."""


class LexiconError(CogniprofError):
    """A lexicon file is malformed or uses an unsupported matcher kind."""


class UndefinedCorrelationError(CogniprofError):
    """Pearson correlation is undefined (constant input vector)."""


class TrainingError(CogniprofError):
    """A model could not be trained from the given data."""


class BoundaryRejectedError(CogniprofError):
    """An occupation boundary update was rejected (too few orientation points)."""


class BundleVersionError(CogniprofError):
    """A model bundle was written by an incompatible format version."""


class BundleChecksumError(CogniprofError):
    """A model bundle file is corrupt (checksum mismatch or truncation)."""
