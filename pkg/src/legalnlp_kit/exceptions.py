"""Exception types shared across the package."""


class LegalNlpError(Exception):
    """Base class for all errors raised by this package."""


class CorpusFormatError(LegalNlpError):
    """A corpus file could not be parsed (bad encoding, malformed record)."""


class EmptyCorpusError(LegalNlpError):
    """An operation that needs at least one usable token got none."""


class ModelFormatError(LegalNlpError):
    """A model file is corrupt, truncated, or has the wrong section tag."""
