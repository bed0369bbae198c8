"""Exception hierarchy shared by all modules."""


class SjndError(Exception):
    """Base class for all errors raised by this package."""


class InputError(SjndError):
    """A file could not be read or parsed (missing, truncated, bad format)."""


class ValidationError(SjndError):
    """Inputs parsed fine but violate a precondition (dimensions, ranges, config)."""
