"""Exception taxonomy shared across the package (and mapped to CLI exit codes)."""


class MadopickError(Exception):
    """Base class for package errors."""


class DataError(MadopickError):
    """Input data cannot be used (parsing, shape or content problems)."""


class NumericalError(MadopickError):
    """A numerical procedure failed to reach its stated accuracy."""
