class HillkitError(Exception):
    """Base class for every error raised by hillkit."""


class DimensionError(HillkitError, ValueError):
    pass


class AmbientMismatch(HillkitError, ValueError):
    pass


class ContainmentError(HillkitError, ValueError):
    pass


class PreconditionError(HillkitError, ValueError):
    pass


class InvalidFiltration(PreconditionError):
    pass


class IterationCapError(HillkitError, RuntimeError):
    """A stabilization loop did not settle within the configured cap."""


class CertificateError(HillkitError, RuntimeError):
    """An internally produced certificate failed to verify.

    This signals a bug in hillkit, not a defect in the input.
    """
