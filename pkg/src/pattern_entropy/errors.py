"""Exception types shared across the package."""


class InfeasibleError(ValueError):
    """Raised when a requested exact computation exceeds a configured scale cap."""


class HeaderMismatchError(ValueError):
    """Container header does not match the model supplied to the decoder."""


class CorruptPayloadError(ValueError):
    """Range-coded payload is malformed or the decoder lost synchronisation."""
