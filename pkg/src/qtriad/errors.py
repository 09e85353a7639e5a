"""Exception types shared across the package."""


class QtriadError(Exception):
    """Base class for all package-specific errors."""


class NormalizationError(QtriadError, ValueError):
    """A state vector or density matrix failed a normalization/validity check."""


class InvalidBasisError(QtriadError, ValueError):
    """A measurement basis is malformed (e.g. Lambda without an angle)."""


class TransportError(QtriadError, RuntimeError):
    """Classical-channel failure: framing, handshake, timeout, or disconnect."""


class HandshakeError(TransportError):
    """Session setup failed (version mismatch or malformed SessionStart)."""


class FrameError(TransportError):
    """A wire frame could not be decoded (truncated, oversize, unknown type)."""
