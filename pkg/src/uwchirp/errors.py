"""Exception types shared across the package."""


class UwChirpError(Exception):
    """Base class for all package errors."""


class DetectionError(UwChirpError):
    """No packet or no valid path could be detected in the buffer."""


class TruncatedFrameError(UwChirpError):
    """A demodulation window would run past the end of the buffer."""


class ProfileFormatError(UwChirpError):
    """A channel-profile document could not be parsed or violates invariants."""


class CodeConstructionError(UwChirpError):
    """Parity-check matrix construction failed (e.g. rank deficiency)."""
