"""Exception hierarchy. Every error raised by the package derives from ChunkCodecError."""


class ChunkCodecError(Exception):
    pass


class ConfigError(ChunkCodecError, ValueError):
    """Codec-graph configuration failed to parse or validate."""


class WavFormatError(ChunkCodecError, ValueError):
    """Malformed RIFF/WAVE file."""


class UnsupportedEncodingError(WavFormatError):
    pass


class ShapeError(ChunkCodecError, ValueError):
    pass


class WindowTooSmallError(ChunkCodecError, ValueError):
    def __init__(self, message, min_duration_ms=None):
        super().__init__(message)
        self.min_duration_ms = min_duration_ms


class CodeRangeError(ChunkCodecError, ValueError):
    """A token does not fit in the codebook / bit width."""


class CorruptStreamError(ChunkCodecError, ValueError):
    pass


class DacFormatError(ChunkCodecError, ValueError):
    pass


class BadMagicError(DacFormatError):
    pass


class VersionMismatchError(DacFormatError):
    pass


class TruncatedPayloadError(DacFormatError):
    pass


class LoudnessError(ChunkCodecError, ValueError):
    pass
