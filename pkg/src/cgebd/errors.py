"""Exception types shared across the package."""


class CgebdError(Exception):
    """Base class for all package errors."""


class ConfigError(CgebdError, ValueError):
    pass


class ShapeError(CgebdError, ValueError):
    pass


class InvalidSampleCount(CgebdError, ValueError):
    pass


class CodecError(CgebdError):
    pass


class EmptyVideo(CodecError, ValueError):
    pass


class InvalidDimensions(CodecError, ValueError):
    pass


class CorruptStream(CodecError):
    """Malformed stream bytes. ``offset`` is the byte position where parsing failed."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class BadMagic(CorruptStream):
    pass


class BadVersion(CorruptStream):
    pass


class Truncated(CorruptStream):
    pass
