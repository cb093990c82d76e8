"""Exception hierarchy.

Every error carries a short machine-readable ``code`` which the CLI echoes in
its JSON error payload.
"""


class BlockEntropyError(Exception):
    code = "error"


class DomainError(BlockEntropyError, ValueError):
    code = "domain"


class EmptyBlockError(DomainError):
    code = "empty-block"


class SizeError(BlockEntropyError, ValueError):
    code = "size"


class InsufficientTilesError(BlockEntropyError, ValueError):
    code = "insufficient-tiles"

    def __init__(self, requested, available):
        self.requested = requested
        self.available = available
        super().__init__(
            f"requested {requested} blocks but only {available} non-overlapping tiles fit in the image"
        )


class BoundsError(BlockEntropyError, IndexError):
    code = "out-of-bounds"


class ShapeError(BlockEntropyError, ValueError):
    code = "shape"


class ConfigError(BlockEntropyError, ValueError):
    code = "config"


class LevelError(BlockEntropyError, ValueError):
    code = "levels"


class DegenerateMomentsError(BlockEntropyError, ValueError):
    code = "degenerate-moments"


class InternalConsistencyError(BlockEntropyError, ArithmeticError):
    code = "internal"


class ImageFormatError(BlockEntropyError, ValueError):
    code = "format"


class ImageParseError(ImageFormatError):
    code = "parse"

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class UsageError(BlockEntropyError, ValueError):
    code = "usage"


class FetchError(BlockEntropyError, OSError):
    code = "fetch"


class DigestMismatchError(FetchError):
    code = "digest-mismatch"
