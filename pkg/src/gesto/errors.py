"""Exception types shared across the engine, codec, service, and CLI."""


class GestoError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(GestoError):
    """An argument is outside its documented range."""


class InvalidPoseError(GestoError):
    """A pose sample violates its invariants (bad quaternion, non-finite
    position, or non-increasing timestamps within a stream)."""


class PoseLogError(GestoError):
    """A pose log or scan file failed to parse.

    ``line`` is the 1-based line number of the offending record.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateScanError(GestoError):
    """Scan samples are too few or collinear to define a plane."""


class NoisyScanError(GestoError):
    """Plane fit residual exceeded the allowed RMS."""


class ModeError(GestoError):
    """A drawing-mode constraint was violated (2D mode without a canvas)."""


class InvalidInputError(GestoError):
    """Operation input violates a geometric precondition."""


class ConflictError(GestoError):
    """An identifier is already taken (duplicate stroke or artwork id)."""


class FormatError(GestoError):
    """Payload is not a valid artwork encoding."""


class VersionError(FormatError):
    """Payload declares an unsupported format version."""


class CorruptionError(FormatError):
    """Payload is truncated or internally inconsistent.

    ``offset`` is the byte offset at which decoding failed.
    """

    def __init__(self, message: str, offset: int):
        self.offset = offset
        super().__init__(f"corruption at byte {offset}: {message}")


class DebugJsonError(FormatError):
    """The debug text mirror failed to parse.

    ``line``/``col`` locate the syntax error when the underlying JSON was
    malformed; both are None for structural errors (missing fields).
    """

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"line {line}, column {col}: {message}"
        super().__init__(message)
