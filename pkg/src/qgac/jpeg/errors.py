"""Codec exception types."""


class JpegError(Exception):
    pass


class JpegParseError(JpegError, ValueError):
    """Malformed stream; ``offset`` is the byte position where decoding failed."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class JpegUnsupportedError(JpegError):
    """A valid stream that uses a feature outside baseline sequential Huffman."""


class JpegEncodeError(JpegError, ValueError):
    pass
