"""Exception hierarchy.

Everything raised on purpose derives from :class:`HoughFaceError`. The CLI
maps :class:`IngestionError` (and ``OSError``) to exit code 2 and every other
:class:`HoughFaceError` to exit code 1.
"""


class HoughFaceError(Exception):
    """Base class for all package errors."""


class ConfigError(HoughFaceError):
    """Invalid configuration value or incompatible parameters."""


class InvalidInputError(HoughFaceError):
    """Input data violates a type invariant (shape, range, emptiness)."""


class IngestionError(HoughFaceError):
    """An image could not be read from disk."""

    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")


class InputFormatError(IngestionError):
    """The file exists but is not a decodable raster."""


class ParseError(HoughFaceError):
    """Malformed text file (descriptor, manifest, config, counts)."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"line {line}:"
        super().__init__(f"{where} {message}" if where else message)


class EncodingError(HoughFaceError):
    """Feature vector cannot be fed to the chi-square measure."""


class CompatibilityError(HoughFaceError):
    """Descriptors were produced under different extraction configs."""


class DegenerateDescriptorError(HoughFaceError):
    """A probe descriptor with no blocks cannot be matched."""


class EmptyReportError(HoughFaceError):
    """Confusion counts are all zero; no metric is defined."""
