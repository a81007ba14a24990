"""Exception types raised by the library.

Everything derives from XplxError so callers can catch the package's
failures with one except clause. Messages carry enough context
(classifier id, row index, line number) to point at the offending
input directly.
"""


class XplxError(Exception):
    """Base class for all errors raised by this package."""


class NegativeProbability(XplxError):
    """A probability row contains a negative entry."""


class NonFinite(XplxError):
    """A probability row contains NaN or infinity."""


class SumOutOfTolerance(XplxError):
    """A probability row does not sum to 1 within tolerance."""


class ManifestSchemaError(XplxError):
    """Manifest JSON is malformed or violates a structural invariant."""


class DimensionMismatch(XplxError):
    """Dimensions disagree between manifest and payload header."""


class PayloadTruncated(XplxError):
    """Payload file size does not match its declared dimensions."""


class HeaderMismatch(XplxError):
    """A file header (payload magic, CSV column row) is not as expected."""


class LineCountMismatch(XplxError):
    """Labels file does not contain exactly one line per example."""


class LabelOutOfRange(XplxError):
    """A label lies outside [0, num_classes)."""


class ParseError(XplxError):
    """A text input could not be parsed."""


class IncompleteGrid(XplxError):
    """CSV population is missing or duplicating (classifier, example) cells."""


class IoError(XplxError):
    """Reading or writing a file failed."""


class EmptyPopulation(XplxError):
    """An operation requires at least one classifier."""


class EmptySubset(XplxError):
    """A subset filter matched no classifiers."""


class ConfigInvalid(XplxError):
    """Synthetic population configuration violates its invariants."""


class DegenerateSample(XplxError):
    """A statistic is undefined for constant or too-short input."""


class EmptyInput(XplxError):
    """An operation requires a non-empty value sequence."""
