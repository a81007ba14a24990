"""Domain types shared across the package.

Thin immutable containers plus the validation rules every ingestion
path funnels through. Values are stored exactly as they arrived on
disk (float32); all numeric work downstream happens in float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    LabelOutOfRange,
    ManifestSchemaError,
    NegativeProbability,
    NonFinite,
    SumOutOfTolerance,
)

# Absolute tolerance on |sum(row) - 1| before a row is rejected.
# float32 softmax output drifts by far less than this; anything worse
# is a broken producer, not quantization.
ROW_SUM_TOLERANCE = 1e-3

TRAIN_FRACTIONS = (0.25, 0.5, 0.75, 1.0)
SYNTHETIC_FRACTION = "synthetic"
EPOCH_STAGES = ("early-1", "early-2", "early-3", "early-4", "converged")


def validate_row(p) -> np.ndarray:
    """Check one probability row and return it renormalized to sum 1.

    Args:
        p: sequence of M probabilities.

    Returns:
        float64 copy of the row divided by its exact sum.

    Raises:
        NonFinite: an entry is NaN or infinite.
        NegativeProbability: an entry is below zero.
        SumOutOfTolerance: |sum - 1| exceeds ROW_SUM_TOLERANCE.
    """
    row = np.asarray(p, dtype=np.float64)
    if row.ndim != 1 or row.size == 0:
        raise ValueError("expected a non-empty 1-d probability vector")
    if not np.isfinite(row).all():
        raise NonFinite("row contains a non-finite entry")
    if (row < 0).any():
        j = int(np.nonzero(row < 0)[0][0])
        raise NegativeProbability(f"entry {j} is negative: {row[j]!r}")
    total = float(row.sum())
    if abs(total - 1.0) > ROW_SUM_TOLERANCE:
        raise SumOutOfTolerance(
            f"row sums to {total!r}, outside 1 +/- {ROW_SUM_TOLERANCE}"
        )
    return row / total


def _validate_block(block: np.ndarray, context: str = "") -> None:
    """Vectorized validate_row over an (E, M) block; same rules, same order."""
    where = f" ({context})" if context else ""
    finite = np.isfinite(block)
    if not finite.all():
        row = int(np.nonzero(~finite.all(axis=1))[0][0])
        raise NonFinite(f"row {row}{where}: non-finite probability")
    if (block < 0).any():
        row = int(np.nonzero((block < 0).any(axis=1))[0][0])
        raise NegativeProbability(f"row {row}{where}: negative probability")
    sums = block.sum(axis=1, dtype=np.float64)
    bad = np.abs(sums - 1.0) > ROW_SUM_TOLERANCE
    if bad.any():
        row = int(np.nonzero(bad)[0][0])
        raise SumOutOfTolerance(
            f"row {row}{where}: row sums to {sums[row]!r}"
        )


@dataclass(frozen=True)
class ClassifierEntry:
    """Metadata for one member of the classifier population."""

    id: str
    architecture: str
    train_fraction: float | str
    epoch_stage: str
    payload_path: str
    strength: float | None = None

    def __post_init__(self):
        tf = self.train_fraction
        if tf != SYNTHETIC_FRACTION and tf not in TRAIN_FRACTIONS:
            raise ManifestSchemaError(
                f"classifier {self.id!r}: train_fraction {tf!r} not in "
                f"{TRAIN_FRACTIONS} and not {SYNTHETIC_FRACTION!r}"
            )
        if self.epoch_stage not in EPOCH_STAGES:
            raise ManifestSchemaError(
                f"classifier {self.id!r}: epoch_stage {self.epoch_stage!r} "
                f"not in {EPOCH_STAGES}"
            )
        if self.strength is not None and not (0.0 < self.strength <= 1.0):
            raise ManifestSchemaError(
                f"classifier {self.id!r}: strength must lie in (0, 1]"
            )


@dataclass(frozen=True)
class PopulationManifest:
    """Population metadata: dimensions plus one entry per classifier."""

    num_classes: int
    num_examples: int
    classifiers: tuple[ClassifierEntry, ...]

    def __post_init__(self):
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        if self.num_classes < 1:
            raise ManifestSchemaError("num_classes must be positive")
        if self.num_examples < 1:
            raise ManifestSchemaError("num_examples must be positive")
        if not self.classifiers:
            raise ManifestSchemaError("population has no classifiers")
        ids = [c.id for c in self.classifiers]
        if len(set(ids)) != len(ids):
            dup = sorted({i for i in ids if ids.count(i) > 1})
            raise ManifestSchemaError(f"duplicate classifier ids: {dup}")

    def __len__(self) -> int:
        return len(self.classifiers)


class PredictionStore:
    """Dense population predictions: N classifiers x E examples x M classes.

    The float32 tensor is kept bit-for-bit as ingested so serializing a
    store reproduces its input bytes. Normalized float64 rows are derived
    on demand one classifier block at a time, keeping peak memory at one
    block rather than a second full tensor.
    """

    def __init__(self, raw: np.ndarray, validate: bool = True):
        raw = np.ascontiguousarray(raw, dtype=np.float32)
        if raw.ndim != 3:
            raise ValueError("expected a (classifiers, examples, classes) tensor")
        if validate:
            for i in range(raw.shape[0]):
                _validate_block(raw[i], context=f"classifier index {i}")
        raw.setflags(write=False)
        self._raw = raw

    @property
    def raw(self) -> np.ndarray:
        """Read-only float32 tensor exactly as ingested."""
        return self._raw

    @property
    def dims(self) -> tuple[int, int, int]:
        return self._raw.shape

    @property
    def num_classifiers(self) -> int:
        return self._raw.shape[0]

    @property
    def num_examples(self) -> int:
        return self._raw.shape[1]

    @property
    def num_classes(self) -> int:
        return self._raw.shape[2]

    def block(self, i: int) -> np.ndarray:
        """Normalized float64 (E, M) rows for classifier i."""
        b = self._raw[i].astype(np.float64)
        b /= b.sum(axis=1, keepdims=True)
        return b

    def example(self, e: int) -> np.ndarray:
        """Normalized float64 (N, M) rows for example e."""
        d = self._raw[:, e, :].astype(np.float64)
        d /= d.sum(axis=1, keepdims=True)
        return d

    def select(self, indices) -> "PredictionStore":
        """New store holding the given classifier rows, order preserved.

        Raw values are copied verbatim, so derived metrics on the
        selection equal metrics on a store built from those classifiers
        alone, exactly.
        """
        picked = self._raw[np.asarray(indices, dtype=np.intp)]
        return PredictionStore(picked, validate=False)


@dataclass(frozen=True)
class LabelVector:
    """Ground-truth class index per example."""

    values: np.ndarray
    num_classes: int

    @classmethod
    def from_values(cls, values, num_classes: int) -> "LabelVector":
        arr = np.asarray(values)
        if arr.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.floor(arr)):
                raise ValueError("labels must be integers")
        arr = arr.astype(np.int64)
        bad = (arr < 0) | (arr >= num_classes)
        if bad.any():
            i = int(np.nonzero(bad)[0][0])
            raise LabelOutOfRange(
                f"label {arr[i]} at position {i} outside [0, {num_classes})"
            )
        arr.setflags(write=False)
        return cls(values=arr, num_classes=num_classes)

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def __getitem__(self, i):
        return int(self.values[i])


@dataclass(frozen=True)
class ExampleReport:
    """Per-example difficulty metrics and vote evidence.

    vote_fractions and expected_fractions are sparse maps holding only
    classes with nonzero fraction; top lists are (class, value) pairs,
    largest first.
    """

    example_index: int
    c_perplexity: float
    x_perplexity: float
    vote_fractions: dict[int, float]
    expected_fractions: dict[int, float]
    top_voted_labels: list[tuple[int, float]]
    top_expected_labels: list[tuple[int, float]]


@dataclass(frozen=True)
class ConfusionTable:
    """Class-level confusion: freq[c][j] and its symmetrization.

    freq rows for classes with no examples are NaN (rendered as null
    downstream). sym[c][j] = (freq[c][j] + freq[j][c]) / 2 is computed
    once per unordered pair, so the matrix is symmetric exactly.
    """

    mode: str
    freq: np.ndarray
    sym: np.ndarray
