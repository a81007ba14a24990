"""Vote and confusion analytics over a population's predictions.

Per example: which classes the population votes for (argmax counts)
and how much probability it expects per class. Per class: mean
perplexities and class-to-class confusion, in two modes:

* voted: freq[c][j] is the mean fraction of argmax votes class-c
  examples receive for class j.
* expected: same construction with mean predicted probability in
  place of votes.

In general freq[c][j] != freq[j][c]; sym[c][j] averages the two
directions once per unordered pair, so it is symmetric exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ConfusionTable, ExampleReport, LabelVector, PredictionStore
from .perplexity import PopulationMetrics, population_metrics

DEFAULT_TOP_K = 5


def vote_fraction(store: PredictionStore, example: int) -> np.ndarray:
    """f(x, j): fraction of classifiers whose argmax for x is j."""
    rows = store.example(example)
    counts = np.zeros(store.num_classes)
    np.add.at(counts, rows.argmax(axis=1), 1.0)
    return counts / store.num_classifiers


def expected_vote_fraction(store: PredictionStore, example: int) -> np.ndarray:
    """f_e(x, j): mean predicted probability of class j for x."""
    return store.example(example).mean(axis=0)


def top_labels(fractions, k: int = DEFAULT_TOP_K) -> list[tuple[int, float]]:
    """The k largest-valued classes as (class, value) pairs, descending.

    Ties break toward the smaller class index; zero-valued classes are
    never listed, so fewer than k entries may come back.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    arr = np.asarray(fractions, dtype=np.float64)
    order = np.argsort(-arr, kind="stable")[:k]
    return [(int(j), float(arr[j])) for j in order if arr[j] > 0.0]


def analyze_examples(
    store: PredictionStore,
    labels: LabelVector,
    k: int = DEFAULT_TOP_K,
    threads: int | None = None,
    metrics: PopulationMetrics | None = None,
) -> list[ExampleReport]:
    """One report per example, index-ordered.

    A precomputed PopulationMetrics can be passed to avoid re-sweeping
    the store.
    """
    if metrics is None:
        metrics = population_metrics(store, labels, threads=threads)
    reports = []
    for e in range(store.num_examples):
        votes_row = metrics.vote_fractions[e]
        expected_row = metrics.expected_fractions[e]
        reports.append(
            ExampleReport(
                example_index=e,
                c_perplexity=float(metrics.c_perplexity[e]),
                x_perplexity=float(metrics.x_perplexity[e]),
                vote_fractions={
                    int(j): float(votes_row[j]) for j in np.nonzero(votes_row)[0]
                },
                expected_fractions={
                    int(j): float(expected_row[j]) for j in np.nonzero(expected_row)[0]
                },
                top_voted_labels=top_labels(votes_row, k),
                top_expected_labels=top_labels(expected_row, k),
            )
        )
    return reports


@dataclass(frozen=True)
class ClassReport:
    """Class-level difficulty: means over the class's examples.

    Perplexity fields are NaN and the top confusion lists empty for
    classes without examples. Top confusion lists come from the
    confusion tables' freq rows with the diagonal (the class itself)
    left out.
    """

    class_index: int
    class_c_perplexity: float
    class_x_perplexity: float
    example_count: int
    top_voted_confusion: list[tuple[int, float]]
    top_expected_confusion: list[tuple[int, float]]


def _off_diagonal_top(freq_row: np.ndarray, class_index: int, k: int):
    if np.isnan(freq_row).all():
        return []
    masked = freq_row.copy()
    masked[class_index] = 0.0
    return top_labels(masked, k)


def class_perplexities(
    reports: list[ExampleReport],
    labels: LabelVector,
    voted_confusion: ConfusionTable | None = None,
    expected_confusion: ConfusionTable | None = None,
    k: int = DEFAULT_TOP_K,
) -> list[ClassReport]:
    """Arithmetic per-class means of the example perplexities.

    Confusion tables, when given, populate each class's top confused
    partners (voted and expected modes respectively).
    """
    m = labels.num_classes
    counts = np.bincount(labels.values, minlength=m)
    cp_sums = np.bincount(
        labels.values, weights=[r.c_perplexity for r in reports], minlength=m
    )
    xp_sums = np.bincount(
        labels.values, weights=[r.x_perplexity for r in reports], minlength=m
    )
    out = []
    for c in range(m):
        if counts[c] == 0:
            out.append(
                ClassReport(
                    class_index=c,
                    class_c_perplexity=float("nan"),
                    class_x_perplexity=float("nan"),
                    example_count=0,
                    top_voted_confusion=[],
                    top_expected_confusion=[],
                )
            )
            continue
        out.append(
            ClassReport(
                class_index=c,
                class_c_perplexity=float(cp_sums[c] / counts[c]),
                class_x_perplexity=float(xp_sums[c] / counts[c]),
                example_count=int(counts[c]),
                top_voted_confusion=(
                    _off_diagonal_top(voted_confusion.freq[c], c, k)
                    if voted_confusion is not None
                    else []
                ),
                top_expected_confusion=(
                    _off_diagonal_top(expected_confusion.freq[c], c, k)
                    if expected_confusion is not None
                    else []
                ),
            )
        )
    return out


def class_confusion(
    store: PredictionStore,
    labels: LabelVector,
    mode: str,
    metrics: PopulationMetrics | None = None,
    threads: int | None = None,
) -> ConfusionTable:
    """Class-level confusion table in the given mode (voted | expected).

    freq[c] is the mean per-example fraction vector over class-c
    examples, NaN for empty classes. sym is the unordered-pair average
    of freq and its transpose.
    """
    if mode not in ("voted", "expected"):
        raise ValueError(f"mode must be 'voted' or 'expected', got {mode!r}")
    if metrics is None:
        metrics = population_metrics(store, labels, threads=threads)
    fractions = (
        metrics.vote_fractions if mode == "voted" else metrics.expected_fractions
    )
    m = labels.num_classes
    counts = np.bincount(labels.values, minlength=m).astype(np.float64)
    freq = np.full((m, m), np.nan)
    for c in np.nonzero(counts)[0]:
        freq[c] = fractions[labels.values == c].mean(axis=0)

    # each unordered pair averaged once, mirrored to both cells
    sym = np.full((m, m), np.nan)
    upper = np.triu_indices(m)
    vals = (freq[upper] + freq.T[upper]) / 2.0
    sym[upper] = vals
    sym.T[upper] = vals
    return ConfusionTable(mode=mode, freq=freq, sym=sym)
