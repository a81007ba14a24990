"""Per-example difficulty metrics over a population of classifiers.

Two complementary views of how hard an example is for a population of
N classifiers:

* c_perplexity: geometric mean over classifiers of 2**H(row), where H
  is base-2 Shannon entropy. Collective confusion; 1 (every classifier
  certain) up to M (every classifier uniform).
* x_perplexity: fraction of classifiers whose argmax misses the label.
  Collective misclassification; 0 up to 1 in steps of 1/N.

The population sweep is vectorized one classifier block at a time and
accumulated in ascending classifier order, so results are identical at
any worker count.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import EmptyPopulation, LabelOutOfRange
from .model import LabelVector, PredictionStore, validate_row


def _entropy_rows(block: np.ndarray) -> np.ndarray:
    """Base-2 entropy of each row; zero entries contribute exactly 0."""
    logs = np.zeros_like(block)
    np.log2(block, out=logs, where=block > 0)
    return -(block * logs).sum(axis=1)


def shannon_entropy(p) -> float:
    """Base-2 entropy of one probability row, in bits."""
    row = validate_row(p)
    return float(_entropy_rows(row[None, :])[0])


def distribution_perplexity(p) -> float:
    """2**entropy of one row: effective number of candidate classes."""
    return float(2.0 ** shannon_entropy(p))


def assign_class(p) -> int:
    """Argmax class of one row; ties go to the smallest index."""
    return int(np.argmax(validate_row(p)))


def c_perplexity(distributions) -> float:
    """Geometric mean of per-classifier distribution perplexities.

    Args:
        distributions: N probability rows for one example, shape (N, M).

    The mean runs in log space (exp2 of the mean entropy), which is
    algebraically the geometric mean but cannot overflow for any N.
    """
    arr = np.atleast_2d(np.asarray(distributions, dtype=np.float64))
    if arr.shape[0] == 0:
        raise EmptyPopulation("c_perplexity needs at least one classifier row")
    rows = np.stack([validate_row(r) for r in arr])
    return float(np.exp2(_entropy_rows(rows).sum() / rows.shape[0]))


def x_perplexity(distributions, label: int) -> float:
    """Fraction of classifiers whose argmax is not the given label.

    Computed as 1 - correct/N, the exact complement of the label's
    vote fraction.
    """
    arr = np.atleast_2d(np.asarray(distributions, dtype=np.float64))
    if arr.shape[0] == 0:
        raise EmptyPopulation("x_perplexity needs at least one classifier row")
    if not (0 <= label < arr.shape[1]):
        raise LabelOutOfRange(f"label {label} outside [0, {arr.shape[1]})")
    rows = np.stack([validate_row(r) for r in arr])
    correct = int((rows.argmax(axis=1) == label).sum())
    return 1.0 - correct / rows.shape[0]


@dataclass(frozen=True)
class PopulationMetrics:
    """Vectorized per-example results for one population.

    c_perplexity, x_perplexity: shape (E,); x_perplexity is None when
    no labels were supplied. vote_fractions, expected_fractions:
    shape (E, M), rows summing to 1.
    """

    c_perplexity: np.ndarray
    x_perplexity: np.ndarray | None
    vote_fractions: np.ndarray
    expected_fractions: np.ndarray


def population_metrics(
    store: PredictionStore,
    labels: LabelVector | None = None,
    threads: int | None = None,
) -> PopulationMetrics:
    """Sweep the whole store once and return all per-example metrics.

    Per classifier block the sweep extracts entropy rows, argmax votes
    and the probability sum; blocks may be computed concurrently but
    are merged in ascending classifier order, making the result
    independent of the thread count.
    """
    n, num_examples, num_classes = store.dims
    if n == 0:
        raise EmptyPopulation("store has no classifiers")
    if labels is not None and len(labels) != num_examples:
        raise LabelOutOfRange(
            f"labels cover {len(labels)} examples, store has {num_examples}"
        )

    def partial(i: int):
        block = store.block(i)
        return _entropy_rows(block), block.argmax(axis=1), block

    entropy_sum = np.zeros(num_examples)
    votes = np.zeros((num_examples, num_classes))
    prob_sum = np.zeros((num_examples, num_classes))
    row_index = np.arange(num_examples)

    pool = ThreadPoolExecutor(max_workers=threads) if threads and threads > 1 else None
    try:
        results = pool.map(partial, range(n)) if pool else map(partial, range(n))
        # ascending classifier order: float accumulation must not
        # depend on scheduling
        for h, assigned, block in results:
            entropy_sum += h
            votes[row_index, assigned] += 1.0
            prob_sum += block
    finally:
        if pool:
            pool.shutdown(wait=True)

    vote_fractions = votes / n
    xp = None
    if labels is not None:
        xp = 1.0 - vote_fractions[row_index, labels.values]
    return PopulationMetrics(
        c_perplexity=np.exp2(entropy_sum / n),
        x_perplexity=xp,
        vote_fractions=vote_fractions,
        expected_fractions=prob_sum / n,
    )
