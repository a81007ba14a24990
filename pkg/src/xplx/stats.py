"""Distribution summaries and correlation statistics.

Histograms, five-number box statistics, Gaussian kernel density
estimates, and the three standard correlation coefficients (Pearson,
Spearman, Kendall). Kendall runs in O(n log n) via merge-sort
inversion counting with exact integer pair counts, so its output is
bit-identical to naive pair enumeration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSample, EmptyInput


@dataclass(frozen=True)
class HistogramSpec:
    """Equal-width bins [lo + i*w, lo + (i+1)*w) with the last bin closed.

    Values below lo or above hi fall into the underflow/overflow
    counts instead of a bin.
    """

    lo: float
    hi: float
    bin_count: int

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("hi must exceed lo")
        if self.bin_count < 1:
            raise ValueError("bin_count must be positive")

    @property
    def width(self) -> float:
        return (self.hi - self.lo) / self.bin_count

    def edges(self) -> np.ndarray:
        return self.lo + self.width * np.arange(self.bin_count + 1)


@dataclass(frozen=True)
class HistogramResult:
    counts: np.ndarray
    underflow: int
    overflow: int


@dataclass(frozen=True)
class BoxStats:
    min: float
    q1: float
    median: float
    q3: float
    max: float


@dataclass(frozen=True)
class CorrelationReport:
    pearson: float
    spearman: float
    kendall_tau_b: float
    kendall_tau_a: float
    n: int


def histogram(values, spec: HistogramSpec) -> HistogramResult:
    """Bin values per spec; counts + underflow + overflow conserve n."""
    v = np.asarray(values, dtype=np.float64)
    underflow = int((v < spec.lo).sum())
    overflow = int((v > spec.hi).sum())
    inside = v[(v >= spec.lo) & (v <= spec.hi)]
    idx = np.floor((inside - spec.lo) / spec.width).astype(np.intp)
    np.clip(idx, 0, spec.bin_count - 1, out=idx)  # v == hi joins the last bin
    counts = np.bincount(idx, minlength=spec.bin_count)
    return HistogramResult(counts=counts, underflow=underflow, overflow=overflow)


def box_stats(values) -> BoxStats:
    """Five-number summary with type-7 (linear interpolation) quantiles."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise EmptyInput("box_stats needs at least one value")
    q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0])
    return BoxStats(min=q[0], q1=q[1], median=q[2], q3=q[3], max=q[4])


def gaussian_kde(values, grid_points: int = 256):
    """Gaussian KDE with Silverman bandwidth on a uniform grid.

    Parameters
    ----------
    values : array_like
        Sample; needs n >= 2 and at least two distinct values.
    grid_points : int
        Number of evaluation points over [min - 3h, max + 3h].

    Returns
    -------
    (grid, density) : pair of float64 arrays

    Notes
    -----
    Bandwidth is h = 1.06 * s * n**(-1/5) with s the sample standard
    deviation (ddof=1).
    """
    v = np.asarray(values, dtype=np.float64)
    if grid_points < 2:
        raise ValueError("grid_points must be at least 2")
    if v.size < 2:
        raise DegenerateSample("kde needs at least two values")
    sigma = float(np.std(v, ddof=1))
    if sigma == 0.0:
        raise DegenerateSample("kde input is constant")
    h = 1.06 * sigma * v.size ** (-0.2)
    grid = np.linspace(v.min() - 3.0 * h, v.max() + 3.0 * h, grid_points)
    z = (grid[:, None] - v[None, :]) / h
    density = np.exp(-0.5 * z * z).sum(axis=1) / (v.size * h * math.sqrt(2.0 * math.pi))
    return grid, density


def _pair(x, y):
    a = np.asarray(x, dtype=np.float64)
    b = np.asarray(y, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("inputs must be 1-d and equally long")
    if a.size < 2:
        raise DegenerateSample("correlation needs n >= 2")
    return a, b


def pearson(x, y) -> float:
    """Product-moment correlation coefficient."""
    a, b = _pair(x, y)
    da = a - a.mean()
    db = b - b.mean()
    saa = float(da @ da)
    sbb = float(db @ db)
    if saa == 0.0 or sbb == 0.0:
        raise DegenerateSample("pearson is undefined for constant input")
    r = float(da @ db) / math.sqrt(saa * sbb)
    return max(-1.0, min(1.0, r))


def average_ranks(values) -> np.ndarray:
    """1-based ranks; tied values share the mean of their positions."""
    v = np.asarray(values, dtype=np.float64)
    order = np.argsort(v, kind="stable")
    sv = v[order]
    new_group = np.r_[True, sv[1:] != sv[:-1]]
    group = np.cumsum(new_group) - 1
    counts = np.bincount(group)
    ends = np.cumsum(counts)
    starts = ends - counts
    mean_rank = (starts + ends + 1) / 2.0
    ranks = np.empty(v.size)
    ranks[order] = mean_rank[group]
    return ranks


def spearman(x, y) -> float:
    """Pearson correlation of average ranks."""
    a, b = _pair(x, y)
    return pearson(average_ranks(a), average_ranks(b))


def _merge_count(seq: list) -> tuple[list, int]:
    """Merge sort counting strict inversions (pairs i<j with seq[i] > seq[j])."""
    n = len(seq)
    if n <= 1:
        return seq, 0
    mid = n // 2
    left, a = _merge_count(seq[:mid])
    right, b = _merge_count(seq[mid:])
    merged = []
    inversions = a + b
    i = j = 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            j += 1
            inversions += len(left) - i
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, inversions


def _tied_pairs(sorted_values) -> int:
    total = 0
    run = 1
    for prev, cur in zip(sorted_values, sorted_values[1:]):
        if cur == prev:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    total += run * (run - 1) // 2
    return total


def kendall(x, y) -> tuple[float, float]:
    """Kendall rank correlation, returned as (tau_a, tau_b).

    tau_a = (C - D) / (n choose 2); tau_b divides instead by
    sqrt((T0 - T1) * (T0 - T2)) where T0 = n(n-1)/2 and T1, T2 count
    tied pairs in x and y. All pair counts are exact integers from a
    merge-sort inversion count, never floats, so results match naive
    O(n^2) enumeration exactly.
    """
    a, b = _pair(x, y)
    n = a.size
    order = np.lexsort((b, a))
    by = b[order].tolist()

    # pairs tied in x, in y, and in both
    t1 = _tied_pairs(a[np.argsort(a, kind="stable")].tolist())
    t2 = _tied_pairs(b[np.argsort(b, kind="stable")].tolist())
    ax = a[order].tolist()
    both = 0
    run = 1
    for k in range(1, n):
        if ax[k] == ax[k - 1] and by[k] == by[k - 1]:
            run += 1
        else:
            both += run * (run - 1) // 2
            run = 1
    both += run * (run - 1) // 2

    # after the (x, y) lexsort, strict y-inversions are exactly the
    # discordant pairs: tied-x runs are y-sorted and contribute none
    _, discordant = _merge_count(by)

    n0 = n * (n - 1) // 2
    if n0 == t1 or n0 == t2:
        raise DegenerateSample("kendall is undefined for constant input")
    concordant = n0 - t1 - t2 + both - discordant
    diff = concordant - discordant
    tau_a = diff / n0
    tau_b = diff / math.sqrt((n0 - t1) * (n0 - t2))
    return tau_a, tau_b


def correlation_report(x, y) -> CorrelationReport:
    """All correlation coefficients for one vector pair."""
    tau_a, tau_b = kendall(x, y)
    return CorrelationReport(
        pearson=pearson(x, y),
        spearman=spearman(x, y),
        kendall_tau_b=tau_b,
        kendall_tau_a=tau_a,
        n=int(np.asarray(x).size),
    )
