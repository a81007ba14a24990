"""Population subsetting, cross-population comparison, synthetic data.

The synthetic generator stands in for a real population of trained
classifiers. Labels are uniform over M classes; each classifier has a
strength s in (0, 1]; each example has a latent difficulty d in [0, 1)
drawn once and shared by every classifier. A prediction row is a
Dirichlet draw whose concentration is base_concentration everywhere
except the true label, which gets an extra sharpness * s * (1 - d).
Strong classifiers on easy examples concentrate mass on the truth;
every classifier degrades toward symmetric noise as d approaches 1.

The shared per-example difficulty is what makes distinct classifiers'
errors correlate, which real populations exhibit and every comparison
study here depends on; without it two disjoint subsets would rank
examples independently of each other.

Determinism: streams are Philox keyed by (seed, stream tag), one tag
per classifier index plus reserved tags for labels, difficulty and
corruption. Adding classifiers or flipping labels never perturbs the
other draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid, DegenerateSample, EmptySubset
from .model import (
    ClassifierEntry,
    LabelVector,
    PopulationManifest,
    PredictionStore,
)
from .perplexity import population_metrics
from .stats import (
    BoxStats,
    CorrelationReport,
    HistogramResult,
    HistogramSpec,
    box_stats,
    correlation_report,
    gaussian_kde,
    histogram,
)

_TAG_LABELS = 2**64 - 1
_TAG_DIFFICULTY = 2**64 - 2
_TAG_CORRUPTION = 2**64 - 3

# tier labels that mirror partial-training-set populations map onto
# the manifest's train_fraction axis; anything else stays "synthetic"
_TIER_FRACTION = {"25": 0.25, "50": 0.5, "75": 0.75, "100": 1.0}

DEFAULT_TIERS = (
    ("25", 10, 0.2, 0.4),
    ("50", 10, 0.4, 0.6),
    ("75", 10, 0.6, 0.8),
    ("100", 5, 0.8, 1.0),
)


def _stream(seed: int, tag: int) -> np.random.Generator:
    key = np.array([seed, tag], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class SynthConfig:
    """Configuration for synthesize_population.

    tiers: (label, classifier_count, strength_lo, strength_hi) tuples;
    strengths are spaced evenly across each tier's range.
    difficulty_shape is the b of the Beta(1, b) example-difficulty
    draw: larger values mean easier datasets.
    """

    num_classes: int
    num_examples: int
    tiers: tuple = DEFAULT_TIERS
    base_concentration: float = 0.5
    sharpness: float = 20.0
    difficulty_shape: float = 3.0
    mislabel_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(tuple(t) for t in self.tiers))
        if self.num_classes < 2:
            raise ConfigInvalid("num_classes must be at least 2")
        if self.num_examples < 1:
            raise ConfigInvalid("num_examples must be positive")
        if not self.tiers:
            raise ConfigInvalid("at least one tier is required")
        for t in self.tiers:
            if len(t) != 4:
                raise ConfigInvalid(f"tier {t!r}: expected (label, count, lo, hi)")
            label, count, lo, hi = t
            if not isinstance(count, int) or count < 1:
                raise ConfigInvalid(f"tier {label!r}: count must be a positive integer")
            if not (0.0 < lo <= hi <= 1.0):
                raise ConfigInvalid(
                    f"tier {label!r}: strengths must satisfy 0 < lo <= hi <= 1"
                )
        if self.base_concentration <= 0.0:
            raise ConfigInvalid("base_concentration must be positive")
        if self.sharpness < 0.0:
            raise ConfigInvalid("sharpness must be non-negative")
        if self.difficulty_shape <= 0.0:
            raise ConfigInvalid("difficulty_shape must be positive")
        if not (0.0 <= self.mislabel_fraction < 1.0):
            raise ConfigInvalid("mislabel_fraction must lie in [0, 1)")
        if not isinstance(self.seed, int) or not (0 <= self.seed < 2**64):
            raise ConfigInvalid("seed must be an unsigned 64-bit integer")

    def strengths(self) -> list[tuple[str, float]]:
        """(tier_label, strength) per classifier, manifest order."""
        out = []
        for label, count, lo, hi in self.tiers:
            for s in np.linspace(lo, hi, count):
                out.append((str(label), float(s)))
        return out


def synthesize_population(config: SynthConfig):
    """Generate (manifest, store, labels, corruption_log) from config.

    The labels file reflects any injected mislabels; classifiers always
    target the original truth, which is exactly the scenario where a
    confident population disagrees with the recorded label. The
    corruption_log lists (example, original_label, corrupted_label)
    triples, ascending by example. Same config, same bytes, always.
    """
    m = config.num_classes
    e = config.num_examples
    truth = _stream(config.seed, _TAG_LABELS).integers(0, m, size=e)
    difficulty = _stream(config.seed, _TAG_DIFFICULTY).beta(
        1.0, config.difficulty_shape, size=e
    )

    strengths = config.strengths()
    n = len(strengths)
    raw = np.empty((n, e, m), dtype=np.float32)
    rows_idx = np.arange(e)
    for i, (_, strength) in enumerate(strengths):
        alpha = np.full((e, m), config.base_concentration)
        alpha[rows_idx, truth] += config.sharpness * strength * (1.0 - difficulty)
        draws = _stream(config.seed, i).standard_gamma(alpha)
        draws /= draws.sum(axis=1, keepdims=True)
        raw[i] = draws.astype(np.float32)

    corrupted = truth.copy()
    log = []
    flip_count = int(round(config.mislabel_fraction * e))
    if flip_count:
        rng = _stream(config.seed, _TAG_CORRUPTION)
        flipped = rng.choice(e, size=flip_count, replace=False)
        for index in sorted(int(v) for v in flipped):
            r = int(rng.integers(0, m - 1))
            wrong = r + 1 if r >= truth[index] else r
            corrupted[index] = wrong
            log.append((index, int(truth[index]), wrong))

    entries = []
    for i, (label, strength) in enumerate(strengths):
        cid = f"synth-{label}-{i:03d}"
        entries.append(
            ClassifierEntry(
                id=cid,
                architecture="dirichlet-synth",
                train_fraction=_TIER_FRACTION.get(label, "synthetic"),
                epoch_stage="converged",
                payload_path=f"{cid}.prd",
                strength=strength,
            )
        )
    manifest = PopulationManifest(
        num_classes=m, num_examples=e, classifiers=tuple(entries)
    )
    store = PredictionStore(raw, validate=True)
    labels = LabelVector.from_values(corrupted, num_classes=m)
    return manifest, store, labels, log


@dataclass(frozen=True)
class SubsetFilter:
    """Metadata predicate; None means the axis is unconstrained."""

    train_fractions: frozenset | None = None
    architectures: frozenset | None = None
    epoch_stages: frozenset | None = None
    explicit_ids: frozenset | None = None

    def __post_init__(self):
        for name in ("train_fractions", "architectures", "epoch_stages", "explicit_ids"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, frozenset(value))

    def matches(self, entry: ClassifierEntry) -> bool:
        if self.train_fractions is not None and entry.train_fraction not in self.train_fractions:
            return False
        if self.architectures is not None and entry.architecture not in self.architectures:
            return False
        if self.epoch_stages is not None and entry.epoch_stage not in self.epoch_stages:
            return False
        if self.explicit_ids is not None and entry.id not in self.explicit_ids:
            return False
        return True


def subset(
    manifest: PopulationManifest,
    store: PredictionStore,
    filt: SubsetFilter,
):
    """Sub-population of the classifiers matching the filter.

    Classifier order is preserved. Raw values are carried over
    bit-for-bit, so analyzing the subset equals analyzing a store built
    from just those classifiers.
    """
    indices = [i for i, c in enumerate(manifest.classifiers) if filt.matches(c)]
    if not indices:
        raise EmptySubset(f"filter matched none of {len(manifest)} classifiers")
    picked = tuple(manifest.classifiers[i] for i in indices)
    sub_manifest = PopulationManifest(
        num_classes=manifest.num_classes,
        num_examples=manifest.num_examples,
        classifiers=picked,
    )
    return sub_manifest, store.select(indices)


@dataclass(frozen=True)
class SubsetSummary:
    """Per-subset metric vectors plus their distribution summaries."""

    name: str
    num_classifiers: int
    c_perplexity: np.ndarray
    x_perplexity: np.ndarray
    cp_stddev: float
    xp_stddev: float
    cp_iqr: float
    xp_iqr: float
    cp_box: BoxStats
    xp_box: BoxStats
    cp_histogram: HistogramResult
    xp_histogram: HistogramResult
    cp_hist_spec: HistogramSpec
    xp_hist_spec: HistogramSpec
    cp_kde: tuple | None
    xp_kde: tuple | None


@dataclass(frozen=True)
class PopulationComparison:
    """Ordered subset summaries plus pairwise correlation reports.

    correlations maps (name_a, name_b) in listing order to a dict with
    keys "x_perplexity" and "c_perplexity"; a value is None when the
    correlation is undefined (a constant metric vector).
    """

    subsets: tuple[SubsetSummary, ...]
    correlations: dict[tuple[str, str], dict[str, CorrelationReport | None]]


def _summary(name, store, metrics, cp_spec, xp_spec, kde_points):
    cp = metrics.c_perplexity
    xp = metrics.x_perplexity
    cp_box = box_stats(cp)
    xp_box = box_stats(xp)

    def kde_or_none(v):
        try:
            return gaussian_kde(v, grid_points=kde_points)
        except DegenerateSample:
            return None

    return SubsetSummary(
        name=name,
        num_classifiers=store.num_classifiers,
        c_perplexity=cp,
        x_perplexity=xp,
        cp_stddev=float(np.std(cp)),
        xp_stddev=float(np.std(xp)),
        cp_iqr=float(cp_box.q3 - cp_box.q1),
        xp_iqr=float(xp_box.q3 - xp_box.q1),
        cp_box=cp_box,
        xp_box=xp_box,
        cp_histogram=histogram(cp, cp_spec),
        xp_histogram=histogram(xp, xp_spec),
        cp_hist_spec=cp_spec,
        xp_hist_spec=xp_spec,
        cp_kde=kde_or_none(cp),
        xp_kde=kde_or_none(xp),
    )


def compare_populations(
    named_stores,
    labels: LabelVector,
    bins: int = 20,
    kde_points: int = 256,
    threads: int | None = None,
) -> PopulationComparison:
    """Metric distributions and pairwise correlations across subsets.

    Args:
        named_stores: ordered (name, PredictionStore) pairs, two or
            more, all over the same example set.
        labels: ground truth shared by every subset.

    Histogram bins are shared across subsets (x_perplexity over [0, 1],
    c_perplexity over [1, global max]) so the emitted distributions are
    directly comparable.
    """
    named_stores = list(named_stores)
    if len(named_stores) < 2:
        raise ConfigInvalid("compare_populations needs at least two subsets")
    names = [name for name, _ in named_stores]
    if len(set(names)) != len(names):
        raise ConfigInvalid(f"duplicate subset names: {sorted(names)}")
    for name, store in named_stores:
        if store.num_examples != len(labels):
            raise ConfigInvalid(
                f"subset {name!r} covers {store.num_examples} examples, labels {len(labels)}"
            )

    all_metrics = [
        (name, store, population_metrics(store, labels, threads=threads))
        for name, store in named_stores
    ]
    cp_max = max(float(m.c_perplexity.max()) for _, _, m in all_metrics)
    cp_spec = HistogramSpec(lo=1.0, hi=max(cp_max, 1.0 + 1e-9), bin_count=bins)
    xp_spec = HistogramSpec(lo=0.0, hi=1.0, bin_count=bins)

    summaries = tuple(
        _summary(name, store, metrics, cp_spec, xp_spec, kde_points)
        for name, store, metrics in all_metrics
    )

    correlations = {}
    for i in range(len(summaries)):
        for j in range(i + 1, len(summaries)):
            a, b = summaries[i], summaries[j]
            per_metric = {}
            for key, va, vb in (
                ("x_perplexity", a.x_perplexity, b.x_perplexity),
                ("c_perplexity", a.c_perplexity, b.c_perplexity),
            ):
                try:
                    per_metric[key] = correlation_report(va, vb)
                except DegenerateSample:
                    per_metric[key] = None
            correlations[(a.name, b.name)] = per_metric
    return PopulationComparison(subsets=summaries, correlations=correlations)
