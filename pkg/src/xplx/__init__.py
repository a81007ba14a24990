"""Difficulty metrics from the probability outputs of classifier populations.

The central objects are a PredictionStore (N classifiers x E examples
x M classes of probabilities) and a LabelVector. From those the
library computes per-example C-perplexity (collective confusion) and
X-perplexity (collective failure), vote analytics, per-class rollups,
population comparisons, and dataset-imperfection findings.
"""

from .audit import (
    AuditFinding,
    flag_class_pairs,
    flag_examples,
)
from .errors import XplxError
from .model import (
    ClassifierEntry,
    ConfusionTable,
    ExampleReport,
    LabelVector,
    PopulationManifest,
    PredictionStore,
    validate_row,
)
from .perplexity import (
    PopulationMetrics,
    assign_class,
    c_perplexity,
    distribution_perplexity,
    population_metrics,
    shannon_entropy,
    x_perplexity,
)
from .population import (
    PopulationComparison,
    SubsetFilter,
    SubsetSummary,
    SynthConfig,
    compare_populations,
    subset,
    synthesize_population,
)
from .stats import (
    BoxStats,
    CorrelationReport,
    HistogramResult,
    HistogramSpec,
    box_stats,
    correlation_report,
    gaussian_kde,
    histogram,
    kendall,
    pearson,
    spearman,
)
from .storage import (
    load_csv_population,
    load_labels,
    load_population,
    read_payload,
    write_labels,
    write_manifest,
    write_payload,
    write_report,
)
from .votes import (
    ClassReport,
    analyze_examples,
    class_confusion,
    class_perplexities,
    expected_vote_fraction,
    top_labels,
    vote_fraction,
)

__version__ = "0.1.0"

__all__ = [
    "AuditFinding",
    "BoxStats",
    "ClassReport",
    "ClassifierEntry",
    "ConfusionTable",
    "CorrelationReport",
    "ExampleReport",
    "HistogramResult",
    "HistogramSpec",
    "LabelVector",
    "PopulationComparison",
    "PopulationManifest",
    "PopulationMetrics",
    "PredictionStore",
    "SubsetFilter",
    "SubsetSummary",
    "SynthConfig",
    "XplxError",
    "analyze_examples",
    "assign_class",
    "box_stats",
    "c_perplexity",
    "class_confusion",
    "class_perplexities",
    "compare_populations",
    "correlation_report",
    "distribution_perplexity",
    "expected_vote_fraction",
    "flag_class_pairs",
    "flag_examples",
    "gaussian_kde",
    "histogram",
    "kendall",
    "load_csv_population",
    "load_labels",
    "load_population",
    "pearson",
    "population_metrics",
    "read_payload",
    "shannon_entropy",
    "spearman",
    "subset",
    "synthesize_population",
    "top_labels",
    "validate_row",
    "vote_fraction",
    "write_labels",
    "write_manifest",
    "write_payload",
    "write_report",
    "x_perplexity",
]
