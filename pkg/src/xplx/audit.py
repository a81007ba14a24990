"""Dataset imperfection detection over computed difficulty reports.

An example the population unanimously gets wrong is suspect. If the
population is also confident (low C-perplexity) and agrees on a single
alternative, the recorded label itself is the likely defect and the
alternative is an actionable correction. If the population is confused
(high C-perplexity), or cannot settle on one alternative, the example
is flagged as inappropriately labeled instead: something about it
resists the label scheme. Symmetric inter-class confusion flags label
pairs the scheme fails to separate.

Nothing here mutates data; findings are evidence for a human reviewer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ConfusionTable, ExampleReport, LabelVector

DEFAULT_TAU_X = 0.95
DEFAULT_TAU_C = 1.5
DEFAULT_TAU_S = 0.2

MISLABEL = "mislabel_candidate"
INAPPROPRIATE = "inappropriate_label_candidate"
OVERLAP = "overlapping_class_pair"


@dataclass(frozen=True)
class AuditFinding:
    """One flagged example or class pair; unused fields stay None."""

    kind: str
    example: int | None = None
    label: int | None = None
    x_perplexity: float | None = None
    c_perplexity: float | None = None
    top_voted: tuple | None = None
    top_expected: tuple | None = None
    suggested_label: int | None = None
    class_a: int | None = None
    class_b: int | None = None
    symmetric_confusion: float | None = None


def _unique_top(top_voted) -> int | None:
    """The top voted label, or None when the lead is shared."""
    if not top_voted:
        return None
    if len(top_voted) > 1 and top_voted[0][1] == top_voted[1][1]:
        return None
    return top_voted[0][0]


def flag_examples(
    reports: list[ExampleReport],
    labels: LabelVector,
    tau_x: float = DEFAULT_TAU_X,
    tau_c: float = DEFAULT_TAU_C,
) -> list[AuditFinding]:
    """Flag examples whose X-perplexity reaches tau_x.

    mislabel_candidate: C-perplexity at most tau_c and a unique top
    voted label different from the recorded one; suggested_label is
    that alternative. Everything else above tau_x, including tied
    leaders and the rare case where the lead vote matches the label,
    becomes inappropriate_label_candidate, so the two kinds partition
    the flagged set. Sorted by X-perplexity descending, then
    C-perplexity ascending.
    """
    findings = []
    for report in reports:
        xp = report.x_perplexity
        if xp is None or xp < tau_x:
            continue
        label = labels[report.example_index]
        leader = _unique_top(report.top_voted_labels)
        if report.c_perplexity <= tau_c and leader is not None and leader != label:
            kind, suggested = MISLABEL, leader
        else:
            kind, suggested = INAPPROPRIATE, None
        findings.append(
            AuditFinding(
                kind=kind,
                example=report.example_index,
                label=label,
                x_perplexity=xp,
                c_perplexity=report.c_perplexity,
                top_voted=tuple(report.top_voted_labels),
                top_expected=tuple(report.top_expected_labels),
                suggested_label=suggested,
            )
        )
    findings.sort(key=lambda f: (-f.x_perplexity, f.c_perplexity, f.example))
    return findings


def flag_class_pairs(
    confusion: ConfusionTable,
    tau_s: float = DEFAULT_TAU_S,
) -> list[AuditFinding]:
    """Flag unordered class pairs with symmetric confusion >= tau_s.

    Pairs are reported once with class_a < class_b, sorted by the
    confusion value descending. Classes absent from the labels have NaN
    confusion and are never flagged.
    """
    sym = confusion.sym
    m = sym.shape[0]
    found = []
    for c in range(m):
        for j in range(c + 1, m):
            value = sym[c, j]
            if np.isfinite(value) and value >= tau_s:
                found.append((float(value), c, j))
    found.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [
        AuditFinding(kind=OVERLAP, class_a=c, class_b=j, symmetric_confusion=v)
        for v, c, j in found
    ]
