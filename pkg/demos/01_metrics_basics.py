"""Per-example difficulty metrics on a tiny hand-built population.

Three classifiers, four examples, three classes. Small enough to
check every number by eye.
"""

import numpy as np

from xplx.model import LabelVector, PredictionStore
from xplx.perplexity import population_metrics
from xplx.votes import analyze_examples

# probs[i, x, j] = classifier i's probability of class j on example x
probs = np.array([
    # classifier 0: confident and right everywhere
    [[0.98, 0.01, 0.01],
     [0.01, 0.98, 0.01],
     [0.01, 0.01, 0.98],
     [0.98, 0.01, 0.01]],
    # classifier 1: right on 0-2, votes class 1 on example 3
    [[0.90, 0.05, 0.05],
     [0.10, 0.80, 0.10],
     [0.05, 0.05, 0.90],
     [0.20, 0.70, 0.10]],
    # classifier 2: hedges on example 1, wrong on example 3
    [[0.85, 0.10, 0.05],
     [0.40, 0.40, 0.20],
     [0.10, 0.10, 0.80],
     [0.10, 0.60, 0.30]],
], dtype=np.float32)

store = PredictionStore(probs)
labels = LabelVector.from_values([0, 1, 2, 0], num_classes=3)

metrics = population_metrics(store, labels)

print("example  c_perplexity  x_perplexity")
for x in range(store.num_examples):
    print(f"{x:7d}  {metrics.c_perplexity[x]:12.4f}  {metrics.x_perplexity[x]:12.4f}")

# c-perplexity is the geometric mean of 2**entropy across classifiers.
# It is 1.0 when every classifier puts all mass on one class, and it
# rises toward num_classes as the distributions flatten. It never
# looks at the label: it measures confusion, not correctness.
#
# x-perplexity is the fraction of classifiers whose top vote misses
# the label. With 3 classifiers it can only be 0, 1/3, 2/3 or 1.

# Example 3 shows the difference: classifiers 1 and 2 both vote class
# 1 with decent confidence, so c-perplexity stays low while
# x-perplexity jumps to 2/3. Confidently wrong, not confused.
assert round(metrics.x_perplexity[3] * 3) == 2

# analyze_examples wraps the same arrays into per-example reports with
# vote tallies attached.
reports = analyze_examples(store, labels)
r = reports[3]
print()
print(f"example 3 vote fractions:     {r.vote_fractions}")
print(f"example 3 expected fractions: {{"
      + ", ".join(f"{j}: {v:.3f}" for j, v in sorted(r.expected_fractions.items()))
      + "}")
print(f"example 3 top voted:          {r.top_voted_labels}")

# two of three argmax votes go to class 1 even though the label is 0
assert r.vote_fractions[1] == 2.0 / 3.0
