"""How the choice of classifier population changes the difficulty signal.

Difficulty is defined relative to a population. Weak members spread
the scores out; two populations of similar composition rank examples
similarly, while a strong-only population ranks them differently.
"""

import numpy as np

from xplx.perplexity import population_metrics
from xplx.population import (
    SubsetFilter,
    SynthConfig,
    compare_populations,
    subset,
    synthesize_population,
)
from xplx.stats import kendall

cfg = SynthConfig(num_classes=100, num_examples=2000, seed=31)
manifest, store, labels, _ = synthesize_population(cfg)
ids = [c.id for c in manifest.classifiers]

# Default tiers give 10 classifiers each at train_fraction 0.25, 0.5,
# 0.75 and 5 at 1.0. Grow the population from strong-only outward.
nested = {
    "strong":        ids[30:35],
    "strong+75":     ids[20:35],
    "strong+75+50":  ids[10:35],
    "all":           ids,
}

print("population     n   xp stddev")
for name, group in nested.items():
    _, sub = subset(manifest, store, SubsetFilter(explicit_ids=group))
    xp = population_metrics(sub, labels).x_perplexity
    print(f"{name:13s} {len(group):3d}   {np.std(xp):.4f}")
# adding weaker members stretches the x-perplexity distribution: more
# examples become partially missed instead of unanimously easy

print()

# Rank agreement between subsets. Two disjoint mixtures with the same
# tier makeup agree with each other more than either agrees with the
# strong-only subset.
mix_a = [ids[t * 10 + k] for t in range(3) for k in range(0, 10, 2)]
mix_b = [ids[t * 10 + k] for t in range(3) for k in range(1, 10, 2)]

def xp_of(group):
    _, sub = subset(manifest, store, SubsetFilter(explicit_ids=group))
    return population_metrics(sub, labels).x_perplexity

tau = lambda u, v: kendall(u, v)[1]
xa, xb, xs = xp_of(mix_a), xp_of(mix_b), xp_of(nested["strong"])
print(f"tau_b(mix_a, mix_b)  = {tau(xa, xb):.3f}   (similar mixtures)")
print(f"tau_b(mix_a, strong) = {tau(xa, xs):.3f}")
print(f"tau_b(mix_b, strong) = {tau(xb, xs):.3f}")

print()

# compare_populations bundles the same study: summary stats, shared
# histograms, KDE curves and pairwise rank correlations per subset.
named = [(name, subset(manifest, store, SubsetFilter(explicit_ids=g))[1])
         for name, g in nested.items()]
comparison = compare_populations(named, labels)
for s in comparison.subsets:
    print(f"{s.name:13s} xp mean {s.x_perplexity.mean():.4f}  "
          f"iqr {s.xp_iqr:.4f}  stddev {s.xp_stddev:.4f}")

pair = comparison.correlations[("strong", "all")]
print()
print(f"strong vs all, x-perplexity: pearson {pair['x_perplexity'].pearson:.3f}, "
      f"tau_b {pair['x_perplexity'].kendall_tau_b:.3f}")
