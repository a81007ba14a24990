"""Finding mislabeled examples and overlapping classes.

An example every strong classifier gets "wrong" with high confidence,
all agreeing on the same alternative, is evidence against the label
rather than against the classifiers. The audit splits high-miss
examples into two piles:

  mislabel_candidate       confidently missed, unanimous alternative
  inappropriate_label_...  missed but with genuine confusion

and separately flags class pairs whose symmetric confusion suggests
overlapping definitions.
"""

from xplx.audit import flag_class_pairs, flag_examples
from xplx.population import SynthConfig, synthesize_population
from xplx.votes import analyze_examples, class_confusion

# Strong-only population with 5% of labels deliberately flipped. The
# classifiers are generated against the ORIGINAL truth; only the label
# file lies. corruption_log records every flip. Sharpness is turned up
# so the population is confident enough to clear the c-perplexity gate
# (soft populations would demote everything to the second pile).
cfg = SynthConfig(
    num_classes=50,
    num_examples=2000,
    tiers=(("100", 20, 0.8, 1.0),),
    base_concentration=0.05,
    sharpness=50.0,
    mislabel_fraction=0.05,
    seed=7,
)
_, store, labels, corruption_log = synthesize_population(cfg)
print(f"injected mislabels: {len(corruption_log)}")

reports = analyze_examples(store, labels)
findings = flag_examples(reports, labels)
print(f"example findings:   {len(findings)}")

by_kind = {}
for f in findings:
    by_kind.setdefault(f.kind, []).append(f)
for kind, group in sorted(by_kind.items()):
    print(f"  {kind}: {len(group)}")

# score the audit against the known corruption
flagged = {f.example for f in findings}
corrupted = {example for example, _, _ in corruption_log}
hits = len(flagged & corrupted)
print(f"precision: {hits / len(flagged):.3f}")
print(f"recall:    {hits / len(corrupted):.3f}")

# For mislabel candidates the suggested label should usually be the
# original truth the classifiers were trained toward.
suggested = {f.example: f.suggested_label for f in findings
             if f.kind == "mislabel_candidate"}
orig = {example: before for example, before, _ in corruption_log}
agree = sum(1 for ex, s in suggested.items() if orig.get(ex) == s)
print(f"suggested label == original truth: {agree}/{len(suggested)}")

print()

# Class-pair audit needs confused classes, so build a population where
# classes 0 and 1 are indistinguishable: replay each row's probability
# mass across the pair. Crude but effective.
cfg2 = SynthConfig(num_classes=6, num_examples=1200, seed=11,
                   tiers=(("100", 12, 0.8, 1.0),))
_, store2, labels2, _ = synthesize_population(cfg2)
raw = store2.raw.copy()
pair_mass = raw[:, :, 0] + raw[:, :, 1]
raw[:, :, 0] = pair_mass / 2
raw[:, :, 1] = pair_mass / 2
from xplx.model import PredictionStore
blurred = PredictionStore(raw)

table = class_confusion(blurred, labels2, "voted")
pairs = flag_class_pairs(table)
print("overlapping class pairs (symmetric confusion >= 0.2):")
for f in pairs:
    print(f"  classes {f.class_a} and {f.class_b}: {f.symmetric_confusion:.3f}")
assert any((f.class_a, f.class_b) == (0, 1) for f in pairs)
