"""Training the relation policy on generated data.

The generator builds premise/hypothesis pairs whose labels follow from a
single lexical substitution under a quantifier, together with the gold
program, intermediate states, and rationale tokens that the substitution
implies.  Training needs only the label; the rest is kept for evaluation.
"""

import dataclasses

from natlog.chunker import default_rules
from natlog.datagen import default_genspec, generate
from natlog.knowledge import default_lexicon
from natlog.metrics import evaluate
from natlog.trainer import TrainConfig, train

rules = default_rules()
lexicon = default_lexicon()

spec = dataclasses.replace(default_genspec(), train_size=300, test_size=200)
train_set, test_set = generate(spec, rules)
print(f"{len(train_set)} training pairs, {len(test_set)} held-out pairs")
print("sample:", train_set[0].premise, "=>", train_set[0].hypothesis,
      "|", train_set[0].label.value)
print()

config = TrainConfig(epochs=5, learning_rate=0.05, seed=0)
result = train(train_set, rules, lexicon, config)

print("epoch  accuracy  mean reward  revised episodes")
for m in result.metrics:
    revised = m.revisions.episodes - m.revisions.none
    print(f"{m.epoch:>5}  {m.train_accuracy:>8.3f}  {m.mean_reward:>11.3f}"
          f"  {revised:>5}/{m.revisions.episodes}")
print()

report = evaluate(test_set, result.params, rules, lexicon)
print(f"held-out accuracy:   {report.accuracy:.3f}")
print(f"state accuracy:      {report.state_accuracy:.3f}")
print(f"rationale IOU:       {report.rationale_iou:.3f}")
print(f"rationale P/R/F1:    {report.rationale_precision:.3f} "
      f"{report.rationale_recall:.3f} {report.rationale_f1:.3f}")
