"""Repairing a sampled program before it is scored.

A freshly initialized policy samples relations close to uniformly, so
most programs miss the target label.  Revision fixes them from two
sides: lexical proposals (knowledge phase) and a single-edit grid search
toward the answer (answer phase).  Training then scores a blend of the
original and revised programs, which is what makes early learning move.
"""

import numpy as np

from natlog.chunker import chunk_pair, default_rules
from natlog.executor import execute
from natlog.knowledge import build_queue, default_lexicon
from natlog.policy import PolicyParams, featurize_pair, step_distributions
from natlog.relations import ActionRelation, NLILabel
from natlog.trainer import IRConfig, introspective_revision

rules = default_rules()
lexicon = default_lexicon()

pair = chunk_pair(
    "the child does not love sports",
    "the kid doesn't like table-tennis",
    rules,
)
target = NLILabel.ENTAILMENT

params = PolicyParams.zeros()  # untrained: uniform over the five actions
features = featurize_pair(pair, lexicon)
probs = step_distributions(params, features)

# a plausible bad sample: independence everywhere
program = (ActionRelation.INDEPENDENCE,) * pair.m
print("sampled program:", " ".join(a.symbol for a in program))
print("executes to:    ", execute(pair, program).label.value,
      f"(want {target.value})")
print()

phi = build_queue(pair, probs, lexicon)
print("lexical proposals, best first:")
for p in phi.items():
    print(f"  step {p.t}: {p.relation.symbol}  p={p.prob:.2f}")
print()

revised, events = introspective_revision(
    pair, program, target, phi, probs, IRConfig(), np.random.default_rng(0)
)
print("revised program:", " ".join(a.symbol for a in revised))
print("executes to:    ", execute(pair, revised).label.value)
for e in events:
    print(f"  step {e.t}: {e.old.symbol} -> {e.new.symbol}  ({e.source})")
