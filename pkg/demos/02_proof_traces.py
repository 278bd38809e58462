"""Executing a relation program over a chunked sentence pair.

A program assigns one relation per hypothesis chunk; the executor projects
each relation through its chunk's monotonicity context and joins the
results into a running state whose final value decides the label.
"""

from natlog.chunker import chunk_pair, default_rules
from natlog.executor import execute
from natlog.relations import ActionRelation

rules = default_rules()

premise = "the child does not love sports"
hypothesis = "the kid doesn't like table-tennis"
pair = chunk_pair(premise, hypothesis, rules)

print("premise:   ", premise)
print("hypothesis:", hypothesis)
print()
for i, chunk in enumerate(pair.hypothesis, 1):
    print(f"chunk {i}: {chunk.text()!r:24} context={chunk.context.name}")
print()

# the policy normally samples this; here we hand it the right answer:
# kid=child, doesn't like=does not love, and table-tennis is a kind of
# sports, so the premise covers strictly more (reverse entailment)
program = (
    ActionRelation.EQUIVALENCE,
    ActionRelation.EQUIVALENCE,
    ActionRelation.REVERSE_ENTAILMENT,
)
trace = execute(pair, program)

print("step  action  projected  state")
for t in range(pair.m):
    print(f"{t + 1:>4}  {program[t].symbol:^6}  "
          f"{trace.projected[t].symbol:^9}  {trace.states[t + 1].symbol}")
print()

# the last chunk sits under "not", so ⊐ flips to ⊏ and the pair entails
print("label:", trace.label.value)
print("rationale chunks:", trace.rationales)
print("rationale tokens:", trace.rationale_token_indices())

assert trace.label.value == "entailment"
assert trace.rationales == (3,)

# a wrong relation at the flip point changes everything downstream
bad = (program[0], program[1], ActionRelation.FORWARD_ENTAILMENT)
print()
print("with ⊏ at step 3 instead:", execute(pair, bad).label.value)
