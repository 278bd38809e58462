"""The seven-relation algebra: join, projection, and label grouping.

Run top to bottom; every step prints what it computes.
"""

from natlog.relations import (
    CONTEXTS,
    NLILabel,
    RELATIONS,
    Relation,
    group,
    join,
    project,
)

# The seven basic semantic relations between two spans of text.
for r in RELATIONS:
    print(f"{r.symbol}  {r.value}")
print()

# join(a, b) answers: if span A relates to B by a, and B relates to C by b,
# how does A relate to C?  Chaining two forward entailments stays forward:
fe = Relation.FORWARD_ENTAILMENT
print("join(⊏, ⊏) =", join(fe, fe).symbol)

# but chaining forward with reverse loses all information
re = Relation.REVERSE_ENTAILMENT
print("join(⊏, ⊐) =", join(fe, re).symbol)

# negation composed with negation cancels out
neg = Relation.NEGATION
print("join(^, ^) =", join(neg, neg).symbol)
print()

# The full 7x7 composition grid:
header = "    " + "  ".join(r.symbol for r in RELATIONS)
print(header)
for a in RELATIONS:
    row = "  ".join(join(a, b).symbol for b in RELATIONS)
    print(f"{a.symbol}   {row}")
print()

# Projection re-reads a local relation through its monotonicity context.
# "dog ⊏ animal" holds, but inside "no ..." the entailment flips:
not_ctx = CONTEXTS["not"]
print("in a negated context, ⊏ projects to", project(not_ctx, fe).symbol)
print("in a negated context, ⊐ projects to", project(not_ctx, re).symbol)

# the restrictor of "all" is downward monotone too
all_arg1 = CONTEXTS["all-arg1"]
print("in the restrictor of 'all', ⊏ projects to",
      project(all_arg1, fe).symbol)
print()

# Final states collapse onto the three inference labels.
for r in RELATIONS:
    print(f"{r.symbol} -> {group(r).value}")
assert group(fe) == NLILabel.ENTAILMENT
assert group(Relation.ALTERNATION) == NLILabel.CONTRADICTION
