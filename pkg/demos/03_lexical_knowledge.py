"""Lexical knowledge: alignment and relation proposals.

The lexicon stores synonym, hypernym, and antonym edges.  For a
hypothesis chunk it proposes candidate relations against the aligned
premise chunk; during training these proposals seed program revisions.
"""

from natlog.chunker import chunk_pair, default_rules
from natlog.knowledge import align, default_lexicon, propose

rules = default_rules()
lexicon = default_lexicon()

print("kid/child synonymous:", lexicon.synonymous("kid", "child"))
print("animal covers dog:  ", lexicon.hypernym_of("animal", "dog"))
print("ocean vs fountain:  ", lexicon.antonymous("ocean", "fountain"))
print()

pair = chunk_pair(
    "the child does not love sports",
    "the kid doesn't like table-tennis",
    rules,
)

# each hypothesis chunk is aligned to the premise chunk sharing the most
# lexical material (direct or through lexicon edges)
for t, chunk in enumerate(pair.hypothesis, 1):
    aligned = align(chunk, pair.premise, lexicon)
    target = aligned.text() if aligned else "-"
    print(f"chunk {t}: {chunk.text()!r:18} -> {target!r}")
print()

# proposals pair the aligned chunks with relations the lexicon supports
for t, chunk in enumerate(pair.hypothesis, 1):
    aligned = align(chunk, pair.premise, lexicon)
    if aligned is None:
        continue
    for relation in propose(chunk, aligned, lexicon):
        print(f"step {t}: propose {relation.symbol}  "
              f"({chunk.text()} vs {aligned.text()})")

# "table-tennis" under "sports" yields reverse entailment: the premise
# concept is the broader one
