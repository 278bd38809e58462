"""Lexical knowledge base and relation proposals for hypothesis chunks.

The lexicon stores three edge kinds over surface tokens: synonymy (an
equivalence closure), hypernymy (transitively closed through synonym
classes), and antonymy.  Given an aligned premise chunk for a hypothesis
chunk, simple rules propose candidate relations:

* equivalence when the chunks are equal up to synonyms, or the hypothesis
  chunk is a sub-phrase of the premise chunk,
* forward entailment when the hypothesis chunk is a sub-phrase of the
  premise chunk or contains a hypernym of a premise token,
* reverse entailment in the mirrored cases,
* the merged negation/alternation action when the chunks contain an
  antonym pair.

The equivalence and forward entailment rules deliberately overlap on the
sub-phrase case; both proposals are emitted.  Proposals are ranked by the
policy's probability for the proposed relation, with ties broken by
earlier position and then by canonical action order.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .executor import Chunk, ChunkedPair
from .relations import ACTIONS, ActionRelation

__all__ = [
    "Lexicon",
    "Proposal",
    "ProposalQueue",
    "align",
    "propose",
    "proposal_keys",
    "queue_from_keys",
    "build_queue",
    "default_lexicon",
]

_ACTION_ORDER = {a: i for i, a in enumerate(ACTIONS)}


class Lexicon:
    """Immutable word-relation store with closure-aware queries."""

    def __init__(
        self,
        synonyms: Iterable[tuple[str, str]] = (),
        hypernyms: Iterable[tuple[str, str]] = (),
        antonyms: Iterable[tuple[str, str]] = (),
    ):
        self._syn_edges = tuple(synonyms)
        self._hyper_edges = tuple(hypernyms)  # (parent, child)
        self._ant_edges = tuple(antonyms)
        self._root: dict[str, str] = {}
        for a, b in self._syn_edges:
            self._union(a, b)
        # hypernym reachability between synonym classes, transitively closed
        children: dict[str, set[str]] = {}
        for parent, child in self._hyper_edges:
            children.setdefault(self.root(parent), set()).add(self.root(child))
        self._descendants: dict[str, frozenset[str]] = {}
        for node in children:
            seen: set[str] = set()
            stack = list(children[node])
            while stack:
                cur = stack.pop()
                if cur in seen:
                    continue
                seen.add(cur)
                stack.extend(children.get(cur, ()))
            self._descendants[node] = frozenset(seen)
        self._antonym_pairs = frozenset(
            frozenset((self.root(a), self.root(b))) for a, b in self._ant_edges
        )

    def _find(self, w: str) -> str:
        while self._root.get(w, w) != w:
            w = self._root[w]
        return w

    def _union(self, a: str, b: str) -> None:
        ra, rb = self._find(a), self._find(b)
        if ra != rb:
            # deterministic representative: lexicographically smaller root
            lo, hi = sorted((ra, rb))
            self._root[hi] = lo

    def root(self, word: str) -> str:
        """Representative of the word's synonym class."""
        return self._find(word)

    def synonymous(self, a: str, b: str) -> bool:
        return self.root(a) == self.root(b)

    def hypernym_of(self, u: str, v: str) -> bool:
        """True if u is a (transitive) hypernym of v."""
        ru, rv = self.root(u), self.root(v)
        return rv in self._descendants.get(ru, frozenset())

    def antonymous(self, a: str, b: str) -> bool:
        return frozenset((self.root(a), self.root(b))) in self._antonym_pairs

    def related(self, a: str, b: str) -> bool:
        """Any lexical link usable for alignment, including equality."""
        return (
            self.synonymous(a, b)
            or self.hypernym_of(a, b)
            or self.hypernym_of(b, a)
            or self.antonymous(a, b)
        )

    def normalize(self, tokens: Sequence[str]) -> tuple[str, ...]:
        return tuple(self.root(t) for t in tokens)

    # -- serialization ----------------------------------------------------

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        """Read edges from a plain text file.

        Lines are ``syn w1 w2``, ``hyper parent child``, or ``ant w1 w2``;
        blank lines and ``#`` comments are ignored.
        """
        syn, hyper, ant = [], [], []
        buckets = {"syn": syn, "hyper": hyper, "ant": ant}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 3 or parts[0] not in buckets:
                raise ValueError(
                    f"{path}:{lineno}: expected 'syn|hyper|ant word word'"
                )
            buckets[parts[0]].append((parts[1], parts[2]))
        return cls(synonyms=syn, hypernyms=hyper, antonyms=ant)

    def dump(self, path: str | Path) -> None:
        lines = [f"syn {a} {b}" for a, b in sorted(self._syn_edges)]
        lines += [f"hyper {a} {b}" for a, b in sorted(self._hyper_edges)]
        lines += [f"ant {a} {b}" for a, b in sorted(self._ant_edges)]
        Path(path).write_text("\n".join(lines) + "\n")


def default_lexicon() -> Lexicon:
    """Built-in lexicon covering the bundled grammar vocabulary."""
    return Lexicon(
        synonyms=[
            ("kid", "child"), ("kids", "children"),
            ("love", "like"), ("loves", "likes"),
            ("not", "n't"), ("little", "small"),
        ],
        hypernyms=[
            # (parent, child): the child denotes a subset of the parent
            ("animal", "dog"), ("animals", "dogs"),
            ("animal", "cat"), ("animals", "cats"),
            ("animal", "rabbit"), ("animals", "rabbits"),
            ("animal", "bird"), ("animals", "birds"),
            ("animal", "mammal"), ("animals", "mammals"),
            ("mammal", "dog"), ("mammals", "dogs"),
            ("mammal", "cat"), ("mammals", "cats"),
            ("dog", "beagle"), ("dogs", "beagles"),
            ("dog", "puppy"), ("dogs", "puppies"),
            ("cat", "kitten"), ("cats", "kittens"),
            ("person", "kid"), ("people", "kids"),
            ("sports", "table-tennis"),
            ("food", "hamburger"), ("food", "meat"),
            ("move", "run"), ("moves", "runs"),
            ("move", "walk"), ("moves", "walks"),
            ("move", "swim"), ("moves", "swims"),
            ("move", "fly"), ("moves", "flies"),
            ("run", "jog"), ("runs", "jogs"),
        ],
        antonyms=[
            ("run", "sleep"), ("runs", "sleeps"),
            ("run", "rest"), ("runs", "rests"),
            ("walk", "fly"), ("walks", "flies"),
            ("ocean", "fountain"),
            ("morning", "evening"),
            ("big", "small"), ("white", "black"), ("young", "old"),
        ],
    )


@dataclass(frozen=True, order=True)
class Proposal:
    """A candidate revision: set step t to relation, at policy probability.

    Sorts by descending probability, then earlier step, then canonical
    action order.
    """

    sort_key: tuple = field(init=False, repr=False)
    t: int = field(compare=False)  # 1-based hypothesis chunk index
    relation: ActionRelation = field(compare=False)
    prob: float = field(compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "sort_key", (-self.prob, self.t, _ACTION_ORDER[self.relation])
        )

    @property
    def key(self) -> tuple[int, ActionRelation]:
        return (self.t, self.relation)


class ProposalQueue:
    """Priority queue of proposals, deduplicated on (step, relation)."""

    def __init__(self, proposals: Iterable[Proposal] = ()):
        self._heap: list[Proposal] = []
        self._keys: set[tuple[int, ActionRelation]] = set()
        for p in proposals:
            self.push(p)

    def push(self, proposal: Proposal) -> None:
        if proposal.key in self._keys:
            return
        self._keys.add(proposal.key)
        heapq.heappush(self._heap, proposal)

    def pop(self) -> Proposal:
        proposal = heapq.heappop(self._heap)
        self._keys.discard(proposal.key)
        return proposal

    def __len__(self) -> int:
        return len(self._heap)

    def __bool__(self) -> bool:
        return bool(self._heap)

    def __contains__(self, key: tuple[int, ActionRelation]) -> bool:
        return key in self._keys

    def items(self) -> list[Proposal]:
        """Remaining proposals in priority order, non-destructively."""
        return sorted(self._heap)

    def keys(self) -> frozenset[tuple[int, ActionRelation]]:
        return frozenset(self._keys)

    def intersect(self, keys: Iterable[tuple[int, ActionRelation]]) -> "ProposalQueue":
        wanted = set(keys)
        return ProposalQueue(p for p in self._heap if p.key in wanted)


def align(
    hyp_chunk: Chunk,
    premise_chunks: Sequence[Chunk],
    lexicon: Lexicon,
) -> Optional[Chunk]:
    """Premise chunk with maximal lexical token overlap, or None.

    Overlap counts hypothesis tokens that are related (equal up to
    synonyms, hypernym in either direction, or antonym) to some token of
    the premise chunk.  Ties go to the leftmost premise chunk; zero
    overlap aligns nothing.
    """
    best, best_score = None, 0
    for candidate in premise_chunks:
        score = sum(
            1
            for u in hyp_chunk.tokens
            if any(lexicon.related(u, v) for v in candidate.tokens)
        )
        if score > best_score:
            best, best_score = candidate, score
    return best


def _subphrase(short: tuple[str, ...], long: tuple[str, ...]) -> bool:
    """Proper ordered subsequence test on normalized tokens."""
    if len(short) >= len(long):
        return False
    it = iter(long)
    return all(tok in it for tok in short)


def propose(
    hyp_chunk: Chunk,
    premise_chunk: Chunk,
    lexicon: Lexicon,
) -> tuple[ActionRelation, ...]:
    """Relations suggested by the lexicon for an aligned chunk pair.

    Returned in canonical action order; may be empty.
    """
    s = lexicon.normalize(hyp_chunk.tokens)
    s_tilde = lexicon.normalize(premise_chunk.tokens)
    sub = _subphrase(s, s_tilde)
    sup = _subphrase(s_tilde, s)
    hyper_fwd = any(
        lexicon.hypernym_of(u, v) for u in hyp_chunk.tokens for v in premise_chunk.tokens
    )
    hyper_rev = any(
        lexicon.hypernym_of(v, u) for u in hyp_chunk.tokens for v in premise_chunk.tokens
    )
    antonym = any(
        lexicon.antonymous(u, v) for u in hyp_chunk.tokens for v in premise_chunk.tokens
    )
    out = []
    if s == s_tilde or sub:
        out.append(ActionRelation.EQUIVALENCE)
    if sub or hyper_fwd:
        out.append(ActionRelation.FORWARD_ENTAILMENT)
    if sup or hyper_rev:
        out.append(ActionRelation.REVERSE_ENTAILMENT)
    if antonym:
        out.append(ActionRelation.NEG_ALT)
    return tuple(out)


def proposal_keys(
    pair: ChunkedPair, lexicon: Lexicon
) -> tuple[tuple[int, ActionRelation], ...]:
    """(step, relation) proposals for a pair; independent of the policy."""
    keys = []
    for t, hyp_chunk in enumerate(pair.hypothesis, start=1):
        premise_chunk = align(hyp_chunk, pair.premise, lexicon)
        if premise_chunk is None:
            continue
        keys.extend((t, rel) for rel in propose(hyp_chunk, premise_chunk, lexicon))
    return tuple(keys)


def queue_from_keys(
    keys: Iterable[tuple[int, ActionRelation]], probs
) -> ProposalQueue:
    """Attach policy probabilities to proposal keys and rank them."""
    queue = ProposalQueue()
    for t, relation in keys:
        prob = float(probs[t - 1][_ACTION_ORDER[relation]])
        queue.push(Proposal(t=t, relation=relation, prob=prob))
    return queue


def build_queue(
    pair: ChunkedPair,
    probs,
    lexicon: Lexicon,
) -> ProposalQueue:
    """Proposals for every hypothesis chunk, ranked by policy probability.

    ``probs`` is an (m, 5) array of per-step action distributions, indexed
    by the canonical action order.
    """
    return queue_from_keys(proposal_keys(pair, lexicon), probs)
