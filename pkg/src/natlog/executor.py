"""Deterministic execution of relation programs over chunked sentence pairs.

A program assigns one action relation to each hypothesis chunk.  Execution
projects each action through the chunk's monotonicity context and folds the
projected relations left to right with the join operator:

    z_0 = equivalence
    z_t = join(z_{t-1}, project(context_t, action_t))

The final state z_m grouped into a three-way label is the verdict.  The
intermediate states make the inference auditable: the rationale of a trace
is the set of steps that both move the state and already exhibit the final
label.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .relations import (
    ACTIONS,
    ActionRelation,
    NLILabel,
    ProjectivityContext,
    Relation,
    UPWARD,
    group,
    join,
    project,
)

__all__ = [
    "Chunk",
    "ChunkedPair",
    "Program",
    "Trace",
    "execute",
    "extract_rationales",
    "enumerate_programs",
]

ENUMERATION_CAP = 8


@dataclass(frozen=True)
class Chunk:
    """A contiguous span of tokens with its monotonicity context."""

    tokens: tuple[str, ...]
    start: int  # token offset within the source sentence
    context: ProjectivityContext = UPWARD

    @property
    def end(self) -> int:
        return self.start + len(self.tokens)

    @property
    def token_indices(self) -> tuple[int, ...]:
        return tuple(range(self.start, self.end))

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class ChunkedPair:
    """A premise/hypothesis pair after chunking and projectivity marking."""

    premise: tuple[Chunk, ...]
    hypothesis: tuple[Chunk, ...]

    def __post_init__(self):
        if not self.hypothesis:
            raise ValueError("hypothesis must contain at least one chunk")

    @property
    def m(self) -> int:
        return len(self.hypothesis)


Program = tuple[ActionRelation, ...]


@dataclass(frozen=True)
class Trace:
    """Full record of one program execution.

    ``states`` holds z_0 .. z_m; step t (1-based) reads ``actions[t-1]``,
    ``projected[t-1]`` and lands in ``states[t]``.
    """

    pair: ChunkedPair
    actions: Program
    projected: tuple[Relation, ...]
    states: tuple[Relation, ...]
    label: NLILabel
    rationales: tuple[int, ...]  # 1-based hypothesis chunk indices

    @property
    def m(self) -> int:
        return len(self.actions)

    @property
    def final_state(self) -> Relation:
        return self.states[-1]

    def rationale_token_indices(self) -> tuple[int, ...]:
        out = []
        for t in self.rationales:
            out.extend(self.pair.hypothesis[t - 1].token_indices)
        return tuple(out)


def execute(pair: ChunkedPair, program: Sequence[ActionRelation]) -> Trace:
    """Run ``program`` over ``pair`` and return the full trace."""
    program = tuple(program)
    if len(program) != pair.m:
        raise ValueError(
            f"program length {len(program)} != hypothesis chunks {pair.m}"
        )
    states = [Relation.EQUIVALENCE]
    projected = []
    for chunk, action in zip(pair.hypothesis, program):
        r = project(chunk.context, action.to_relation())
        projected.append(r)
        states.append(join(states[-1], r))
    label = group(states[-1])
    return Trace(
        pair=pair,
        actions=program,
        projected=tuple(projected),
        states=tuple(states),
        label=label,
        rationales=_rationales(tuple(states), label),
    )


def _rationales(states: tuple[Relation, ...], label: NLILabel) -> tuple[int, ...]:
    out = []
    for t in range(1, len(states)):
        if states[t] != states[t - 1] and group(states[t]) == label:
            out.append(t)
    return tuple(out)


def extract_rationales(trace: Trace) -> tuple[int, ...]:
    """Steps that change the state and already carry the final label.

    Returns 1-based hypothesis chunk indices t with
    group(z_t) == final label and z_t != z_{t-1}.
    """
    return _rationales(trace.states, trace.label)


def matches_target(trace: Trace, target: NLILabel | Relation) -> bool:
    """True if the trace reaches a label target or exact final state."""
    if isinstance(target, NLILabel):
        return trace.label == target
    return trace.final_state == target


def enumerate_programs(
    pair: ChunkedPair,
    target: NLILabel | Relation,
    cap: int = ENUMERATION_CAP,
) -> Iterator[Program]:
    """Yield all programs reaching ``target``, in lexicographic action order.

    Exhaustive over the 5^m program space, so refuses to run past ``cap``
    hypothesis chunks.
    """
    if pair.m > cap:
        raise ValueError(f"m={pair.m} exceeds enumeration cap {cap}")
    for program in itertools.product(ACTIONS, repeat=pair.m):
        if matches_target(execute(pair, program), target):
            yield program
