"""Policy-gradient training with introspective program revision.

Sampled programs earn shaped per-step rewards: mu at every step when the
final state hits the target, and -gamma^(m-t) * mu otherwise, so that
later steps in a failed program carry more blame.  Two exceptions:

* if after step t the target can no longer be reached by any completion,
  the episode stops there with an immediate -mu and no further rewards,
* a correct program whose final state is plain equivalence earns nothing
  when ``prefer_forward_entailment`` is set, nudging the policy toward
  the more informative forward entailment state.

The REINFORCE objective is J = -sum_t log p_t[a_t] * R_t.  Introspective
revision then repairs the sampled program: lexical proposals are popped
from a priority queue and either accepted outright (correct execution and
an exploration coin-flip above epsilon) or subjected to a Metropolis test
on the policy's own probabilities; if the program is still wrong, a grid
search over single-step edits supplies at most one answer-driven fix.
The revised program is scored the same way and both objectives combine as
lambda * J + (1 - lambda) * J_revised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .chunker import ChunkRules, chunk_pair
from .data import Example
from .executor import ChunkedPair, Program, Trace, execute, matches_target
from .knowledge import (
    Lexicon,
    Proposal,
    ProposalQueue,
    proposal_keys,
    queue_from_keys,
)
from .policy import (
    PolicyParams,
    distribution,
    featurize_pair,
    grad_log_prob,
    sample,
    step_distributions,
)
from .relations import ACTIONS, ActionRelation, NLILabel, Relation, reachable, reachable_states

__all__ = [
    "RewardConfig",
    "IRConfig",
    "TrainConfig",
    "Episode",
    "RevisionEvent",
    "reward",
    "reinforce_objective",
    "fix",
    "grid_search",
    "introspective_revision",
    "hybrid_objective",
    "relation_augmentation",
    "mutual_entailment_filter",
    "train",
    "load_train_config",
]

_ACTION_INDEX = {a: i for i, a in enumerate(ACTIONS)}

Target = NLILabel | Relation


@dataclass(frozen=True)
class RewardConfig:
    mu: float = 1.0
    gamma: float = 0.5
    prefer_forward_entailment: bool = True


@dataclass(frozen=True)
class IRConfig:
    max_revisions: int = 3  # M: queue pops consumed per episode
    epsilon: float = 0.2  # exploration floor for outright acceptance
    lam: float = 0.5  # weight of the original objective in the hybrid


@dataclass(frozen=True)
class TrainConfig:
    mu: float = 1.0
    gamma: float = 0.5
    max_revisions: int = 3
    epsilon: float = 0.2
    lam: float = 0.5
    epochs: int = 30
    learning_rate: float = 0.05
    batch_size: int = 8
    seed: int = 0
    prefer_forward_entailment: bool = True
    introspective_revision: bool = True
    knowledge: bool = True
    augmentation: bool = True
    shuffle: bool = True

    def reward_config(self) -> RewardConfig:
        return RewardConfig(
            mu=self.mu,
            gamma=self.gamma,
            prefer_forward_entailment=self.prefer_forward_entailment,
        )

    def ir_config(self) -> IRConfig:
        return IRConfig(
            max_revisions=self.max_revisions,
            epsilon=self.epsilon,
            lam=self.lam,
        )


_CONFIG_KEYS = {
    "mu": ("mu", float),
    "gamma": ("gamma", float),
    "M": ("max_revisions", int),
    "epsilon": ("epsilon", float),
    "lambda": ("lam", float),
    "epochs": ("epochs", int),
    "learning_rate": ("learning_rate", float),
    "batch_size": ("batch_size", int),
    "seed": ("seed", int),
    "prefer_forward_entailment": ("prefer_forward_entailment", bool),
    "introspective_revision": ("introspective_revision", bool),
    "knowledge": ("knowledge", bool),
    "augmentation": ("augmentation", bool),
    "shuffle": ("shuffle", bool),
}


def _parse_bool(raw: str) -> bool:
    if raw.lower() in ("true", "1", "yes", "on"):
        return True
    if raw.lower() in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def load_train_config(path: str | Path) -> TrainConfig:
    """Read ``key = value`` lines; unknown keys are an error."""
    overrides = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        attr, caster = _CONFIG_KEYS[key]
        overrides[attr] = _parse_bool(raw) if caster is bool else caster(raw)
    return TrainConfig(**overrides)


@dataclass(frozen=True)
class RevisionEvent:
    """One accepted edit: step t changed from old to new."""

    t: int
    old: ActionRelation
    new: ActionRelation
    source: str  # "knowledge" or "answer"


@dataclass
class Episode:
    """Everything recorded for one training sample."""

    pair: ChunkedPair
    target: Target
    features: np.ndarray  # (m, n_features)
    probs: np.ndarray  # (m, n_actions)
    program: Program
    trace: Trace
    rewards: tuple[float, ...]
    revised_program: Optional[Program] = None
    revised_trace: Optional[Trace] = None
    revised_rewards: Optional[tuple[float, ...]] = None
    revisions: tuple[RevisionEvent, ...] = ()


def _still_reachable(state: Relation, steps: int, target: Target) -> bool:
    if isinstance(target, NLILabel):
        return target in reachable(state, steps)
    return target in reachable_states(state, steps)


def reward(trace: Trace, target: Target, config: RewardConfig) -> tuple[float, ...]:
    """Shaped per-step rewards for an executed program."""
    m = trace.m
    if matches_target(trace, target):
        if (
            config.prefer_forward_entailment
            and trace.final_state == Relation.EQUIVALENCE
        ):
            return (0.0,) * m
        return (config.mu,) * m
    # wrong answer: stop at the first intermediate step from which the
    # target is unreachable, otherwise blame later steps more; the final
    # step is never a termination point, it is just wrong
    for t in range(1, m):
        if not _still_reachable(trace.states[t], m - t, target):
            out = [0.0] * m
            out[t - 1] = -config.mu
            return tuple(out)
    return tuple(
        -(config.gamma ** (m - t)) * config.mu for t in range(1, m + 1)
    )


def reinforce_objective(
    params: PolicyParams,
    features: np.ndarray,
    program: Sequence[ActionRelation],
    rewards: Sequence[float],
) -> tuple[float, np.ndarray]:
    """J = -sum_t log p_t[a_t] * R_t and its analytic weight gradient."""
    objective = 0.0
    grad = np.zeros_like(params.weights)
    for f, action, r in zip(features, program, rewards):
        if r == 0.0:
            continue
        probs = distribution(params, f)
        objective -= float(np.log(probs[_ACTION_INDEX[action]])) * r
        grad -= r * grad_log_prob(params, f, action)
    return objective, grad


def fix(program: Sequence[ActionRelation], t: int, relation: ActionRelation) -> Program:
    """Copy of the program with step t (1-based) set to ``relation``."""
    program = tuple(program)
    if not 1 <= t <= len(program):
        raise ValueError(f"step {t} out of range 1..{len(program)}")
    return program[: t - 1] + (relation,) + program[t:]


def grid_search(
    pair: ChunkedPair,
    program: Sequence[ActionRelation],
    phi: ProposalQueue,
    target: Target,
    probs: np.ndarray,
) -> ProposalQueue:
    """All single-step edits whose program reaches the target, ranked.

    If any candidate coincides with a pending lexical proposal, the
    result is narrowed to those shared candidates.
    """
    program = tuple(program)
    psi = ProposalQueue()
    for t in range(1, len(program) + 1):
        for action in ACTIONS:
            candidate = fix(program, t, action)
            if matches_target(execute(pair, candidate), target):
                psi.push(
                    Proposal(
                        t=t,
                        relation=action,
                        prob=float(probs[t - 1][_ACTION_INDEX[action]]),
                    )
                )
    shared = psi.keys() & phi.keys()
    if shared:
        psi = psi.intersect(shared)
    return psi


def introspective_revision(
    pair: ChunkedPair,
    program: Sequence[ActionRelation],
    target: Target,
    phi: ProposalQueue,
    probs: np.ndarray,
    config: IRConfig,
    rng: np.random.Generator,
) -> tuple[Program, tuple[RevisionEvent, ...]]:
    """Revise a sampled program with lexical and answer-driven edits.

    Knowledge phase: pop up to ``max_revisions`` proposals.  Each is
    applied outright when the edited program reaches the target and an
    exploration draw clears epsilon; otherwise it survives a Metropolis
    test with ratio p_t[proposal] / p_t[sampled action].  Answer phase:
    if the program still misses the target, the best grid-search edit
    (if any) is applied.
    """
    program = tuple(program)
    revised = program
    events: list[RevisionEvent] = []

    def apply(candidate: Program, t: int, source: str) -> None:
        nonlocal revised
        if candidate != revised:
            events.append(
                RevisionEvent(
                    t=t, old=revised[t - 1], new=candidate[t - 1], source=source
                )
            )
        revised = candidate

    popped = 0
    while popped < config.max_revisions and phi:
        proposal = phi.pop()
        popped += 1
        u = rng.random()
        candidate = fix(revised, proposal.t, proposal.relation)
        if (
            matches_target(execute(pair, candidate), target)
            and u > config.epsilon
        ):
            apply(candidate, proposal.t, "knowledge")
            continue
        u = rng.random()
        sampled_prob = float(
            probs[proposal.t - 1][_ACTION_INDEX[program[proposal.t - 1]]]
        )
        ratio = proposal.prob / sampled_prob if sampled_prob > 0 else 1.0
        if u < min(1.0, ratio):
            apply(candidate, proposal.t, "knowledge")

    if not matches_target(execute(pair, revised), target):
        psi = grid_search(pair, revised, phi, target, probs)
        if psi:
            proposal = psi.pop()
            apply(fix(revised, proposal.t, proposal.relation), proposal.t, "answer")

    return revised, tuple(events)


def hybrid_objective(
    params: PolicyParams, episode: Episode, lam: float
) -> tuple[float, np.ndarray]:
    """Combine original and revised objectives: lam * J + (1 - lam) * J'."""
    j, grad = reinforce_objective(
        params, episode.features, episode.program, episode.rewards
    )
    if episode.revised_program is None:
        return j, grad
    j_rev, grad_rev = reinforce_objective(
        params,
        episode.features,
        episode.revised_program,
        episode.revised_rewards,
    )
    return lam * j + (1 - lam) * j_rev, lam * grad + (1 - lam) * grad_rev


def mutual_entailment_filter(
    rules: ChunkRules, lexicon: Lexicon
) -> Callable[[Example], bool]:
    """True when premise and hypothesis entail each other.

    Chunk both sides and compare chunkwise, equal up to synonyms; such
    pairs stay entailments after swapping and must not be retargeted to
    reverse entailment.
    """

    def is_mutual(example: Example) -> bool:
        pair = chunk_pair(example.premise, example.hypothesis, rules)
        if len(pair.premise) != len(pair.hypothesis):
            return False
        return all(
            lexicon.normalize(p.tokens) == lexicon.normalize(h.tokens)
            for p, h in zip(pair.premise, pair.hypothesis)
        )

    return is_mutual


def relation_augmentation(
    examples: Sequence[Example],
    rules: ChunkRules,
    lexicon: Lexicon,
    entailment_filter: Optional[Callable[[Example], bool]] = None,
) -> list[Example]:
    """Append swapped entailment pairs targeting reverse entailment.

    For every entailment example whose sides are not mutually entailing,
    a new sample swaps premise and hypothesis; the swapped pair is only
    correct when execution ends exactly in the reverse entailment state,
    which teaches the policy to separate it from plain entailment.
    """
    is_mutual = entailment_filter or mutual_entailment_filter(rules, lexicon)
    out = list(examples)
    for example in examples:
        if example.label != NLILabel.ENTAILMENT:
            continue
        if is_mutual(example):
            continue
        out.append(
            Example(
                premise=example.hypothesis,
                hypothesis=example.premise,
                label=None,
                split_tag=example.split_tag,
                target_state=Relation.REVERSE_ENTAILMENT,
            )
        )
    return out


@dataclass(frozen=True)
class RevisionStats:
    """Per-epoch revision bookkeeping, mirrored into training metrics."""

    episodes: int = 0
    knowledge_only: int = 0
    answer_only: int = 0
    both: int = 0
    none: int = 0
    per_relation: dict = field(default_factory=dict)  # relation name -> count

    def to_record(self) -> dict:
        return {
            "episodes": self.episodes,
            "knowledge_only": self.knowledge_only,
            "answer_only": self.answer_only,
            "both": self.both,
            "none": self.none,
            "per_relation": dict(sorted(self.per_relation.items())),
        }


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_accuracy: float
    mean_reward: float
    objective: float
    revisions: RevisionStats

    def to_record(self) -> dict:
        return {
            "epoch": self.epoch,
            "train_accuracy": self.train_accuracy,
            "mean_reward": self.mean_reward,
            "objective": self.objective,
            "revisions": self.revisions.to_record(),
        }


@dataclass
class TrainResult:
    params: PolicyParams
    metrics: tuple[EpochMetrics, ...]


@dataclass
class _Compiled:
    """Per-example caches that do not depend on the policy."""

    pair: ChunkedPair
    target: Target
    features: np.ndarray
    proposals: tuple[tuple[int, ActionRelation], ...]


def _compile_examples(
    examples: Sequence[Example],
    rules: ChunkRules,
    lexicon: Lexicon,
    use_knowledge: bool,
) -> list[_Compiled]:
    compiled = []
    for example in examples:
        pair = chunk_pair(example.premise, example.hypothesis, rules)
        compiled.append(
            _Compiled(
                pair=pair,
                target=example.target,
                features=featurize_pair(pair, lexicon),
                proposals=(
                    proposal_keys(pair, lexicon) if use_knowledge else ()
                ),
            )
        )
    return compiled


def run_episode(
    params: PolicyParams,
    compiled: _Compiled,
    config: TrainConfig,
    rng: np.random.Generator,
) -> Episode:
    """Sample, execute, reward, and (optionally) revise one program."""
    probs = step_distributions(params, compiled.features)
    program = tuple(sample(probs[t], rng) for t in range(compiled.pair.m))
    trace = execute(compiled.pair, program)
    rcfg = config.reward_config()
    episode = Episode(
        pair=compiled.pair,
        target=compiled.target,
        features=compiled.features,
        probs=probs,
        program=program,
        trace=trace,
        rewards=reward(trace, compiled.target, rcfg),
    )
    if not config.introspective_revision:
        return episode
    phi = queue_from_keys(compiled.proposals, probs)
    revised, events = introspective_revision(
        compiled.pair,
        program,
        compiled.target,
        phi,
        probs,
        config.ir_config(),
        rng,
    )
    episode.revised_program = revised
    episode.revised_trace = execute(compiled.pair, revised)
    episode.revised_rewards = reward(episode.revised_trace, compiled.target, rcfg)
    episode.revisions = events
    return episode


def _greedy_accuracy(
    params: PolicyParams, compiled: Sequence[_Compiled]
) -> float:
    hits = 0
    for item in compiled:
        probs = step_distributions(params, item.features)
        program = tuple(ACTIONS[int(np.argmax(p))] for p in probs)
        if matches_target(execute(item.pair, program), item.target):
            hits += 1
    return hits / len(compiled) if compiled else 0.0


def train(
    examples: Sequence[Example],
    rules: ChunkRules,
    lexicon: Lexicon,
    config: TrainConfig,
    params: Optional[PolicyParams] = None,
) -> TrainResult:
    """Plain SGD over the hybrid objective with per-episode RNG streams.

    Episode randomness comes from ``default_rng([seed, ordinal])`` where
    the ordinal counts episodes across the whole run, so results are
    byte-identical for identical seeds regardless of wall clock.
    """
    if not examples:
        raise ValueError("cannot train on an empty dataset")
    if config.augmentation:
        examples = relation_augmentation(examples, rules, lexicon)
    compiled = _compile_examples(examples, rules, lexicon, config.knowledge)
    params = params.copy() if params is not None else PolicyParams.zeros()

    metrics: list[EpochMetrics] = []
    ordinal = 0
    for epoch in range(1, config.epochs + 1):
        order = np.arange(len(compiled))
        if config.shuffle:
            np.random.default_rng([config.seed, epoch]).shuffle(order)

        stats = {
            "episodes": 0,
            "knowledge_only": 0,
            "answer_only": 0,
            "both": 0,
            "none": 0,
        }
        per_relation: dict[str, int] = {}
        reward_total, reward_steps = 0.0, 0
        objective_total = 0.0
        batch_grad = np.zeros_like(params.weights)
        batch_count = 0

        for idx in order:
            episode_rng = np.random.default_rng([config.seed, ordinal])
            ordinal += 1
            episode = run_episode(params, compiled[idx], config, episode_rng)

            value, grad = hybrid_objective(params, episode, config.lam)
            objective_total += value
            batch_grad += grad
            batch_count += 1
            if batch_count == config.batch_size:
                params.weights -= config.learning_rate * batch_grad
                batch_grad = np.zeros_like(params.weights)
                batch_count = 0

            reward_total += sum(episode.rewards)
            reward_steps += len(episode.rewards)
            stats["episodes"] += 1
            sources = {e.source for e in episode.revisions}
            if sources == {"knowledge"}:
                stats["knowledge_only"] += 1
            elif sources == {"answer"}:
                stats["answer_only"] += 1
            elif sources == {"knowledge", "answer"}:
                stats["both"] += 1
            else:
                stats["none"] += 1
            for event in episode.revisions:
                name = event.new.value
                per_relation[name] = per_relation.get(name, 0) + 1

        if batch_count:
            params.weights -= config.learning_rate * batch_grad

        metrics.append(
            EpochMetrics(
                epoch=epoch,
                train_accuracy=_greedy_accuracy(params, compiled),
                mean_reward=reward_total / max(reward_steps, 1),
                objective=objective_total / len(compiled),
                revisions=RevisionStats(per_relation=per_relation, **stats),
            )
        )
    return TrainResult(params=params, metrics=tuple(metrics))
