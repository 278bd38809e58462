"""Linear softmax policy over the five action relations.

Each hypothesis chunk is described by a small interpretable feature vector
derived from its aligned premise chunk and the lexicon: lexical match
flags, sub-phrase and hypernym direction flags, token overlap, relative
position, and a one-hot of the monotonicity context.  Action scores are a
linear map of the features; probabilities are their softmax.

Feature extraction at step t looks only at the premise and hypothesis
chunks up to t, so distributions are unaffected by later hypothesis
content.  Gradients of log-probabilities are analytic:

    d log p[a] / dW = (onehot(a) - p) outer f
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .executor import ChunkedPair
from .knowledge import Lexicon, align
from .relations import ACTIONS, ActionRelation

__all__ = [
    "FEATURE_NAMES",
    "FeatureVector",
    "PolicyParams",
    "featurize",
    "featurize_pair",
    "distribution",
    "step_distributions",
    "sample",
    "argmax",
    "grad_log_prob",
    "save_checkpoint",
    "load_checkpoint",
]

_CONTEXT_NAMES = (
    "upward-default",
    "all-arg1",
    "all-arg2",
    "some-arg1",
    "some-arg2",
    "not",
)

FEATURE_NAMES: tuple[str, ...] = (
    "exact_match",
    "subphrase_fwd",
    "subphrase_rev",
    "synonym",
    "hypernym_fwd",
    "hypernym_rev",
    "antonym",
    "token_overlap",
    "position",
    *(f"context_{name}" for name in _CONTEXT_NAMES),
    "bias",
)

N_FEATURES = len(FEATURE_NAMES)
N_ACTIONS = len(ACTIONS)

_ACTION_INDEX = {a: i for i, a in enumerate(ACTIONS)}

CHECKPOINT_MAGIC = "natlog-policy v1"


@dataclass(frozen=True)
class FeatureVector:
    """Feature values aligned with FEATURE_NAMES."""

    values: np.ndarray

    def __getitem__(self, name: str) -> float:
        return float(self.values[FEATURE_NAMES.index(name)])

    def as_dict(self) -> dict[str, float]:
        return {n: float(v) for n, v in zip(FEATURE_NAMES, self.values)}


@dataclass
class PolicyParams:
    """Weight matrix, one row per action in canonical order."""

    weights: np.ndarray  # shape (N_ACTIONS, N_FEATURES)

    @classmethod
    def zeros(cls) -> "PolicyParams":
        return cls(weights=np.zeros((N_ACTIONS, N_FEATURES)))

    def copy(self) -> "PolicyParams":
        return PolicyParams(weights=self.weights.copy())


def _subphrase(short: tuple[str, ...], long: tuple[str, ...]) -> bool:
    if len(short) >= len(long):
        return False
    it = iter(long)
    return all(tok in it for tok in short)


def featurize(
    pair: ChunkedPair, t: int, lexicon: Lexicon
) -> FeatureVector:
    """Features for hypothesis chunk t (1-based) against the premise."""
    if not 1 <= t <= pair.m:
        raise ValueError(f"step {t} out of range 1..{pair.m}")
    hyp = pair.hypothesis[t - 1]
    aligned = align(hyp, pair.premise, lexicon)
    values = np.zeros(N_FEATURES)
    if aligned is not None:
        s = lexicon.normalize(hyp.tokens)
        s_tilde = lexicon.normalize(aligned.tokens)
        values[0] = 1.0 if s == s_tilde else 0.0
        values[1] = 1.0 if _subphrase(s, s_tilde) else 0.0
        values[2] = 1.0 if _subphrase(s_tilde, s) else 0.0
        values[3] = 1.0 if any(
            u != v and lexicon.synonymous(u, v)
            for u in hyp.tokens
            for v in aligned.tokens
        ) else 0.0
        values[4] = 1.0 if any(
            lexicon.hypernym_of(u, v) for u in hyp.tokens for v in aligned.tokens
        ) else 0.0
        values[5] = 1.0 if any(
            lexicon.hypernym_of(v, u) for u in hyp.tokens for v in aligned.tokens
        ) else 0.0
        values[6] = 1.0 if any(
            lexicon.antonymous(u, v) for u in hyp.tokens for v in aligned.tokens
        ) else 0.0
        values[7] = sum(
            1
            for u in hyp.tokens
            if any(lexicon.related(u, v) for v in aligned.tokens)
        ) / len(hyp.tokens)
    values[8] = t / pair.m
    context_offset = 9
    try:
        values[context_offset + _CONTEXT_NAMES.index(hyp.context.name)] = 1.0
    except ValueError:
        pass  # unknown context: all projectivity bits stay zero
    values[-1] = 1.0
    return FeatureVector(values=values)


def featurize_pair(pair: ChunkedPair, lexicon: Lexicon) -> np.ndarray:
    """Stacked feature matrix of shape (m, N_FEATURES)."""
    return np.stack(
        [featurize(pair, t, lexicon).values for t in range(1, pair.m + 1)]
    )


def distribution(params: PolicyParams, features) -> np.ndarray:
    """Softmax action distribution for one feature vector."""
    f = features.values if isinstance(features, FeatureVector) else np.asarray(features)
    scores = params.weights @ f
    if not np.all(np.isfinite(scores)):
        raise ValueError("non-finite action scores")
    scores = scores - scores.max()
    exp = np.exp(scores)
    return exp / exp.sum()


def step_distributions(params: PolicyParams, features: np.ndarray) -> np.ndarray:
    """Distributions for every step; features has shape (m, N_FEATURES)."""
    return np.stack([distribution(params, row) for row in features])


def sample(dist: np.ndarray, rng: np.random.Generator) -> ActionRelation:
    """Draw an action by inverse CDF in canonical action order."""
    u = rng.random()
    cum = 0.0
    for i, p in enumerate(dist):
        cum += p
        if u < cum:
            return ACTIONS[i]
    return ACTIONS[-1]  # guard against rounding in the final bin


def argmax(dist: np.ndarray) -> ActionRelation:
    """Most probable action; ties resolve to the earliest canonical action."""
    return ACTIONS[int(np.argmax(dist))]


def grad_log_prob(
    params: PolicyParams, features, action: ActionRelation
) -> np.ndarray:
    """Analytic gradient of log p[action] with respect to the weights."""
    f = features.values if isinstance(features, FeatureVector) else np.asarray(features)
    probs = distribution(params, f)
    onehot = np.zeros(N_ACTIONS)
    onehot[_ACTION_INDEX[action]] = 1.0
    return np.outer(onehot - probs, f)


def save_checkpoint(params: PolicyParams, path: str | Path) -> None:
    """Write weights as hex floats with a feature-name header."""
    lines = [
        CHECKPOINT_MAGIC,
        "features: " + " ".join(FEATURE_NAMES),
        "actions: " + " ".join(a.value for a in ACTIONS),
    ]
    for row in params.weights:
        lines.append(" ".join(float(x).hex() for x in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_checkpoint(path: str | Path) -> PolicyParams:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a {CHECKPOINT_MAGIC} checkpoint")
    if lines[1] != "features: " + " ".join(FEATURE_NAMES):
        raise ValueError(f"{path}: feature layout mismatch")
    if lines[2] != "actions: " + " ".join(a.value for a in ACTIONS):
        raise ValueError(f"{path}: action layout mismatch")
    rows = [
        [float.fromhex(x) for x in line.split()] for line in lines[3:] if line
    ]
    weights = np.array(rows)
    if weights.shape != (N_ACTIONS, N_FEATURES):
        raise ValueError(f"{path}: weight shape {weights.shape} unexpected")
    return PolicyParams(weights=weights)
