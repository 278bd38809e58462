"""Interpretability and accuracy metrics for executed inference traces.

Rationale quality is scored at the token level (intersection over union)
and at the phrase level (precision/recall/F1 with IOU >= 0.5 matching).
State accuracy compares intermediate execution states position by
position, micro-averaged over all steps.  Label accuracy is three-way or
binary, collapsing contradiction and neutral into non-entailment.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .chunker import ChunkRules, chunk_pair
from .data import Example
from .executor import execute, matches_target
from .knowledge import Lexicon
from .policy import PolicyParams, featurize_pair, step_distributions
from .relations import ACTIONS, NLILabel, Relation

__all__ = [
    "iou",
    "phrasal_prf",
    "state_accuracy",
    "label_accuracy",
    "EvalReport",
    "evaluate",
    "reports_to_csv",
]

MATCH_THRESHOLD = 0.5


def iou(pred: Iterable[int], gold: Iterable[int]) -> float:
    """Intersection over union of two token index sets; empty vs empty is 1."""
    pred, gold = set(pred), set(gold)
    if not pred and not gold:
        return 1.0
    return len(pred & gold) / len(pred | gold)


def _greedy_matches(
    preds: Sequence[set[int]], golds: Sequence[set[int]]
) -> int:
    """One-to-one phrase matches at IOU >= 0.5, greedy by descending IOU.

    Ties resolve toward the leftmost phrases (smallest starting token).
    """
    candidates = []
    for i, p in enumerate(preds):
        for j, g in enumerate(golds):
            score = iou(p, g)
            if score >= MATCH_THRESHOLD:
                start_p = min(p) if p else -1
                start_g = min(g) if g else -1
                candidates.append((-score, start_p, start_g, i, j))
    matched_p: set[int] = set()
    matched_g: set[int] = set()
    matches = 0
    for _, _, _, i, j in sorted(candidates):
        if i in matched_p or j in matched_g:
            continue
        matched_p.add(i)
        matched_g.add(j)
        matches += 1
    return matches


def _prf(matches: int, n_pred: int, n_gold: int) -> tuple[float, float, float]:
    precision = matches / n_pred if n_pred else (1.0 if not n_gold else 0.0)
    recall = matches / n_gold if n_gold else (1.0 if not n_pred else 0.0)
    f1 = (
        2 * precision * recall / (precision + recall)
        if precision + recall > 0
        else 0.0
    )
    return precision, recall, f1


def phrasal_prf(
    pred_phrases: Sequence[Iterable[int]],
    gold_phrases: Sequence[Iterable[int]],
) -> tuple[float, float, float]:
    """Phrase-level precision, recall, and F1.

    A predicted phrase matches a gold phrase when their token IOU is at
    least 0.5; matching is one-to-one and greedy by descending IOU, with
    ties resolved toward the leftmost phrases.  An empty side scores 1.0
    against an empty side and 0.0 otherwise.
    """
    preds = [set(p) for p in pred_phrases]
    golds = [set(g) for g in gold_phrases]
    return _prf(_greedy_matches(preds, golds), len(preds), len(golds))


def state_accuracy(
    predicted: Sequence[Sequence[Relation]],
    gold: Sequence[Sequence[Relation]],
) -> float:
    """Micro-averaged per-step state agreement across samples."""
    if len(predicted) != len(gold):
        raise ValueError("predicted and gold sample counts differ")
    hits, total = 0, 0
    for p_states, g_states in zip(predicted, gold):
        if len(p_states) != len(g_states):
            raise ValueError("state sequence lengths differ within a sample")
        hits += sum(1 for p, g in zip(p_states, g_states) if p == g)
        total += len(g_states)
    if total == 0:
        raise ValueError("no states to score")
    return hits / total


def _collapse(label: NLILabel) -> str:
    return "entailment" if label == NLILabel.ENTAILMENT else "non-entailment"


def label_accuracy(
    predicted: Sequence[NLILabel],
    gold: Sequence[NLILabel],
    collapse_binary: bool = False,
) -> float:
    """Fraction of matching labels, optionally collapsed to two classes."""
    if len(predicted) != len(gold):
        raise ValueError("predicted and gold label counts differ")
    if not predicted:
        raise ValueError("no labels to score")
    if collapse_binary:
        return sum(
            1 for p, g in zip(predicted, gold) if _collapse(p) == _collapse(g)
        ) / len(gold)
    return sum(1 for p, g in zip(predicted, gold) if p == g) / len(gold)


@dataclass(frozen=True)
class EvalReport:
    """Aggregate evaluation of a policy over a labeled dataset."""

    examples: int
    accuracy: float
    accuracy_binary: Optional[float]
    state_accuracy: Optional[float]
    rationale_iou: Optional[float]
    rationale_precision: Optional[float]
    rationale_recall: Optional[float]
    rationale_f1: Optional[float]

    def to_record(self) -> dict:
        return {
            "examples": self.examples,
            "accuracy": self.accuracy,
            "accuracy_binary": self.accuracy_binary,
            "state_accuracy": self.state_accuracy,
            "rationale_iou": self.rationale_iou,
            "rationale_precision": self.rationale_precision,
            "rationale_recall": self.rationale_recall,
            "rationale_f1": self.rationale_f1,
        }


_CSV_FIELDS = (
    "dataset",
    "examples",
    "accuracy",
    "accuracy_binary",
    "state_accuracy",
    "rationale_iou",
    "rationale_precision",
    "rationale_recall",
    "rationale_f1",
)


def reports_to_csv(reports: Mapping[str, EvalReport]) -> str:
    """Render named per-dataset reports as CSV, one row per dataset."""
    out = io.StringIO()
    writer = csv.DictWriter(out, fieldnames=_CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for name, report in reports.items():
        row = {"dataset": name}
        row.update(
            (k, "" if v is None else repr(float(v)) if k != "examples" else v)
            for k, v in report.to_record().items()
        )
        writer.writerow(row)
    return out.getvalue()


def evaluate(
    examples: Sequence[Example],
    params: PolicyParams,
    rules: ChunkRules,
    lexicon: Lexicon,
) -> EvalReport:
    """Greedy-decode every example and aggregate all metrics.

    State and rationale metrics cover the examples carrying the relevant
    gold annotations; they are None when no example has them.  Phrase
    P/R/F1 is micro-averaged over phrases, IOU macro-averaged over
    samples.
    """
    if not examples:
        raise ValueError("cannot evaluate an empty dataset")
    hits = 0
    pred_labels: list[NLILabel] = []
    gold_labels: list[NLILabel] = []
    pred_states, gold_states = [], []
    ious = []
    match_count, pred_phrase_count, gold_phrase_count = 0, 0, 0
    any_rationales = False
    scored_phrases = False

    for example in examples:
        pair = chunk_pair(example.premise, example.hypothesis, rules)
        probs = step_distributions(params, featurize_pair(pair, lexicon))
        program = tuple(ACTIONS[int(np.argmax(p))] for p in probs)
        trace = execute(pair, program)
        if matches_target(trace, example.target):
            hits += 1
        if example.label is not None:
            pred_labels.append(trace.label)
            gold_labels.append(example.label)
        if example.gold_states is not None:
            pred_states.append(trace.states[1:])
            gold_states.append(example.gold_states)
        if example.gold_rationale_tokens is not None:
            any_rationales = True
            pred_tokens = trace.rationale_token_indices()
            ious.append(iou(pred_tokens, example.gold_rationale_tokens))
            if example.gold_program is not None:
                scored_phrases = True
                gold_trace = execute(pair, example.gold_program)
                pred_phrases = [
                    set(pair.hypothesis[t - 1].token_indices)
                    for t in trace.rationales
                ]
                gold_phrases = [
                    set(pair.hypothesis[t - 1].token_indices)
                    for t in gold_trace.rationales
                ]
                match_count += _greedy_matches(pred_phrases, gold_phrases)
                pred_phrase_count += len(pred_phrases)
                gold_phrase_count += len(gold_phrases)

    precision = recall = f1 = None
    if scored_phrases:
        precision, recall, f1 = _prf(
            match_count, pred_phrase_count, gold_phrase_count
        )
    return EvalReport(
        examples=len(examples),
        accuracy=hits / len(examples),
        accuracy_binary=(
            label_accuracy(pred_labels, gold_labels, collapse_binary=True)
            if gold_labels
            else None
        ),
        state_accuracy=(
            state_accuracy(pred_states, gold_states) if gold_states else None
        ),
        rationale_iou=float(np.mean(ious)) if any_rationales else None,
        rationale_precision=precision,
        rationale_recall=recall,
        rationale_f1=f1,
    )
