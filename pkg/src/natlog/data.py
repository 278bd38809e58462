"""Line-delimited dataset records with a versioned schema header.

Every dataset file starts with a header record naming the schema and
version, followed by one JSON object per example.  Keys are sorted and
separators fixed so identical data serializes to identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Optional

from .relations import ActionRelation, NLILabel, Relation

__all__ = ["Example", "load_dataset", "save_dataset", "SCHEMA", "VERSION"]

SCHEMA = "natlog.dataset"
VERSION = 1


@dataclass(frozen=True)
class Example:
    """One premise/hypothesis pair with optional gold annotations.

    ``gold_states`` holds z_1 .. z_m (the start state is always
    equivalence).  ``gold_rationale_tokens`` are 0-based hypothesis token
    indices.  ``target_state`` replaces the label as the training target
    for direction-augmented samples, which must reach an exact final
    state rather than a label.
    """

    premise: str
    hypothesis: str
    label: Optional[NLILabel] = None
    gold_program: Optional[tuple[ActionRelation, ...]] = None
    gold_states: Optional[tuple[Relation, ...]] = None
    gold_rationale_tokens: Optional[tuple[int, ...]] = None
    split_tag: str = "train"
    target_state: Optional[Relation] = None

    @property
    def target(self) -> NLILabel | Relation:
        if self.target_state is not None:
            return self.target_state
        if self.label is None:
            raise ValueError("example has neither label nor target state")
        return self.label

    def with_split(self, tag: str) -> "Example":
        return replace(self, split_tag=tag)

    def to_record(self) -> dict:
        return {
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "label": self.label.value if self.label else None,
            "gold_program": (
                [a.value for a in self.gold_program]
                if self.gold_program is not None
                else None
            ),
            "gold_states": (
                [s.value for s in self.gold_states]
                if self.gold_states is not None
                else None
            ),
            "gold_rationale_tokens": (
                list(self.gold_rationale_tokens)
                if self.gold_rationale_tokens is not None
                else None
            ),
            "split_tag": self.split_tag,
            "target_state": (
                self.target_state.value if self.target_state else None
            ),
        }

    @classmethod
    def from_record(cls, record: dict) -> "Example":
        return cls(
            premise=record["premise"],
            hypothesis=record["hypothesis"],
            label=NLILabel(record["label"]) if record.get("label") else None,
            gold_program=(
                tuple(ActionRelation.parse(a) for a in record["gold_program"])
                if record.get("gold_program") is not None
                else None
            ),
            gold_states=(
                tuple(Relation(s) for s in record["gold_states"])
                if record.get("gold_states") is not None
                else None
            ),
            gold_rationale_tokens=(
                tuple(record["gold_rationale_tokens"])
                if record.get("gold_rationale_tokens") is not None
                else None
            ),
            split_tag=record.get("split_tag", "train"),
            target_state=(
                Relation(record["target_state"])
                if record.get("target_state")
                else None
            ),
        )


def _dumps(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def save_dataset(examples: Iterable[Example], path: str | Path) -> None:
    lines = [_dumps({"schema": SCHEMA, "version": VERSION})]
    lines.extend(_dumps(ex.to_record()) for ex in examples)
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset(path: str | Path) -> list[Example]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty dataset file")
    header = json.loads(lines[0])
    if header.get("schema") != SCHEMA:
        raise ValueError(f"{path}: expected schema {SCHEMA!r}, got {header!r}")
    if header.get("version") != VERSION:
        raise ValueError(f"{path}: unsupported version {header.get('version')}")
    return [Example.from_record(json.loads(line)) for line in lines[1:] if line]
