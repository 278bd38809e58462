"""Command-line entry point for dataset generation, training, and proofs.

Subcommands:
  gen     synthesize compositional train/test datasets (and two-hop sets)
  train   run REINFORCE with introspective revision, save a checkpoint
  eval    score a checkpoint against a labeled dataset
  prove   print the greedy proof trace for one sentence pair
  oracle  enumerate label-reaching programs and their spurious ratio

Human-readable summaries go to standard output; datasets, checkpoints,
and metric records go to files as line-delimited JSON with a versioned
schema header.  Every subcommand is deterministic given its inputs and
seed, and failures print a machine-parsable error record to stderr with
a nonzero exit code.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .chunker import ChunkRules, chunk_pair, default_rules
from .data import load_dataset, save_dataset
from .datagen import default_genspec, generate, generate_2hop, load_genspec
from .executor import enumerate_programs, execute
from .knowledge import Lexicon, align, default_lexicon
from .metrics import evaluate, reports_to_csv
from .policy import (
    PolicyParams,
    featurize_pair,
    load_checkpoint,
    save_checkpoint,
    step_distributions,
)
from .relations import ACTIONS
from .trainer import TrainConfig, load_train_config, train

__all__ = ["main"]

METRICS_SCHEMA = "natlog.train-metrics"
EVAL_SCHEMA = "natlog.eval"
ORACLE_SCHEMA = "natlog.oracle"
_VERSION = 1


def _dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"))


def _write_records(path: Path, schema: str, records: list[dict]) -> None:
    lines = [_dumps({"schema": schema, "version": _VERSION})]
    lines += [_dumps(r) for r in records]
    path.write_text("\n".join(lines) + "\n")


def _rules(args) -> ChunkRules:
    return ChunkRules.load(args.grammar) if args.grammar else default_rules()


def _lexicon(args) -> Lexicon:
    return Lexicon.load(args.lexicon) if args.lexicon else default_lexicon()


def _greedy_program(params, pair, lexicon):
    probs = step_distributions(params, featurize_pair(pair, lexicon))
    return tuple(ACTIONS[int(np.argmax(p))] for p in probs)


def cmd_gen(args) -> None:
    spec = load_genspec(args.config) if args.config else default_genspec()
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    rules = _rules(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train_set, test_set = generate(spec, rules)
    save_dataset(train_set, out / "train.jsonl")
    save_dataset(test_set, out / "test.jsonl")
    print(f"wrote {len(train_set)} train / {len(test_set)} test -> {out}")
    if args.two_hop:
        hop = generate_2hop(spec, rules)
        save_dataset(hop, out / "twohop.jsonl")
        print(f"wrote {len(hop)} two-hop examples -> {out / 'twohop.jsonl'}")


def _total_revisions(metrics) -> dict:
    total = {
        "episodes": 0,
        "knowledge_only": 0,
        "answer_only": 0,
        "both": 0,
        "none": 0,
    }
    per_relation: dict[str, int] = {}
    for m in metrics:
        record = m.revisions.to_record()
        for key in total:
            total[key] += record[key]
        for name, count in record["per_relation"].items():
            per_relation[name] = per_relation.get(name, 0) + count
    total["per_relation"] = dict(sorted(per_relation.items()))
    return total


def cmd_train(args) -> None:
    config = load_train_config(args.config) if args.config else TrainConfig()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    rules, lexicon = _rules(args), _lexicon(args)
    examples = load_dataset(args.data)
    result = train(examples, rules, lexicon, config)
    save_checkpoint(result.params, args.checkpoint)

    totals = _total_revisions(result.metrics)
    if args.out:
        records = [{"epoch_metrics": m.to_record()} for m in result.metrics]
        records.append({"revision_totals": totals})
        _write_records(Path(args.out), METRICS_SCHEMA, records)
    final = result.metrics[-1]
    revised = totals["knowledge_only"] + totals["answer_only"] + totals["both"]
    print(
        f"trained {config.epochs} epochs on {len(examples)} examples; "
        f"final train accuracy {final.train_accuracy:.3f}; "
        f"revised {revised}/{totals['episodes']} episodes "
        f"(knowledge {totals['knowledge_only']}, answer "
        f"{totals['answer_only']}, both {totals['both']}); "
        f"checkpoint -> {args.checkpoint}"
    )


def cmd_eval(args) -> None:
    params = load_checkpoint(args.checkpoint)
    rules, lexicon = _rules(args), _lexicon(args)
    examples = load_dataset(args.data)
    report = evaluate(examples, params, rules, lexicon)
    name = Path(args.data).name
    if args.out:
        out = Path(args.out)
        if out.suffix == ".csv":
            out.write_text(reports_to_csv({name: report}))
        else:
            record = {"dataset": name}
            record.update(report.to_record())
            _write_records(out, EVAL_SCHEMA, [record])
    headline = (
        report.accuracy_binary if args.collapse_binary else report.accuracy
    )
    kind = "binary accuracy" if args.collapse_binary else "accuracy"
    parts = [f"{name}: {kind} {headline:.3f} on {report.examples} examples"]
    if report.state_accuracy is not None:
        parts.append(f"state accuracy {report.state_accuracy:.3f}")
    if report.rationale_f1 is not None:
        parts.append(f"rationale F1 {report.rationale_f1:.3f}")
    print("; ".join(parts))


def cmd_prove(args) -> None:
    params = (
        load_checkpoint(args.checkpoint)
        if args.checkpoint
        else PolicyParams.zeros()
    )
    rules, lexicon = _rules(args), _lexicon(args)
    pair = chunk_pair(args.premise, args.hypothesis, rules)
    program = _greedy_program(params, pair, lexicon)
    trace = execute(pair, program)

    rows = [("step", "hypothesis chunk", "premise chunk", "r", "proj", "z")]
    for t in range(1, pair.m + 1):
        hyp_chunk = pair.hypothesis[t - 1]
        aligned = align(hyp_chunk, pair.premise, lexicon)
        rows.append(
            (
                str(t),
                hyp_chunk.text(),
                aligned.text() if aligned else "-",
                program[t - 1].symbol,
                trace.projected[t - 1].symbol,
                trace.states[t].symbol,
            )
        )
    widths = [max(len(r[c]) for r in rows) for c in range(len(rows[0]))]
    for row in rows:
        print("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
    print(f"label: {trace.label.value}")
    if trace.rationales:
        chunks = ", ".join(
            f"chunk {t} '{pair.hypothesis[t - 1].text()}'"
            for t in trace.rationales
        )
        print(f"rationale: {chunks}")
    else:
        print("rationale: none")


def cmd_oracle(args) -> None:
    examples = load_dataset(args.data)
    records = []
    ratios = []
    skipped = 0
    rules, lexicon = _rules(args), _lexicon(args)
    for index, example in enumerate(examples):
        pair = chunk_pair(example.premise, example.hypothesis, rules)
        if pair.m > args.max_m:
            skipped += 1
            records.append({"index": index, "m": pair.m, "skipped": True})
            continue
        reaching = list(enumerate_programs(pair, example.target, args.max_m))
        ratio: Optional[float] = None
        if example.gold_program is not None and reaching:
            off = sum(1 for p in reaching if p != example.gold_program)
            ratio = off / len(reaching)
            ratios.append(ratio)
        records.append(
            {
                "index": index,
                "m": pair.m,
                "programs": len(ACTIONS) ** pair.m,
                "reaching": len(reaching),
                "spurious_ratio": ratio,
            }
        )
    summary = {
        "examples": len(examples),
        "skipped": skipped,
        "mean_spurious_ratio": (
            sum(ratios) / len(ratios) if ratios else None
        ),
    }
    if args.out:
        _write_records(
            Path(args.out), ORACLE_SCHEMA, records + [{"summary": summary}]
        )
    mean = summary["mean_spurious_ratio"]
    shown = "n/a" if mean is None else f"{mean:.3f}"
    print(
        f"{summary['examples']} examples ({skipped} skipped); "
        f"mean spurious-program ratio {shown}"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="natlog",
        description="natural-logic inference: generate, train, eval, prove",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--grammar", help="chunker grammar file")
        p.add_argument("--lexicon", help="knowledge-base lexicon file")
        p.add_argument("--seed", type=int, help="seed override")
        return p

    p = add(name="gen", func=cmd_gen, help_text="synthesize datasets")
    p.add_argument("--config", help="generation spec (JSON)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--two-hop", action="store_true", help="also write twohop.jsonl"
    )

    p = add(name="train", func=cmd_train, help_text="train a policy")
    p.add_argument("--config", help="training config (key = value lines)")
    p.add_argument("--data", required=True, help="training dataset")
    p.add_argument("--checkpoint", required=True, help="checkpoint to write")
    p.add_argument("--out", help="per-epoch metrics file (JSONL)")

    p = add(name="eval", func=cmd_eval, help_text="evaluate a checkpoint")
    p.add_argument("--checkpoint", required=True, help="checkpoint to read")
    p.add_argument("--data", required=True, help="dataset to score")
    p.add_argument("--out", help="report file (.jsonl or .csv)")
    p.add_argument(
        "--collapse-binary",
        action="store_true",
        help="report two-way accuracy (entailment vs non-entailment)",
    )

    p = add(name="prove", func=cmd_prove, help_text="print a proof trace")
    p.add_argument("--checkpoint", help="checkpoint to read (default: uniform)")
    p.add_argument("premise")
    p.add_argument("hypothesis")

    p = add(name="oracle", func=cmd_oracle, help_text="program search stats")
    p.add_argument("--data", required=True, help="dataset to analyze")
    p.add_argument("--out", help="per-example records file (JSONL)")
    p.add_argument(
        "--max-m",
        type=int,
        default=8,
        help="skip examples with more hypothesis chunks than this",
    )
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except Exception as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(_dumps(record), file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
