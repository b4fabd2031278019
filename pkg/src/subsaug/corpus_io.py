"""Line-delimited JSON formats for examples, span trees and augmented output.

examples:   {"id": ..., "utterance": "space joined tokens", "program": "canonical program"}
trees:      {"id": ..., "tokens": [...], "root": {"span": [i, j], "category": str|null, "children": [...]}}
augmented:  example fields + {"provenance": {"host_id", "host_span", "donor_id", "donor_span", "category"}}
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

from .domain import Domain
from .engine import AugmentedExample, Corpus, CorpusExample, Provenance
from .errors import (
    DuplicateId,
    MalformedLine,
    ProgramParseError,
    UnknownId,
    ValidationFailure,
)
from .funql import Program, parse_program, render_program
from .spantree import SpanTree, binarize_unary, node_from_json, node_to_json, validate_tree

log = logging.getLogger(__name__)

PathArg = str | PathLike


@dataclass(frozen=True)
class ExampleRecord:
    id: str
    utterance: str
    program: Program

    @property
    def tokens(self) -> tuple[str, ...]:
        return tuple(self.utterance.split())

    def key(self) -> tuple[str, str]:
        return " ".join(self.tokens), render_program(self.program)


@dataclass
class TreeLoadReport:
    n_trees: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, separators=(", ", ": "))


def iter_jsonl(path: PathArg) -> Iterator[tuple[int, dict]]:
    """Yield ``(line number, object)``; blank lines are skipped."""
    with open(path, "rb") as f:
        for lineno, raw in enumerate(f, 1):
            try:
                line = raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise MalformedLine(path, lineno, f"invalid UTF-8: {exc}") from None
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(path, lineno, f"invalid JSON: {exc.msg} at column {exc.colno}") from None
            if not isinstance(obj, dict):
                raise MalformedLine(path, lineno, "record is not a JSON object")
            yield lineno, obj


def _field(obj: dict, name: str, kind: type, path: PathArg, lineno: int):
    if name not in obj:
        raise MalformedLine(path, lineno, f"missing field {name!r}")
    value = obj[name]
    if not isinstance(value, kind):
        raise MalformedLine(path, lineno, f"field {name!r} must be {kind.__name__}")
    return value


def _example_from(obj: dict, path: PathArg, lineno: int) -> ExampleRecord:
    ex_id = _field(obj, "id", str, path, lineno)
    utterance = _field(obj, "utterance", str, path, lineno)
    if not utterance.split():
        raise MalformedLine(path, lineno, "empty utterance")
    text = _field(obj, "program", str, path, lineno)
    try:
        program = parse_program(text)
    except (ProgramParseError, ValueError) as exc:
        raise MalformedLine(path, lineno, f"unparseable program: {exc}") from None
    return ExampleRecord(ex_id, " ".join(utterance.split()), program)


def load_examples(path: PathArg) -> list[ExampleRecord]:
    records: list[ExampleRecord] = []
    seen: set[str] = set()
    for lineno, obj in iter_jsonl(path):
        rec = _example_from(obj, path, lineno)
        if rec.id in seen:
            raise DuplicateId(f"{path}:{lineno}: duplicate id {rec.id!r}")
        seen.add(rec.id)
        records.append(rec)
    return records


def write_examples(records: Iterable[ExampleRecord], path: PathArg) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for r in records:
            f.write(_dumps({"id": r.id, "utterance": r.utterance, "program": render_program(r.program)}) + "\n")


def read_tree_records(path: PathArg) -> list[tuple[str, SpanTree]]:
    out = []
    for lineno, obj in iter_jsonl(path):
        tree_id = _field(obj, "id", str, path, lineno)
        tokens = _field(obj, "tokens", list, path, lineno)
        if not all(isinstance(t, str) for t in tokens):
            raise MalformedLine(path, lineno, "tokens must be strings")
        root = _field(obj, "root", dict, path, lineno)
        try:
            node = binarize_unary(node_from_json(root))
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedLine(path, lineno, f"malformed tree node: {exc!r}") from None
        out.append((tree_id, SpanTree(tuple(tokens), node)))
    return out


def write_trees(trees: Iterable[tuple[str, SpanTree]], path: PathArg) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for tree_id, t in trees:
            f.write(_dumps({"id": tree_id, "tokens": list(t.tokens), "root": node_to_json(t.root)}) + "\n")


def load_trees(path: PathArg, examples: Sequence[ExampleRecord], d: Domain,
               strict: bool = False) -> tuple[Corpus, TreeLoadReport]:
    """Pair trees with their examples and validate each pair.

    Failing pairs are excluded and listed in the report; with ``strict`` the
    first failure raises :class:`ValidationFailure` instead.
    """
    by_id = {r.id: r for r in examples}
    report = TreeLoadReport()
    trees: dict[str, SpanTree] = {}
    for tree_id, tree in read_tree_records(path):
        if tree_id not in by_id:
            raise UnknownId(f"{path}: tree id {tree_id!r} has no example")
        if tree_id in trees:
            raise DuplicateId(f"{path}: duplicate tree id {tree_id!r}")
        trees[tree_id] = tree
        report.n_trees += 1

    def fail(ex_id: str, reason: str) -> None:
        if strict:
            raise ValidationFailure(f"{ex_id}: {reason}")
        log.warning("excluding %s: %s", ex_id, reason)
        report.failures.append((ex_id, reason))

    kept = []
    for rec in examples:
        tree = trees.get(rec.id)
        if tree is None:
            fail(rec.id, "no span tree")
            continue
        if tree.tokens != rec.tokens:
            fail(rec.id, "UnknownTokenization: tree tokens differ from utterance tokens")
            continue
        result = validate_tree(tree, rec.program, d)
        if not result.ok:
            fail(rec.id, result.summary())
            continue
        kept.append(CorpusExample(rec.id, rec.tokens, rec.program, tree))
    return Corpus(kept), report


def augmented_to_json(k: int, ex: AugmentedExample) -> dict:
    p = ex.provenance
    return {
        "id": f"aug-{k:06d}",
        "utterance": ex.utterance,
        "program": render_program(ex.program),
        "provenance": {
            "host_id": p.host_id,
            "host_span": list(p.host_span),
            "donor_id": p.donor_id,
            "donor_span": list(p.donor_span),
            "category": p.category,
            "host_path": list(p.host_path) if p.host_path is not None else None,
        },
    }


def write_augmented(aug: Sequence[AugmentedExample], path: PathArg) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for k, ex in enumerate(aug):
            f.write(_dumps(augmented_to_json(k, ex)) + "\n")


def write_augmented_trees(aug: Sequence[AugmentedExample], path: PathArg) -> None:
    write_trees(((f"aug-{k:06d}", ex.tree) for k, ex in enumerate(aug) if ex.tree is not None), path)


def load_augmented(path: PathArg, require_provenance: bool = True) -> list[AugmentedExample]:
    out = []
    for lineno, obj in iter_jsonl(path):
        rec = _example_from(obj, path, lineno)
        prov_obj = obj.get("provenance")
        if prov_obj is None:
            if require_provenance:
                raise MalformedLine(path, lineno, "missing field 'provenance'")
            prov = None
        else:
            try:
                prov = Provenance(
                    str(prov_obj["host_id"]),
                    tuple(int(v) for v in prov_obj["host_span"]),
                    str(prov_obj["donor_id"]),
                    tuple(int(v) for v in prov_obj["donor_span"]),
                    str(prov_obj["category"]),
                    None if prov_obj.get("host_path") is None else tuple(int(v) for v in prov_obj["host_path"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedLine(path, lineno, f"malformed provenance: {exc!r}") from None
        out.append(AugmentedExample(rec.tokens, rec.program, prov))
    return out


def write_report(report: dict, path: PathArg) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(report, f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")


def read_tsv(path: PathArg, id_prefix: str | None = None) -> list[ExampleRecord]:
    """Read the released ``utterance<TAB>program`` format."""
    prefix = id_prefix if id_prefix is not None else Path(path).stem
    records = []
    with open(path, encoding="utf-8", newline="") as f:
        for lineno, row in enumerate(csv.reader(f, delimiter="\t", quoting=csv.QUOTE_NONE), 1):
            if not row or not "".join(row).strip():
                continue
            if len(row) != 2:
                raise MalformedLine(path, lineno, f"expected 2 tab-separated fields, got {len(row)}")
            utterance, text = row
            if not utterance.split():
                raise MalformedLine(path, lineno, "empty utterance")
            try:
                program = parse_program(text)
            except (ProgramParseError, ValueError) as exc:
                raise MalformedLine(path, lineno, f"unparseable program: {exc}") from None
            records.append(ExampleRecord(f"{prefix}-{lineno}", " ".join(utterance.split()), program))
    return records


def convert_tsv(src: PathArg, dst: PathArg, id_prefix: str | None = None) -> int:
    records = read_tsv(src, id_prefix)
    write_examples(records, dst)
    return len(records)

