"""Span trees over tokenized utterances and the bottom-up program evaluator.

Spans are half-open and 0-indexed.  Leaves carry a domain constant or None
(a NULL leaf, e.g. "what is the"); internal nodes carry None and get their
program by composing their two children.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import domain as dom
from .domain import Domain
from .errors import (
    CategoryMismatch,
    CompositionError,
    IndexOutOfRange,
    NullRoot,
    TreeError,
)
from .funql import Path, Program, first_divergence, replace_subprogram, subprogram_at

log = logging.getLogger(__name__)

Span = tuple[int, int]


@dataclass(frozen=True)
class SpanNode:
    span: Span
    category: str | None = None
    children: tuple[SpanNode, ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def iter_nodes(self):
        yield self
        for child in self.children:
            yield from child.iter_nodes()

    def shifted(self, delta: int) -> SpanNode:
        i, j = self.span
        return SpanNode((i + delta, j + delta), self.category, tuple(c.shifted(delta) for c in self.children))


@dataclass(frozen=True)
class SpanTree:
    tokens: tuple[str, ...]
    root: SpanNode

    def node_at(self, span: Span) -> SpanNode:
        for node in self.root.iter_nodes():
            if node.span == span:
                return node
        raise IndexOutOfRange(f"no node covers span {list(span)}")


@dataclass(frozen=True)
class NodeValue:
    program: Program | None
    saturated: bool
    # position of this node's program inside the root program
    path: Path | None = None


@dataclass(frozen=True)
class Evaluation:
    program: Program
    nodes: dict[Span, NodeValue]


@dataclass(frozen=True)
class SubtreeRef:
    tree_id: str
    span: Span
    node: SpanNode = field(repr=False)
    program: Program
    category: str
    path: Path
    tokens: tuple[str, ...]


@dataclass
class ValidationReport:
    ok: bool
    structural: list[str] = field(default_factory=list)
    divergence: Path | None = None
    error: str | None = None
    program: Program | None = None

    def summary(self) -> str:
        if self.ok:
            return "pass"
        if self.structural:
            return "structural: " + "; ".join(self.structural)
        if self.error:
            return "evaluation: " + self.error
        return f"program mismatch at path {list(self.divergence or ())}"


def structural_violations(t: SpanTree) -> list[str]:
    """Bounds and span-partition problems, in pre-order."""
    problems: list[str] = []
    n = len(t.tokens)
    if n == 0:
        problems.append("empty token list")
    if t.root.span != (0, n):
        problems.append(f"root span {list(t.root.span)} does not cover [0, {n})")

    def visit(node: SpanNode) -> None:
        i, j = node.span
        if not 0 <= i < j <= n:
            problems.append(f"span {list(node.span)} out of bounds for {n} tokens")
        if node.children:
            if len(node.children) != 2:
                problems.append(f"node {list(node.span)} has {len(node.children)} children; expected 0 or 2")
            if node.category is not None:
                problems.append(f"internal node {list(node.span)} carries category {node.category!r}")
            (li, lj), (ri, rj) = node.children[0].span, node.children[-1].span
            if li != i:
                problems.append(f"left child of {list(node.span)} starts at {li}")
            if rj != j:
                problems.append(f"right child of {list(node.span)} ends at {rj}")
            if len(node.children) == 2:
                if lj < ri:
                    problems.append(f"gap at split of {list(node.span)}: [{lj}, {ri}) uncovered")
                elif lj > ri:
                    problems.append(f"overlap at split of {list(node.span)}: [{ri}, {lj}) covered twice")
                elif not i < lj < j:
                    problems.append(f"degenerate split {lj} of {list(node.span)}")
            for child in node.children:
                visit(child)

    visit(t.root)
    return problems


def _check_structure(t: SpanTree) -> None:
    problems = structural_violations(t)
    if problems:
        raise TreeError("invalid span tree: " + "; ".join(problems))


def evaluate(t: SpanTree, d: Domain) -> Evaluation:
    """Evaluate every node bottom-up and locate each node in the root program."""
    _check_structure(t)
    bottom: dict[Span, tuple[Program | None, bool, int | None, Path]] = {}

    def up(node: SpanNode) -> tuple[Program | None, bool]:
        if node.is_leaf:
            if node.category is None:
                bottom[node.span] = (None, True, None, ())
                return None, True
            program = dom.leaf_program(node.category, d)
            sat = dom.type_of(program, d).saturated
            bottom[node.span] = (program, sat, None, ())
            return program, sat
        (lp, _), (rp, _) = up(node.children[0]), up(node.children[1])
        if lp is None and rp is None:
            bottom[node.span] = (None, True, None, ())
            return None, True
        if lp is None or rp is None:
            program = lp if rp is None else rp
            sat = dom.type_of(program, d).saturated
            # side: the child that carries the program; no slot
            bottom[node.span] = (program, sat, 0 if rp is None else 1, ())
            return program, sat
        try:
            comp = dom.compose(lp, rp, d)
        except CompositionError as exc:
            raise type(exc)(f"at span {list(node.span)}: {exc}") from None
        sat = dom.type_of(comp.program, d).saturated
        bottom[node.span] = (comp.program, sat, comp.function_side, comp.slot_path)
        return comp.program, sat

    root_program, root_sat = up(t.root)
    if root_program is None:
        raise NullRoot("every leaf of the tree is NULL")
    if not root_sat:
        raise CompositionError(f"root program {root_program} is unsaturated")

    nodes: dict[Span, NodeValue] = {}

    def down(node: SpanNode, path: Path | None) -> None:
        program, sat, side, slot = bottom[node.span]
        nodes[node.span] = NodeValue(program, sat, path if program is not None else None)
        if node.is_leaf:
            return
        lp = bottom[node.children[0].span][0]
        rp = bottom[node.children[1].span][0]
        if lp is None or rp is None or path is None:
            for child in node.children:
                down(child, path if program is not None else None)
            return
        fn, arg = (0, 1) if side == 0 else (1, 0)
        down(node.children[fn], path)
        down(node.children[arg], path + slot)

    down(t.root, ())
    return Evaluation(root_program, nodes)


def program_of_tree(t: SpanTree, d: Domain) -> Program:
    return evaluate(t, d).program


def validate_tree(t: SpanTree, z: Program, d: Domain) -> ValidationReport:
    """Check that ``t`` is well formed and evaluates to ``z``; never raises."""
    problems = structural_violations(t)
    if problems:
        return ValidationReport(False, structural=problems)
    try:
        program = program_of_tree(t, d)
    except Exception as exc:  # every failure becomes a report entry
        return ValidationReport(False, error=f"{type(exc).__name__}: {exc}")
    divergence = first_divergence(program, z)
    return ValidationReport(divergence is None, divergence=divergence, program=program)


def enumerate_exchangeable_subtrees(t: SpanTree, d: Domain, tree_id: str = "",
                                    evaluation: Evaluation | None = None) -> list[SubtreeRef]:
    """Every node with a saturated, categorized program, ordered by span.

    Nodes that merely inherit their program across a NULL sibling are left
    out; the lowest node producing a program stands for the whole chain.
    """
    ev = evaluation or evaluate(t, d)
    refs = []
    for node in t.root.iter_nodes():
        value = ev.nodes[node.span]
        if value.program is None or not value.saturated or value.path is None:
            continue
        category = dom.semantic_category(value.program, d)
        if category is dom.UNDEFINED:
            continue
        # a node passing a program up past a NULL sibling duplicates that child
        if node.children and any(ev.nodes[c.span].program is None for c in node.children):
            continue
        # a saturated node with an optional slot may have been extended by a sibling
        if subprogram_at(ev.program, value.path) != value.program:
            continue
        i, j = node.span
        refs.append(SubtreeRef(tree_id, node.span, node, value.program, category, value.path, t.tokens[i:j]))
    refs.sort(key=lambda r: r.span)
    return refs


def splice_utterance(x1: Sequence[str], i1: int, j1: int, donor_tokens: Sequence[str]) -> list[str]:
    """Replace ``x1[i1:j1]`` with ``donor_tokens``."""
    if not 0 <= i1 < j1 <= len(x1):
        raise IndexOutOfRange(f"span [{i1}, {j1}) invalid for {len(x1)} tokens")
    return list(x1[:i1]) + list(donor_tokens) + list(x1[j1:])


def splice_tree(t1: SpanTree, target: SubtreeRef, donor: SubtreeRef) -> SpanTree:
    """Graft the donor subtree over the target node, re-indexing every span."""
    if donor.category != target.category:
        raise CategoryMismatch(f"target category {target.category!r} != donor category {donor.category!r}")
    i1, j1 = target.span
    if t1.node_at(target.span) != target.node:
        raise IndexOutOfRange(f"target span {list(target.span)} does not belong to this tree")
    i2, j2 = donor.span
    delta = (j2 - i2) - (j1 - i1)
    grafted = donor.node.shifted(i1 - i2)

    def rebuild(node: SpanNode) -> SpanNode:
        i, j = node.span
        if node.span == target.span:
            return grafted
        if j <= i1:
            return node
        if i >= j1:
            return node.shifted(delta)
        # node strictly contains the target
        return SpanNode((i, j + delta), node.category, tuple(rebuild(c) for c in node.children))

    tokens = tuple(splice_utterance(t1.tokens, i1, j1, donor.tokens))
    tree = SpanTree(tokens, rebuild(t1.root))
    _check_structure(tree)
    return tree


def binarize_unary(node: SpanNode) -> SpanNode:
    """Collapse single-child wrappers onto their child."""
    while len(node.children) == 1:
        log.info("collapsing unary node %s onto its child", list(node.span))
        child = node.children[0]
        if child.span != node.span:
            # not a wrapper; leave for validation to report
            break
        node = child
    return SpanNode(node.span, node.category, tuple(binarize_unary(c) for c in node.children))


def node_from_json(obj: dict[str, Any]) -> SpanNode:
    i, j = obj["span"]
    return SpanNode((int(i), int(j)), obj.get("category"), tuple(node_from_json(c) for c in obj.get("children", [])))


def node_to_json(node: SpanNode) -> dict[str, Any]:
    return {
        "span": list(node.span),
        "category": node.category,
        "children": [node_to_json(c) for c in node.children],
    }


def build_tree(spec) -> SpanTree:
    """Build a tree from nested brackets.

    A leaf is ``(text, category)`` where ``text`` may hold several tokens;
    an internal node is a two-element list ``[left, right]``::

        build_tree([("largest", "largest"), ("state", "state#all")])
    """
    tokens: list[str] = []

    def walk(item) -> SpanNode:
        start = len(tokens)
        if isinstance(item, tuple):
            text, category = item
            words = text.split()
            if not words:
                raise TreeError("leaf with no tokens")
            tokens.extend(words)
            return SpanNode((start, len(tokens)), category)
        if not isinstance(item, list) or len(item) != 2:
            raise TreeError(f"internal node must be a 2-element list, got {item!r}")
        left, right = walk(item[0]), walk(item[1])
        return SpanNode((start, len(tokens)), None, (left, right))

    root = walk(spec)
    return SpanTree(tuple(tokens), root)
