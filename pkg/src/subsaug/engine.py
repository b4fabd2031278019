"""Subtree substitution over a corpus of span-tree-annotated examples.

For every pair of exchangeable subtrees sharing a semantic category, the
host subtree is replaced by the donor subtree in both the utterance and the
program.  Output is deduplicated and ordered by provenance, so the result is
independent of worker count and enumeration order.
"""

from __future__ import annotations

import logging
import random
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .domain import Domain
from .errors import DuplicateId, SubsError
from .funql import Program, render_program, replace_subprogram
from .spantree import (
    Span,
    SpanTree,
    SubtreeRef,
    enumerate_exchangeable_subtrees,
    evaluate,
    splice_tree,
    splice_utterance,
)

log = logging.getLogger(__name__)

DEDUP_MODES = ("train_and_self", "self_only", "none")


@dataclass(frozen=True)
class CorpusExample:
    id: str
    tokens: tuple[str, ...]
    program: Program
    tree: SpanTree

    @property
    def utterance(self) -> str:
        return " ".join(self.tokens)


@dataclass
class Corpus:
    examples: list[CorpusExample] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for ex in self.examples:
            if ex.id in seen:
                raise DuplicateId(f"duplicate example id {ex.id!r}")
            seen.add(ex.id)

    def __len__(self) -> int:
        return len(self.examples)

    def __iter__(self):
        return iter(self.examples)

    def by_id(self) -> dict[str, CorpusExample]:
        return {ex.id: ex for ex in self.examples}


@dataclass(frozen=True, order=True)
class Provenance:
    host_id: str
    host_span: Span
    donor_id: str
    donor_span: Span
    category: str
    # where the donor program sits inside the augmented program
    host_path: tuple[int, ...] | None = None


@dataclass(frozen=True)
class AugmentedExample:
    tokens: tuple[str, ...]
    program: Program
    provenance: Provenance
    tree: SpanTree | None = field(default=None, compare=False, repr=False)

    @property
    def utterance(self) -> str:
        return " ".join(self.tokens)

    def key(self) -> tuple[str, str]:
        return self.utterance, render_program(self.program)


@dataclass(frozen=True)
class AugmentOptions:
    rounds: int = 1
    max_output: int | None = None
    seed: int = 0
    dedup_mode: str = "train_and_self"
    allow_same_example: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.rounds < 1:
            raise ValueError("rounds must be >= 1")
        if self.dedup_mode not in DEDUP_MODES:
            raise ValueError(f"dedup_mode must be one of {DEDUP_MODES}")
        if self.max_output is not None and self.max_output < 0:
            raise ValueError("max_output must be non-negative")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")

    def fingerprint_fields(self) -> dict:
        # worker count never changes output, so it is left out
        return {
            "rounds": self.rounds,
            "max_output": self.max_output,
            "seed": self.seed,
            "dedup_mode": self.dedup_mode,
            "allow_same_example": self.allow_same_example,
        }


@dataclass
class AugmentRun:
    examples: list[AugmentedExample]
    # pair counts before any dedup, skipped splices excluded
    raw_pairs: int = 0
    skipped: int = 0
    after_self_dedup: int = 0
    after_train_and_self_dedup: int = 0


class SpliceMismatch(SubsError):
    pass


def build_index(corpus: Corpus | Iterable[CorpusExample], d: Domain) -> dict[str, list[SubtreeRef]]:
    """Map each semantic category to its exchangeable subtrees, ordered by (id, span)."""
    index: dict[str, list[SubtreeRef]] = defaultdict(list)
    for ex in corpus:
        for ref in enumerate_exchangeable_subtrees(ex.tree, d, ex.id):
            index[ref.category].append(ref)
    for refs in index.values():
        refs.sort(key=lambda r: (r.tree_id, r.span))
    return dict(sorted(index.items()))


def dedup(aug: Sequence[AugmentedExample], against: Iterable[tuple[Sequence[str], Program]]) -> list[AugmentedExample]:
    """Drop examples equal to a pair in ``against`` or to an earlier kept example."""
    seen = {(" ".join(tokens), render_program(program)) for tokens, program in against}
    kept = []
    for ex in aug:
        key = ex.key()
        if key not in seen:
            seen.add(key)
            kept.append(ex)
    return kept


def splice_pair(host: CorpusExample, host_ref: SubtreeRef, donor_ref: SubtreeRef, d: Domain) -> AugmentedExample:
    """Build one augmented example, cross-checking tree and string routes."""
    tree = splice_tree(host.tree, host_ref, donor_ref)
    tree_program = evaluate(tree, d).program
    i1, j1 = host_ref.span
    tokens = tuple(splice_utterance(host.tokens, i1, j1, donor_ref.tokens))
    program = replace_subprogram(host.program, host_ref.path, donor_ref.program)
    if tree_program != program:
        raise SpliceMismatch(f"spliced tree evaluates to {tree_program}, expected {program}")
    if tree.tokens != tokens:
        raise SpliceMismatch("spliced tree tokens differ from spliced utterance")
    prov = Provenance(host_ref.tree_id, host_ref.span, donor_ref.tree_id, donor_ref.span,
                      host_ref.category, host_ref.path)
    return AugmentedExample(tokens, program, prov, tree)


def _donor_groups(refs: Sequence[SubtreeRef], compress: bool) -> list[list[SubtreeRef]]:
    """Group donors producing identical splices; order within a group is kept."""
    if not compress:
        return [[r] for r in refs]
    groups: dict[tuple, list[SubtreeRef]] = {}
    for r in refs:
        groups.setdefault((r.tokens, r.program), []).append(r)
    return list(groups.values())


class _DonorGroup:
    """Donors yielding one identical splice, with enough bookkeeping to find
    the eligible donors for any host in constant time."""

    def __init__(self, refs: list[SubtreeRef], fresh: frozenset[str] | None):
        self.refs = refs
        self.per_tree = Counter(r.tree_id for r in refs)
        # first donor from a tree other than that of refs[0]
        self.alt = next((r for r in refs if r.tree_id != refs[0].tree_id), None)
        self.fresh_refs = [r for r in refs if fresh is not None and r.tree_id in fresh]

    def eligible(self, host_id: str, allow_same: bool, fresh: frozenset[str] | None) -> tuple[SubtreeRef | None, int]:
        """First eligible donor and the number of eligible donors."""
        if fresh is not None and host_id not in fresh:
            # host is old: only fresh donors, none of which share the host's tree
            return (self.fresh_refs[0] if self.fresh_refs else None), len(self.fresh_refs)
        if allow_same:
            return self.refs[0], len(self.refs)
        count = len(self.refs) - self.per_tree.get(host_id, 0)
        if count == 0:
            return None, 0
        return (self.refs[0] if self.refs[0].tree_id != host_id else self.alt), count


def _bucket(args) -> tuple[list[AugmentedExample], int, int]:
    category, refs, hosts, d, compress, allow_same, fresh = args
    groups = [_DonorGroup(g, fresh) for g in _donor_groups(refs, compress)]
    out = []
    raw = skipped = 0
    for host_ref in refs:
        host = hosts[host_ref.tree_id]
        for group in groups:
            donor_ref, n_eligible = group.eligible(host_ref.tree_id, allow_same, fresh)
            if donor_ref is None:
                continue
            try:
                ex = splice_pair(host, host_ref, donor_ref, d)
            except SubsError as exc:
                skipped += n_eligible
                log.warning("skipping %s %s <- %s %s: %s", host_ref.tree_id, list(host_ref.span),
                            donor_ref.tree_id, list(donor_ref.span), exc)
                continue
            raw += n_eligible
            out.append(ex)
    return out, raw, skipped


def _one_round(pool: Sequence[CorpusExample], d: Domain, opts: AugmentOptions,
               fresh: frozenset[str] | None) -> tuple[list[AugmentedExample], int, int]:
    index = build_index(pool, d)
    hosts = {ex.id: ex for ex in pool}
    compress = opts.dedup_mode != "none"
    tasks = [
        (cat, refs, {r.tree_id: hosts[r.tree_id] for r in refs}, d, compress, opts.allow_same_example, fresh)
        for cat, refs in index.items()
    ]
    if opts.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=opts.workers) as pool_exec:
            results = list(pool_exec.map(_bucket, tasks))
    else:
        results = [_bucket(t) for t in tasks]
    out: list[AugmentedExample] = []
    raw = skipped = 0
    for exs, r, s in results:
        out.extend(exs)
        raw += r
        skipped += s
    out.sort(key=lambda e: e.provenance)
    return out, raw, skipped


def augment_with_stats(corpus: Corpus, d: Domain, opts: AugmentOptions | None = None) -> AugmentRun:
    opts = opts or AugmentOptions()
    train_pairs = [(ex.tokens, ex.program) for ex in corpus]
    pool = list(corpus)
    fresh: frozenset[str] | None = None
    produced: list[AugmentedExample] = []
    run = AugmentRun([])

    for rnd in range(1, opts.rounds + 1):
        candidates, raw, skipped = _one_round(pool, d, opts, fresh)
        run.raw_pairs += raw
        run.skipped += skipped
        self_kept = dedup(candidates, [(e.tokens, e.program) for e in produced])
        both_kept = dedup(self_kept, train_pairs)
        run.after_self_dedup += len(self_kept)
        run.after_train_and_self_dedup += len(both_kept)
        if opts.dedup_mode == "train_and_self":
            new = both_kept
        elif opts.dedup_mode == "self_only":
            new = self_kept
        else:
            new = candidates
        produced.extend(new)
        if rnd == opts.rounds or not new:
            break
        additions = [
            CorpusExample(f"r{rnd}-{k:07d}", e.tokens, e.program, e.tree)
            for k, e in enumerate(new)
            if e.tree is not None
        ]
        pool = pool + additions
        fresh = frozenset(a.id for a in additions)

    if opts.max_output is not None and opts.max_output < len(produced):
        rng = random.Random(opts.seed)
        produced = rng.sample(produced, opts.max_output)
    produced.sort(key=lambda e: e.provenance)
    run.examples = produced
    return run


def augment(corpus: Corpus, d: Domain, opts: AugmentOptions | None = None) -> list[AugmentedExample]:
    return augment_with_stats(corpus, d, opts).examples
