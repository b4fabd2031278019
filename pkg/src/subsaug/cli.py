"""Command-line entry point: validate, augment, stats, coverage, convert."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from typing import Sequence

from . import corpus_io
from .domain import load_domain
from .engine import DEDUP_MODES, AugmentOptions, augment_with_stats
from .errors import SubsError
from .stats import complexity_stats, format_table, test_recovery

log = logging.getLogger("subsaug")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def fingerprint(*parts) -> str:
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _emit(args, summary: dict, lines: Sequence[str]) -> None:
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        for line in lines:
            print(line)
        print(f"fingerprint: {summary['fingerprint']}")


def cmd_validate(args) -> int:
    d = load_domain(args.domain)
    examples = corpus_io.load_examples(args.train)
    corpus, report = corpus_io.load_trees(args.trees, examples, d, strict=False)
    failed = dict(report.failures)
    lines = [f"{rec.id}\t{'FAIL ' + failed[rec.id] if rec.id in failed else 'pass'}" for rec in examples]
    summary = {
        "command": "validate",
        "n_examples": len(examples),
        "n_valid": len(corpus),
        "failures": [{"id": i, "reason": r} for i, r in report.failures],
        "fingerprint": fingerprint(d.source, {"strict": args.strict}),
    }
    lines.append(f"{len(corpus)}/{len(examples)} examples valid")
    _emit(args, summary, lines)
    return EXIT_DATA if args.strict and report.failures else EXIT_OK


def cmd_augment(args) -> int:
    d = load_domain(args.domain)
    opts = AugmentOptions(
        rounds=args.rounds,
        max_output=args.max_output,
        seed=args.seed,
        dedup_mode=args.dedup_mode,
        allow_same_example=args.allow_same_example,
        workers=args.workers,
    )
    examples = corpus_io.load_examples(args.train)
    corpus, load_report = corpus_io.load_trees(args.trees, examples, d, strict=args.strict)
    run = augment_with_stats(corpus, d, opts)
    corpus_io.write_augmented(run.examples, args.out)
    if args.out_trees:
        corpus_io.write_augmented_trees(run.examples, args.out_trees)
    stats = complexity_stats(run.examples, n_train=len(corpus))
    if args.report:
        corpus_io.write_report(stats.to_dict(), args.report)
    summary = {
        "command": "augment",
        "n_train": len(corpus),
        "n_excluded": len(load_report.failures),
        "n_augmented": len(run.examples),
        "raw_pairs": run.raw_pairs,
        "skipped": run.skipped,
        "after_self_dedup": run.after_self_dedup,
        "after_train_and_self_dedup": run.after_train_and_self_dedup,
        "out": str(args.out),
        "fingerprint": fingerprint(d.source, opts.fingerprint_fields()),
    }
    lines = [
        f"train examples: {len(corpus)} ({len(load_report.failures)} excluded)",
        f"augmented examples: {len(run.examples)} -> {args.out}",
        f"pairs before dedup: {run.raw_pairs}, skipped: {run.skipped}",
        f"after self dedup: {run.after_self_dedup}, after train+self dedup: {run.after_train_and_self_dedup}",
    ]
    _emit(args, summary, lines)
    return EXIT_OK


def cmd_stats(args) -> int:
    aug = corpus_io.load_augmented(args.augmented)
    report = complexity_stats(aug, n_train=args.n_train)
    if args.out:
        corpus_io.write_report(report.to_dict(), args.out)
    summary = {"command": "stats", **report.to_dict(), "fingerprint": fingerprint({"n_train": args.n_train})}
    _emit(args, summary, [format_table(report)])
    return EXIT_OK


def cmd_coverage(args) -> int:
    aug = corpus_io.load_augmented(args.augmented, require_provenance=False)
    test = corpus_io.load_examples(args.test)
    hits, fraction = test_recovery(aug, test)
    summary = {
        "command": "coverage",
        "hits": hits,
        "n_test": len(test),
        "fraction": round(fraction, 4),
        "fingerprint": fingerprint({}),
    }
    _emit(args, summary, [f"{hits}/{len(test)} ({100 * fraction:.2f}%)"])
    return EXIT_OK


def cmd_convert(args) -> int:
    n = corpus_io.convert_tsv(args.tsv, args.out, args.id_prefix)
    summary = {"command": "convert", "n_examples": n, "out": str(args.out),
               "fingerprint": fingerprint({"id_prefix": args.id_prefix})}
    _emit(args, summary, [f"wrote {n} examples to {args.out}"])
    return EXIT_OK


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print one JSON summary object")
    common.add_argument("--workers", type=_positive, default=1)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="subsaug", description="Subtree-substitution data augmentation for semantic parsing.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def corpus_args(p):
        p.add_argument("--train", required=True, help="examples JSONL")
        p.add_argument("--trees", required=True, help="span trees JSONL")
        p.add_argument("--domain", required=True, help="domain config JSON")
        p.add_argument("--strict", action="store_true", help="fail on the first invalid tree")

    p = sub.add_parser("validate", parents=[common], help="check trees against their programs")
    corpus_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("augment", parents=[common], help="generate augmented examples")
    corpus_args(p)
    p.add_argument("--out", required=True)
    p.add_argument("--out-trees", help="also write spliced span trees")
    p.add_argument("--report", help="write complexity stats JSON")
    p.add_argument("--seed", type=_nonneg, default=0)
    p.add_argument("--rounds", type=_positive, default=1)
    p.add_argument("--max-output", type=_nonneg)
    p.add_argument("--dedup-mode", choices=DEDUP_MODES, default="train_and_self")
    p.add_argument("--allow-same-example", action="store_true")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("stats", parents=[common], help="complexity statistics of augmented data")
    p.add_argument("--augmented", required=True)
    p.add_argument("--out", help="write report JSON")
    p.add_argument("--n-train", type=_nonneg)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("coverage", parents=[common], help="test pairs recovered by augmentation")
    p.add_argument("--augmented", required=True)
    p.add_argument("--test", required=True, help="examples JSONL")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("convert", parents=[common], help="convert utterance<TAB>program files")
    p.add_argument("--tsv", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--id-prefix")
    p.set_defaults(func=cmd_convert)
    return parser


def run_cli(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (SubsError, OSError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(run_cli())
