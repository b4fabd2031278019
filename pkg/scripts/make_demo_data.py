"""Regenerate the small demo corpora under data/ from the test fixtures."""

import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from geo_fixtures import GEO_EXAMPLES  # noqa: E402
from scan_grammar import is_primitive_right, scan_trees  # noqa: E402
from subsaug import build_tree, bundled_domain, parse_program, program_of_tree  # noqa: E402
from subsaug.corpus_io import ExampleRecord, write_examples, write_trees  # noqa: E402


def main() -> None:
    geo_dir = ROOT / "data" / "geoquery"
    geo_dir.mkdir(parents=True, exist_ok=True)
    records, trees = [], []
    for ex_id, spec, program in GEO_EXAMPLES:
        tree = build_tree(spec)
        records.append(ExampleRecord(ex_id, " ".join(tree.tokens), parse_program(program)))
        trees.append((ex_id, tree))
    write_examples(records, geo_dir / "train.jsonl")
    write_trees(trees, geo_dir / "trees.jsonl")

    scan = bundled_domain("scan")
    scan_dir = ROOT / "data" / "scan"
    scan_dir.mkdir(parents=True, exist_ok=True)
    all_trees = list(scan_trees())
    train_pool = [(c, t) for c, t in all_trees if not is_primitive_right(c)]
    test_pool = [(c, t) for c, t in all_trees if is_primitive_right(c)]
    rng = random.Random(0)
    train = sorted(rng.sample(train_pool, 400))
    test = sorted(rng.sample(test_pool, 100))
    write_examples([ExampleRecord(f"train-{k:04d}", c, program_of_tree(t, scan)) for k, (c, t) in enumerate(train)],
                   scan_dir / "train.jsonl")
    write_trees([(f"train-{k:04d}", t) for k, (_, t) in enumerate(train)], scan_dir / "trees.jsonl")
    write_examples([ExampleRecord(f"test-{k:04d}", c, program_of_tree(t, scan)) for k, (c, t) in enumerate(test)],
                   scan_dir / "test.jsonl")


if __name__ == "__main__":
    main()
