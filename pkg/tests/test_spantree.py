import random

import pytest

from subsaug.errors import CategoryMismatch, CompositionError, IndexOutOfRange, NullRoot, TreeError
from subsaug.funql import Program, parse_program, render_program, replace_subprogram
from subsaug.spantree import (
    SpanNode,
    SpanTree,
    binarize_unary,
    build_tree,
    enumerate_exchangeable_subtrees,
    evaluate,
    program_of_tree,
    splice_tree,
    splice_utterance,
    structural_violations,
    validate_tree,
)

import toy
from geo_fixtures import WORKED_AUGMENTED
from scan_grammar import scan_trees


def ref_at(refs, span):
    return next(r for r in refs if r.span == span)


class TestProgramOfTree:
    def test_two_leaves(self, geo):
        t = build_tree([("smallest", "smallest"), ("state", "state#all")])
        assert render_program(program_of_tree(t, geo)) == "smallest ( state ( all ) )"

    def test_single_token(self, geo):
        t = build_tree(("usa", "countryid#usa"))
        assert program_of_tree(t, geo) == parse_program("countryid ( usa )")

    def test_null_leaves_skipped(self, geo):
        with_nulls = build_tree([("what is the", None), [("largest", "largest"), [("the", None), ("state", "state#all")]]])
        without = build_tree([("largest", "largest"), ("state", "state#all")])
        assert program_of_tree(with_nulls, geo) == program_of_tree(without, geo)

    def test_null_root(self, geo):
        with pytest.raises(NullRoot):
            program_of_tree(build_tree([("what", None), ("is", None)]), geo)

    def test_composition_error(self, geo):
        with pytest.raises(CompositionError):
            program_of_tree(build_tree([("usa", "countryid#usa"), ("texas", "stateid#texas")]), geo)

    def test_unsaturated_root(self, geo):
        with pytest.raises(CompositionError):
            program_of_tree(build_tree(("largest", "largest")), geo)

    def test_scan_reference_example(self, scan):
        t = build_tree([[[("run", "i_run"), ("right", "i_right")], ("after", "i_after")], ("jump", "i_jump")])
        assert render_program(program_of_tree(t, scan)) == "i_after ( i_run ( i_right ) , i_jump )"

    def test_deterministic(self, geo, geo_trees):
        for t, _ in geo_trees.values():
            assert program_of_tree(t, geo) == program_of_tree(t, geo)

    def test_paths_locate_node_programs(self, geo, geo_trees):
        for t, z in geo_trees.values():
            ev = evaluate(t, geo)
            for span, value in ev.nodes.items():
                if value.program is not None and value.saturated:
                    sub = z
                    for k in value.path:
                        sub = sub.children[k]
                    assert sub == value.program


class TestValidate:
    def test_worked_passes(self, geo, geo_trees):
        t, z = geo_trees["geo-002"]
        assert validate_tree(t, z, geo).ok

    def test_changed_symbol(self, geo, geo_trees):
        t, z = geo_trees["geo-002"]
        bad = replace_subprogram(z, (0, 0, 0, 0), parse_program("largest ( state ( loc_2 ( countryid ( usa ) ) ) )"))
        report = validate_tree(t, bad, geo)
        assert not report.ok and report.divergence == (0, 0, 0, 0)

    def test_gap_at_split(self, geo):
        root = SpanNode((0, 5), None, (SpanNode((0, 2), "largest"), SpanNode((3, 5), "state#all")))
        report = validate_tree(SpanTree(tuple("abcde"), root), Program("x"), geo)
        assert not report.ok
        assert any("gap at split" in s for s in report.structural)

    def test_evaluation_error_reported(self, geo):
        t = build_tree([("usa", "countryid#usa"), ("texas", "stateid#texas")])
        report = validate_tree(t, Program("x"), geo)
        assert not report.ok and "NoLegalApplication" in report.error

    @pytest.mark.parametrize(
        "root, fragment",
        [
            (SpanNode((0, 3), None, (SpanNode((0, 2), "a"), SpanNode((1, 3), "b"))), "overlap"),
            (SpanNode((0, 2), "a", (SpanNode((0, 1), "a"), SpanNode((1, 2), "b"))), "internal node"),
            (SpanNode((0, 4), "a"), "out of bounds"),
            (SpanNode((0, 2), None, (SpanNode((0, 2), "a"),)), "expected 0 or 2"),
        ],
    )
    def test_structure(self, root, fragment):
        problems = structural_violations(SpanTree(("x", "y", "z")[: max(2, min(3, root.span[1]))], root))
        assert any(fragment in p for p in problems)


class TestEnumerate:
    def test_scan_only_direction(self, scan):
        t = build_tree([[[("run", "i_run"), ("right", "i_right")], ("after", "i_after")], ("jump", "i_jump")])
        refs = enumerate_exchangeable_subtrees(t, scan, "s")
        assert [(r.span, r.category, r.program) for r in refs] == [((1, 2), "direction", Program("i_right"))]

    def test_worked_categories(self, geo, geo_trees):
        t, _ = geo_trees["geo-002"]
        refs = enumerate_exchangeable_subtrees(t, geo, "geo-002")
        cats = {r.category for r in refs}
        assert cats == {"answer", "largest", "city", "loc_2", "smallest", "state", "countryid"}
        t1, _ = geo_trees["geo-001"]
        assert "population_1" in {r.category for r in enumerate_exchangeable_subtrees(t1, geo)}

    def test_single_non_null_leaf(self, geo):
        t = build_tree([("what is", None), [("the", None), ("usa", "countryid#usa")]])
        refs = enumerate_exchangeable_subtrees(t, geo)
        assert [(r.span, r.program) for r in refs] == [((3, 4), parse_program("countryid ( usa )"))]
        only_leaf = build_tree(("usa", "countryid#usa"))
        assert len(enumerate_exchangeable_subtrees(only_leaf, geo)) == 1

    def test_ordered_unique(self, geo, geo_trees):
        for t, _ in geo_trees.values():
            spans = [r.span for r in enumerate_exchangeable_subtrees(t, geo)]
            assert spans == sorted(set(spans))

    def test_bare_primitive_extended_by_direction_is_excluded(self, scan):
        t = build_tree([("run", "i_run"), ("right", "i_right")])
        refs = enumerate_exchangeable_subtrees(t, scan)
        assert [r.span for r in refs] == [(1, 2)]


class TestSpliceUtterance:
    def test_worked(self):
        x1 = "what is the population of the largest state".split()
        donor = "largest city in the smallest state in the usa".split()
        assert " ".join(splice_utterance(x1, 6, 8, donor)) == WORKED_AUGMENTED[0]

    def test_identity(self):
        x1 = "a b c d".split()
        assert splice_utterance(x1, 1, 3, x1[1:3]) == x1

    def test_full(self):
        assert splice_utterance(["a", "b"], 0, 2, ["y"]) == ["y"]

    @pytest.mark.parametrize("i, j", [(-1, 1), (1, 1), (0, 3), (2, 1)])
    def test_range(self, i, j):
        with pytest.raises(IndexOutOfRange):
            splice_utterance(["a", "b"], i, j, ["c"])

    @pytest.mark.parametrize("seed", range(20))
    def test_length(self, seed):
        rng = random.Random(seed)
        x = [str(k) for k in range(rng.randint(1, 10))]
        i = rng.randrange(len(x))
        j = rng.randint(i + 1, len(x))
        donor = ["d"] * rng.randint(0, 5)
        assert len(splice_utterance(x, i, j, donor)) == len(x) - (j - i) + len(donor)


class TestSpliceTree:
    def test_worked(self, geo, geo_trees):
        t1, _ = geo_trees["geo-001"]
        t2, _ = geo_trees["geo-002"]
        target = ref_at(enumerate_exchangeable_subtrees(t1, geo, "geo-001"), (6, 8))
        donor = ref_at(enumerate_exchangeable_subtrees(t2, geo, "geo-002"), (3, 12))
        out = splice_tree(t1, target, donor)
        assert " ".join(out.tokens) == WORKED_AUGMENTED[0]
        assert render_program(program_of_tree(out, geo)) == WORKED_AUGMENTED[1]
        assert not structural_violations(out)

    def test_self_splice(self, geo, geo_trees):
        t, _ = geo_trees["geo-002"]
        for ref in enumerate_exchangeable_subtrees(t, geo):
            assert splice_tree(t, ref, ref) == t

    def test_toy_reindexing(self):
        d = toy.TOY_DOMAINS["outer"]
        t1 = build_tree([("f1", "f"), [("the", None), ("a1", "a")]])
        t2 = build_tree([[("h1", "h"), [("b1", "b"), ("f2", "f")]], ("a2", "a")])
        # whole-tree target: the result is the donor subtree shifted to 0
        target = ref_at(enumerate_exchangeable_subtrees(t1, d), (0, 3))
        donor = ref_at(enumerate_exchangeable_subtrees(t2, d), (1, 3))
        assert target.category == donor.category == "f"
        out = splice_tree(t1, target, donor)
        expected = SpanTree(("b1", "f2"), SpanNode((0, 2), None, (SpanNode((0, 1), "b"), SpanNode((1, 2), "f"))))
        assert out == expected

        target = ref_at(enumerate_exchangeable_subtrees(t1, d), (2, 3))
        donor = ref_at(enumerate_exchangeable_subtrees(t2, d), (1, 3))
        with pytest.raises(CategoryMismatch):
            splice_tree(t1, target, donor)
        donor = ref_at(enumerate_exchangeable_subtrees(t2, d), (3, 4))
        out = splice_tree(t1, target, donor)
        expected = SpanTree(
            ("f1", "the", "a2"),
            SpanNode((0, 3), None, (SpanNode((0, 1), "f"),
                                    SpanNode((1, 3), None, (SpanNode((1, 2), None), SpanNode((2, 3), "a"))))),
        )
        assert out == expected
        assert program_of_tree(out, d) == parse_program("f ( a )")

    def test_middle_reindexing(self, geo, geo_trees):
        t, _ = geo_trees["geo-002"]
        target = ref_at(enumerate_exchangeable_subtrees(t, geo), (11, 12))
        assert target.category == "countryid"
        donor_tree = build_tree([("big", None), [("united states", "countryid#usa"), ("of america", None)]])
        donor = ref_at(enumerate_exchangeable_subtrees(donor_tree, geo), (1, 3))
        out = splice_tree(t, target, donor)
        assert out.tokens[-4:] == ("in", "the", "united", "states")
        assert not structural_violations(out)
        assert out.root.span == (0, 13)
        assert out.node_at((10, 13)).children[1] == SpanNode((11, 13), "countryid#usa")

    def test_foreign_target(self, geo, geo_trees):
        t1, _ = geo_trees["geo-001"]
        t3, _ = geo_trees["geo-003"]
        target = enumerate_exchangeable_subtrees(t3, geo)[-1]
        with pytest.raises(IndexOutOfRange):
            splice_tree(t1, target, target)


@pytest.mark.parametrize("seed", range(100))
def test_commutation(seed):
    rng = random.Random(seed)
    d = toy.TOY_DOMAINS[rng.choice(["outer", "map"])]
    corpus = toy.random_corpus(rng, d, 3)
    refs = {ex.id: enumerate_exchangeable_subtrees(ex.tree, d, ex.id) for ex in corpus}
    for host in corpus:
        for target in refs[host.id]:
            for other in corpus:
                for donor in refs[other.id]:
                    if donor.category != target.category:
                        continue
                    spliced = splice_tree(host.tree, target, donor)
                    assert not structural_violations(spliced)
                    assert program_of_tree(spliced, d) == replace_subprogram(host.program, target.path, donor.program)


def test_scan_grammar_trees_valid(scan):
    for k, (command, tree) in enumerate(scan_trees()):
        if k % 50:
            continue
        assert not structural_violations(tree)
        program_of_tree(tree, scan)


class TestBinarize:
    def test_collapse_wrapper(self):
        inner = SpanNode((0, 2), None, (SpanNode((0, 1), "a"), SpanNode((1, 2), "b")))
        wrapped = SpanNode((0, 2), None, (inner,))
        assert binarize_unary(wrapped) == inner

    def test_nested(self):
        leaf = SpanNode((1, 2), "b")
        node = SpanNode((0, 2), None, (SpanNode((0, 1), "a"), SpanNode((1, 2), None, (leaf,))))
        assert binarize_unary(node).children[1] == leaf

    def test_non_wrapper_left_alone(self):
        odd = SpanNode((0, 2), None, (SpanNode((0, 1), "a"),))
        assert len(binarize_unary(odd).children) == 1

    def test_build_tree_rejects_bad_spec(self):
        with pytest.raises(TreeError):
            build_tree([("a", "a")])
