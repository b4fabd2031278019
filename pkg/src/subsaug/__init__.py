"""Subtree-substitution data augmentation for compositional semantic parsing."""

from importlib import resources

from .domain import UNDEFINED, Domain, apply, load_domain, semantic_category, type_of
from .engine import (
    AugmentedExample,
    AugmentOptions,
    Corpus,
    CorpusExample,
    Provenance,
    augment,
    build_index,
    dedup,
)
from .funql import (
    Program,
    parse_program,
    program_token_length,
    render_program,
    replace_subprogram,
    subprogram_at,
)
from .spantree import (
    SpanNode,
    SpanTree,
    SubtreeRef,
    build_tree,
    enumerate_exchangeable_subtrees,
    program_of_tree,
    splice_tree,
    splice_utterance,
    validate_tree,
)
from .stats import complexity_stats, test_recovery

__version__ = "0.1.0"


def bundled_domain(name: str) -> Domain:
    """Load one of the shipped domain configs: ``"geoquery"`` or ``"scan"``."""
    with resources.as_file(resources.files(__package__) / "data" / f"{name}.json") as path:
        return load_domain(path)
