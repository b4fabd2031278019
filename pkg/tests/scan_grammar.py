"""The SCAN command grammar with span trees in the i_* program format."""

from __future__ import annotations

import itertools

from subsaug.spantree import build_tree

PRIMITIVES = ["walk", "look", "run", "jump"]
DIRECTIONS = ["left", "right"]


def _u(word):
    return (word, f"i_{word}")


def _d(word):
    return (word, f"i_{word}")


def _directed():
    """D -> U left | U right | turn left | turn right"""
    for verb in PRIMITIVES + ["turn"]:
        for dr in DIRECTIONS:
            yield f"{verb} {dr}", [_u(verb), _d(dr)], verb, dr


def _verb_phrases():
    """V -> D opposite D | D around D | D | U, with the nesting
    i_run ( i_around ( i_right ) )."""
    for verb in PRIMITIVES:
        yield verb, _u(verb)
    for text, spec, _, _ in _directed():
        yield text, spec
    for verb in PRIMITIVES + ["turn"]:
        for mod in ("opposite", "around"):
            for dr in DIRECTIONS:
                yield f"{verb} {mod} {dr}", [_u(verb), [(mod, f"i_{mod}"), _d(dr)]]


def _sentences():
    for text, spec in _verb_phrases():
        yield text, spec
        for rep in ("twice", "thrice"):
            yield f"{text} {rep}", [spec, (rep, f"i_{rep}")]


def scan_trees():
    """Yield ``(command, tree)`` for every command of the grammar."""
    sentences = list(_sentences())
    yield from ((t, build_tree(s)) for t, s in sentences)
    for (t1, s1), (t2, s2) in itertools.product(sentences, repeat=2):
        for conj in ("and", "after"):
            yield f"{t1} {conj} {t2}", build_tree([[s1, (conj, f"i_{conj}")], s2])


def is_primitive_right(command: str) -> bool:
    """Commands containing 'Primitive right' with no modifier in between."""
    words = command.split()
    return any(
        w in PRIMITIVES and i + 1 < len(words) and words[i + 1] == "right"
        for i, w in enumerate(words)
    )
