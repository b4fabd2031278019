"""Programs in the parenthesized, variable-free functional language.

Both GeoQuery FunQL and the SCAN program format share one surface syntax::

    i_after ( i_run ( i_right ) , i_jump )

A :class:`Program` is an immutable tree of constant symbols with at most two
children.  Paths address nodes by child indices from the root.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator, Sequence

from .errors import EmptyInput, InvalidPath, UnbalancedParens, UnexpectedToken

MAX_ARITY = 2

Path = tuple[int, ...]

_TOKEN_RE = re.compile(r"[(),]|[^\s(),]+")
_PUNCT = frozenset("(),")


@dataclass(frozen=True)
class Program:
    symbol: str
    children: tuple[Program, ...] = ()

    def __post_init__(self):
        if not self.symbol or any(c.isspace() or c in _PUNCT for c in self.symbol):
            raise ValueError(f"invalid program symbol {self.symbol!r}")
        if len(self.children) > MAX_ARITY:
            raise ValueError(f"{self.symbol} has {len(self.children)} children; max is {MAX_ARITY}")

    def __str__(self) -> str:
        return render_program(self)

    def with_child(self, child: Program) -> Program:
        return Program(self.symbol, self.children + (child,))

    def iter_nodes(self, prefix: Path = ()) -> Iterator[tuple[Path, Program]]:
        """Yield ``(path, node)`` pairs in pre-order."""
        yield prefix, self
        for k, child in enumerate(self.children):
            yield from child.iter_nodes(prefix + (k,))

    @property
    def depth(self) -> int:
        return 1 + max((c.depth for c in self.children), default=0)

    def symbols(self) -> list[str]:
        return [node.symbol for _, node in self.iter_nodes()]


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text)


def parse_program(text: str) -> Program:
    """Parse ``text`` into a :class:`Program`.

    Whitespace is arbitrary; ``f(a,b)`` and ``f ( a , b )`` parse to the same
    program.  Errors carry the index of the offending token.
    """
    tokens = tokenize(text)
    if not tokens:
        raise EmptyInput("empty program text")

    depth = 0
    for pos, tok in enumerate(tokens):
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
            if depth < 0:
                raise UnbalancedParens("unmatched ')'", pos)
    if depth != 0:
        raise UnbalancedParens(f"{depth} unclosed '('", len(tokens))

    pos = 0

    def term() -> Program:
        nonlocal pos
        if pos >= len(tokens):
            raise UnexpectedToken("expected a symbol, got end of input", pos)
        tok = tokens[pos]
        if tok in _PUNCT:
            raise UnexpectedToken(f"expected a symbol, got {tok!r}", pos)
        pos += 1
        if pos >= len(tokens) or tokens[pos] != "(":
            return Program(tok)
        open_pos = pos
        pos += 1
        args = [term()]
        while pos < len(tokens) and tokens[pos] == ",":
            pos += 1
            args.append(term())
        if pos >= len(tokens) or tokens[pos] != ")":
            got = tokens[pos] if pos < len(tokens) else "end of input"
            raise UnexpectedToken(f"expected ',' or ')', got {got!r}", pos)
        if len(args) > MAX_ARITY:
            raise UnexpectedToken(f"{tok} applied to {len(args)} arguments; max is {MAX_ARITY}", open_pos)
        pos += 1
        return Program(tok, tuple(args))

    program = term()
    if pos != len(tokens):
        raise UnexpectedToken(f"trailing token {tokens[pos]!r}", pos)
    return program


def render_tokens(p: Program) -> list[str]:
    out: list[str] = []

    def walk(node: Program) -> None:
        out.append(node.symbol)
        if node.children:
            out.append("(")
            for k, child in enumerate(node.children):
                if k:
                    out.append(",")
                walk(child)
            out.append(")")

    walk(p)
    return out


def render_program(p: Program) -> str:
    """Canonical rendering with a single space between every token."""
    return " ".join(render_tokens(p))


def program_token_length(p: Program) -> int:
    """Token count of the canonical rendering, punctuation included."""
    n_nodes = 0
    n_commas = 0
    n_parens = 0
    for _, node in p.iter_nodes():
        n_nodes += 1
        if node.children:
            n_parens += 2
            n_commas += len(node.children) - 1
    return n_nodes + n_parens + n_commas


def program_symbol_length(p: Program) -> int:
    """Token count ignoring parentheses and commas."""
    return sum(1 for _ in p.iter_nodes())


def _check_path(p: Program, path: Sequence[int]) -> None:
    node = p
    for depth, k in enumerate(path):
        if not 0 <= k < len(node.children):
            raise InvalidPath(f"path {list(path)} leaves the program at step {depth}")
        node = node.children[k]


def subprogram_at(p: Program, path: Sequence[int]) -> Program:
    _check_path(p, path)
    node = p
    for k in path:
        node = node.children[k]
    return node


def replace_subprogram(p: Program, path: Sequence[int], donor: Program) -> Program:
    """Return a copy of ``p`` with the node at ``path`` replaced by ``donor``."""
    _check_path(p, path)

    def rebuild(node: Program, rest: Sequence[int]) -> Program:
        if not rest:
            return donor
        k = rest[0]
        children = list(node.children)
        children[k] = rebuild(children[k], rest[1:])
        return Program(node.symbol, tuple(children))

    return rebuild(p, tuple(path))


def first_divergence(a: Program, b: Program) -> Path | None:
    """Pre-order path of the first node where ``a`` and ``b`` differ, or None."""
    stack: list[tuple[Path, Program, Program]] = [((), a, b)]
    while stack:
        path, x, y = stack.pop()
        if x.symbol != y.symbol or len(x.children) != len(y.children):
            return path
        for k in reversed(range(len(x.children))):
            stack.append((path + (k,), x.children[k], y.children[k]))
    return None
