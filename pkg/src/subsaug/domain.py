"""Domain constants, the composition type system, and semantic categories.

A domain config is a JSON document::

    {"name": "geo",
     "types": ["Value", {"name": "Num", "supertypes": ["Value"]}, ...],
     "constants": [{"name": "loc_2", "kind": "predicate", "arity": 1,
                    "arg_types": ["Region"], "result_type": "Set"}, ...],
     "func_mode": "outer_symbol" | "explicit_map",
     "func_map": {"i_right": "direction"}}

Types form a subtype lattice through the optional ``supertypes`` lists; an
argument slot typed ``T`` accepts any program whose result type is ``T`` or
one of its subtypes.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from os import PathLike
from pathlib import Path as FsPath
from typing import Any, Mapping

import jsonschema

from .errors import (
    AmbiguousApplication,
    ProgramParseError,
    DanglingFuncMapEntry,
    DanglingTypeReference,
    NoLegalApplication,
    SchemaViolation,
    TypeMismatch,
    UnknownConstant,
)
from .funql import Path, Program, parse_program

log = logging.getLogger(__name__)

OUTER_SYMBOL = "outer_symbol"
EXPLICIT_MAP = "explicit_map"


class _Undefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Undefined, ())


UNDEFINED = _Undefined()

DOMAIN_SCHEMA: dict[str, Any] = {
    "type": "object",
    "required": ["name", "types", "constants", "func_mode"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "version": {"type": ["string", "integer"]},
        "types": {
            "type": "array",
            "minItems": 1,
            "items": {
                "anyOf": [
                    {"type": "string", "minLength": 1},
                    {
                        "type": "object",
                        "required": ["name"],
                        "properties": {
                            "name": {"type": "string", "minLength": 1},
                            "supertypes": {"type": "array", "items": {"type": "string"}},
                        },
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "constants": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "kind", "arity", "arg_types", "result_type"],
                "properties": {
                    "name": {"type": "string", "pattern": r"^[^\s(),]+$"},
                    "kind": {"enum": ["entity", "predicate"]},
                    "arity": {"type": "integer", "minimum": 0, "maximum": 2},
                    "arg_types": {"type": "array", "items": {"type": "string"}, "maxItems": 2},
                    "result_type": {"type": "string"},
                    "optional_args": {"type": "integer", "minimum": 0, "maximum": 2},
                    "leaf_expansion": {"type": "string"},
                },
                "additionalProperties": False,
            },
        },
        "func_mode": {"enum": [OUTER_SYMBOL, EXPLICIT_MAP]},
        "func_map": {"type": "object", "additionalProperties": {"type": "string", "minLength": 1}},
    },
    "additionalProperties": False,
}


@dataclass(frozen=True)
class ConstantDef:
    name: str
    kind: str
    arity: int
    arg_types: tuple[str, ...]
    result_type: str
    # trailing argument slots that may stay empty in a saturated program
    optional_args: int = 0
    leaf_expansion: Program | None = None

    @property
    def required_arity(self) -> int:
        return self.arity - self.optional_args


@dataclass(frozen=True)
class TypeInfo:
    type: str
    saturated: bool


@dataclass(frozen=True)
class Composition:
    """Result of composing two sibling programs.

    ``function_side`` is 0 when the left child acted as the function.
    ``slot_path`` is where the argument landed, relative to the function's root.
    """

    program: Program
    function_side: int
    slot_path: Path
    tie_broken: bool = False


@dataclass(frozen=True)
class Domain:
    name: str
    types: frozenset[str]
    constants: Mapping[str, ConstantDef]
    func_mode: str = OUTER_SYMBOL
    func_map: Mapping[str, str] = field(default_factory=dict)
    # type -> all types it may be used as, itself included
    ancestors: Mapping[str, frozenset[str]] = field(default_factory=dict)
    source: Mapping[str, Any] | None = field(default=None, compare=False, repr=False)
    # programs are immutable, so successful type checks can be reused
    _types: dict = field(default_factory=dict, init=False, compare=False, repr=False)

    def constant(self, symbol: str) -> ConstantDef:
        try:
            return self.constants[symbol]
        except KeyError:
            raise UnknownConstant(symbol) from None

    def is_subtype(self, sub: str, sup: str) -> bool:
        return sup in self.ancestors.get(sub, frozenset((sub,)))

    def fingerprint_source(self) -> str:
        return json.dumps(self.source, sort_keys=True, separators=(",", ":"))


def _type_closure(declared: dict[str, list[str]]) -> dict[str, frozenset[str]]:
    closure: dict[str, frozenset[str]] = {}

    def visit(name: str, stack: tuple[str, ...]) -> frozenset[str]:
        if name in closure:
            return closure[name]
        if name in stack:
            raise SchemaViolation(f"cyclic supertype chain through {name!r}")
        result = {name}
        for parent in declared[name]:
            result |= visit(parent, stack + (name,))
        closure[name] = frozenset(result)
        return closure[name]

    for name in declared:
        visit(name, ())
    return closure


def load_domain(source: Mapping[str, Any] | str | PathLike) -> Domain:
    """Build a validated :class:`Domain` from a config mapping or JSON file."""
    if not isinstance(source, Mapping):
        with open(FsPath(source), encoding="utf-8") as f:
            source = json.load(f)
    try:
        jsonschema.validate(source, DOMAIN_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaViolation(f"{where}: {exc.message}") from None

    declared: dict[str, list[str]] = {}
    for entry in source["types"]:
        if isinstance(entry, str):
            entry = {"name": entry}
        if entry["name"] in declared:
            raise SchemaViolation(f"type {entry['name']!r} declared twice")
        declared[entry["name"]] = list(entry.get("supertypes", []))
    for name, parents in declared.items():
        for parent in parents:
            if parent not in declared:
                raise DanglingTypeReference(f"type {name!r} names unknown supertype {parent!r}")
    ancestors = _type_closure(declared)

    raw_constants: dict[str, dict] = {}
    for entry in source["constants"]:
        name = entry["name"]
        if name in raw_constants:
            raise SchemaViolation(f"constant {name!r} defined twice")
        kind, arity = entry["kind"], entry["arity"]
        if kind == "entity" and arity != 0:
            raise SchemaViolation(f"entity {name!r} must have arity 0")
        if kind == "predicate" and arity < 1:
            raise SchemaViolation(f"predicate {name!r} must have arity >= 1")
        if len(entry["arg_types"]) != arity:
            raise SchemaViolation(f"constant {name!r}: arg_types length != arity")
        if entry.get("optional_args", 0) > arity:
            raise SchemaViolation(f"constant {name!r}: optional_args exceeds arity")
        for t in [*entry["arg_types"], entry["result_type"]]:
            if t not in declared:
                raise DanglingTypeReference(f"constant {name!r} references undeclared type {t!r}")
        raw_constants[name] = entry

    constants = {
        name: ConstantDef(
            name=name,
            kind=e["kind"],
            arity=e["arity"],
            arg_types=tuple(e["arg_types"]),
            result_type=e["result_type"],
            optional_args=e.get("optional_args", 0),
        )
        for name, e in raw_constants.items()
    }

    func_map = dict(source.get("func_map", {}))
    for name in func_map:
        if name not in constants:
            raise DanglingFuncMapEntry(f"func_map entry {name!r} is not a declared constant")
    if source["func_mode"] == EXPLICIT_MAP and not func_map:
        raise SchemaViolation("explicit_map mode requires a non-empty func_map")

    domain = Domain(
        name=source["name"],
        types=frozenset(declared),
        constants=constants,
        func_mode=source["func_mode"],
        func_map=func_map,
        ancestors=ancestors,
        source=dict(source),
    )

    # leaf expansions are checked against the finished type system
    expanded = dict(constants)
    for name, e in raw_constants.items():
        if "leaf_expansion" not in e:
            continue
        try:
            expansion = parse_program(e["leaf_expansion"])
        except ProgramParseError as exc:
            raise SchemaViolation(f"constant {name!r}: bad leaf_expansion: {exc}") from None
        if constants[name].kind != "entity":
            raise SchemaViolation(f"constant {name!r}: only entities may carry a leaf_expansion")
        try:
            info = type_of(expansion, domain)
        except (UnknownConstant, TypeMismatch) as exc:
            raise SchemaViolation(f"constant {name!r}: leaf_expansion does not type-check: {exc}") from None
        if not info.saturated or not domain.is_subtype(info.type, e["result_type"]):
            raise SchemaViolation(
                f"constant {name!r}: leaf_expansion has type {info.type}"
                f"{'' if info.saturated else ' (unsaturated)'}, declared {e['result_type']}"
            )
        expanded[name] = dataclasses.replace(constants[name], leaf_expansion=expansion)
    return dataclasses.replace(domain, constants=expanded)


def semantic_category(p: Program, d: Domain):
    """func(.) of a subprogram: a category label or UNDEFINED."""
    for _, node in p.iter_nodes():
        d.constant(node.symbol)
    if d.func_mode == OUTER_SYMBOL:
        return p.symbol
    return d.func_map.get(p.symbol, UNDEFINED)


def type_of(p: Program, d: Domain) -> TypeInfo:
    """Result type of ``p`` and whether every required slot is filled."""

    cache = d._types

    def check(node: Program, path: Path) -> TypeInfo:
        hit = cache.get(node)
        if hit is not None:
            return hit
        const = d.constant(node.symbol)
        if len(node.children) > const.arity:
            raise TypeMismatch(f"{node.symbol} takes {const.arity} arguments, got {len(node.children)}", path)
        saturated = len(node.children) >= const.required_arity
        for k, child in enumerate(node.children):
            info = check(child, path + (k,))
            if not d.is_subtype(info.type, const.arg_types[k]):
                raise TypeMismatch(
                    f"{node.symbol} expects {const.arg_types[k]} in slot {k}, got {info.type}", path + (k,)
                )
            saturated = saturated and info.saturated
        info = TypeInfo(const.result_type, saturated)
        cache[node] = info
        return info

    return check(p, ())


def open_slot(p: Program, d: Domain) -> tuple[Path, str] | None:
    """First open argument slot in pre-order as ``(node path, arg type)``.

    Required slots anywhere take precedence over optional ones.
    """
    optional: tuple[Path, str] | None = None
    for path, node in p.iter_nodes():
        const = d.constant(node.symbol)
        n = len(node.children)
        if n < const.required_arity:
            return path, const.arg_types[n]
        if optional is None and n < const.arity:
            optional = (path, const.arg_types[n])
    return optional


def _insert(p: Program, path: Path, arg: Program) -> Program:
    if not path:
        return p.with_child(arg)
    children = list(p.children)
    children[path[0]] = _insert(children[path[0]], path[1:], arg)
    return Program(p.symbol, tuple(children))


def _legal(fn: Program, arg: Program, arg_type: str, d: Domain) -> tuple[Path, str] | None:
    slot = open_slot(fn, d)
    if slot is None or not d.is_subtype(arg_type, slot[1]):
        return None
    return slot


def compose(left: Program, right: Program, d: Domain, tie_break: bool = True) -> Composition:
    """Combine two sibling programs by function application.

    The unsaturated side is the function.  When both sides agree on
    saturation the type system decides; if both orderings type-check the
    left side wins (or :class:`AmbiguousApplication` with ``tie_break=False``).
    """
    lt, rt = type_of(left, d), type_of(right, d)
    sides = ((left, lt), (right, rt))
    if lt.saturated != rt.saturated:
        fn_side = 0 if not lt.saturated else 1
        candidates = [fn_side]
    else:
        candidates = [0, 1]

    legal = []
    for side in candidates:
        fn = sides[side][0]
        arg, arg_info = sides[1 - side]
        slot = _legal(fn, arg, arg_info.type, d)
        if slot is not None:
            legal.append((side, slot))

    if not legal:
        raise NoLegalApplication(f"neither {left} nor {right} can take the other as an argument")
    tie_broken = False
    if len(legal) == 2:
        if not tie_break:
            raise AmbiguousApplication(f"both {left} and {right} can act as the function")
        log.warning("ambiguous application of %s and %s; left child taken as function", left, right)
        tie_broken = True
    side, (node_path, _) = legal[0]
    fn = sides[side][0]
    arg = sides[1 - side][0]
    slot_index = len(subprogram_children(fn, node_path))
    program = _insert(fn, node_path, arg)
    return Composition(program, side, node_path + (slot_index,), tie_broken)


def subprogram_children(p: Program, path: Path) -> tuple[Program, ...]:
    node = p
    for k in path:
        node = node.children[k]
    return node.children


def apply(left: Program, right: Program, d: Domain, tie_break: bool = True) -> Program:
    return compose(left, right, d, tie_break).program


def leaf_program(category: str, d: Domain) -> Program:
    """Program denoted by a span-tree leaf labelled ``category``."""
    const = d.constant(category)
    if const.leaf_expansion is not None:
        return const.leaf_expansion
    return Program(category)
