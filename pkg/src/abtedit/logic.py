"""Conditions over the tree under the cursor, and their satisfaction.

Concrete syntax: `!p`, `p & q`, `p | q`, `@name`, `<>name`, `[]name`,
parentheses; literal forms `@num:5`, `@var:x`.  `!` binds tighter than
`&`, which binds tighter than `|`.

satisfies follows the derivation rules; brute_force_satisfies is an
independent oracle that enumerates nodes.  Both judge the cursorless
subtree the cursor encloses.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .abt import Abt, Op, Var, iter_nodes
from .langspec import PARAM_NAME, PARAM_NONE, LanguageSpec, UnknownOperatorError


@dataclass(frozen=True, slots=True)
class OpRef:
    """An operator family, optionally pinned to one literal."""

    name: str
    literal: Union[int, str, None] = None

    def __str__(self) -> str:
        return self.name if self.literal is None else f"{self.name}:{self.literal}"


@dataclass(frozen=True, slots=True)
class Neg:
    phi: "Condition"


@dataclass(frozen=True, slots=True)
class And:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True, slots=True)
class At:
    ref: OpRef


@dataclass(frozen=True, slots=True)
class Possibly:
    ref: OpRef


@dataclass(frozen=True, slots=True)
class Necessity:
    ref: OpRef


Condition = Union[Neg, And, Or, At, Possibly, Necessity]


def print_condition(phi: Condition) -> str:
    match phi:
        case Neg(p):
            return f"!{_atomish(p)}"
        case And(p, q):
            return f"{_atomish(p)} & {_atomish(q)}"
        case Or(p, q):
            return f"{_atomish(p)} | {_atomish(q)}"
        case At(ref):
            return f"@{ref}"
        case Possibly(ref):
            return f"<>{ref}"
        case Necessity(ref):
            return f"[]{ref}"
    raise TypeError(f"not a condition: {phi!r}")


def _atomish(phi: Condition) -> str:
    if isinstance(phi, (And, Or)):
        return f"({print_condition(phi)})"
    return print_condition(phi)


def _check_ref(ref: OpRef, spec: LanguageSpec) -> None:
    decl = spec.operator(ref.name)  # raises UnknownOperatorError
    if ref.literal is not None and decl.param_kind == PARAM_NONE:
        raise UnknownOperatorError(
            f"operator {ref.name!r} takes no literal in conditions"
        )


def _root_matches(a: Abt, ref: OpRef, spec: LanguageSpec) -> bool:
    decl = spec.operator(ref.name)
    if decl.param_kind == PARAM_NAME:
        # A name-literal family owns the variable-use nodes.
        return isinstance(a, Var) and (ref.literal is None or a.name == ref.literal)
    if not isinstance(a, Op) or a.decl.name != ref.name:
        return False
    return ref.literal is None or a.literal == ref.literal


def satisfies(a: Abt, phi: Condition, spec: LanguageSpec) -> bool:
    """Rule-derived satisfaction on the cursorless subtree `a`."""
    match phi:
        case Neg(p):
            return not satisfies(a, p, spec)
        case And(p, q):
            return satisfies(a, p, spec) and satisfies(a, q, spec)
        case Or(p, q):
            return satisfies(a, p, spec) or satisfies(a, q, spec)
        case At(ref):
            _check_ref(ref, spec)
            return _root_matches(a, ref, spec)
        case Possibly(ref):
            _check_ref(ref, spec)
            return _possibly(a, ref, spec)
        case Necessity(ref):
            _check_ref(ref, spec)
            children = a.args if isinstance(a, Op) else ()
            # Vacuously true at nullary roots: no premises to discharge.
            return all(_possibly(ab.body, ref, spec) for ab in children)
    raise TypeError(f"not a condition: {phi!r}")


def _possibly(a: Abt, ref: OpRef, spec: LanguageSpec) -> bool:
    if _root_matches(a, ref, spec):
        return True
    children = a.args if isinstance(a, Op) else ()
    return any(_possibly(ab.body, ref, spec) for ab in children)


def brute_force_satisfies(a: Abt, phi: Condition, spec: LanguageSpec) -> bool:
    """Oracle: the same relation computed by exhaustive node enumeration."""
    match phi:
        case Neg(p):
            return not brute_force_satisfies(a, p, spec)
        case And(p, q):
            return brute_force_satisfies(a, p, spec) and brute_force_satisfies(
                a, q, spec
            )
        case Or(p, q):
            return brute_force_satisfies(a, p, spec) or brute_force_satisfies(
                a, q, spec
            )
        case At(ref):
            _check_ref(ref, spec)
            return _root_matches(a, ref, spec)
        case Possibly(ref):
            _check_ref(ref, spec)
            return any(_root_matches(n, ref, spec) for n in iter_nodes(a))
        case Necessity(ref):
            _check_ref(ref, spec)
            if not isinstance(a, Op):
                return True
            return all(
                any(_root_matches(n, ref, spec) for n in iter_nodes(ab.body))
                for ab in a.args
            )
    raise TypeError(f"not a condition: {phi!r}")


# ---------------------------------------------------------------------------
# Concrete syntax

_TOKEN = re.compile(
    r"\s*(?:(?P<lpar>\()|(?P<rpar>\))|(?P<not>!)|(?P<and>&)|(?P<or>\|)"
    r"|(?P<at>@)|(?P<dia><>)|(?P<box>\[\])|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<colon>:)|(?P<int>-?[0-9]+))"
)


class ConditionParseError(ValueError):
    pass


class _CondParser:
    def __init__(self, text: str):
        self.tokens: list[tuple[str, str]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                if text[pos:].strip():
                    raise ConditionParseError(
                        f"bad condition syntax at {text[pos:]!r}"
                    )
                break
            pos = m.end()
            kind = m.lastgroup
            assert kind is not None
            self.tokens.append((kind, m.group(kind)))
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, kind: str) -> str:
        if self.peek() != kind:
            raise ConditionParseError(f"expected {kind}, got {self.peek()}")
        value = self.tokens[self.i][1]
        self.i += 1
        return value

    def parse(self) -> Condition:
        phi = self.or_level()
        if self.i != len(self.tokens):
            raise ConditionParseError("trailing tokens in condition")
        return phi

    def or_level(self) -> Condition:
        phi = self.and_level()
        while self.peek() == "or":
            self.take("or")
            phi = Or(phi, self.and_level())
        return phi

    def and_level(self) -> Condition:
        phi = self.unary()
        while self.peek() == "and":
            self.take("and")
            phi = And(phi, self.unary())
        return phi

    def unary(self) -> Condition:
        kind = self.peek()
        if kind == "not":
            self.take("not")
            return Neg(self.unary())
        if kind == "lpar":
            self.take("lpar")
            phi = self.or_level()
            self.take("rpar")
            return phi
        if kind == "at":
            self.take("at")
            return At(self.op_ref())
        if kind == "dia":
            self.take("dia")
            return Possibly(self.op_ref())
        if kind == "box":
            self.take("box")
            return Necessity(self.op_ref())
        raise ConditionParseError(f"unexpected token {kind}")

    def op_ref(self) -> OpRef:
        name = self.take("ident")
        if self.peek() == "colon":
            self.take("colon")
            if self.peek() == "int":
                return OpRef(name, int(self.take("int")))
            return OpRef(name, self.take("ident"))
        return OpRef(name)


def parse_condition(text: str) -> Condition:
    return _CondParser(text).parse()
