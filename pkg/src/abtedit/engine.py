"""Editor expressions and their labelled small-step semantics.

Script grammar (`#` starts a line comment):

    E ::= nil
        | child <n>. E  |  parent. E  |  {op[:lit]}. E  |  rec <X>. E  |  <X>
        | <phi> => E1 | E2
        | E1 >> E2
        | ( E )

Prefix forms (including `rec`) bind tighter than `=>`, which binds
tighter than `>>`; `>>` associates to the right.  In a conditional the
then-branch is a prefix-level expression while the else-branch extends
right, so chained conditionals nest into the else unless parenthesised.

Transitions carry a label: the atomic command for prefix steps, silent
for everything else.  There is no structural congruence: `nil >> E`
costs one silent step, and recursion unfolds by substitution.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .abt import WellFormedTree
from .langspec import LanguageSpec
from .logic import Condition, print_condition, satisfies
from .zipper import Apc, Child, Insert, Parent, Stuck, apply_command


@dataclass(frozen=True, slots=True)
class Nil:
    def __str__(self) -> str:
        return "nil"


@dataclass(frozen=True, slots=True)
class Prefix:
    command: Apc
    rest: "EditorExpr"

    def __str__(self) -> str:
        return f"{self.command}. {self.rest}"


@dataclass(frozen=True, slots=True)
class Cond:
    phi: Condition
    then: "EditorExpr"
    els: "EditorExpr"

    def __str__(self) -> str:
        return f"{print_condition(self.phi)} => {self.then} | {self.els}"


@dataclass(frozen=True, slots=True)
class Seq:
    first: "EditorExpr"
    second: "EditorExpr"

    def __str__(self) -> str:
        return f"({self.first}) >> ({self.second})"


@dataclass(frozen=True, slots=True)
class Rec:
    var: str
    body: "EditorExpr"

    def __str__(self) -> str:
        return f"rec {self.var}. {self.body}"


@dataclass(frozen=True, slots=True)
class RecVar:
    name: str

    def __str__(self) -> str:
        return self.name


EditorExpr = Union[Nil, Prefix, Cond, Seq, Rec, RecVar]


def free_rec_vars(e: EditorExpr) -> set[str]:
    match e:
        case Nil():
            return set()
        case Prefix(_, rest):
            return free_rec_vars(rest)
        case Cond(_, t, f):
            return free_rec_vars(t) | free_rec_vars(f)
        case Seq(a, b):
            return free_rec_vars(a) | free_rec_vars(b)
        case Rec(x, body):
            return free_rec_vars(body) - {x}
        case RecVar(x):
            return {x}
    raise TypeError(f"not an editor expression: {e!r}")


def subst_rec(e: EditorExpr, name: str, value: EditorExpr) -> EditorExpr:
    """E[name := value]; recursion variables live in their own namespace,
    so this cannot capture object-language names."""
    match e:
        case Nil():
            return e
        case Prefix(cmd, rest):
            return Prefix(cmd, subst_rec(rest, name, value))
        case Cond(phi, t, f):
            return Cond(phi, subst_rec(t, name, value), subst_rec(f, name, value))
        case Seq(a, b):
            return Seq(subst_rec(a, name, value), subst_rec(b, name, value))
        case Rec(x, body):
            if x == name:
                return e  # shadowed
            return Rec(x, subst_rec(body, name, value))
        case RecVar(x):
            return value if x == name else e
    raise TypeError(f"not an editor expression: {e!r}")


# ---------------------------------------------------------------------------
# Small-step semantics


SILENT = "ε"


@dataclass(frozen=True, slots=True)
class StepLabel:
    command: Optional[Apc]  # None is the silent label

    def __str__(self) -> str:
        return SILENT if self.command is None else str(self.command)


EPSILON = StepLabel(None)


@dataclass(frozen=True, slots=True)
class Config:
    expr: EditorExpr
    tree: WellFormedTree


@dataclass(frozen=True, slots=True)
class Step:
    label: StepLabel
    config: Config


@dataclass(frozen=True, slots=True)
class Terminal:
    pass


StepOutcome = Union[Step, Terminal, Stuck]


def step(c: Config, spec: LanguageSpec) -> StepOutcome:
    """The unique transition out of `c`, Terminal for nil, or Stuck."""
    match c.expr:
        case Nil():
            return Terminal()
        case Cond(phi, then, els):
            enclosed = c.tree.enclosed()
            branch = then if satisfies(enclosed, phi, spec) else els
            return Step(EPSILON, Config(branch, c.tree))
        case Seq(first, second):
            if isinstance(first, Nil):
                return Step(EPSILON, Config(second, c.tree))
            inner = step(Config(first, c.tree), spec)
            match inner:
                case Step(label, cfg):
                    return Step(label, Config(Seq(cfg.expr, second), cfg.tree))
                case Stuck(_):
                    return inner
                case Terminal():  # unreachable: only Nil is terminal
                    raise AssertionError("non-nil expression reported Terminal")
        case Rec(x, body):
            return Step(EPSILON, Config(subst_rec(body, x, c.expr), c.tree))
        case RecVar(x):
            raise ValueError(f"unbound recursion variable {x!r} reached")
        case Prefix(cmd, rest):
            result = apply_command(c.tree, cmd, spec)
            if isinstance(result, Stuck):
                return result
            return Step(StepLabel(cmd), Config(rest, result))
    raise TypeError(f"not an editor expression: {c.expr!r}")


TERMINAL = "terminal"
STUCK = "stuck"
FUEL_EXHAUSTED = "fuel-exhausted"


@dataclass(frozen=True)
class RunResult:
    status: str  # TERMINAL | STUCK | FUEL_EXHAUSTED
    config: Config
    trace: tuple[tuple[StepLabel, WellFormedTree], ...]
    steps: int
    stuck_reason: Optional[str] = None

    @property
    def final_tree(self) -> WellFormedTree:
        return self.config.tree


def run(c: Config, spec: LanguageSpec, fuel: int = 10_000) -> RunResult:
    """Iterate `step` until Terminal or Stuck, recording every labelled
    transition.  Fuel bounds the number of transitions; detecting Terminal
    costs none."""
    if fuel < 0:
        raise ValueError("fuel must be >= 0")
    trace: list[tuple[StepLabel, WellFormedTree]] = []
    transitions = 0
    while True:
        outcome = step(c, spec)
        match outcome:
            case Terminal():
                return RunResult(TERMINAL, c, tuple(trace), transitions + 1)
            case Stuck(reason):
                return RunResult(
                    STUCK, c, tuple(trace), transitions + 1, stuck_reason=reason
                )
            case Step(label, cfg):
                if transitions == fuel:
                    return RunResult(FUEL_EXHAUSTED, c, tuple(trace), transitions)
                transitions += 1
                trace.append((label, cfg.tree))
                c = cfg


# ---------------------------------------------------------------------------
# Script parser


class ScriptParseError(ValueError):
    pass


_SCRIPT_TOKEN = re.compile(
    r"(?P<ws>\s+|#[^\n]*)|(?P<seq>>>)|(?P<arrow>=>)|(?P<lbrace>\{)|(?P<rbrace>\})"
    r"|(?P<lpar>\()|(?P<rpar>\))|(?P<dot>\.)|(?P<bar>\|)|(?P<amp>&)|(?P<bang>!)"
    r"|(?P<at>@)|(?P<dia><>)|(?P<box>\[\])|(?P<colon>:)"
    r"|(?P<int>-?[0-9]+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
)

_COND_TOKEN_MAP = {
    "lpar": "lpar", "rpar": "rpar", "bang": "not", "amp": "and", "bar": "or",
    "at": "at", "dia": "dia", "box": "box", "ident": "ident",
    "colon": "colon", "int": "int",
}


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _SCRIPT_TOKEN.match(text, pos)
        if not m:
            raise ScriptParseError(f"bad script syntax at {text[pos:pos+20]!r}")
        pos = m.end()
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(kind)))
    return tokens


class _ScriptParser:
    """Recursive descent with backtracking at the condition/expression fork."""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str | None:
        return self.tokens[self.i][0] if self.i < len(self.tokens) else None

    def take(self, kind: str) -> str:
        if self.peek() != kind:
            raise ScriptParseError(
                f"expected {kind}, got {self.peek()} at token {self.i}"
            )
        value = self.tokens[self.i][1]
        self.i += 1
        return value

    def parse(self) -> EditorExpr:
        e = self.seq_level()
        if self.i != len(self.tokens):
            raise ScriptParseError(
                f"trailing tokens from {self.tokens[self.i:][:5]}"
            )
        return e

    def seq_level(self) -> EditorExpr:
        e = self.cond_level()
        if self.peek() == "seq":
            self.take("seq")
            return Seq(e, self.seq_level())
        return e

    def cond_level(self) -> EditorExpr:
        mark = self.i
        phi = self.try_condition()
        if phi is not None:
            then = self.prefix_level()
            self.take("bar")
            els = self.cond_level()
            return Cond(phi, then, els)
        self.i = mark
        return self.prefix_level()

    def try_condition(self) -> Condition | None:
        mark = self.i
        try:
            phi = self.cond_or()
            if self.peek() == "arrow":
                self.take("arrow")
                return phi
        except ScriptParseError:
            pass
        self.i = mark
        return None

    # Condition sub-grammar, sharing this token stream.
    def cond_or(self) -> Condition:
        from .logic import Or

        phi = self.cond_and()
        while self.peek() == "bar":
            self.take("bar")
            phi = Or(phi, self.cond_and())
        return phi

    def cond_and(self) -> Condition:
        from .logic import And

        phi = self.cond_unary()
        while self.peek() == "amp":
            self.take("amp")
            phi = And(phi, self.cond_unary())
        return phi

    def cond_unary(self) -> Condition:
        from .logic import At, Neg, Necessity, OpRef, Possibly

        kind = self.peek()
        if kind == "bang":
            self.take("bang")
            return Neg(self.cond_unary())
        if kind == "lpar":
            self.take("lpar")
            phi = self.cond_or()
            self.take("rpar")
            return phi
        if kind == "at":
            self.take("at")
            return At(self.cond_ref())
        if kind == "dia":
            self.take("dia")
            return Possibly(self.cond_ref())
        if kind == "box":
            self.take("box")
            return Necessity(self.cond_ref())
        raise ScriptParseError(f"not a condition at token {self.i}")

    def cond_ref(self):
        from .logic import OpRef

        name = self.take("ident")
        if self.peek() == "colon":
            self.take("colon")
            if self.peek() == "int":
                return OpRef(name, int(self.take("int")))
            return OpRef(name, self.take("ident"))
        return OpRef(name)

    def prefix_level(self) -> EditorExpr:
        kind = self.peek()
        if kind == "lpar":
            self.take("lpar")
            e = self.seq_level()
            self.take("rpar")
            return e
        if kind == "lbrace":
            self.take("lbrace")
            name = self.take("ident")
            literal = None
            if self.peek() == "colon":
                self.take("colon")
                if self.peek() == "int":
                    literal = int(self.take("int"))
                else:
                    literal = self.take("ident")
            self.take("rbrace")
            self.take("dot")
            return Prefix(Insert(name, literal), self.prefix_level())
        if kind == "ident":
            word = self.take("ident")
            if word == "nil":
                return Nil()
            if word == "child":
                n = int(self.take("int"))
                self.take("dot")
                return Prefix(Child(n), self.prefix_level())
            if word == "parent":
                self.take("dot")
                return Prefix(Parent(), self.prefix_level())
            if word == "rec":
                var = self.take("ident")
                self.take("dot")
                return Rec(var, self.prefix_level())
            return RecVar(word)
        raise ScriptParseError(f"unexpected token {kind} at {self.i}")


def parse_editor_expr(text: str) -> EditorExpr:
    """Parse a script and enforce that it is closed."""
    e = _ScriptParser(text).parse()
    unbound = free_rec_vars(e)
    if unbound:
        raise ScriptParseError(
            f"unbound recursion variable(s): {', '.join(sorted(unbound))}"
        )
    return e
