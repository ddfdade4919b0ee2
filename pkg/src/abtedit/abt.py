"""Abstract binding trees over a language spec.

A tree is either a variable use or an operator node whose arguments are
abstractions (a possibly-empty vector of binders over a subtree).  Trees
are immutable; operations are pure.  Text form is an s-expression:

    (op <name> [<literal>] <arg>*)   operator node
    (bind (<ident>*) <tree>)         argument that binds variables
    (hole <sort>)                    hole leaf
    (cursor <tree>)                  cursor node
    (var <ident>)                    variable use
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

from .langspec import (
    PARAM_INT,
    PARAM_NAME,
    PARAM_NONE,
    LanguageSpec,
    OperatorDecl,
    Sort,
    SpecError,
)


class AbtError(ValueError):
    pass


class SortError(AbtError):
    """Ill-sorted tree; `path` is the child-index trail to the offender."""

    def __init__(self, message: str, path: tuple[int, ...] = ()):
        self.path = path
        super().__init__(f"{message} (at path {list(path)})" if path else message)


class WellFormedError(AbtError):
    pass


class ParseError(AbtError):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} (at offset {pos})")


@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Abstraction:
    binders: tuple[tuple[str, Sort], ...]
    body: "Abt"

    def __post_init__(self):
        names = [n for n, _ in self.binders]
        if len(set(names)) != len(names):
            raise AbtError(f"repeated binder in abstraction: {names}")


@dataclass(frozen=True, slots=True)
class Op:
    decl: OperatorDecl
    literal: Union[int, str, None]
    args: tuple[Abstraction, ...]

    def __post_init__(self):
        if len(self.args) != len(self.decl.args):
            raise AbtError(
                f"operator {self.decl.name} expects {len(self.decl.args)} "
                f"arguments, got {len(self.args)}"
            )
        for abs_, val in zip(self.args, self.decl.args):
            if len(abs_.binders) != len(val.binds):
                raise AbtError(
                    f"argument of {self.decl.name} must bind "
                    f"{len(val.binds)} variables, got {len(abs_.binders)}"
                )

    def __str__(self) -> str:
        return print_tree(self)


Abt = Union[Var, Op]
SortEnv = dict[str, Sort]


def op(decl: OperatorDecl, *args: Abstraction, literal=None) -> Op:
    return Op(decl, literal, tuple(args))


def no_bind(body: Abt) -> Abstraction:
    return Abstraction((), body)


def bind(binders, body: Abt) -> Abstraction:
    return Abstraction(tuple(binders), body)


def sort_of(a: Abt, spec: LanguageSpec, env: SortEnv | None = None) -> Sort:
    """Compute the unique sort of `a`, or raise SortError."""
    env = env or {}

    def go(t: Abt, env: SortEnv, path: tuple[int, ...]) -> Sort:
        match t:
            case Var(name):
                if name not in env:
                    raise SortError(f"unbound variable {name!r}", path)
                return env[name]
            case Op(decl, literal, args):
                if decl.param_kind != PARAM_NONE and literal is None:
                    raise SortError(f"{decl.name} is missing its literal", path)
                for i, (abs_, val) in enumerate(zip(args, decl.args)):
                    inner = env
                    if abs_.binders:
                        inner = dict(env)
                        for (name, srt), want in zip(abs_.binders, val.binds):
                            if srt != want:
                                raise SortError(
                                    f"binder {name!r} has sort {srt}, "
                                    f"valence wants {want}",
                                    path + (i,),
                                )
                            inner[name] = srt
                    got = go(abs_.body, inner, path + (i,))
                    if got != val.body_sort:
                        raise SortError(
                            f"child {i} of {decl.name} has sort {got}, "
                            f"expected {val.body_sort}",
                            path + (i,),
                        )
                return decl.result_sort
        raise SortError(f"not a tree: {t!r}", path)

    return go(a, env, ())


def count_cursors(a: Abt) -> int:
    match a:
        case Var(_):
            return 0
        case Op(decl, _, args):
            n = 1 if decl.is_cursor else 0
            return n + sum(count_cursors(ab.body) for ab in args)
    raise AbtError(f"not a tree: {a!r}")


def find_cursor(a: Abt) -> tuple[int, ...] | None:
    """Child-index path to the first cursor node, if any."""
    if isinstance(a, Op) and a.decl.is_cursor:
        return ()
    if isinstance(a, Op):
        for i, ab in enumerate(a.args):
            sub = find_cursor(ab.body)
            if sub is not None:
                return (i,) + sub
    return None


@dataclass(frozen=True, slots=True)
class WellFormedTree:
    """A sort-correct tree containing exactly one cursor."""

    tree: Abt
    cursor_path: tuple[int, ...]

    def cursor_node(self) -> Op:
        node = self.tree
        for i in self.cursor_path:
            node = node.args[i].body
        assert isinstance(node, Op) and node.decl.is_cursor
        return node

    def enclosed(self) -> Abt:
        """The cursorless subtree the cursor wraps."""
        return self.cursor_node().args[0].body


def check_well_formed(a: Abt, spec: LanguageSpec) -> WellFormedTree:
    n = count_cursors(a)
    if n == 0:
        raise WellFormedError("tree contains no cursor")
    if n > 1:
        raise WellFormedError(f"tree contains {n} cursors")
    sort_of(a, spec, {})
    path = find_cursor(a)
    assert path is not None
    return WellFormedTree(a, path)


def strip_cursor(a: Abt) -> Abt:
    """Splice out the unique cursor node (its child takes its place)."""
    match a:
        case Op(decl, _, args) if decl.is_cursor:
            return args[0].body
        case Op(decl, literal, args):
            return Op(
                decl,
                literal,
                tuple(Abstraction(ab.binders, strip_cursor(ab.body)) for ab in args),
            )
        case _:
            return a


def alpha_eq(a: Abt, b: Abt) -> bool:
    """Equality up to consistent renaming of bound variables."""

    def go(a: Abt, b: Abt, ra: dict[str, int], rb: dict[str, int]) -> bool:
        match a, b:
            case Var(x), Var(y):
                if x in ra or y in rb:
                    return ra.get(x) == rb.get(y)
                return x == y  # both free: names are rigid
            case Op(da, la, xs), Op(db, lb, ys):
                if da.name != db.name or la != lb or len(xs) != len(ys):
                    return False
                for abx, aby in zip(xs, ys):
                    if len(abx.binders) != len(aby.binders):
                        return False
                    ra2, rb2 = dict(ra), dict(rb)
                    for (nx, sx), (ny, sy) in zip(abx.binders, aby.binders):
                        if sx != sy:
                            return False
                        slot = len(ra2)
                        ra2[nx] = rb2[ny] = slot
                    if not go(abx.body, aby.body, ra2, rb2):
                        return False
                return True
            case _:
                return False

    return go(a, b, {}, {})


def free_vars(a: Abt) -> set[str]:
    match a:
        case Var(name):
            return {name}
        case Op(_, _, args):
            out: set[str] = set()
            for ab in args:
                bound = {n for n, _ in ab.binders}
                out |= free_vars(ab.body) - bound
            return out
    raise AbtError(f"not a tree: {a!r}")


def var_names(a: Abt) -> set[str]:
    """All variable names in the tree, free or binding."""
    match a:
        case Var(name):
            return {name}
        case Op(_, _, args):
            out: set[str] = set()
            for ab in args:
                out |= {n for n, _ in ab.binders}
                out |= var_names(ab.body)
            return out
    raise AbtError(f"not a tree: {a!r}")


def fresh_names(count: int, avoid: set[str]) -> list[str]:
    """Deterministic fresh names x1, x2, ... skipping `avoid`."""
    out: list[str] = []
    i = 1
    while len(out) < count:
        name = f"x{i}"
        if name not in avoid:
            out.append(name)
            avoid = avoid | {name}
        i += 1
    return out


def iter_nodes(a: Abt) -> Iterator[Abt]:
    """Preorder walk over all nodes (bodies of abstractions included)."""
    yield a
    if isinstance(a, Op):
        for ab in a.args:
            yield from iter_nodes(ab.body)


# ---------------------------------------------------------------------------
# Text form


def print_tree(a: Abt) -> str:
    match a:
        case Var(name):
            return f"(var {name})"
        case Op(decl, literal, args):
            if decl.is_hole:
                return f"(hole {decl.result_sort.name})"
            if decl.is_cursor:
                return f"(cursor {print_tree(args[0].body)})"
            parts = ["op", decl.name]
            if decl.param_kind != PARAM_NONE:
                parts.append(str(literal))
            for ab in args:
                if ab.binders:
                    names = " ".join(n for n, _ in ab.binders)
                    parts.append(f"(bind ({names}) {print_tree(ab.body)})")
                else:
                    parts.append(print_tree(ab.body))
            return "(" + " ".join(parts) + ")"
    raise AbtError(f"not a tree: {a!r}")


class _SexpReader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.pos)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def expect(self, ch: str) -> None:
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            raise self.error(f"expected {ch!r}")
        self.pos += 1

    def at(self, ch: str) -> bool:
        self.skip_ws()
        return self.pos < len(self.text) and self.text[self.pos] == ch

    def atom(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and not self.text[self.pos].isspace() \
                and self.text[self.pos] not in "()":
            self.pos += 1
        if start == self.pos:
            raise self.error("expected an atom")
        return self.text[start:self.pos]

    def done(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def parse_tree(text: str, spec: LanguageSpec) -> Abt:
    """Parse the s-expression tree format against `spec`.

    Both the canonical head `(op let ...)` and the shorthand `(let ...)`
    are accepted; print_tree always emits the canonical form.  Cursor
    sorts are inferred from the enclosed subtree.
    """
    r = _SexpReader(text)
    raw = _parse_raw(r, spec)
    if not r.done():
        raise r.error("trailing input after tree")
    return _resolve(raw, spec, {})


def _parse_raw(r: _SexpReader, spec: LanguageSpec):
    r.expect("(")
    head = r.atom()
    if head == "var":
        name = r.atom()
        r.expect(")")
        return ("var", name)
    if head == "hole":
        sort = r.atom()
        r.expect(")")
        if not spec.has_sort(sort):
            raise r.error(f"unknown hole sort {sort!r}")
        return ("hole", sort)
    if head == "cursor":
        inner = _parse_raw(r, spec)
        r.expect(")")
        return ("cursor", inner)
    if head == "bind":
        raise r.error("(bind ...) is only valid as an operator argument")
    if head == "op":
        head = r.atom()
    if not spec.has_operator(head):
        raise r.error(f"unknown operator {head!r}")
    decl = spec.operator(head)
    if decl.is_hole or decl.is_cursor:
        raise r.error(f"{head!r} must be written as (hole ...) or (cursor ...)")
    literal = None
    if decl.param_kind == PARAM_INT:
        tok = r.atom()
        try:
            literal = int(tok)
        except ValueError:
            raise r.error(f"operator {head!r} needs an integer literal")
        r.expect(")")
        return ("op", decl, literal, [])
    if decl.param_kind == PARAM_NAME:
        raise r.error(
            f"{head!r} is a name-literal operator; write a variable use (var x)"
        )
    args = []
    for val in decl.args:
        if val.binds:
            r.expect("(")
            kw = r.atom()
            if kw != "bind":
                raise r.error(f"expected (bind ...) argument for {head!r}")
            r.expect("(")
            names = []
            while not r.at(")"):
                names.append(r.atom())
            r.expect(")")
            if len(names) != len(val.binds):
                raise r.error(
                    f"argument of {head!r} binds {len(val.binds)} variables"
                )
            body = _parse_raw(r, spec)
            r.expect(")")
            args.append(("bind", list(zip(names, val.binds)), body))
        else:
            args.append(("bind", [], _parse_raw(r, spec)))
    r.expect(")")
    return ("op", decl, literal, args)


def _resolve(raw, spec: LanguageSpec, env: SortEnv) -> Abt:
    """Second pass: build Abt nodes, inferring cursor sorts."""
    match raw:
        case ("var", name):
            return Var(name)
        case ("hole", sort):
            return op(spec.hole_op(spec.sort(sort)))
        case ("cursor", inner):
            body = _resolve(inner, spec, env)
            srt = sort_of(body, spec, env)
            return op(spec.cursor_op(srt), no_bind(body))
        case ("op", decl, literal, args):
            built = []
            for (_, binders, body_raw) in args:
                inner_env = dict(env)
                inner_env.update({n: s for n, s in binders})
                built.append(
                    Abstraction(tuple(binders), _resolve(body_raw, spec, inner_env))
                )
            return Op(decl, literal, tuple(built))
    raise AbtError(f"bad raw tree: {raw!r}")


def initial_tree(spec: LanguageSpec, root_sort: Sort) -> WellFormedTree:
    """The minimal editable state: a cursor over a hole of `root_sort`."""
    if not spec.editor_extended:
        raise SpecError("spec must be editor-extended")
    t = op(spec.cursor_op(root_sort), no_bind(op(spec.hole_op(root_sort))))
    return WellFormedTree(t, ())
