"""Cursor contexts and the atomic command transition system.

A CursorCtx is the one-hole context locating the cursor; decompose always
returns the maximally deep reading, whose focus is the cursor node itself.
apply_command implements the three atomic commands; a transition with no
applicable rule yields a Stuck value carrying a reason code, never an
exception, because the editor-expression engine branches on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .abt import (
    Abstraction,
    Abt,
    Op,
    Var,
    WellFormedTree,
    fresh_names,
    no_bind,
    sort_of,
    var_names,
)
from .langspec import (
    PARAM_NAME,
    PARAM_NONE,
    LanguageSpec,
    OperatorDecl,
    Sort,
    SpecError,
    lookup_operator,
)

SORT_MISMATCH = "sort-mismatch"
NO_SUCH_CHILD = "no-such-child"
AT_ROOT = "at-root"
UNKNOWN_OPERATOR = "unknown-operator"


@dataclass(frozen=True, slots=True)
class Stuck:
    reason: str

    def __str__(self) -> str:
        return f"stuck: {self.reason}"


@dataclass(frozen=True, slots=True)
class Frame:
    """One level of context: an operator with a gap at argument `index`."""

    decl: OperatorDecl
    literal: Union[int, str, None]
    index: int
    left: tuple[Abstraction, ...]
    binders: tuple[tuple[str, Sort], ...]  # binders of the gap argument
    right: tuple[Abstraction, ...]


@dataclass(frozen=True, slots=True)
class CursorCtx:
    path: tuple[Frame, ...]

    def is_empty(self) -> bool:
        return not self.path

    def binders_in_scope(self) -> dict[str, Sort]:
        env: dict[str, Sort] = {}
        for frame in self.path:
            env.update({n: s for n, s in frame.binders})
        return env


# Atomic prefix commands -----------------------------------------------------


@dataclass(frozen=True, slots=True)
class Child:
    index: int  # 1-based

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("child index is 1-based")

    def __str__(self) -> str:
        return f"child {self.index}"


@dataclass(frozen=True, slots=True)
class Parent:
    def __str__(self) -> str:
        return "parent"


@dataclass(frozen=True, slots=True)
class Insert:
    op_name: str
    literal: Union[int, str, None] = None

    def __str__(self) -> str:
        if self.literal is None:
            return "{%s}" % self.op_name
        return "{%s:%s}" % (self.op_name, self.literal)


Apc = Union[Child, Parent, Insert]


def decompose(t: WellFormedTree) -> tuple[CursorCtx, Abt]:
    """Split into (context, focus) with the cursor node as the focus."""
    frames: list[Frame] = []
    node = t.tree
    for i in t.cursor_path:
        assert isinstance(node, Op)
        ab = node.args[i]
        frames.append(
            Frame(
                node.decl,
                node.literal,
                i,
                node.args[:i],
                ab.binders,
                node.args[i + 1:],
            )
        )
        node = ab.body
    return CursorCtx(tuple(frames)), node


def recompose(ctx: CursorCtx, focus: Abt) -> Abt:
    tree = focus
    for frame in reversed(ctx.path):
        args = frame.left + (Abstraction(frame.binders, tree),) + frame.right
        tree = Op(frame.decl, frame.literal, args)
    return tree


def fresh_template(
    decl: OperatorDecl, literal, avoid: set[str], spec: LanguageSpec
) -> Abt:
    """The tree an insert command builds: the operator over per-argument
    holes, with deterministic fresh binders.  Literal operators yield their
    leaf; a name literal is a variable use."""
    if decl.param_kind == PARAM_NAME:
        return Var(literal)
    if decl.param_kind != PARAM_NONE:
        return Op(decl, literal, ())
    names = fresh_names(sum(len(v.binds) for v in decl.args), set(avoid))
    it = iter(names)
    args = []
    for val in decl.args:
        binders = tuple((next(it), s) for s in val.binds)
        args.append(Abstraction(binders, Op(spec.hole_op(val.body_sort), None, ())))
    return Op(decl, None, tuple(args))


def apply_command(
    t: WellFormedTree, cmd: Apc, spec: LanguageSpec
) -> Union[WellFormedTree, Stuck]:
    """One labelled transition on the tree; Stuck when no rule applies."""
    if not spec.editor_extended:
        raise SpecError("apply_command needs an editor-extended spec")
    ctx, focus = decompose(t)
    assert isinstance(focus, Op) and focus.decl.is_cursor
    enclosed = focus.args[0].body

    match cmd:
        case Insert(name, literal):
            try:
                decl = lookup_operator(spec, name, literal)
            except SpecError:
                # unknown name, or a literal that does not fit the family:
                # no such operator instance exists to insert
                return Stuck(UNKNOWN_OPERATOR)
            if decl.is_cursor:
                # cursors are not part of the insertable operator set
                return Stuck(UNKNOWN_OPERATOR)
            here = sort_of(enclosed, spec, ctx.binders_in_scope())
            if decl.result_sort != here:
                return Stuck(SORT_MISMATCH)
            if decl.param_kind == PARAM_NAME:
                # Inserting a variable use: the name must be bound here,
                # at this sort, or the result would not be well-sorted.
                env = ctx.binders_in_scope()
                if env.get(literal) != here:
                    return Stuck(SORT_MISMATCH)
            template = fresh_template(decl, literal, var_names(t.tree), spec)
            new_focus = Op(focus.decl, None, (no_bind(template),))
            return WellFormedTree(recompose(ctx, new_focus), t.cursor_path)

        case Child(i):
            if not isinstance(enclosed, Op) or len(enclosed.args) < i:
                return Stuck(NO_SUCH_CHILD)
            ab = enclosed.args[i - 1]
            inner_sort = enclosed.decl.args[i - 1].body_sort
            cursored = Abstraction(
                ab.binders,
                Op(spec.cursor_op(inner_sort), None, (no_bind(ab.body),)),
            )
            args = enclosed.args[: i - 1] + (cursored,) + enclosed.args[i:]
            new_here = Op(enclosed.decl, enclosed.literal, args)
            return WellFormedTree(
                recompose(ctx, new_here), t.cursor_path + (i - 1,)
            )

        case Parent():
            if ctx.is_empty():
                return Stuck(AT_ROOT)
            frame = ctx.path[-1]
            args = (
                frame.left
                + (Abstraction(frame.binders, enclosed),)
                + frame.right
            )
            node = Op(frame.decl, frame.literal, args)
            new_focus = Op(
                spec.cursor_op(frame.decl.result_sort), None, (no_bind(node),)
            )
            return WellFormedTree(
                recompose(CursorCtx(ctx.path[:-1]), new_focus), t.cursor_path[:-1]
            )

    raise TypeError(f"not a command: {cmd!r}")
