"""JSON wire form of trees and palettes, shared by the CLI's json output
mode and the session service.

A wire node mirrors the s-expression format one-to-one, except that the
cursor wrapper becomes a `cursor: true` flag on the node it encloses:

    {node, sort, cursor, literal?, binders?, children: [...]}

`node` is the operator name, or "hole" / "var"; a variable's name rides
in `literal`.  `binders` lists the names an argument position binds
around this subtree.
"""

from __future__ import annotations

from typing import Optional

from .abt import Abt, Op, Var, WellFormedTree, sort_of
from .langspec import LanguageSpec, Sort
from .zipper import decompose


def tree_to_wire(t: WellFormedTree, spec: LanguageSpec) -> dict:
    root_sort = sort_of(t.tree, spec, {})

    def walk(a: Abt, sort: Sort, env: dict, binders: Optional[list[str]]) -> dict:
        if isinstance(a, Op) and a.decl.is_cursor:
            node = walk(a.args[0].body, sort, env, binders)
            node["cursor"] = True
            return node
        base = {
            "node": None,
            "sort": sort.name,
            "cursor": False,
            "literal": None,
            "binders": binders,
            "children": [],
        }
        match a:
            case Var(name):
                base["node"] = "var"
                base["literal"] = name
            case Op(decl, literal, args) if decl.is_hole:
                base["node"] = "hole"
                del literal, args
            case Op(decl, literal, args):
                base["node"] = decl.name
                base["literal"] = literal
                children = []
                for ab, valence in zip(args, decl.args):
                    inner = env
                    names = None
                    if ab.binders:
                        inner = dict(env)
                        inner.update({n: s for n, s in ab.binders})
                        names = [n for n, _ in ab.binders]
                    children.append(
                        walk(ab.body, valence.body_sort, inner, names)
                    )
                base["children"] = children
        return base

    return walk(t.tree, root_sort, {}, None)


def enclosed_sort(t: WellFormedTree, spec: LanguageSpec) -> Sort:
    ctx, focus = decompose(t)
    return sort_of(focus.args[0].body, spec, ctx.binders_in_scope())


def palette_for(t: WellFormedTree, spec: LanguageSpec) -> list[dict]:
    """Operators insertable at the cursor: exactly those whose result sort
    is the sort of the enclosed subtree (the substitution side-condition),
    cursors excluded.  Name-literal entries additionally need an in-scope
    variable of that sort."""
    here = enclosed_sort(t, spec)
    ctx, _ = decompose(t)
    scope = ctx.binders_in_scope()
    out = []
    for decl in spec.operators:
        if decl.is_cursor or decl.result_sort != here:
            continue
        entry = {"op": decl.name, "paramKind": decl.param_kind}
        if decl.param_kind == "name":
            names = sorted(n for n, s in scope.items() if s == here)
            if not names:
                continue
            entry["inScope"] = names
        out.append(entry)
    return out


def insertable_sorts(spec: LanguageSpec) -> dict[str, list[str]]:
    """For each sort, the operator names whose insertion succeeds there."""
    out: dict[str, list[str]] = {}
    for s in spec.sorts:
        out[s.name] = [
            d.name
            for d in spec.operators
            if not d.is_cursor and d.result_sort == s
        ]
    return out


def parse_insert_arg(arg: str) -> tuple[str, object]:
    """\"plus\" | \"num:5\" | \"var:x\" -> (name, literal)."""
    name, sep, lit = arg.partition(":")
    if not sep:
        return name, None
    try:
        return name, int(lit)
    except ValueError:
        return name, lit
