"""Seeded random generators for trees, commands, conditions and scripts.

Everything is driven by an explicit random.Random so the acceptance
suites and the soundness harness are reproducible from a seed.
"""

from __future__ import annotations

import random
from typing import Optional

from .abt import (
    Abstraction,
    Abt,
    Op,
    Var,
    WellFormedTree,
    check_well_formed,
    no_bind,
    op,
)
from .engine import (
    Cond,
    EditorExpr,
    Nil,
    Prefix,
    Rec,
    RecVar,
    Seq,
)
from .langspec import PARAM_INT, PARAM_NAME, PARAM_NONE, LanguageSpec, Sort
from .logic import And, At, Condition, Necessity, Neg, OpRef, Or, Possibly
from .zipper import Apc, Child, Insert, Parent

_NAME_POOL = ("a", "b", "c", "d")
_INT_POOL = (0, 1, 2, 5, 10)


def rng_from_data(data) -> random.Random:
    """Adapter for hypothesis: one drawn integer seeds a plain Random."""
    from hypothesis import strategies as st

    return random.Random(data.draw(st.integers(0, 2**32 - 1)))


def _ops_for(spec: LanguageSpec, sort: Sort):
    compound, leaves = [], []
    for decl in spec.operators:
        if decl.result_sort != sort or decl.is_cursor:
            continue
        if decl.is_hole or decl.param_kind != PARAM_NONE or not decl.args:
            leaves.append(decl)
        else:
            compound.append(decl)
    return compound, leaves


def _leaf(spec: LanguageSpec, sort: Sort, rng: random.Random, env) -> Abt:
    choices = []
    in_scope = [n for n, s in env.items() if s == sort]
    if in_scope:
        choices.append("var")
    _, leaves = _ops_for(spec, sort)
    if leaves:
        choices.append("op")
    if not choices:
        # A sort with no leaf operators: fall back to its hole if present.
        return op(spec.hole_op(sort))
    match rng.choice(choices):
        case "var":
            return Var(rng.choice(in_scope))
        case _:
            decl = rng.choice(leaves)
            if decl.param_kind == PARAM_INT:
                return Op(decl, rng.choice(_INT_POOL), ())
            if decl.param_kind == PARAM_NAME:
                if in_scope:
                    return Var(rng.choice(in_scope))
                return op(spec.hole_op(sort))
            return op(decl)


def random_tree(
    spec: LanguageSpec,
    sort: Sort,
    depth: int,
    rng: random.Random,
    env: Optional[dict[str, Sort]] = None,
) -> Abt:
    """A closed, cursorless, well-sorted random tree of `sort`."""
    env = env or {}
    compound, _ = _ops_for(spec, sort)
    if depth <= 0 or not compound or rng.random() < 0.25:
        return _leaf(spec, sort, rng, env)
    decl = rng.choice(compound)
    args = []
    for valence in decl.args:
        inner = env
        binders = []
        if valence.binds:
            inner = dict(env)
            pool = _NAME_POOL
            if len(valence.binds) > len(pool):
                pool = tuple(f"v{i}" for i in range(len(valence.binds) + 2))
            names = rng.sample(pool, len(valence.binds))
            for name, bsort in zip(names, valence.binds):
                binders.append((name, bsort))
                inner[name] = bsort
        body = random_tree(spec, valence.body_sort, depth - 1, rng, inner)
        args.append(Abstraction(tuple(binders), body))
    return Op(decl, None, tuple(args))


def tree_positions(a: Abt, spec: LanguageSpec, sort: Sort):
    """All (path, sort) pairs of subtree positions, preorder."""
    out = [((), sort)]
    if isinstance(a, Op):
        for i, (ab, valence) in enumerate(zip(a.args, a.decl.args)):
            for path, psort in tree_positions(ab.body, spec, valence.body_sort):
                out.append(((i,) + path, psort))
    return out


def place_cursor(a: Abt, path: tuple[int, ...], spec: LanguageSpec, sort: Sort) -> Abt:
    if not path:
        return op(spec.cursor_op(sort), no_bind(a))
    assert isinstance(a, Op)
    i = path[0]
    ab = a.args[i]
    inner = place_cursor(ab.body, path[1:], spec, a.decl.args[i].body_sort)
    args = a.args[:i] + (Abstraction(ab.binders, inner),) + a.args[i + 1:]
    return Op(a.decl, a.literal, args)


def random_wellformed(
    spec: LanguageSpec, root_sort: Sort, depth: int, rng: random.Random
) -> WellFormedTree:
    """A random well-formed tree: cursorless tree plus one cursor at a
    uniformly chosen position."""
    bare = random_tree(spec, root_sort, depth, rng)
    positions = tree_positions(bare, spec, root_sort)
    path, psort = rng.choice(positions)
    return check_well_formed(place_cursor(bare, path, spec, psort), spec)


def random_apc(
    spec: LanguageSpec, rng: random.Random, allow_var_insert: bool = True
) -> Apc:
    roll = rng.random()
    if roll < 0.35:
        return Child(rng.randint(1, 3))
    if roll < 0.55:
        return Parent()
    candidates = [
        decl
        for decl in spec.operators
        if not decl.is_cursor
        and (allow_var_insert or decl.param_kind != PARAM_NAME)
    ]
    decl = rng.choice(candidates)
    if decl.param_kind == PARAM_INT:
        return Insert(decl.name, rng.choice(_INT_POOL))
    if decl.param_kind == PARAM_NAME:
        return Insert(decl.name, rng.choice(_NAME_POOL))
    return Insert(decl.name)


def random_op_ref(
    spec: LanguageSpec, rng: random.Random, allow_name_literal: bool = True
) -> OpRef:
    decl = rng.choice([d for d in spec.operators if not d.is_cursor])
    if decl.param_kind == PARAM_INT and rng.random() < 0.5:
        return OpRef(decl.name, rng.choice(_INT_POOL))
    if decl.param_kind == PARAM_NAME and allow_name_literal and rng.random() < 0.5:
        return OpRef(decl.name, rng.choice(_NAME_POOL))
    return OpRef(decl.name)


def random_condition(
    spec: LanguageSpec,
    rng: random.Random,
    size: int,
    allow_name_literal: bool = True,
) -> Condition:
    if size <= 1:
        ref = random_op_ref(spec, rng, allow_name_literal)
        return rng.choice([At, Possibly, Necessity])(ref)
    roll = rng.random()
    if roll < 0.3:
        return Neg(random_condition(spec, rng, size - 1, allow_name_literal))
    left = random_condition(spec, rng, size // 2, allow_name_literal)
    right = random_condition(spec, rng, size - 1 - size // 2, allow_name_literal)
    return (And if roll < 0.65 else Or)(left, right)


def random_script(
    spec: LanguageSpec,
    rng: random.Random,
    size: int,
    allow_var_insert: bool = True,
    rec_vars: tuple[str, ...] = (),
) -> EditorExpr:
    """A random closed editor expression of roughly `size` constructors."""
    if size <= 1:
        if rec_vars and rng.random() < 0.4:
            return RecVar(rng.choice(rec_vars))
        return Nil()
    roll = rng.random()
    if roll < 0.45:
        cmd = random_apc(spec, rng, allow_var_insert)
        return Prefix(cmd, random_script(spec, rng, size - 1, allow_var_insert, rec_vars))
    if roll < 0.65:
        phi = random_condition(spec, rng, min(3, size), allow_name_literal=allow_var_insert)
        then = random_script(spec, rng, size // 2, allow_var_insert, rec_vars)
        els = random_script(spec, rng, size - 1 - size // 2, allow_var_insert, rec_vars)
        return Cond(phi, then, els)
    if roll < 0.85:
        left = random_script(spec, rng, size // 2, allow_var_insert, rec_vars)
        right = random_script(spec, rng, size - 1 - size // 2, allow_var_insert, rec_vars)
        return Seq(left, right)
    var = f"X{len(rec_vars) + 1}"
    body = random_script(
        spec, rng, size - 1, allow_var_insert, rec_vars + (var,)
    )
    return Rec(var, body)
