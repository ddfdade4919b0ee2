"""The target calculus: simply typed lambda-calculus with pairs, booleans,
pattern matching and fixed points.

Operators of an editor-extended language become term constants, typed by
their arity (each argument type is the curried form of its valence);
sorts become base types.  Three internal constant families exist beyond
the language's operators: `%ctx_<s>` (the context hole), and `%bv_<s>`
(inert stand-ins used to look under binders without consuming them).

Evaluation is deterministic call-by-value, left to right, with a fuel
bound counted in reduction steps.  Matching a `bind` pattern opens the
abstraction with a fresh inert token; any variable bound inside is
re-abstracted over that token on extraction, so match branches can take
abstractions apart and reassemble them without ever naming binders.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Union

from .langspec import PARAM_NONE, LanguageSpec, OperatorDecl, Sort, SpecError

# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True, slots=True)
class Base:
    sort: str

    def __str__(self) -> str:
        return self.sort


@dataclass(frozen=True, slots=True)
class BoolType:
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True, slots=True)
class Arrow:
    domain: "LambdaType"
    codomain: "LambdaType"

    def __str__(self) -> str:
        d = str(self.domain)
        if isinstance(self.domain, Arrow):
            d = f"({d})"
        return f"{d} -> {self.codomain}"


@dataclass(frozen=True, slots=True)
class Product:
    left: "LambdaType"
    right: "LambdaType"

    def __str__(self) -> str:
        def wrap(t):
            return f"({t})" if isinstance(t, (Arrow, Product)) else str(t)

        return f"{wrap(self.left)} * {wrap(self.right)}"


LambdaType = Union[Base, BoolType, Arrow, Product]
BOOL = BoolType()


def arrows(*types: LambdaType) -> LambdaType:
    out = types[-1]
    for t in reversed(types[:-1]):
        out = Arrow(t, out)
    return out


# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True, slots=True)
class LVar:
    name: str


@dataclass(frozen=True, slots=True)
class Lam:
    param: str
    ty: LambdaType
    body: "LambdaTerm"


@dataclass(frozen=True, slots=True)
class App:
    fn: "LambdaTerm"
    arg: "LambdaTerm"


@dataclass(frozen=True, slots=True)
class Const:
    name: str
    literal: Union[int, str, None] = None


@dataclass(frozen=True, slots=True)
class PairT:
    left: "LambdaTerm"
    right: "LambdaTerm"


@dataclass(frozen=True, slots=True)
class Proj1:
    pair: "LambdaTerm"


@dataclass(frozen=True, slots=True)
class Proj2:
    pair: "LambdaTerm"


@dataclass(frozen=True, slots=True)
class BoolLit:
    value: bool


@dataclass(frozen=True, slots=True)
class Fix:
    fn: "LambdaTerm"


@dataclass(frozen=True, slots=True)
class Match:
    scrutinee: "LambdaTerm"
    branches: tuple[tuple["Pattern", "LambdaTerm"], ...]

    def __post_init__(self):
        if not self.branches:
            raise ValueError("match needs at least one branch")


LambdaTerm = Union[LVar, Lam, App, Const, PairT, Proj1, Proj2, BoolLit, Fix, Match]

TRUE = BoolLit(True)
FALSE = BoolLit(False)


def apps(fn: LambdaTerm, *args: LambdaTerm) -> LambdaTerm:
    for a in args:
        fn = App(fn, a)
    return fn


def lams(params: list[tuple[str, LambdaType]], body: LambdaTerm) -> LambdaTerm:
    for name, ty in reversed(params):
        body = Lam(name, ty, body)
    return body


# ---------------------------------------------------------------------------
# Patterns


class _AnyLiteral:
    def __repr__(self):
        return "ANY"


ANY = _AnyLiteral()


@dataclass(frozen=True, slots=True)
class PVar:
    name: str


@dataclass(frozen=True, slots=True)
class PWild:
    pass


@dataclass(frozen=True, slots=True)
class POp:
    name: str
    args: tuple["Pattern", ...] = ()
    literal: object = ANY  # ANY matches the whole family


@dataclass(frozen=True, slots=True)
class PPair:
    left: "Pattern"
    right: "Pattern"


@dataclass(frozen=True, slots=True)
class PBind:
    inner: "Pattern"


@dataclass(frozen=True, slots=True)
class PBool:
    value: bool


Pattern = Union[PVar, PWild, POp, PPair, PBind, PBool]


def pattern_vars(p: Pattern) -> set[str]:
    match p:
        case PVar(name):
            return {name}
        case PWild() | PBool(_):
            return set()
        case POp(_, args, _):
            out: set[str] = set()
            for sub in args:
                out |= pattern_vars(sub)
            return out
        case PPair(a, b):
            return pattern_vars(a) | pattern_vars(b)
        case PBind(inner):
            return pattern_vars(inner)
    raise TypeError(f"not a pattern: {p!r}")


def _check_linear(p: Pattern) -> None:
    seen: set[str] = set()

    def go(q: Pattern) -> None:
        match q:
            case PVar(name):
                if name in seen:
                    raise LamTypeError(f"pattern binds {name!r} twice")
                seen.add(name)
            case POp(_, args, _):
                for sub in args:
                    go(sub)
            case PPair(a, b):
                go(a)
                go(b)
            case PBind(inner):
                go(inner)
            case _:
                pass

    go(p)


# ---------------------------------------------------------------------------
# Typing


class LamTypeError(TypeError):
    def __init__(self, message: str, path: tuple = ()):
        self.path = path
        super().__init__(f"{message} (at {'.'.join(map(str, path))})" if path else message)


CTX_HOLE_PREFIX = "%ctx_"
BINDER_CONST_PREFIX = "%bv_"


def valence_type(valence) -> LambdaType:
    return arrows(
        *[Base(s.name) for s in valence.binds], Base(valence.body_sort.name)
    )


def operator_type(decl: OperatorDecl) -> LambdaType:
    return arrows(*[valence_type(v) for v in decl.args], Base(decl.result_sort.name))


def const_type(name: str, spec: LanguageSpec) -> LambdaType:
    for prefix in (CTX_HOLE_PREFIX, BINDER_CONST_PREFIX):
        if name.startswith(prefix):
            sort = name[len(prefix):]
            if not spec.has_sort(sort):
                raise LamTypeError(f"unknown sort in constant {name!r}")
            return Base(sort)
    if spec.has_operator(name):
        return operator_type(spec.operator(name))
    raise LamTypeError(f"unknown constant {name!r}")


def ctx_hole(sort: Sort) -> Const:
    return Const(CTX_HOLE_PREFIX + sort.name)


def binder_const(sort: Sort) -> Const:
    return Const(BINDER_CONST_PREFIX + sort.name)


def typecheck(
    t: LambdaTerm,
    ctx: Optional[dict[str, LambdaType]] = None,
    spec: Optional[LanguageSpec] = None,
) -> LambdaType:
    """The unique type of `t`, or LamTypeError with the path to the fault."""
    assert spec is not None, "typecheck needs the language spec for constants"

    def go(t: LambdaTerm, ctx: dict[str, LambdaType], path: tuple) -> LambdaType:
        match t:
            case LVar(name):
                if name not in ctx:
                    raise LamTypeError(f"unbound variable {name!r}", path)
                return ctx[name]
            case Lam(param, ty, body):
                inner = dict(ctx)
                inner[param] = ty
                return Arrow(ty, go(body, inner, path + ("body",)))
            case App(fn, arg):
                fn_ty = go(fn, ctx, path + ("fn",))
                arg_ty = go(arg, ctx, path + ("arg",))
                if not isinstance(fn_ty, Arrow):
                    raise LamTypeError(f"applying a non-function of type {fn_ty}", path)
                if fn_ty.domain != arg_ty:
                    raise LamTypeError(
                        f"argument type {arg_ty} does not match domain {fn_ty.domain}",
                        path,
                    )
                return fn_ty.codomain
            case Const(name, literal):
                ty = const_type(name, spec)
                if spec.has_operator(name):
                    decl = spec.operator(name)
                    if decl.param_kind != PARAM_NONE and literal is None:
                        raise LamTypeError(f"constant {name!r} needs a literal", path)
                    if decl.param_kind == PARAM_NONE and literal is not None:
                        raise LamTypeError(f"constant {name!r} takes no literal", path)
                return ty
            case PairT(a, b):
                return Product(go(a, ctx, path + ("1",)), go(b, ctx, path + ("2",)))
            case Proj1(p):
                ty = go(p, ctx, path + ("pair",))
                if not isinstance(ty, Product):
                    raise LamTypeError(f"projecting from non-pair type {ty}", path)
                return ty.left
            case Proj2(p):
                ty = go(p, ctx, path + ("pair",))
                if not isinstance(ty, Product):
                    raise LamTypeError(f"projecting from non-pair type {ty}", path)
                return ty.right
            case BoolLit(_):
                return BOOL
            case Fix(fn):
                ty = go(fn, ctx, path + ("fix",))
                if not isinstance(ty, Arrow) or ty.domain != ty.codomain:
                    raise LamTypeError(f"fix needs T -> T, got {ty}", path)
                return ty.domain
            case Match(scrutinee, branches):
                scr_ty = go(scrutinee, ctx, path + ("scrutinee",))
                result: Optional[LambdaType] = None
                for i, (pat, body) in enumerate(branches):
                    _check_linear(pat)
                    bindings = typecheck_pattern(pat, scr_ty, spec, path + (f"p{i}",))
                    inner = dict(ctx)
                    inner.update(bindings)
                    body_ty = go(body, inner, path + (f"b{i}",))
                    if result is None:
                        result = body_ty
                    elif result != body_ty:
                        raise LamTypeError(
                            f"branch {i} has type {body_ty}, previous were {result}",
                            path,
                        )
                assert result is not None
                return result
        raise LamTypeError(f"not a term: {t!r}", path)

    return go(t, dict(ctx or {}), ())


def typecheck_pattern(
    p: Pattern, ty: LambdaType, spec: LanguageSpec, path: tuple = ()
) -> dict[str, LambdaType]:
    match p:
        case PVar(name):
            return {name: ty}
        case PWild():
            return {}
        case PBool(_):
            if ty != BOOL:
                raise LamTypeError(f"boolean pattern against {ty}", path)
            return {}
        case PPair(a, b):
            if not isinstance(ty, Product):
                raise LamTypeError(f"pair pattern against {ty}", path)
            out = typecheck_pattern(a, ty.left, spec, path + ("1",))
            out.update(typecheck_pattern(b, ty.right, spec, path + ("2",)))
            return out
        case PBind(inner):
            if not isinstance(ty, Arrow):
                raise LamTypeError(f"bind pattern against non-arrow {ty}", path)
            raw = typecheck_pattern(inner, ty.codomain, spec, path + ("bind",))
            # extraction re-abstracts over the opened binder
            return {name: Arrow(ty.domain, t) for name, t in raw.items()}
        case POp(name, args, _):
            full = const_type(name, spec)
            out: dict[str, LambdaType] = {}
            t = full
            for i, sub in enumerate(args):
                if not isinstance(t, Arrow):
                    raise LamTypeError(
                        f"operator pattern {name!r} has too many arguments", path
                    )
                out.update(typecheck_pattern(sub, t.domain, spec, path + (i,)))
                t = t.codomain
            if t != ty:
                raise LamTypeError(
                    f"operator pattern {name!r} has type {t}, scrutinee is {ty}", path
                )
            return out
    raise LamTypeError(f"not a pattern: {p!r}", path)


# ---------------------------------------------------------------------------
# Values and evaluation


@dataclass(frozen=True, slots=True)
class VConst:
    name: str
    literal: Union[int, str, None]
    args: tuple["Value", ...]


@dataclass(frozen=True, slots=True)
class VClosure:
    param: str
    ty: LambdaType
    body: LambdaTerm
    env: dict = field(compare=False)


@dataclass(frozen=True, slots=True)
class VPair:
    left: "Value"
    right: "Value"


@dataclass(frozen=True, slots=True)
class VBool:
    value: bool


@dataclass(frozen=True, slots=True)
class VFix:
    fn: "Value"


@dataclass(frozen=True, slots=True)
class VToken:
    """An opened binder: inert, unforgeable, never pattern-matchable."""

    ident: int
    ty: LambdaType
    hint: str


@dataclass(frozen=True, slots=True)
class VReAbs:
    """A re-abstraction λtoken.body produced by extracting through a bind
    pattern; behaves as an abstraction value."""

    token: VToken
    body: "Value"


Value = Union[VConst, VClosure, VPair, VBool, VFix, VToken, VReAbs]


class EvalError(RuntimeError):
    pass


class MatchFailure(EvalError):
    pass


class EvalFuelExhausted(EvalError):
    pass


class Machine:
    """Fuel and token supply for one deterministic evaluation."""

    def __init__(self, fuel: int = 1_000_000):
        self.fuel = fuel
        self._tokens = itertools.count(1)
        # free-variable sets keyed by term identity; terms stay alive for
        # the whole evaluation, so ids are stable here
        self._fv: dict[int, frozenset[str]] = {}

    def tick(self) -> None:
        if self.fuel <= 0:
            raise EvalFuelExhausted("evaluation fuel exhausted")
        self.fuel -= 1

    def fresh_token(self, ty: LambdaType, hint: str) -> VToken:
        return VToken(next(self._tokens), ty, hint)

    def free_vars(self, t: LambdaTerm) -> frozenset[str]:
        key = id(t)
        cached = self._fv.get(key)
        if cached is not None:
            return cached
        match t:
            case LVar(name):
                out = frozenset((name,))
            case Lam(param, _, body):
                out = self.free_vars(body) - {param}
            case App(fn, arg):
                out = self.free_vars(fn) | self.free_vars(arg)
            case PairT(a, b):
                out = self.free_vars(a) | self.free_vars(b)
            case Proj1(p) | Proj2(p):
                out = self.free_vars(p)
            case Fix(fn):
                out = self.free_vars(fn)
            case Match(scrutinee, branches):
                out = self.free_vars(scrutinee)
                for pat, body in branches:
                    out |= self.free_vars(body) - pattern_vars(pat)
            case _:
                out = frozenset()
        self._fv[key] = out
        return out


def subst_token(v: Value, ident: int, replacement: Value) -> Value:
    match v:
        case VToken(i, _, _):
            return replacement if i == ident else v
        case VConst(name, lit, args):
            if not args:
                return v
            return VConst(name, lit, tuple(subst_token(a, ident, replacement) for a in args))
        case VPair(a, b):
            return VPair(subst_token(a, ident, replacement), subst_token(b, ident, replacement))
        case VClosure(param, ty, body, env):
            new_env = {
                k: subst_token(w, ident, replacement) for k, w in env.items()
            }
            return VClosure(param, ty, body, new_env)
        case VReAbs(token, body):
            return VReAbs(token, subst_token(body, ident, replacement))
        case VFix(fn):
            return VFix(subst_token(fn, ident, replacement))
        case _:
            return v


def apply_value(fn: Value, arg: Value, machine: Machine) -> Value:
    machine.tick()
    match fn:
        case VClosure(param, _, body, env):
            new_env = dict(env)
            new_env[param] = arg
            return _eval(body, new_env, machine)
        case VReAbs(token, body):
            return subst_token(body, token.ident, arg)
        case VConst(name, lit, args):
            return VConst(name, lit, args + (arg,))
        case VFix(inner):
            unfolded = apply_value(inner, fn, machine)
            return apply_value(unfolded, arg, machine)
    raise EvalError(f"cannot apply {type(fn).__name__}")


def _unfold_fix(v: Value, machine: Machine) -> Value:
    while isinstance(v, VFix):
        machine.tick()
        v = apply_value(v.fn, v, machine)
    return v


def open_abstraction(v: Value, machine: Machine) -> tuple[VToken, Value]:
    """Look under an abstraction value: apply it to a fresh inert token."""
    match v:
        case VClosure(param, ty, _, _):
            token = machine.fresh_token(ty, param)
            return token, apply_value(v, token, machine)
        case VReAbs(old, body):
            token = machine.fresh_token(old.ty, old.hint)
            return token, subst_token(body, old.ident, token)
    raise EvalError(f"cannot open {type(v).__name__} as an abstraction")


def _match(p: Pattern, v: Value, machine: Machine) -> Optional[dict[str, Value]]:
    match p:
        case PVar(name):
            return {name: v}
        case PWild():
            return {}
        case PBool(want):
            if isinstance(v, VBool) and v.value == want:
                return {}
            return None
        case PPair(pa, pb):
            if not isinstance(v, VPair):
                return None
            left = _match(pa, v.left, machine)
            if left is None:
                return None
            right = _match(pb, v.right, machine)
            if right is None:
                return None
            left.update(right)
            return left
        case POp(name, args, literal):
            if not isinstance(v, VConst) or v.name != name:
                return None
            if literal is not ANY and v.literal != literal:
                return None
            if len(v.args) != len(args):
                return None
            out: dict[str, Value] = {}
            for sub, val in zip(args, v.args):
                m = _match(sub, val, machine)
                if m is None:
                    return None
                out.update(m)
            return out
        case PBind(inner):
            if not isinstance(v, (VClosure, VReAbs)):
                return None
            token, body = open_abstraction(v, machine)
            m = _match(inner, body, machine)
            if m is None:
                return None
            return {name: VReAbs(token, val) for name, val in m.items()}
    raise EvalError(f"not a pattern: {p!r}")


def match_pattern(p: Pattern, v: Value, machine: Optional[Machine] = None):
    """Match a value; returns the bindings or None.  Bindings extracted
    through bind patterns come back re-abstracted over the opened binder."""
    return _match(p, v, machine or Machine())


def _eval(t: LambdaTerm, env: dict, machine: Machine) -> Value:
    # Tail positions (closure application, selected match branch) iterate
    # rather than recurse, so encoded loops run in constant stack.
    while True:
        match t:
            case LVar(name):
                if name not in env:
                    raise EvalError(f"unbound variable {name!r} at runtime")
                return env[name]
            case Lam(param, ty, body):
                keep = machine.free_vars(t)
                try:
                    return VClosure(param, ty, body, {k: env[k] for k in keep})
                except KeyError as missing:
                    raise EvalError(f"unbound variable {missing} at runtime")
            case App(fn, arg):
                fv = _eval(fn, env, machine)
                av = _eval(arg, env, machine)
                fv = _unfold_fix(fv, machine)
                if isinstance(fv, VClosure):
                    machine.tick()
                    env = dict(fv.env)
                    env[fv.param] = av
                    t = fv.body
                    continue
                return apply_value(fv, av, machine)
            case Const(name, literal):
                return VConst(name, literal, ())
            case PairT(a, b):
                return VPair(_eval(a, env, machine), _eval(b, env, machine))
            case Proj1(p) | Proj2(p):
                v = _unfold_fix(_eval(p, env, machine), machine)
                if not isinstance(v, VPair):
                    raise EvalError("projection from a non-pair value")
                return v.left if isinstance(t, Proj1) else v.right
            case BoolLit(b):
                return VBool(b)
            case Fix(fn):
                return VFix(_eval(fn, env, machine))
            case Match(scrutinee, branches):
                v = _eval(scrutinee, env, machine)
                chosen = None
                for pat, body in branches:
                    m = _match(pat, v, machine)
                    if m is not None:
                        chosen = (m, body)
                        break
                if chosen is None:
                    raise MatchFailure(f"no branch matches {describe_value(v)}")
                machine.tick()
                env = dict(env)
                env.update(chosen[0])
                t = chosen[1]
                continue
        raise EvalError(f"not a term: {t!r}")


def eval_term(
    t: LambdaTerm, fuel: int = 1_000_000, env: Optional[dict] = None
) -> Value:
    """Evaluate a closed, well-typed term to a value.

    Raises MatchFailure for a non-exhaustive match at runtime and
    EvalFuelExhausted when the reduction budget runs out.
    """
    import sys

    if sys.getrecursionlimit() < 30_000:
        sys.setrecursionlimit(30_000)
    return _eval(t, dict(env or {}), Machine(fuel))


def describe_value(v: Value) -> str:
    match v:
        case VConst(name, lit, args):
            head = name if lit is None else f"{name}[{lit}]"
            if not args:
                return head
            return "(" + " ".join([head] + [describe_value(a) for a in args]) + ")"
        case VBool(b):
            return "true" if b else "false"
        case VPair(a, b):
            return f"({describe_value(a)}, {describe_value(b)})"
        case VClosure(param, _, _, _):
            return f"<closure {param}>"
        case VReAbs(token, body):
            return f"<reabs {token.hint}#{token.ident}. {describe_value(body)}>"
        case VFix(_):
            return "<fix>"
        case VToken(i, _, hint):
            return f"{hint}#{i}"
    return repr(v)


# ---------------------------------------------------------------------------
# Reification (tests: "values have the typechecked type")


def quote_value(v: Value, machine: Optional[Machine] = None) -> LambdaTerm:
    """Turn a closed value back into a term, for re-typechecking."""
    machine = machine or Machine()
    fresh = itertools.count(1)

    def go(v: Value, token_names: dict[int, str]) -> LambdaTerm:
        match v:
            case VConst(name, lit, args):
                return apps(Const(name, lit), *[go(a, token_names) for a in args])
            case VBool(b):
                return BoolLit(b)
            case VPair(a, b):
                return PairT(go(a, token_names), go(b, token_names))
            case VToken(i, _, _):
                if i not in token_names:
                    raise EvalError("token escaped its binder during quoting")
                return LVar(token_names[i])
            case VClosure(_, ty, _, _) | VReAbs(VToken(_, ty, _), _):
                token, body = open_abstraction(v, machine)
                name = f"q{next(fresh)}"
                names = dict(token_names)
                names[token.ident] = name
                return Lam(name, ty, go(body, names))
            case VFix(fn):
                return Fix(go(fn, token_names))
        raise EvalError(f"cannot quote {type(v).__name__}")

    return go(v, {})


# ---------------------------------------------------------------------------
# Printing


def print_type(t: LambdaType) -> str:
    return str(t)


def print_term(t: LambdaTerm) -> str:
    match t:
        case LVar(name):
            return name
        case Const(name, literal):
            if name.startswith(CTX_HOLE_PREFIX):
                return "⊙"
            return name if literal is None else f"{name}[{literal}]"
        case BoolLit(b):
            return "true" if b else "false"
        case Lam(param, ty, body):
            return f"\\{param}:{ty}. {print_term(body)}"
        case App(fn, arg):
            return f"{_app_head(fn)} {_atom(arg)}"
        case PairT(a, b):
            return f"({print_term(a)}, {print_term(b)})"
        case Proj1(p):
            return f"{_atom(p)}.1"
        case Proj2(p):
            return f"{_atom(p)}.2"
        case Fix(fn):
            return f"fix {_atom(fn)}"
        case Match(scrutinee, branches):
            arms = " ".join(
                f"| {print_pattern(p)} -> {print_term(b)}" for p, b in branches
            )
            return f"match {_atom(scrutinee)} with {arms}"
    raise TypeError(f"not a term: {t!r}")


def _app_head(t: LambdaTerm) -> str:
    if isinstance(t, App):
        return print_term(t)
    return _atom(t)


def _atom(t: LambdaTerm) -> str:
    if isinstance(t, (LVar, Const, BoolLit, PairT, Proj1, Proj2)):
        return print_term(t)
    return f"({print_term(t)})"


def print_pattern(p: Pattern) -> str:
    match p:
        case PVar(name):
            return name
        case PWild():
            return "_"
        case PBool(b):
            return "true" if b else "false"
        case PPair(a, b):
            return f"({print_pattern(a)}, {print_pattern(b)})"
        case PBind(inner):
            return f"(bind {print_pattern(inner)})"
        case POp(name, args, literal):
            head = name if literal is ANY else f"{name}[{literal}]"
            if not args:
                return head
            return "(" + " ".join([head] + [print_pattern(a) for a in args]) + ")"
    raise TypeError(f"not a pattern: {p!r}")


# ---------------------------------------------------------------------------
# The cursor-movement function library (per sort, mutually recursive packs)


def _pack_types(spec: LanguageSpec, fn_type) -> LambdaType:
    types = [fn_type(s) for s in spec.sorts]
    out = types[-1]
    for t in reversed(types[:-1]):
        out = Product(t, out)
    return out


def _pack_proj(pack: LambdaTerm, index: int, total: int) -> LambdaTerm:
    t = pack
    for _ in range(index):
        t = Proj2(t)
    if index < total - 1:
        t = Proj1(t)
    return t


def build_pack(spec: LanguageSpec, fn_type, make_body) -> dict[str, LambdaTerm]:
    """Build one mutually recursive function per sort via fix over a
    right-nested product; returns closed terms keyed by sort name.

    make_body(sort, self_refs) must produce the function term for that
    sort, where self_refs maps sort names to recursion references.
    """
    sorts = spec.sorts
    total = len(sorts)
    pack_ty = _pack_types(spec, fn_type)
    p = LVar("%p")
    self_refs = {
        s.name: _pack_proj(p, i, total) for i, s in enumerate(sorts)
    }
    bodies = [make_body(s, self_refs) for s in sorts]
    tuple_body = bodies[-1]
    for b in reversed(bodies[:-1]):
        tuple_body = PairT(b, tuple_body)
    pack = Fix(Lam("%p", pack_ty, tuple_body))
    return {
        s.name: _pack_proj(pack, i, total) for i, s in enumerate(sorts)
    }


def _movable_ops(spec: LanguageSpec, sort: Sort) -> list[OperatorDecl]:
    """Operators of `sort` with at least one argument, cursors excluded."""
    return [
        d
        for d in spec.operators
        if d.result_sort == sort and not d.is_cursor and d.args
    ]


def _open_term(child: LambdaTerm, valence) -> LambdaTerm:
    """Apply an abstraction child to inert binder constants, to look at
    its body without consuming the binders."""
    return apps(child, *[binder_const(s) for s in valence.binds])


def _rewrap(child: LambdaTerm, valence, transform) -> LambdaTerm:
    """Eta-wrap `transform` under the child's binders:
    \\w1..wk. transform(child w1 .. wk)."""
    if not valence.binds:
        return transform(child)
    params = [(f"%w{i}", Base(s.name)) for i, s in enumerate(valence.binds, 1)]
    opened = apps(child, *[LVar(n) for n, _ in params])
    return lams(params, transform(opened))


def _bool_chain(tests_and_results, otherwise: LambdaTerm) -> LambdaTerm:
    """match t1 | true -> r1 | false -> (match t2 ...) ... else otherwise."""
    out = otherwise
    for test, result in reversed(tests_and_results):
        out = Match(test, ((PBool(True), result), (PBool(False), out)))
    return out


def _fail(sort: Sort) -> LambdaTerm:
    # well-typed, always raises MatchFailure: the dispatch dead end
    return Match(TRUE, ((PBool(False), Const(f"hole_{sort.name}")),))


def _match_or_fail(scrutinee: LambdaTerm, branches, sort: Sort) -> LambdaTerm:
    """A sort with no matchable operators has no rule instances at all:
    the function is the constant dead end."""
    if not branches:
        return _fail(sort)
    return Match(scrutinee, tuple(branches))


def _bind_wrap(pattern: Pattern, valence) -> Pattern:
    for _ in valence.binds:
        pattern = PBind(pattern)
    return pattern


def build_has_cursor(spec: LanguageSpec) -> dict[str, LambdaTerm]:
    """has_cursor_<s> : s -> Bool, true iff a cursor occurs in the tree."""

    def body(sort: Sort, self_refs) -> LambdaTerm:
        branches: list[tuple[Pattern, LambdaTerm]] = [
            (POp(f"cursor_{sort.name}", (PWild(),)), TRUE)
        ]
        for decl in _movable_ops(spec, sort):
            pvars = tuple(PVar(f"%c{i}") for i in range(decl.arity))
            tests = [
                (
                    App(
                        self_refs[val.body_sort.name],
                        _open_term(LVar(f"%c{i}"), val),
                    ),
                    TRUE,
                )
                for i, val in enumerate(decl.args)
            ]
            branches.append((POp(decl.name, pvars), _bool_chain(tests, FALSE)))
        branches.append((PWild(), FALSE))
        return Lam("%x", Base(sort.name), Match(LVar("%x"), tuple(branches)))

    return build_pack(spec, lambda s: Arrow(Base(s.name), BOOL), body)


def _descend_branches(spec, sort, self_refs, has_cursor, wrap_call):
    """Recursive dispatch: rebuild the node, sending the recursion into the
    unique cursor-containing child.  `wrap_call(fn, child)` forms the
    recursive call on an opened child."""
    out = []
    for decl in _movable_ops(spec, sort):
        pvars = tuple(PVar(f"%c{i}") for i in range(decl.arity))
        tests = []
        for i, val in enumerate(decl.args):
            child = LVar(f"%c{i}")
            rebuilt_children = []
            for j, valj in enumerate(decl.args):
                if j == i:
                    rebuilt_children.append(
                        _rewrap(
                            child,
                            val,
                            lambda opened, _s=val.body_sort.name: wrap_call(
                                self_refs[_s], opened
                            ),
                        )
                    )
                else:
                    rebuilt_children.append(LVar(f"%c{j}"))
            rebuilt = apps(Const(decl.name), *rebuilt_children)
            test = App(has_cursor[val.body_sort.name], _open_term(child, val))
            tests.append((test, rebuilt))
        out.append((POp(decl.name, pvars), _bool_chain(tests, _fail(sort))))
    return out


def build_down(spec: LanguageSpec, has_cursor) -> dict[str, LambdaTerm]:
    """down_<s> : s -> s, push the cursor onto the first child of the node
    it encloses (dispatching to wherever the cursor currently is)."""

    def body(sort: Sort, self_refs) -> LambdaTerm:
        branches: list[tuple[Pattern, LambdaTerm]] = []
        for decl in _movable_ops(spec, sort):
            pvars = tuple(PVar(f"%a{i}") for i in range(decl.arity))
            window = POp(f"cursor_{sort.name}", (POp(decl.name, pvars),))
            first = decl.args[0]
            children = [
                _rewrap(
                    LVar("%a0"),
                    first,
                    lambda opened: App(
                        Const(f"cursor_{first.body_sort.name}"), opened
                    ),
                )
            ] + [LVar(f"%a{i}") for i in range(1, decl.arity)]
            branches.append((window, apps(Const(decl.name), *children)))
        branches.extend(
            _descend_branches(spec, sort, self_refs, has_cursor, lambda f, c: App(f, c))
        )
        return Lam("%x", Base(sort.name), _match_or_fail(LVar("%x"), branches, sort))

    return build_pack(spec, lambda s: Arrow(Base(s.name), Base(s.name)), body)


def build_up(spec: LanguageSpec, has_cursor) -> dict[str, LambdaTerm]:
    """up_<s> : s -> s, pull the cursor from a child onto its node."""

    def body(sort: Sort, self_refs) -> LambdaTerm:
        branches: list[tuple[Pattern, LambdaTerm]] = []
        for decl in _movable_ops(spec, sort):
            for i, val in enumerate(decl.args):
                pats = []
                for j in range(decl.arity):
                    if j == i:
                        pats.append(
                            _bind_wrap(
                                POp(
                                    f"cursor_{val.body_sort.name}",
                                    (PVar("%b"),),
                                ),
                                val,
                            )
                        )
                    else:
                        pats.append(PVar(f"%a{j}"))
                children = [
                    LVar("%b") if j == i else LVar(f"%a{j}")
                    for j in range(decl.arity)
                ]
                rebuilt = App(
                    Const(f"cursor_{sort.name}"),
                    apps(Const(decl.name), *children),
                )
                branches.append((POp(decl.name, tuple(pats)), rebuilt))
        branches.extend(
            _descend_branches(spec, sort, self_refs, has_cursor, lambda f, c: App(f, c))
        )
        return Lam("%x", Base(sort.name), _match_or_fail(LVar("%x"), branches, sort))

    return build_pack(spec, lambda s: Arrow(Base(s.name), Base(s.name)), body)


def build_right(spec: LanguageSpec, has_cursor) -> dict[str, LambdaTerm]:
    """right_<s> : s -> s, move the cursor from child i to child i+1."""

    def body(sort: Sort, self_refs) -> LambdaTerm:
        branches: list[tuple[Pattern, LambdaTerm]] = []
        for decl in _movable_ops(spec, sort):
            for i in range(decl.arity - 1):
                val_i, val_next = decl.args[i], decl.args[i + 1]
                pats = []
                for j in range(decl.arity):
                    if j == i:
                        pats.append(
                            _bind_wrap(
                                POp(
                                    f"cursor_{val_i.body_sort.name}",
                                    (PVar("%b"),),
                                ),
                                val_i,
                            )
                        )
                    else:
                        pats.append(PVar(f"%a{j}"))
                children = []
                for j in range(decl.arity):
                    if j == i:
                        children.append(LVar("%b"))
                    elif j == i + 1:
                        children.append(
                            _rewrap(
                                LVar(f"%a{j}"),
                                val_next,
                                lambda opened: App(
                                    Const(f"cursor_{val_next.body_sort.name}"),
                                    opened,
                                ),
                            )
                        )
                    else:
                        children.append(LVar(f"%a{j}"))
                branches.append(
                    (POp(decl.name, tuple(pats)), apps(Const(decl.name), *children))
                )
        branches.extend(
            _descend_branches(spec, sort, self_refs, has_cursor, lambda f, c: App(f, c))
        )
        return Lam("%x", Base(sort.name), _match_or_fail(LVar("%x"), branches, sort))

    return build_pack(spec, lambda s: Arrow(Base(s.name), Base(s.name)), body)


def build_set(
    spec: LanguageSpec, template_sort: Sort, has_cursor
) -> dict[str, LambdaTerm]:
    """set functions for replacements of `template_sort`:
    set_<s> : template_sort -> s -> s.  Reaching a cursor of any other
    sort is a dead end, mirroring the side-condition on substitution."""
    st = Base(template_sort.name)

    def body(sort: Sort, self_refs) -> LambdaTerm:
        branches: list[tuple[Pattern, LambdaTerm]] = []
        if sort == template_sort:
            branches.append(
                (
                    POp(f"cursor_{sort.name}", (PWild(),)),
                    App(Const(f"cursor_{sort.name}"), LVar("%r")),
                )
            )
        branches.extend(
            _descend_branches(
                spec,
                sort,
                self_refs,
                has_cursor,
                lambda f, c: App(App(f, LVar("%r")), c),
            )
        )
        return Lam(
            "%r",
            st,
            Lam("%x", Base(sort.name), _match_or_fail(LVar("%x"), branches, sort)),
        )

    return build_pack(
        spec, lambda s: Arrow(st, Arrow(Base(s.name), Base(s.name))), body
    )


def zipper_library(spec: LanguageSpec) -> dict[str, LambdaTerm]:
    """Named closed definitions down_<s>, right_<s>, up_<s>, set_<s> for
    every sort; each typechecks at s -> s (set at s -> s -> s)."""
    if not spec.editor_extended:
        raise SpecError("zipper_library needs an editor-extended spec")
    hc = build_has_cursor(spec)
    down = build_down(spec, hc)
    up = build_up(spec, hc)
    right = build_right(spec, hc)
    out: dict[str, LambdaTerm] = {}
    for s in spec.sorts:
        out[f"down_{s.name}"] = down[s.name]
        out[f"up_{s.name}"] = up[s.name]
        out[f"right_{s.name}"] = right[s.name]
        out[f"set_{s.name}"] = build_set(spec, s, hc)[s.name]
        out[f"has_cursor_{s.name}"] = hc[s.name]
    return out
