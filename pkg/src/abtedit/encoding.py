"""Encoding of trees, contexts, commands, conditions and whole editor
expressions into the target lambda-calculus, plus the soundness harness
comparing encoded evaluation against the direct semantics.

Trees encode as curried constant applications with object binders as
lambda binders.  A decomposed tree encodes as a pair (focus, context)
with the constant hole at the cursor's position in the context.  For
whole-run comparisons the harness uses the trivial decomposition — the
focus is the entire tree and the context is just the hole — which keeps
every intermediate term closed and lets `parent` climb as far as the
direct semantics allows.

A command stuck in the direct semantics evaluates to a match failure in
the encoding; the harness checks that correspondence rather than
asserting success.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional

from . import lam
from .abt import (
    Abstraction,
    Abt,
    Op,
    Var,
    WellFormedTree,
    alpha_eq,
    sort_of,
)
from .engine import (
    FUEL_EXHAUSTED,
    STUCK,
    TERMINAL,
    Cond,
    Config,
    EditorExpr,
    Nil,
    Prefix,
    Rec,
    RecVar,
    Seq,
    run,
)
from .gen import random_script, random_wellformed
from .lam import (
    ANY,
    BOOL,
    App,
    Arrow,
    Base,
    BoolLit,
    Const,
    EvalFuelExhausted,
    Fix,
    Lam,
    LambdaTerm,
    LVar,
    Machine,
    Match,
    MatchFailure,
    PBool,
    POp,
    PVar,
    PWild,
    PairT,
    Product,
    Proj1,
    Proj2,
    VConst,
    VPair,
    VToken,
    Value,
    apps,
    build_down,
    build_has_cursor,
    build_right,
    build_set,
    build_up,
    ctx_hole,
    eval_term,
    open_abstraction,
)
from .langspec import PARAM_NAME, LanguageSpec, Sort, SpecError
from .logic import And, At, Condition, Necessity, Neg, OpRef, Or, Possibly
from .zipper import Apc, Child, Insert, Parent, decompose, fresh_template

MATCH = "MATCH"
MISMATCH = "MISMATCH"
STUCK_AGREE = "STUCK-AGREE"
FUEL = "FUEL"


class EncodingError(ValueError):
    pass


class NotInImage(EncodingError):
    pass


class UnsupportedCommand(EncodingError):
    """Name-literal insertion refers to a binder by name; names are erased
    in the encoding, so there is no closed term for it."""


class UnsupportedCondition(EncodingError):
    """Exact-name variable conditions are not encodable: opened binders
    are anonymous."""


@dataclass
class EncodingEnv:
    spec: LanguageSpec
    root_sort: Sort
    mutate: bool = False  # test-only canary: cripples child commands
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.spec.editor_extended:
            raise SpecError("encoding needs an editor-extended spec")

    @property
    def ctx_type(self) -> Product:
        root = Base(self.root_sort.name)
        return Product(root, root)

    def has_cursor(self) -> dict[str, LambdaTerm]:
        if "hc" not in self._cache:
            self._cache["hc"] = build_has_cursor(self.spec)
        return self._cache["hc"]

    def movement(self, kind: str) -> dict[str, LambdaTerm]:
        if kind not in self._cache:
            builder = {"down": build_down, "up": build_up, "right": build_right}[kind]
            self._cache[kind] = builder(self.spec, self.has_cursor())
        return self._cache[kind]

    def setter(self, template_sort: Sort) -> dict[str, LambdaTerm]:
        key = ("set", template_sort.name)
        if key not in self._cache:
            self._cache[key] = build_set(self.spec, template_sort, self.has_cursor())
        return self._cache[key]


# ---------------------------------------------------------------------------
# Trees


def encode_abt(a: Abt, env: EncodingEnv, var_sorts: Optional[dict] = None) -> LambdaTerm:
    """Curried constant application; object binders become lambda binders.
    Raises on an ill-sorted input."""
    sort_of(a, env.spec, dict(var_sorts or {}))  # validates

    def enc(t: Abt) -> LambdaTerm:
        match t:
            case Var(name):
                return LVar(name)
            case Op(decl, literal, args):
                head = Const(decl.name, literal)
                enc_args = []
                for ab in args:
                    body = enc(ab.body)
                    for name, srt in reversed(ab.binders):
                        body = Lam(name, Base(srt.name), body)
                    enc_args.append(body)
                return apps(head, *enc_args)
        raise EncodingError(f"not a tree: {t!r}")

    return enc(a)


class _Decoder:
    def __init__(self, env: EncodingEnv, machine: Machine):
        self.env = env
        self.machine = machine
        self.token_names: dict[int, str] = {}
        self.used: set[str] = set()

    def name_for(self, token: VToken) -> str:
        if token.ident in self.token_names:
            return self.token_names[token.ident]
        base = token.hint.lstrip("%") or "v"
        name = base
        n = 1
        while name in self.used:
            n += 1
            name = f"{base}_{n}"
        self.used.add(name)
        self.token_names[token.ident] = name
        return name

    def decode(self, v: Value) -> Abt:
        spec = self.env.spec
        match v:
            case VToken(_, _, _):
                return Var(self.name_for(v))
            case VConst(name, literal, args):
                if name.startswith(lam.CTX_HOLE_PREFIX) or name.startswith(
                    lam.BINDER_CONST_PREFIX
                ):
                    raise NotInImage(f"constant {name} is not a tree node")
                if not spec.has_operator(name):
                    raise NotInImage(f"unknown constant {name}")
                decl = spec.operator(name)
                if len(args) != decl.arity:
                    raise NotInImage(f"partially applied constant {name}")
                built = []
                for val, child in zip(decl.args, args):
                    binders = []
                    for bsort in val.binds:
                        token, child = open_abstraction(child, self.machine)
                        binders.append((self.name_for(token), bsort))
                    built.append(Abstraction(tuple(binders), self.decode(child)))
                return Op(decl, literal, tuple(built))
            case _:
                raise NotInImage(f"cannot decode {lam.describe_value(v)}")


def decode_abt(v: Value, env: EncodingEnv, machine: Optional[Machine] = None) -> Abt:
    """Inverse of encode_abt on constructor-spine values."""
    return _Decoder(env, machine or Machine()).decode(v)


# ---------------------------------------------------------------------------
# Contexts


def encode_context(t: WellFormedTree, env: EncodingEnv) -> LambdaTerm:
    """Pair of the encoded focus (the cursor-rooted subtree, maximally
    deep) and the encoded context with the hole constant at the gap."""
    ctx, focus = decompose(t)
    focus_sorts = ctx.binders_in_scope()
    focus_term = encode_abt(focus, env, focus_sorts)
    focus_sort = sort_of(focus, env.spec, focus_sorts)

    context_term: LambdaTerm = ctx_hole(focus_sort)
    gap_sort = focus_sort
    for frame in reversed(ctx.path):
        for name, srt in reversed(frame.binders):
            context_term = Lam(name, Base(srt.name), context_term)
        args = []
        for ab in frame.left:
            args.append(_enc_abstraction(ab, env))
        args.append(context_term)
        for ab in frame.right:
            args.append(_enc_abstraction(ab, env))
        context_term = apps(Const(frame.decl.name, frame.literal), *args)
        gap_sort = frame.decl.result_sort
    del gap_sort
    return PairT(focus_term, context_term)


def _enc_abstraction(ab: Abstraction, env: EncodingEnv) -> LambdaTerm:
    body: LambdaTerm = _enc_raw(ab.body)
    for name, srt in reversed(ab.binders):
        body = Lam(name, Base(srt.name), body)
    return body


def _enc_raw(a: Abt) -> LambdaTerm:
    match a:
        case Var(name):
            return LVar(name)
        case Op(decl, literal, args):
            return apps(
                Const(decl.name, literal),
                *[_enc_abstraction_raw(ab) for ab in args],
            )
    raise EncodingError(f"not a tree: {a!r}")


def _enc_abstraction_raw(ab: Abstraction) -> LambdaTerm:
    body = _enc_raw(ab.body)
    for name, srt in reversed(ab.binders):
        body = Lam(name, Base(srt.name), body)
    return body


def trivial_context_pair(t: WellFormedTree, env: EncodingEnv) -> LambdaTerm:
    """The whole-tree reading of C[a]: focus is the entire tree, context
    is just the hole.  Keeps terms closed under arbitrary movement."""
    return PairT(encode_abt(t.tree, env), ctx_hole(env.root_sort))


def splice_context_term(pair: LambdaTerm) -> LambdaTerm:
    """Substitute the focus component for the hole constant inside the
    context component, at the term level.  Deliberately capturing: a
    binder in the context scopes over the spliced focus, exactly as the
    one-hole context's gap sits under those binders."""
    if not isinstance(pair, PairT):
        raise EncodingError("expected an encoded context pair")
    focus = pair.left

    def go(t: LambdaTerm) -> LambdaTerm:
        match t:
            case Const(name, _) if name.startswith(lam.CTX_HOLE_PREFIX):
                return focus
            case App(fn, arg):
                return App(go(fn), go(arg))
            case Lam(param, ty, body):
                return Lam(param, ty, go(body))
            case _:
                return t

    return go(pair.right)


def splice_decode(v: Value, env: EncodingEnv, machine: Optional[Machine] = None) -> Abt:
    """Decode a (focus, context) pair value and substitute the focus tree
    at the context's hole."""
    machine = machine or Machine()
    if not isinstance(v, VPair):
        raise NotInImage("expected a context pair value")
    decoder = _Decoder(env, machine)
    focus_tree = decoder.decode(v.left)

    def splice(val: Value) -> Abt:
        match val:
            case VConst(name, _, _) if name.startswith(lam.CTX_HOLE_PREFIX):
                return focus_tree
            case VConst(name, literal, args):
                if not env.spec.has_operator(name):
                    raise NotInImage(f"unknown constant {name}")
                decl = env.spec.operator(name)
                if len(args) != decl.arity:
                    raise NotInImage(f"partially applied constant {name}")
                built = []
                for valence, child in zip(decl.args, args):
                    binders = []
                    for bsort in valence.binds:
                        token, child = open_abstraction(child, machine)
                        binders.append((decoder.name_for(token), bsort))
                    built.append(Abstraction(tuple(binders), splice(child)))
                return Op(decl, literal, tuple(built))
            case VToken(_, _, _):
                return Var(decoder.name_for(val))
            case _:
                raise NotInImage(f"cannot decode {lam.describe_value(val)}")

    return splice(v.right)


# ---------------------------------------------------------------------------
# Commands


def encode_command(cmd: Apc, env: EncodingEnv) -> LambdaTerm:
    """A term of type root -> root realizing the atomic command on the
    focus component."""
    root = env.root_sort.name
    match cmd:
        case Child(1) if env.mutate:
            return Lam("%z", Base(root), LVar("%z"))
        case Child(1):
            return env.movement("down")[root]
        case Child(n):
            prev = encode_command(Child(n - 1), env)
            step = env.movement("right")[root]
            return Lam("%z", Base(root), App(step, App(prev, LVar("%z"))))
        case Parent():
            return env.movement("up")[root]
        case Insert(name, literal):
            decl = env.spec.operator(name)
            if decl.is_cursor:
                raise EncodingError("cursors are not insertable")
            if decl.param_kind == PARAM_NAME:
                raise UnsupportedCommand(
                    f"insertion of {name!r} refers to a binder by name"
                )
            template = fresh_template(decl, literal, set(), env.spec)
            template_term = encode_abt(template, env)
            setter = env.setter(decl.result_sort)[root]
            return App(setter, template_term)
    raise EncodingError(f"not a command: {cmd!r}")


# ---------------------------------------------------------------------------
# Conditions


def _sorted_ops(spec: LanguageSpec, sort: Sort):
    return [d for d in spec.operators if d.result_sort == sort and not d.is_cursor]


def _pattern_for_ref(ref: OpRef, decl) -> POp:
    literal = ANY if ref.literal is None else ref.literal
    return POp(decl.name, tuple(PWild() for _ in decl.args), literal)


def _at_family(ref: OpRef, env: EncodingEnv) -> dict[str, LambdaTerm]:
    """at_<s> : s -> Bool for each sort, judged on a cursorless value."""
    spec = env.spec
    decl = spec.operator(ref.name)
    out = {}
    for sort in spec.sorts:
        if decl.param_kind == PARAM_NAME:
            # variable uses surface as opened-binder constants or tokens;
            # everything else is an enumerable operator spine
            branches = [
                (POp(d.name, tuple(PWild() for _ in d.args)), BoolLit(False))
                for d in _sorted_ops(spec, sort)
            ]
            branches.append((PWild(), BoolLit(True)))
        elif decl.result_sort != sort:
            branches = [(PWild(), BoolLit(False))]
        else:
            branches = [
                (_pattern_for_ref(ref, decl), BoolLit(True)),
                (PWild(), BoolLit(False)),
            ]
        out[sort.name] = Lam(
            "%x", Base(sort.name), Match(LVar("%x"), tuple(branches))
        )
    return out


def _possibly_family(ref: OpRef, env: EncodingEnv) -> dict[str, LambdaTerm]:
    spec = env.spec
    decl = spec.operator(ref.name)

    def body(sort: Sort, self_refs) -> LambdaTerm:
        branches = []
        if decl.param_kind != PARAM_NAME and decl.result_sort == sort:
            branches.append((_pattern_for_ref(ref, decl), BoolLit(True)))
        for d in _sorted_ops(spec, sort):
            if not d.args:
                continue
            pvars = tuple(PVar(f"%c{i}") for i in range(d.arity))
            tests = [
                (
                    App(
                        self_refs[val.body_sort.name],
                        lam._open_term(LVar(f"%c{i}"), val),
                    ),
                    BoolLit(True),
                )
                for i, val in enumerate(d.args)
            ]
            # root may already have matched the positive branch above
            branches.append(
                (POp(d.name, pvars), lam._bool_chain(tests, BoolLit(False)))
            )
        if decl.param_kind == PARAM_NAME:
            # a variable use shows up as an opened-binder stand-in, which
            # only the final wildcard can see; every leaf operator must be
            # enumerated as a non-match first
            for d in _sorted_ops(spec, sort):
                if not d.args:
                    branches.append(
                        (POp(d.name, (), ANY), BoolLit(False))
                    )
            branches.append((PWild(), BoolLit(True)))
        else:
            branches.append((PWild(), BoolLit(False)))
        return Lam("%x", Base(sort.name), Match(LVar("%x"), tuple(branches)))

    return lam.build_pack(spec, lambda s: Arrow(Base(s.name), BOOL), body)


def _condition_family(phi: Condition, env: EncodingEnv) -> dict[str, LambdaTerm]:
    spec = env.spec
    match phi:
        case At(ref):
            _require_encodable(ref, spec)
            return _at_family(ref, env)
        case Possibly(ref):
            _require_encodable(ref, spec)
            return _possibly_family(ref, env)
        case Necessity(ref):
            _require_encodable(ref, spec)
            poss = _possibly_family(ref, env)
            out = {}
            for sort in spec.sorts:
                branches = []
                for d in _sorted_ops(spec, sort):
                    if not d.args:
                        continue
                    pvars = tuple(PVar(f"%c{i}") for i in range(d.arity))
                    # conjunction over children; vacuously true at leaves
                    conj = _and_chain(
                        [
                            App(
                                poss[val.body_sort.name],
                                lam._open_term(LVar(f"%c{i}"), val),
                            )
                            for i, val in enumerate(d.args)
                        ]
                    )
                    branches.append((POp(d.name, pvars), conj))
                branches.append((PWild(), BoolLit(True)))
                out[sort.name] = Lam(
                    "%x", Base(sort.name), Match(LVar("%x"), tuple(branches))
                )
            return out
        case Neg(p):
            sub = _condition_family(p, env)
            return {
                name: Lam(
                    "%x",
                    Base(name),
                    Match(
                        App(sub[name], LVar("%x")),
                        ((PBool(True), BoolLit(False)), (PBool(False), BoolLit(True))),
                    ),
                )
                for name in sub
            }
        case And(p, q):
            sp, sq = _condition_family(p, env), _condition_family(q, env)
            return {
                name: Lam(
                    "%x",
                    Base(name),
                    Match(
                        App(sp[name], LVar("%x")),
                        (
                            (PBool(True), App(sq[name], LVar("%x"))),
                            (PBool(False), BoolLit(False)),
                        ),
                    ),
                )
                for name in sp
            }
        case Or(p, q):
            sp, sq = _condition_family(p, env), _condition_family(q, env)
            return {
                name: Lam(
                    "%x",
                    Base(name),
                    Match(
                        App(sp[name], LVar("%x")),
                        (
                            (PBool(True), BoolLit(True)),
                            (PBool(False), App(sq[name], LVar("%x"))),
                        ),
                    ),
                )
                for name in sp
            }
    raise EncodingError(f"not a condition: {phi!r}")


def _and_chain(tests: list[LambdaTerm]) -> LambdaTerm:
    out: LambdaTerm = BoolLit(True)
    for test in reversed(tests):
        out = Match(test, ((PBool(True), out), (PBool(False), BoolLit(False))))
    return out


def _require_encodable(ref: OpRef, spec: LanguageSpec) -> None:
    decl = spec.operator(ref.name)
    if decl.param_kind == PARAM_NAME and ref.literal is not None:
        raise UnsupportedCondition(
            f"@{ref.name}:{ref.literal} matches a binder by name; binder "
            "names are erased in the encoding"
        )


def encode_condition(phi: Condition, env: EncodingEnv) -> LambdaTerm:
    """A closed function (root sort -> Bool) agreeing with `satisfies` on
    cursorless trees of the root sort."""
    return _condition_family(phi, env)[env.root_sort.name]


def _locator_family(phi: Condition, env: EncodingEnv) -> dict[str, LambdaTerm]:
    """Walk to the cursor, then judge the condition on what it encloses."""
    spec = env.spec
    cond = _condition_family(phi, env)
    hc = env.has_cursor()

    def body(sort: Sort, self_refs) -> LambdaTerm:
        branches = [
            (
                POp(f"cursor_{sort.name}", (PVar("%a"),)),
                App(cond[sort.name], LVar("%a")),
            )
        ]
        for d in lam._movable_ops(spec, sort):
            pvars = tuple(PVar(f"%c{i}") for i in range(d.arity))
            tests = [
                (
                    App(hc[val.body_sort.name], lam._open_term(LVar(f"%c{i}"), val)),
                    App(
                        self_refs[val.body_sort.name],
                        lam._open_term(LVar(f"%c{i}"), val),
                    ),
                )
                for i, val in enumerate(d.args)
            ]
            branches.append((POp(d.name, pvars), lam._bool_chain(tests, _fail_bool())))
        return Lam("%x", Base(sort.name), Match(LVar("%x"), tuple(branches)))

    return lam.build_pack(spec, lambda s: Arrow(Base(s.name), BOOL), body)


def _fail_bool() -> LambdaTerm:
    return Match(BoolLit(True), ((PBool(False), BoolLit(False)),))


# ---------------------------------------------------------------------------
# Editor expressions


def encode_editor_expr(e: EditorExpr, env: EncodingEnv) -> LambdaTerm:
    """A closed term of type Ctx -> Ctx (Ctx = root * root)."""
    ctx_ty = env.ctx_type
    C = LVar("%C")

    def enc(e: EditorExpr) -> LambdaTerm:
        match e:
            case Nil():
                return Lam("%C", ctx_ty, C)
            case RecVar(x):
                return LVar(x)
            case Rec(x, body):
                return Fix(Lam(x, Arrow(ctx_ty, ctx_ty), enc(body)))
            case Seq(e1, e2):
                return Lam("%C", ctx_ty, App(enc(e2), App(enc(e1), C)))
            case Prefix(cmd, rest):
                cmd_term = encode_command(cmd, env)
                return Lam(
                    "%C",
                    ctx_ty,
                    App(enc(rest), PairT(App(cmd_term, Proj1(C)), Proj2(C))),
                )
            case Cond(phi, then, els):
                locate = _locator_family(phi, env)[env.root_sort.name]
                return Lam(
                    "%C",
                    ctx_ty,
                    Match(
                        App(locate, Proj1(C)),
                        (
                            (PBool(True), App(enc(then), C)),
                            (PBool(False), App(enc(els), C)),
                        ),
                    ),
                )
        raise EncodingError(f"not an editor expression: {e!r}")

    return enc(e)


# ---------------------------------------------------------------------------
# Soundness harness


@dataclass(frozen=True)
class CaseReport:
    index: int
    status: str  # MATCH | MISMATCH | STUCK-AGREE | FUEL
    direct_status: str
    detail: str = ""

    def line(self) -> str:
        return f"case {self.index:04d}: {self.status}" + (
            f" ({self.detail})" if self.detail else ""
        )


def check_soundness(
    e: EditorExpr,
    t: WellFormedTree,
    fuel: int,
    env: EncodingEnv,
    eval_fuel: int = 2_000_000,
    index: int = 0,
) -> CaseReport:
    """Run the direct semantics and the encoded evaluation; compare final
    trees up to alpha when both terminate."""
    direct = run(Config(e, t), env.spec, fuel)
    if direct.status == FUEL_EXHAUSTED:
        return CaseReport(index, FUEL, direct.status, "direct run out of fuel")

    term = App(encode_editor_expr(e, env), trivial_context_pair(t, env))
    # Rebuilding under a binder defers work into a closure, so a stuck
    # command may only surface when the result is observed: decoding is
    # part of the encoded run.
    encoded_stuck = False
    decoded: Optional[Abt] = None
    try:
        value = eval_term(term, fuel=eval_fuel)
        decoded = splice_decode(value, env, Machine(eval_fuel))
    except MatchFailure:
        encoded_stuck = True
    except EvalFuelExhausted:
        if direct.status == STUCK:
            # stuckness deferred under a binder into a diverging
            # continuation; stuck runs are recorded, not compared
            return CaseReport(
                index, FUEL, direct.status, "stuck deferred into divergence"
            )
        return CaseReport(
            index, MISMATCH, direct.status, "encoded evaluation out of fuel"
        )
    except NotInImage as err:
        return CaseReport(index, MISMATCH, direct.status, f"decode failed: {err}")

    if direct.status == STUCK:
        if encoded_stuck:
            return CaseReport(index, STUCK_AGREE, direct.status)
        return CaseReport(
            index, MISMATCH, direct.status, "direct stuck, encoded terminated"
        )

    assert direct.status == TERMINAL
    if encoded_stuck:
        return CaseReport(
            index, MISMATCH, direct.status, "direct terminated, encoded stuck"
        )
    assert decoded is not None
    if alpha_eq(decoded, direct.final_tree.tree):
        return CaseReport(index, MATCH, direct.status)
    return CaseReport(
        index, MISMATCH, direct.status, "final trees differ up to alpha"
    )


@dataclass(frozen=True)
class SuiteReport:
    cases: tuple[CaseReport, ...]
    seed: int

    @property
    def counts(self) -> dict[str, int]:
        out = {MATCH: 0, STUCK_AGREE: 0, FUEL: 0, MISMATCH: 0}
        for c in self.cases:
            out[c.status] += 1
        return out

    def summary(self) -> str:
        c = self.counts
        return (
            f"{len(self.cases)} cases: {c[MATCH]} match, "
            f"{c[STUCK_AGREE]} stuck-agree, {c[FUEL]} fuel, "
            f"{c[MISMATCH]} mismatch"
        )

    @property
    def ok(self) -> bool:
        return self.counts[MISMATCH] == 0


def run_soundness_suite(
    spec: LanguageSpec,
    root_sort: Sort,
    cases: int,
    seed: int,
    fuel: int = 1000,
    mutate: bool = False,
    tree_depth: int = 4,
    script_size: int = 6,
) -> SuiteReport:
    """Randomized (script, tree) cases, deterministic in `seed`.

    Scripts never insert name-literal operators: those commands have no
    closed encoding (see UnsupportedCommand)."""
    env = EncodingEnv(spec, root_sort, mutate=mutate)
    rng = random.Random(seed)
    reports = []
    for i in range(cases):
        t = random_wellformed(spec, root_sort, rng.randint(0, tree_depth), rng)
        script = random_script(
            spec, rng, rng.randint(1, script_size), allow_var_insert=False
        )
        reports.append(check_soundness(script, t, fuel, env, index=i))
    return SuiteReport(tuple(reports), seed)
