import random

import pytest

from abtedit.abt import alpha_eq, check_well_formed, parse_tree, print_tree
from abtedit.lam import (
    ANY,
    BOOL,
    App,
    Arrow,
    Base,
    BoolLit,
    Const,
    EvalError,
    EvalFuelExhausted,
    Fix,
    Lam,
    LamTypeError,
    LVar,
    Machine,
    Match,
    MatchFailure,
    PBind,
    PBool,
    POp,
    PPair,
    PVar,
    PWild,
    PairT,
    Product,
    Proj1,
    Proj2,
    VBool,
    VConst,
    VPair,
    VReAbs,
    apps,
    eval_term,
    match_pattern,
    operator_type,
    pattern_vars,
    print_term,
    print_type,
    quote_value,
    typecheck,
    zipper_library,
)
from abtedit.langspec import SpecError


def ty(spec, text_name):
    return Base(text_name)


def test_operator_types(letlang):
    assert print_type(operator_type(letlang.operator("plus"))) == "e -> e -> e"
    assert print_type(operator_type(letlang.operator("let"))) == "e -> (e -> s) -> s"
    assert print_type(operator_type(letlang.operator("exp"))) == "e -> s"
    assert print_type(operator_type(letlang.operator("num"))) == "e"
    assert print_type(operator_type(letlang.operator("hole_e"))) == "e"
    assert print_type(operator_type(letlang.operator("cursor_s"))) == "s -> s"


def test_typecheck_constants(letlang):
    assert typecheck(Const("plus"), {}, letlang) == Arrow(
        Base("e"), Arrow(Base("e"), Base("e"))
    )
    assert typecheck(Const("let"), {}, letlang) == Arrow(
        Base("e"), Arrow(Arrow(Base("e"), Base("s")), Base("s"))
    )
    assert typecheck(Const("num", 5), {}, letlang) == Base("e")
    with pytest.raises(LamTypeError, match="needs a literal"):
        typecheck(Const("num"), {}, letlang)
    with pytest.raises(LamTypeError, match="unknown constant"):
        typecheck(Const("minus"), {}, letlang)


def test_typecheck_fix_of_identity(letlang):
    bb = Arrow(BOOL, BOOL)
    t = Fix(Lam("f", bb, LVar("f")))
    assert typecheck(t, {}, letlang) == bb


def test_typecheck_fix_rejects_non_endo(letlang):
    with pytest.raises(LamTypeError, match="fix needs"):
        typecheck(Fix(Lam("f", BOOL, Const("hole_e"))), {}, letlang)
    with pytest.raises(LamTypeError, match="fix needs"):
        typecheck(Fix(BoolLit(True)), {}, letlang)


def test_typecheck_match_branch_agreement(letlang):
    good = Match(BoolLit(True), ((PBool(True), BoolLit(False)), (PWild(), BoolLit(True))))
    assert typecheck(good, {}, letlang) == BOOL
    bad = Match(BoolLit(True), ((PBool(True), BoolLit(False)), (PWild(), Const("hole_e"))))
    with pytest.raises(LamTypeError, match="branch 1"):
        typecheck(bad, {}, letlang)


def test_typecheck_pattern_against_wrong_shape(letlang):
    bad = Match(BoolLit(True), ((PPair(PWild(), PWild()), BoolLit(True)),))
    with pytest.raises(LamTypeError, match="pair pattern"):
        typecheck(bad, {}, letlang)
    nonlinear = Match(
        PairT(BoolLit(True), BoolLit(False)),
        ((PPair(PVar("x"), PVar("x")), BoolLit(True)),),
    )
    with pytest.raises(LamTypeError, match="twice"):
        typecheck(nonlinear, {}, letlang)


def test_typecheck_pbind_wraps_bindings(letlang):
    # match (\x:e. cursor_e x) with | (bind (cursor_e b)) -> b : e -> e
    scrutinee = Lam("x", Base("e"), App(Const("cursor_e"), LVar("x")))
    m = Match(scrutinee, ((PBind(POp("cursor_e", (PVar("b"),))), LVar("b")),))
    assert typecheck(m, {}, letlang) == Arrow(Base("e"), Base("e"))


def test_eval_constructor_spine_is_inert(letlang):
    t = apps(Const("plus"), Const("num", 1), Const("num", 2))
    v = eval_term(t)
    assert v == VConst("plus", None, (VConst("num", 1, ()), VConst("num", 2, ())))


def test_eval_projection(letlang):
    assert eval_term(Proj1(PairT(BoolLit(True), BoolLit(False)))) == VBool(True)
    assert eval_term(Proj2(PairT(BoolLit(True), BoolLit(False)))) == VBool(False)


def test_eval_beta_and_match(letlang):
    t = App(Lam("x", BOOL, Match(LVar("x"), ((PBool(True), BoolLit(False)), (PBool(False), BoolLit(True))))), BoolLit(True))
    assert eval_term(t) == VBool(False)


def test_eval_match_failure(letlang):
    with pytest.raises(MatchFailure):
        eval_term(Match(BoolLit(True), ((PBool(False), BoolLit(True)),)))


def test_eval_fuel(letlang):
    # fix f. f  applied: unfolds forever
    loop = App(Fix(Lam("f", Arrow(BOOL, BOOL), LVar("f"))), BoolLit(True))
    with pytest.raises(EvalFuelExhausted):
        eval_term(loop, fuel=500)


def test_eval_deterministic(letlang):
    t = apps(Const("let"), Const("hole_e"), Lam("x", Base("e"), Const("hole_s")))
    assert eval_term(t) == eval_term(t)


def test_match_pattern_spine():
    v = VConst("plus", None, (VConst("num", 1, ()), VConst("num", 2, ())))
    m = match_pattern(POp("plus", (PVar("a"), PWild())), v)
    assert m == {"a": VConst("num", 1, ())}
    assert match_pattern(POp("let", (PVar("a"), PWild())), v) is None
    assert match_pattern(POp("plus", (PVar("a"),)), v) is None  # arity differs


def test_match_pattern_literals():
    five = VConst("num", 5, ())
    assert match_pattern(POp("num", (), 5), five) == {}
    assert match_pattern(POp("num", (), 7), five) is None
    assert match_pattern(POp("num", (), ANY), five) == {}


def test_match_pattern_pair():
    v = VPair(VBool(True), VConst("%ctx_s", None, ()))
    m = match_pattern(PPair(PVar("a"), PVar("c")), v)
    assert m == {"a": VBool(True), "c": VConst("%ctx_s", None, ())}


def test_match_pattern_bind_recaptures_body(letlang):
    # \x:e. cursor_e (plus x (num 5)); strip the cursor under the binder
    fn = eval_term(
        Lam(
            "x",
            Base("e"),
            App(Const("cursor_e"), apps(Const("plus"), LVar("x"), Const("num", 5))),
        )
    )
    m = match_pattern(PBind(POp("cursor_e", (PVar("b"),))), fn)
    assert set(m) == {"b"}
    b = m["b"]
    assert isinstance(b, VReAbs)
    # applying the recaptured abstraction substitutes the original binder
    machine = Machine()
    from abtedit.lam import apply_value

    out = apply_value(b, VConst("num", 9, ()), machine)
    assert out == VConst(
        "plus", None, (VConst("num", 9, ()), VConst("num", 5, ()))
    )


def test_match_pattern_bindings_domain_is_pattern_vars():
    rngpats = [
        POp("plus", (PVar("a"), PWild())),
        PPair(PVar("x"), PPair(PVar("y"), PWild())),
        PVar("z"),
        PWild(),
    ]
    values = [
        VConst("plus", None, (VBool(True), VBool(False))),
        VPair(VBool(True), VPair(VBool(False), VBool(True))),
        VBool(True),
        VBool(False),
    ]
    for p, v in zip(rngpats, values):
        m = match_pattern(p, v)
        assert m is not None and set(m) == pattern_vars(p)


def test_quote_round_trip(letlang):
    t = apps(Const("let"), Const("num", 3), Lam("x", Base("e"), apps(Const("exp"), LVar("x"))))
    v = eval_term(t)
    q = quote_value(v)
    assert typecheck(q, {}, letlang) == Base("s")
    # quoting normalizes binder names; re-quoting the re-evaluated value
    # reaches the same normal form
    assert quote_value(eval_term(q)) == q


def test_print_term_shapes(letlang):
    t = apps(Const("let"), App(Const("cursor_e"), Const("hole_e")),
             Lam("x", Base("e"), apps(Const("plus"), LVar("x"), Const("num", 5))))
    assert print_term(t) == "let (cursor_e hole_e) (\\x:e. plus x num[5])"
    m = Match(LVar("b"), ((PBool(True), BoolLit(False)),))
    assert print_term(m) == "match b with | true -> false"
    assert print_term(Fix(Lam("f", BOOL, LVar("f")))) == "fix (\\f:Bool. f)"
    assert print_term(Proj1(LVar("C"))) == "C.1"


def test_zipper_library_types(letlang):
    lib = zipper_library(letlang)
    expect = {
        "down_s": "s -> s", "up_s": "s -> s", "right_s": "s -> s",
        "set_s": "s -> s -> s", "has_cursor_s": "s -> Bool",
        "down_e": "e -> e", "up_e": "e -> e", "right_e": "e -> e",
        "set_e": "e -> e -> e", "has_cursor_e": "e -> Bool",
    }
    assert {k: print_type(typecheck(v, {}, letlang)) for k, v in lib.items()} == expect


def test_zipper_library_requires_extended(letlang_plain):
    with pytest.raises(SpecError):
        zipper_library(letlang_plain)


def _encode(text, spec):
    from abtedit.encoding import EncodingEnv, encode_abt

    env = EncodingEnv(spec, spec.sort("s"))
    return encode_abt(parse_tree(text, spec), env), env


def test_down_matches_zipper_oracle(letlang):
    from abtedit.encoding import decode_abt
    from abtedit.zipper import Child, apply_command

    term, env = _encode("(cursor (op plus (num 1) (num 2)))", letlang)
    lib = zipper_library(letlang)
    v = eval_term(App(lib["down_e"], term))
    got = decode_abt(v, env)
    wf = check_well_formed(parse_tree("(cursor (op plus (num 1) (num 2)))", letlang), letlang)
    want = apply_command(wf, Child(1), letlang).tree
    assert alpha_eq(got, want)
    assert print_tree(got) == "(op plus (cursor (op num 1)) (op num 2))"


def test_up_down_identity_random(letlang):
    from abtedit import gen
    from abtedit.encoding import EncodingEnv, decode_abt, encode_abt

    lib = zipper_library(letlang)
    rng = random.Random(5)
    checked = 0
    for _ in range(60):
        wf = gen.random_wellformed(letlang, letlang.sort("s"), 4, rng)
        focus = wf.enclosed()
        from abtedit.abt import Op

        if not (isinstance(focus, Op) and focus.args):
            continue
        env = EncodingEnv(letlang, letlang.sort("s"))
        # cursor-rooted subtree of the focus sort
        node = wf.cursor_node()
        from abtedit.abt import sort_of
        from abtedit.zipper import decompose

        ctx, _ = decompose(wf)
        if ctx.binders_in_scope():
            continue  # keep the encoded term closed
        sort = sort_of(node, letlang, {})
        term = encode_abt(node, env)
        v = eval_term(
            App(lib[f"up_{sort.name}"], App(lib[f"down_{sort.name}"], term))
        )
        assert alpha_eq(decode_abt(v, env), node)
        checked += 1
    assert checked > 10


def test_set_replaces_enclosed(letlang):
    from abtedit.encoding import decode_abt

    term, env = _encode("(cursor (op plus (num 1) (num 2)))", letlang)
    lib = zipper_library(letlang)
    v = eval_term(App(App(lib["set_e"], Const("hole_e")), term))
    assert print_tree(decode_abt(v, env)) == "(cursor (hole e))"


def test_eval_apply_non_function_errors(letlang):
    with pytest.raises(EvalError):
        eval_term(App(BoolLit(True), BoolLit(False)))


# ---------------------------------------------------------------------------
# Type soundness at desk scale: generated well-typed terms either diverge
# (fuel), fail a match, or produce a value of the typechecked type.

_SIMPLE_TYPES = [BOOL, Base("e"), Base("s"), Arrow(Base("e"), Base("e")),
                 Product(BOOL, Base("e"))]


def _gen_term(rng, ctx, want, depth, spec):
    candidates = [name for name, t in ctx.items() if t == want]
    if depth <= 0 or rng.random() < 0.2:
        if candidates and rng.random() < 0.5:
            return LVar(rng.choice(candidates))
        return _gen_base(rng, ctx, want, depth, spec)
    roll = rng.random()
    if roll < 0.25:
        # application at a random argument type
        arg_ty = rng.choice(_SIMPLE_TYPES)
        fn = _gen_term(rng, ctx, Arrow(arg_ty, want), depth - 1, spec)
        arg = _gen_term(rng, ctx, arg_ty, depth - 1, spec)
        return App(fn, arg)
    if roll < 0.4:
        pair_ty = Product(want, rng.choice(_SIMPLE_TYPES))
        return Proj1(_gen_term(rng, ctx, pair_ty, depth - 1, spec))
    if roll < 0.55:
        scr_ty = rng.choice([BOOL, Product(BOOL, BOOL)])
        scrutinee = _gen_term(rng, ctx, scr_ty, depth - 1, spec)
        branches = []
        if scr_ty == BOOL:
            pats = [PBool(True), PBool(False)] if rng.random() < 0.8 else [PBool(True)]
        else:
            pats = [PPair(PVar("m1"), PWild())]
        for p in pats:
            inner = dict(ctx)
            for name, t in (
                typecheck_pattern_safe(p, scr_ty, spec) or {}
            ).items():
                inner[name] = t
            branches.append((p, _gen_term(rng, inner, want, depth - 1, spec)))
        return Match(scrutinee, tuple(branches))
    if roll < 0.65 and isinstance(want, (Arrow, Product)):
        return Fix(
            Lam("rf", want, _gen_term(rng, {**ctx, "rf": want}, want, depth - 1, spec))
        )
    return _gen_base(rng, ctx, want, depth, spec)


def typecheck_pattern_safe(p, ty_, spec):
    from abtedit.lam import typecheck_pattern

    try:
        return typecheck_pattern(p, ty_, spec)
    except LamTypeError:
        return None


def _gen_base(rng, ctx, want, depth, spec):
    match want:
        case Arrow(dom, cod):
            name = f"v{rng.randint(0, 999)}"
            inner = dict(ctx)
            inner[name] = dom
            return Lam(name, dom, _gen_term(rng, inner, cod, depth - 1, spec))
        case Product(a, b):
            return PairT(
                _gen_term(rng, ctx, a, depth - 1, spec),
                _gen_term(rng, ctx, b, depth - 1, spec),
            )
        case Base(s):
            return Const(f"hole_{s}")
        case _:
            return BoolLit(rng.random() < 0.5)


def test_type_soundness_desk_scale(letlang):
    rng = random.Random(99)
    evaluated = 0
    for _ in range(300):
        want = rng.choice(_SIMPLE_TYPES)
        t = _gen_term(rng, {}, want, 5, letlang)
        assert typecheck(t, {}, letlang) == want
        try:
            v = eval_term(t, fuel=20_000)
            # reification forces suspended work under binders; it can
            # legitimately diverge or fail a match there too
            q = quote_value(v, Machine(20_000))
        except (MatchFailure, EvalFuelExhausted):
            continue
        evaluated += 1
        # the value, reified, typechecks at the same type
        assert typecheck(q, {}, letlang) == want
    assert evaluated > 150
