import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abtedit import gen
from abtedit.abt import Var, parse_tree
from abtedit.langspec import UnknownOperatorError
from abtedit.logic import (
    And,
    At,
    Necessity,
    Neg,
    OpRef,
    Or,
    Possibly,
    brute_force_satisfies,
    parse_condition,
    print_condition,
    satisfies,
)


def test_at_plus(letlang):
    a = parse_tree("(plus (hole e) (hole e))", letlang)
    assert satisfies(a, At(OpRef("plus")), letlang)
    assert not satisfies(a, At(OpRef("num")), letlang)


def test_at_hole_guard(letlang):
    a = parse_tree("(hole e)", letlang)
    assert satisfies(a, At(OpRef("hole_e")), letlang)
    assert not satisfies(a, At(OpRef("hole_s")), letlang)


def test_necessity_vacuous_at_leaf(letlang):
    a = parse_tree("(num 5)", letlang)
    assert satisfies(a, Necessity(OpRef("plus")), letlang)
    assert satisfies(Var("x"), Necessity(OpRef("plus")), letlang)
    for name in ("num", "var", "let", "hole_e"):
        assert satisfies(a, Necessity(OpRef(name)), letlang)


def test_possibly_finds_deep_node(letlang):
    a = parse_tree(
        "(let (num 5) (bind (x) (exp (plus (var x) (num 1)))))", letlang
    )
    assert satisfies(a, Possibly(OpRef("plus")), letlang)
    assert brute_force_satisfies(a, Possibly(OpRef("plus")), letlang)
    assert not satisfies(a, Possibly(OpRef("hole_e")), letlang)


def test_necessity_single_child(letlang):
    a = parse_tree("(exp (hole e))", letlang)
    assert satisfies(a, Necessity(OpRef("hole_e")), letlang)
    assert brute_force_satisfies(a, Necessity(OpRef("hole_e")), letlang)
    assert not satisfies(a, Necessity(OpRef("num")), letlang)


def test_literal_matching(letlang):
    five = parse_tree("(num 5)", letlang)
    assert satisfies(five, At(OpRef("num")), letlang)
    assert satisfies(five, At(OpRef("num", 5)), letlang)
    assert not satisfies(five, At(OpRef("num", 7)), letlang)


def test_var_family_matching(letlang):
    assert satisfies(Var("x"), At(OpRef("var")), letlang)
    assert satisfies(Var("x"), At(OpRef("var", "x")), letlang)
    assert not satisfies(Var("y"), At(OpRef("var", "x")), letlang)
    assert not satisfies(Var("x"), At(OpRef("num")), letlang)


def test_unknown_operator_in_condition(letlang):
    with pytest.raises(UnknownOperatorError):
        satisfies(Var("x"), At(OpRef("minus")), letlang)
    with pytest.raises(UnknownOperatorError):
        brute_force_satisfies(Var("x"), Possibly(OpRef("minus")), letlang)
    with pytest.raises(UnknownOperatorError):
        satisfies(Var("x"), At(OpRef("plus", 3)), letlang)


def test_at_implies_possibly(letlang):
    rng = random.Random(3)
    for _ in range(200):
        a = gen.random_tree(letlang, letlang.sort("s"), 4, rng)
        ref = gen.random_op_ref(letlang, rng)
        if satisfies(a, At(ref), letlang):
            assert satisfies(a, Possibly(ref), letlang)


def test_de_morgan(letlang):
    rng = random.Random(11)
    for _ in range(200):
        a = gen.random_tree(letlang, letlang.sort("e"), 4, rng)
        p = gen.random_condition(letlang, rng, 2)
        q = gen.random_condition(letlang, rng, 2)
        assert satisfies(a, Neg(And(p, q)), letlang) == satisfies(
            a, Or(Neg(p), Neg(q)), letlang
        )


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_oracle_equivalence_property(letlang, data):
    rng = gen.rng_from_data(data)
    sort = rng.choice(letlang.sorts)
    a = gen.random_tree(letlang, sort, depth=5, rng=rng)
    phi = gen.random_condition(letlang, rng, size=5)
    assert satisfies(a, phi, letlang) == brute_force_satisfies(a, phi, letlang)


def test_parse_condition_round_trips():
    cases = [
        "@hole_e",
        "!@hole_e",
        "@num:5",
        "@var:x",
        "<>plus",
        "[]plus",
        "@plus & <>num | !@let",
        "!(@a | @b)",
    ]
    for text in cases:
        phi = parse_condition(text)
        assert parse_condition(print_condition(phi)) == phi


def test_parse_condition_structure():
    phi = parse_condition("@plus & <>num | !@let")
    assert phi == Or(
        And(At(OpRef("plus")), Possibly(OpRef("num"))), Neg(At(OpRef("let")))
    )
    assert parse_condition("@num:5") == At(OpRef("num", 5))
    assert parse_condition("@var:x") == At(OpRef("var", "x"))
    assert parse_condition("[]hole_e") == Necessity(OpRef("hole_e"))


def test_parse_condition_errors():
    from abtedit.logic import ConditionParseError

    for text in ("", "@", "@plus &", "(@plus", "@plus @num", "5"):
        with pytest.raises(ConditionParseError):
            parse_condition(text)
