"""Weight-expression parser: grammar corpus, round trips, evaluation."""

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cesaro_kothe import dsl, weights
from cesaro_kothe.dsl import BinOp, Call, Neg, Num, Var

ATOM = {"(", "-", "exp", "i", "log", "n", "number", "sqrt"}
AFTER_OPERAND = {"+", "-", "*", "/", "^", "end of input"}
CLOSE = {")", "+", "-", "*", "/", "^"}
BAD_CHAR = ATOM | {"+", "*", "/", "^", ")"}

VALID = [
    ("-i/n", Neg(BinOp("/", Var("i"), Var("n")))),
    ("-n*exp(i/n)", Neg(BinOp("*", Var("n"), Call("exp", BinOp("/", Var("i"), Var("n")))))),
    ("i*-n^2", BinOp("*", Var("i"), BinOp("^", Neg(Var("n")), Num("2")))),
    ("i", Var("i")),
    ("2^-i", BinOp("^", Num("2"), Neg(Var("i")))),
    ("n^i^2", BinOp("^", Var("n"), BinOp("^", Var("i"), Num("2")))),
    ("i-n-1", BinOp("-", BinOp("-", Var("i"), Var("n")), Num("1"))),
    ("--i", Neg(Neg(Var("i")))),
    ("log(i+1)*n", BinOp("*", Call("log", BinOp("+", Var("i"), Num("1"))), Var("n"))),
    ("sqrt(i)/n - 3.5", BinOp("-", BinOp("/", Call("sqrt", Var("i")), Var("n")), Num("3.5"))),
    (".5*i", BinOp("*", Num(".5"), Var("i"))),
    ("(((i)))", Var("i")),
    ("-(i+n)", Neg(BinOp("+", Var("i"), Var("n")))),
    ("  i \t+\n n ", BinOp("+", Var("i"), Var("n"))),
]

# (text, offset, expected set or None for an unknown identifier)
INVALID = [
    ("i^", 2, ATOM),
    ("", 0, ATOM),
    ("-i/", 3, ATOM),
    ("exp i", 4, {"("}),
    ("(i+1", 4, CLOSE),
    ("i+*n", 2, ATOM),
    ("2i", 1, AFTER_OPERAND),
    ("log()", 4, ATOM),
    ("i $ n", 2, BAD_CHAR),
    ("x+1", 0, None),
    ("n*foo(i)", 2, None),
    ("sqrt(i))", 7, AFTER_OPERAND),
    ("1..2", 2, AFTER_OPERAND),
    ("i+é", 2, BAD_CHAR),
    ("i^^2", 2, ATOM),
    (")", 0, ATOM),
]

assert len(VALID) + len(INVALID) == 30


@pytest.mark.parametrize("text,tree", VALID, ids=[t for t, _ in VALID])
def test_valid_corpus(text, tree):
    assert dsl.parse_weight_expr(text) == tree


@pytest.mark.parametrize("text,offset,expected", INVALID, ids=[repr(t) for t, _, _ in INVALID])
def test_invalid_corpus(text, offset, expected):
    if expected is None:
        with pytest.raises(dsl.UnknownIdentifierError) as info:
            dsl.parse_weight_expr(text)
    else:
        with pytest.raises(dsl.ParseError) as info:
            dsl.parse_weight_expr(text)
        assert info.value.expected == frozenset(expected)
    assert info.value.offset == offset


def test_incomplete_power_message():
    with pytest.raises(dsl.ParseError) as info:
        dsl.parse_weight_expr("i^")
    assert "expected one of {(, -, exp, i, log, n, number, sqrt}, found end of input" in str(info.value)
    assert info.value.caret().splitlines()[1] == "  ^"


def test_offsets_count_bytes():
    # the two-byte character sits before the error, so bytes and characters disagree
    with pytest.raises(dsl.ParseError) as info:
        dsl.parse_weight_expr("é")
    assert info.value.offset == 0
    with pytest.raises(dsl.ParseError) as info:
        dsl.parse_weight_expr("(i)é")
    assert info.value.offset == 3


def test_leading_minus_negates_the_term():
    assert dsl.parse_weight_expr("-i^2") == Neg(BinOp("^", Var("i"), Num("2")))
    assert float(dsl.evaluate(dsl.parse_weight_expr("-i^2"), 1, [3])[0]) == -9.0
    # after an operator the minus only reaches the next unary
    assert float(dsl.evaluate(dsl.parse_weight_expr("1*-i^2"), 1, [3])[0]) == 9.0
    assert dsl.to_source(BinOp("^", Neg(Var("i")), Num("2"))) == "(-i)^2"
    assert dsl.to_source(BinOp("*", Neg(Var("n")), Var("i"))) == "(-n)*i"


# --- round trip -------------------------------------------------------------------

leaves = st.one_of(
    st.sampled_from([Var("i"), Var("n")]),
    st.from_regex(r"\A(?:[0-9]{1,3}(?:\.[0-9]{0,2})?|\.[0-9]{1,2})\Z").map(Num),
)


def _extend(children):
    return st.one_of(
        st.builds(Neg, children),
        st.builds(Call, st.sampled_from(["exp", "log", "sqrt"]), children),
        st.builds(BinOp, st.sampled_from(["+", "-", "*", "/", "^"]), children, children),
    )


trees = st.recursive(leaves, _extend, max_leaves=12)


@given(trees)
def test_print_parse_round_trip(tree):
    text = dsl.to_source(tree)
    assert dsl.parse_weight_expr(text) == tree
    assert dsl.to_source(dsl.parse_weight_expr(text)) == text


@pytest.mark.parametrize("text", [t for t, _ in VALID])
def test_corpus_round_trip(text):
    ast = dsl.parse_weight_expr(text)
    assert dsl.parse_weight_expr(dsl.to_source(ast)) == ast


# --- evaluation -------------------------------------------------------------------

def test_dsl_nuclear_matches_builtin():
    fam = weights.dsl_family("-n*exp(i/n)")
    ref = weights.nuclear_g1_example()
    i = np.arange(1, 1001)
    for n in range(1, 6):
        a = fam.log_weights(n, i)
        b = ref.log_weights(n, i)
        rel = np.abs(a - b) / np.abs(b)
        assert float(rel.max()) <= 1e-12


def test_evaluation_error_names_indices():
    with pytest.raises(dsl.EvaluationError) as info:
        dsl.evaluate(dsl.parse_weight_expr("log(i-2)"), 4, np.arange(1, 6))
    assert (info.value.n, info.value.i) == (4, 1)


def test_dsl_family_reports_weight_error():
    fam = weights.dsl_family("log(3-i)")
    with pytest.raises(weights.WeightEvaluationError) as info:
        fam.log_weights(1, np.arange(1, 10))
    assert info.value.i == 3
