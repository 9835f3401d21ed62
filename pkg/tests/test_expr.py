import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gausslab import ParseError
from gausslab.expr import (BinOp, Cond, Coord, Exp, Neg, Norm, Norm2, Num, Piecewise, Pow, breakpoints,
                           evaluate, gaussian_split, parse, to_text)


def ev(text, *pts):
    return evaluate(parse(text), np.asarray(pts, dtype=float).reshape(len(pts), -1))


def test_constant_and_direct_substitution():
    assert ev("1", 0.3, -7.0).tolist() == [1.0, 1.0]
    assert ev("exp(0.25*abs2(x))", 2.0)[0] == pytest.approx(math.e)


def test_coordinates_and_norms():
    X = [[3.0, -4.0]]
    assert evaluate(parse("x"), np.array(X))[0] == 3.0
    assert evaluate(parse("x1"), np.array(X))[0] == -4.0
    assert evaluate(parse("x[1] * 2"), np.array(X))[0] == -8.0
    assert evaluate(parse("abs(x)"), np.array(X))[0] == 5.0
    assert evaluate(parse("abs2(x)"), np.array(X))[0] == 25.0


def test_operator_precedence_and_unary_minus():
    assert ev("1 + 2 * 3 - 4 / 2", 0.0)[0] == 5.0
    assert ev("-(1 + 2) * 2", 0.0)[0] == -6.0
    assert ev("2 - -1", 0.0)[0] == 3.0
    assert ev("pow(2, 10)", 0.0)[0] == 1024.0
    assert ev("1.5e-2 * 100", 0.0)[0] == pytest.approx(1.5)


def test_piecewise_branches_in_order():
    text = "piecewise(abs(x) < 1: 10; abs(x) <= 2: 20; else: 30)"
    assert ev(text, 0.5, -1.0, 2.0, 2.5).tolist() == [10.0, 20.0, 20.0, 30.0]
    assert breakpoints(parse(text)) == [-2.0, -1.0, 1.0, 2.0]


@pytest.mark.parametrize("text,offset", [("exp(", 4), ("1 +", 3), ("pow(1 2)", 6), ("piecewise(else: 1)", 10),
                                         ("y", 0), ("1 2", 2), ("abs(y)", 0)])
def test_parse_errors_report_offset(text, offset):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.offset == offset


def test_whitespace_insignificant():
    assert parse(" piecewise( x<1 :2 ; else:3 ) ") == parse("piecewise(x < 1: 2; else: 3)")


def test_gaussian_split_is_exact():
    node = parse("3 * exp(-0.5 * abs2(x) + 1) * pow(exp(abs2(x)), 2)")
    g, c = gaussian_split(node)
    assert c == pytest.approx(1.5)
    X = np.linspace(-2, 2, 9)[:, None]
    np.testing.assert_allclose(evaluate(g, X) * np.exp(c * X[:, 0] ** 2), evaluate(node, X), rtol=1e-13)


def test_gaussian_split_without_factor():
    node = parse("1 + abs(x)")
    assert gaussian_split(node) == (node, 0.0)


# -- round trip --------------------------------------------------------------------

leaf = st.one_of(st.floats(-1e6, 1e6, allow_nan=False).map(Num), st.integers(0, 2).map(Coord),
                 st.just(Norm()), st.just(Norm2()))


def _extend(inner):
    cond = st.builds(Cond, st.sampled_from(["<", "<=", ">", ">="]), inner, inner)
    return st.one_of(
        st.builds(BinOp, st.sampled_from(["+", "-", "*", "/"]), inner, inner),
        st.builds(Exp, inner), st.builds(Pow, inner, inner), st.builds(Neg, inner),
        st.builds(Piecewise, st.lists(st.tuples(cond, inner), min_size=1, max_size=3).map(tuple), inner))


trees = st.recursive(leaf, _extend, max_leaves=12)


def _normal(node):
    # a negated literal prints as a bare negative number
    if isinstance(node, Neg) and isinstance(node.arg, Num):
        return Num(-node.arg.value)
    return node


@given(trees)
def test_print_parse_round_trip(tree):
    text = to_text(tree)
    again = parse(text)
    assert to_text(again) == text
    assert parse(to_text(again)) == again


@given(trees, st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_round_trip_preserves_values(tree, x):
    X = np.array([x])
    with np.errstate(all="ignore"):
        a = evaluate(tree, X)
        b = evaluate(parse(to_text(tree)), X)
    np.testing.assert_array_equal(a, b)
