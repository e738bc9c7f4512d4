import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rlsigma import jets as J
from rlsigma.errors import (EvalDomainError, ExprSyntaxError, UnknownIdentifierError,
                            VariableIndexError)
from rlsigma.expr import eval_jet, eval_value, parse_expr
from rlsigma.jets import Jet3


# parsing ---------------------------------------------------------------------

def test_parse_simple():
    e = parse_expr("1 + x1*x2", 3)
    assert eval_value(e, (2.0, 3.0, 0.0)) == 7.0
    assert e.variables() == frozenset({1, 2})


def test_variable_out_of_range():
    with pytest.raises(VariableIndexError):
        parse_expr("x4", 3)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifierError):
        parse_expr("tan(x1)", 3)


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as err:
        parse_expr("1 + * x2", 3)
    assert err.value.offset == 4


def test_dimension_at_least_three():
    with pytest.raises(ValueError):
        parse_expr("x1", 2)


def test_hand_evaluation():
    e = parse_expr("2*(x3^2) - sin(x2)", 3)
    assert eval_value(e, (0.0, 0.0, 1.0)) == 2.0


def test_power_binds_tighter_than_minus():
    assert eval_value(parse_expr("-x1^2", 3), (3.0, 0, 0)) == -9.0
    assert eval_value(parse_expr("x1^-1", 3), (4.0, 0, 0)) == 0.25
    assert eval_value(parse_expr("x1^(-2)", 3), (2.0, 0, 0)) == 0.25


def test_round_trip():
    for text in ("1 + x1*x2", "2*(x3^2) - sin(x2)", "-x1^2/(1+x2)", "exp(log(x2 + 3))^3"):
        e = parse_expr(text, 3)
        again = parse_expr(str(e), 3)
        assert str(again) == str(e)
        p = (0.3, 0.7, -0.2)
        assert eval_value(again, p) == eval_value(e, p)


@pytest.mark.parametrize("text,point", [("log(x1)", (0.0, 1, 1)), ("sqrt(x2)", (1, -1.0, 1)),
                                        ("1/x3", (1, 1, 0.0))])
def test_domain_errors(text, point):
    with pytest.raises(EvalDomainError) as err:
        eval_jet(parse_expr(text, 3), point)
    assert err.value.subexpression


# jets ------------------------------------------------------------------------

def test_bilinear_monomial():
    j = eval_jet(parse_expr("x1*x2", 3), (2.0, 3.0, 0.0))
    assert j.value == 6.0
    assert j.partial(1) == 3.0 and j.partial(2) == 2.0
    assert j.partial(1, 2) == 1.0 and j.partial(2, 1) == 1.0
    for t in ((1, 1, 1), (1, 1, 2), (1, 2, 3), (2, 2, 2)):
        assert j.partial(*t) == 0.0


def test_constant():
    j = eval_jet(parse_expr("2", 3), (0.4, 1.0, -2.0))
    assert j.value == 2.0
    assert all(v == 0.0 for k, v in j.partials.items() if k)


def test_cube():
    j = eval_jet(parse_expr("x3^3", 3), (0.0, 0.0, 2.0))
    assert j.partial(3) == 12.0
    assert j.partial(3, 3) == 12.0
    assert j.partial(3, 3, 3) == 6.0


def test_transcendental_against_closed_form():
    p = (0.3, 0.5, 0.9)
    j = eval_jet(parse_expr("sin(x1*x2) + exp(x3)", 3), p)
    x, y, z = p
    assert j.partial(1) == pytest.approx(y * math.cos(x * y), rel=1e-14)
    assert j.partial(1, 1, 2) == pytest.approx(
        -2 * y * math.sin(x * y) - x * y * y * math.cos(x * y), rel=1e-13)
    assert j.partial(3, 3, 3) == pytest.approx(math.exp(z), rel=1e-14)


def test_derivative_lowers_order():
    j = eval_jet(parse_expr("x1^3", 3), (1.0, 0, 0))
    assert j.derivative(1).order == 2
    assert j.derivative(1).derivative(1).partial(1) == 6.0


def _poly_text(draw_terms, dim):
    parts = []
    for c, powers in draw_terms:
        factors = [repr(c)] + [f"x{k + 1}^{e}" for k, e in enumerate(powers[:dim]) if e]
        parts.append("*".join(factors))
    return " + ".join(parts) if parts else "0"


poly_terms = st.lists(st.tuples(st.floats(-2, 2, allow_nan=False),
                                st.lists(st.integers(0, 3), min_size=4, max_size=4)),
                      min_size=1, max_size=5)
points = st.lists(st.floats(-1, 1, allow_nan=False), min_size=4, max_size=4)


def _richardson_fd(f, p, k, h=1e-5):
    e = np.zeros(len(p))
    e[k] = 1.0
    d1 = (f(p + h * e) - f(p - h * e)) / (2 * h)
    d2 = (f(p + 0.5 * h * e) - f(p - 0.5 * h * e)) / h
    return (4 * d2 - d1) / 3


@settings(max_examples=50, deadline=None)
@given(poly_terms, points, st.sampled_from([3, 4]))
def test_partials_match_finite_differences(terms, pt, dim):
    e = parse_expr(_poly_text(terms, dim), dim)
    p = np.array(pt[:dim])
    j = eval_jet(e, p)
    for k in range(dim):
        fd = _richardson_fd(lambda q: eval_value(e, q), p, k)
        assert abs(j.partial(k + 1) - fd) <= 1e-6 * max(1.0, abs(fd))
        for n in range(dim):
            fd2 = _richardson_fd(lambda q: eval_jet(e, q).partial(n + 1), p, k)
            assert abs(j.partial(k + 1, n + 1) - fd2) <= 1e-6 * max(1.0, abs(fd2))


jet_coeffs = st.lists(st.floats(-3, 3, allow_nan=False), min_size=20, max_size=20)


def _jet(cs):
    b = J.basis_for(3)
    return Jet3(b, np.array(cs[: len(b.monomials)]))


@settings(max_examples=50, deadline=None)
@given(jet_coeffs, jet_coeffs, jet_coeffs)
def test_jet_arithmetic_associative_commutative(a, b, c):
    A, B, C = _jet(a), _jet(b), _jet(c)
    abc = (A * B) * C
    scale = max(1.0, np.abs(abc.coeffs).max())
    assert np.abs(abc.coeffs - (A * (B * C)).coeffs).max() < 1e-12 * scale
    ab = A * B
    assert np.abs(ab.coeffs - (B * A).coeffs).max() < 1e-12 * max(1.0, np.abs(ab.coeffs).max())
    s3 = (A + B) + C
    assert np.abs(s3.coeffs - (A + (B + C)).coeffs).max() < 1e-12 * max(1.0, np.abs(s3.coeffs).max())


@settings(max_examples=30, deadline=None)
@given(points)
def test_reciprocal_inverts(pt):
    p = np.array(pt[:3])
    j = eval_jet(parse_expr("2 + x1*x2 + x3^2", 3), p)
    one = j * j.reciprocal()
    assert abs(one.value - 1.0) < 1e-14
    assert np.abs(one.coeffs[1:]).max() < 1e-12
