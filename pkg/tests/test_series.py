from __future__ import annotations

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from fgl_neron.arith import cyclotomic_ring
from fgl_neron.series import (
    SeriesContext,
    SeriesError,
    compose,
    compose_inverse,
    deserialize_series,
    embed,
    first_difference,
    first_non_integral,
    frobenius_substitute,
    invert_tuple,
    linear_coefficient,
    matrix_apply,
    serialize_series,
    to_string,
)
from strategies import series, tangent_identity_tuple

C1 = SeriesContext(1, 8)
C2 = SeriesContext(2, 6)


def test_truncation_drops_high_degree():
    x, y = C2.variables()
    f = (x + y) ** 7
    assert f.is_zero()
    g = (x + y) ** 3
    assert g.coefficient((2, 1)) == 3
    assert g.degree() == 3 and g.valuation() == 3


def test_graded_order_of_items():
    x, y = C2.variables()
    f = y**2 + x + x * y + y
    assert [e for e, _ in f.items()] == [(0, 1), (1, 0), (0, 2), (1, 1)]


def test_geometric_series_inverse():
    x = C1.var(0)
    one = C1.constant(1)
    geo = sum(((-x) ** k for k in range(1, 9)), one)
    assert ((one + x) * geo - one).is_zero()


def test_compose_exp_log():
    # log(1+x) composed with exp(x) - 1 is x
    x = C1.var(0)
    log1p = C1.from_terms({(k,): mpq((-1) ** (k + 1), k) for k in range(1, 9)})
    fact = 1
    terms = {}
    for k in range(1, 9):
        fact *= k
        terms[(k,)] = mpq(1, fact)
    expm1 = C1.from_terms(terms)
    assert compose(log1p, (expm1,)) == x
    assert compose(expm1, (log1p,)) == x


def test_compose_rejects_constant_inner():
    x = C1.var(0)
    with pytest.raises(SeriesError):
        compose(x, (x + 1,))


def test_invert_tuple_needs_identity_linear_part():
    x, y = C2.variables()
    with pytest.raises(SeriesError):
        invert_tuple((x + y, y))


def test_compose_inverse_matches_invert_then_compose():
    x, y = C2.variables()
    lam = (x + x * y, y + x**2)
    target = (x.scale(2) + y, y - x)
    g = compose_inverse(lam, target)
    assert tuple(compose(s, g) for s in lam) == target


def test_frobenius_substitute():
    x, y = C2.variables()
    f = x + x * y + y**3
    assert frobenius_substitute(f, 2) == x**2 + x**2 * y**2 + y**6
    assert frobenius_substitute(f, 3) == x**3 + x**3 * y**3
    R = cyclotomic_ring(5)
    ctx = SeriesContext(1, 6, R)
    g = ctx.var(0).scale(R.xi())
    got = frobenius_substitute(g, 3, lambda a: a * a)
    assert got.coefficient((3,)) == R.xi() ** 2


def test_embed_and_linear_coefficient():
    x = C1.var(0)
    f = x + x**2
    g = embed(f, C2, [1])
    assert g.coefficient((0, 2)) == 1
    assert linear_coefficient((C2.var(0) + C2.var(1).scale(3), C2.var(1))) == [[1, 3], [0, 1]]
    assert matrix_apply([[1, 1], [0, 2]], C2.variables()) == (C2.var(0) + C2.var(1), C2.var(1).scale(2))


def test_serialize_round_trip_and_errors():
    x, y = C2.variables()
    f = x.scale(mpq(1, 3)) - x * y.scale(7) + y**5
    data = serialize_series(f)
    assert deserialize_series(data, C2) == f
    with pytest.raises(SeriesError):
        deserialize_series([{"exponents": [7, 0], "coefficient": "1/1"}], C2)
    with pytest.raises(SeriesError):
        deserialize_series(data + data[:1], C2)
    with pytest.raises(SeriesError):
        deserialize_series([{"exponents": [1], "coefficient": "1"}], C2)
    assert to_string(x + y * y) == "1*x1 + 1*x2^2"


def test_ring_coefficients_serialize_as_coordinates():
    R = cyclotomic_ring(3)
    ctx = SeriesContext(1, 4, R)
    f = ctx.var(0).scale(R.xi())
    data = serialize_series(f)
    assert data[0]["coefficient"] == ["0/1", "1/1"]
    assert deserialize_series(data, ctx) == f


def test_first_difference_and_non_integral():
    x, y = C2.variables()
    a = (x + y.scale(mpq(1, 2)) * x,)
    b = (x,)
    assert first_difference(a, b) == (0, (1, 1), mpq(1, 2), 0)
    assert first_non_integral(a, lambda c: mpq(c).denominator == 1)[1] == (1, 1)


@settings(max_examples=60, deadline=None)
@given(series(C2), series(C2), series(C2))
def test_series_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert a - a == C2.zero()


@settings(max_examples=60, deadline=None)
@given(tangent_identity_tuple(SeriesContext(2, 5)))
def test_invert_tuple_round_trip(f):
    g = invert_tuple(f)
    X = SeriesContext(2, 5).variables()
    assert tuple(compose(s, g) for s in f) == X
    assert tuple(compose(s, f) for s in g) == X


@settings(max_examples=60, deadline=None)
@given(series(C1, 1), series(C1, 1), series(C1, 1))
def test_composition_is_associative(f, g, h):
    left = compose(compose(f, (g,)), (h,))
    right = compose(f, (compose(g, (h,)),))
    assert left == right


@settings(max_examples=60, deadline=None)
@given(series(C2), st.integers(min_value=2, max_value=5))
def test_frobenius_is_multiplicative(a, p):
    b = a * a
    assert frobenius_substitute(b, p) == frobenius_substitute(a, p) * frobenius_substitute(a, p)
