from __future__ import annotations

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from fgl_neron import matrix as mx
from fgl_neron.arith import is_integral, primes_upto
from fgl_neron.formal_group import multiplicative_logarithm
from fgl_neron.honda import (
    FrobeniusPolynomial,
    HondaError,
    XiMap,
    apply,
    hom_criterion_witness,
    is_type,
    isomorphism_witness,
    lambda_from_type,
    type_from_xi,
    xi_coefficients,
    xi_fgl,
    xi_lambda,
)
from fgl_neron.series import SeriesContext, first_non_integral


def test_multiplicative_log_has_type_p_minus_delta():
    lam = multiplicative_logarithm(12)
    for p in (2, 3, 5, 7, 11):
        assert is_type(type_from_xi(p, [[1]]), lam).ok


def test_wrong_type_reports_witness():
    lam = multiplicative_logarithm(9)
    res = is_type(type_from_xi(3, [[2]]), lam)
    assert not res.ok
    comp, exps, c = res.witness
    assert exps == (3,) and c == -1
    assert "p=3" in res.describe()


def test_type_requires_pI_constant():
    u = FrobeniusPolynomial(3, [[[2]], [[-1]]])
    with pytest.raises(HondaError):
        is_type(u, multiplicative_logarithm(4))


def test_apply_operator():
    x = SeriesContext(1, 9).var(0)
    u = FrobeniusPolynomial(3, [[[3]], [[-1]]])
    assert apply(u, (x,)) == (x.scale(3) - x**3,)


def test_lambda_from_type_p_minus_delta_at_two():
    u = FrobeniusPolynomial(2, [[[2]], [[-1]]])
    (lam,) = lambda_from_type(u, 9)
    x = lam.ctx.var(0)
    assert lam == x + (x**2).scale(mpq(1, 2)) + (x**4).scale(mpq(1, 4)) + (x**8).scale(mpq(1, 8))
    assert is_type(u, (lam,)).ok


def test_lambda_from_type_two_dimensional():
    u = FrobeniusPolynomial(3, [mx.scale(mx.identity(2), 3), [[-1, 0], [0, 1]]])
    lam = lambda_from_type(u, 9)
    assert is_type(u, lam).ok


def test_xi_lambda_for_q5_norm_one():
    Xi = XiMap(1, {2: [[-1]], 3: [[-1]], 5: [[0]], 7: [[-1]], 11: [[1]]})
    (lam,) = xi_lambda(Xi, 6)
    coeffs = [lam.coefficient((m,)) for m in range(1, 7)]
    assert coeffs == [1, mpq(-1, 2), mpq(-1, 3), mpq(1, 4), 0, mpq(1, 6)]


def test_xi_coefficients_are_multiplicative():
    Xi = XiMap(1, {2: [[3]], 3: [[-2]], 5: [[1]], 7: [[0]]})
    A = xi_coefficients(Xi, 8)
    assert A[5][0][0] == -6  # A_6 = Xi(2) Xi(3)
    assert A[7][0][0] == 27  # A_8 = Xi(2)^3


def test_xi_map_validation():
    with pytest.raises(HondaError):
        XiMap(2, {2: [[1, 1], [0, 1]], 3: [[1, 0], [1, 1]]})
    Xi = XiMap(1, {2: [[1]]})
    with pytest.raises(HondaError):
        xi_lambda(Xi, 5)


def test_split_xi_gives_multiplicative_law():
    Xi = XiMap(2, {p: mx.identity(2) for p in primes_upto(8)})
    lam = xi_lambda(Xi, 8)
    # sum x^m / m = -log(1 - x): the multiplicative law in the coordinate -x
    neg = tuple(s.map_coefficients(lambda c: -c) for s in multiplicative_logarithm(8, 2))
    flipped = tuple(SeriesContext(2, 8).from_terms({e: c * (-1) ** sum(e) for e, c in s.items()}) for s in neg)
    assert lam == flipped
    F, _ = xi_fgl(XiMap(1, {p: [[1]] for p in primes_upto(8)}), 8)
    x, y = F.ctx.variables()
    assert F.law == (x + y - x * y,)


def test_q3_convention_xi_fgl_is_integral():
    Xi = XiMap(1, {2: [[-1]], 3: [[3]], 5: [[-1]], 7: [[1]], 11: [[-1]]})
    F, bad = xi_fgl(Xi, 12)
    assert bad is None
    assert xi_coefficients(Xi, 9)[8][0][0] == 9


def test_isomorphism_criterion_in_rank_two():
    D = [[1, 1], [-1, 1]]
    for p in (3, 5, 7):
        u = FrobeniusPolynomial(p, [mx.scale(mx.identity(2), p), [[-1, 0], [0, 1]]])
        u2 = FrobeniusPolynomial(p, [mx.scale(mx.identity(2), p), [[0, -1], [-1, 0]]])
        res = hom_criterion_witness(u, D, u2)
        assert res.ok
        assert all(mx.equal(w, D) for w in res.w[:1])
        assert isomorphism_witness(u, D, u2).ok
    u = FrobeniusPolynomial(2, [mx.scale(mx.identity(2), 2), [[-1, 0], [0, 1]]])
    u2 = FrobeniusPolynomial(2, [mx.scale(mx.identity(2), 2), [[0, -1], [-1, 0]]])
    res = isomorphism_witness(u, D, u2)
    assert not res.ok and res.failed_at == 0


def test_hom_criterion_non_integral_witness():
    u = type_from_xi(3, [[1]])
    res = hom_criterion_witness(u, [[1]], type_from_xi(3, [[0]]))
    assert not res.ok and "3-integral" in res.reason


# any commuting Xi gives an integral law of the stated types


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.sampled_from(primes_upto(10)), st.integers(min_value=-3, max_value=3),
                       min_size=4, max_size=4))
def test_random_rank_one_xi_types_and_integrality(vals):
    Xi = XiMap(1, {p: [[v]] for p, v in vals.items()})
    lam = xi_lambda(Xi, 10)
    for p in primes_upto(10):
        assert is_type(type_from_xi(p, Xi(p)), lam).ok
    F, bad = xi_fgl(Xi, 10)
    assert bad is None


R = [[0, -1], [1, -1]]  # order 3


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(-2, 2), st.integers(-2, 2)), min_size=3, max_size=3))
def test_random_commuting_rank_two_xi(pairs):
    # polynomials in a fixed matrix commute
    entries = {p: mx.add(mx.scale(mx.identity(2), a), mx.scale(R, b)) for p, (a, b) in zip((2, 3, 5), pairs)}
    Xi = XiMap(2, entries)
    lam = xi_lambda(Xi, 6)
    for p in (2, 3, 5):
        assert is_type(type_from_xi(p, Xi(p)), lam).ok
    F, bad = xi_fgl(Xi, 6)
    assert bad is None
    assert first_non_integral(F.law, is_integral) is None
