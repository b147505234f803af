from __future__ import annotations

import pytest
from gmpy2 import mpq
from hypothesis import given, settings

from fgl_neron.arith import quadratic_ring
from fgl_neron.formal_group import (
    FormalGroupLaw,
    NotAFormalGroupLaw,
    additive,
    check_axioms,
    direct_sum,
    f_q,
    f_rs,
    from_logarithm,
    hom_defect,
    hom_from_linear,
    identity_hom,
    logarithm,
    multiplicative,
    multiplicative_logarithm,
)
from fgl_neron.series import SeriesContext, compose
from strategies import series


def log1p(N):
    return SeriesContext(1, N).from_terms({(k,): mpq((-1) ** (k + 1), k) for k in range(1, N + 1)})


def test_catalog_laws_pass_axioms():
    for F in [additive(6), additive(4, 2), multiplicative(8), multiplicative(5, 2), f_rs(1, -1, 8), f_rs(3, 1, 7)]:
        assert check_axioms(F).passed, F


def test_f_q_over_quadratic_ring_passes_axioms():
    F = f_q(quadratic_ring(1, -1), 6)
    assert check_axioms(F).passed


def test_non_law_fails_associativity_at_degree_two():
    ctx = SeriesContext(2, 5)
    x, y = ctx.variables()
    F = FormalGroupLaw((x + y + x * x,))
    report = check_axioms(F)
    axioms = {f["axiom"]: f for f in report.failures}
    assert axioms["associativity"]["degree"] == 2
    assert "identity" in axioms
    assert "commutativity" in axioms


def test_constructor_rejects_wrong_linear_part():
    ctx = SeriesContext(2, 4)
    x, y = ctx.variables()
    with pytest.raises(NotAFormalGroupLaw):
        FormalGroupLaw((x.scale(2) + y,))


def test_multiplicative_logarithm_is_log1p():
    assert logarithm(multiplicative(9)) == (log1p(9),)
    assert multiplicative_logarithm(9) == (log1p(9),)


def test_logarithm_of_f_rs_round_trips():
    F = f_rs(1, -1, 10)
    lam = logarithm(F)
    assert from_logarithm(lam) == F


def test_logarithm_rejects_non_law():
    ctx = SeriesContext(2, 4)
    x, y = ctx.variables()
    with pytest.raises(NotAFormalGroupLaw):
        logarithm(FormalGroupLaw((x + y + x * x * y,)))


def test_from_logarithm_of_x_plus_x_squared():
    ctx = SeriesContext(1, 7)
    x = ctx.var(0)
    F = from_logarithm((x + x * x,))
    assert check_axioms(F).passed


def test_hom_from_linear_between_multiplicative_and_additive():
    Fm, Fa = multiplicative(6), additive(6)
    h = hom_from_linear([[1]], Fm, Fa)
    assert h.map == (log1p(6),)
    assert not h.integral
    assert h.witness[1] == (2,)
    assert h.check() is None


def test_identity_hom_and_defect():
    F = f_rs(1, 1, 6)
    assert identity_hom(F).check() is None
    x = F.xctx.var(0)
    assert hom_defect((x + x * x,), F, F) is not None


def test_direct_sum():
    F = direct_sum(multiplicative(5), additive(5))
    assert F.dim == 2
    assert check_axioms(F).passed
    assert F.logarithm()[1] == F.xctx.var(1)


@settings(max_examples=50, deadline=None)
@given(series(SeriesContext(1, 6), 2, max_terms=4))
def test_laws_from_random_logarithms_pass_axioms(tail):
    lam = (SeriesContext(1, 6).var(0) + tail,)
    F = from_logarithm(lam)
    assert check_axioms(F).passed


@settings(max_examples=50, deadline=None)
@given(series(SeriesContext(2, 4), 2, max_terms=3), series(SeriesContext(2, 4), 2, max_terms=3))
def test_logarithm_round_trip_two_dimensional(a, b):
    X = SeriesContext(2, 4).variables()
    lam = (X[0] + a, X[1] + b)
    F = from_logarithm(lam)
    assert check_axioms(F).passed
    assert logarithm(F) == lam


@settings(max_examples=50, deadline=None)
@given(series(SeriesContext(1, 7), 2, max_terms=4))
def test_logarithm_linearizes_the_law(tail):
    ctx = SeriesContext(1, 7)
    lam = ctx.var(0) + tail
    F = from_logarithm((lam,))
    lhs = compose(lam, F.law)
    assert lhs == F.x_embed(lam) + F.y_embed(lam)
