"""The ten acceptance criteria.

Each test records one PASS/FAIL line in conftest.ACCEPTANCE (printed in the
terminal summary) before asserting, so a failing criterion still reports.
"""

from __future__ import annotations

import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import conftest
from conftest import SPEC_FILES, load_spec_json
from fgl_neron import lattice as L
from fgl_neron import matrix as mx
from fgl_neron.arith import is_integral, is_p_integral, primes_upto, quadratic_ring
from fgl_neron.fixed_pair import build_fixed_pair, explicit_Q_cyclotomic, extract_type, verify_condition_iii
from fgl_neron.formal_group import (
    FormalGroupLaw,
    check_axioms,
    f_q,
    f_rs,
    from_logarithm,
    hom_defect,
    hom_from_linear,
    lift_tuple,
    logarithm,
)
from fgl_neron.honda import (
    FrobeniusPolynomial,
    hom_criterion_witness,
    is_type,
    isomorphism_witness,
    lambda_from_type,
    type_from_xi,
    xi_lambda,
)
from fgl_neron.pipeline import Checks, _action_data, _composition_checks, quadratic_xi, strong_iso_to_F_q
from fgl_neron.series import SeriesContext, compose_many, first_non_integral, identity_tuple, invert_tuple
from fgl_neron.weil import build_phi, cyclotomic_basis, phi_type, quadratic_basis
from strategies import int_matrix, series, tangent_identity_tuple

QUADRATIC = [(1, -1), (1, 1), (3, 1)]


def record(k: int, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, conftest.ACCEPTANCE[k]


def spec_of(name):
    return L.parse_spec(load_spec_json(name))


def xi_of(spec, bound):
    if spec.kind == "quadratic":
        return quadratic_xi(spec.r, spec.s, bound, spec.rep.generators[0][0][0])
    return L.xi_from_torus(spec, bound)


NON_LOCAL = [p.stem for p in SPEC_FILES if spec_of(p.stem).kind != "local"]


def test_criterion_1_quadratic_weil_restriction():
    r, s, N = 1, -1, 10
    t = time.perf_counter()
    phi = build_phi(1, quadratic_basis(r, s), N)
    elapsed = time.perf_counter() - t
    x1, x2, y1, y2 = SeriesContext(4, N).variables()
    want = (x1 + y1 + x1 * y1 - (x2 * y2).scale(s), x2 + y2 + x1 * y2 + x2 * y1 + (x2 * y2).scale(r))
    ok = phi.law.law == want and elapsed < 1.0
    record(1, ok, f"Phi for (r,s)=(1,-1) matches the closed form at N=10 in {elapsed:.3f}s")


def test_criterion_2_strong_isomorphism_to_F_rs():
    N = 15
    bad = []
    for r, s in QUADRATIC:
        F = from_logarithm(xi_lambda(quadratic_xi(r, s, N), N))
        Frs = f_rs(r, s, N)
        fwd = hom_from_linear([[1]], F, Frs)
        back = hom_from_linear([[1]], Frs, F)
        if not (fwd.integral and back.integral and hom_defect(fwd.map, F, Frs) is None):
            bad.append((r, s))
    record(2, not bad, f"lambda_rs^-1 o lambda_Xi and its inverse integral to degree {N}; failures {bad}")


def test_criterion_3_strong_isomorphism_to_F_q():
    N = 12
    bad = []
    for r, s in QUADRATIC:
        ring = quadratic_ring(r, s)
        F = from_logarithm(xi_lambda(quadratic_xi(r, s, N), N))
        g = hom_from_linear([[1]], F, f_rs(r, s, N))
        _, comp = strong_iso_to_F_q(ring, g.map, N)
        integral = first_non_integral(comp, is_integral) is None
        hom = hom_defect(comp, FormalGroupLaw(lift_tuple(F.law, ring)), f_q(ring, N)) is None
        if not (integral and hom):
            bad.append((r, s))
    record(3, not bad, f"x(1+xi x)^-1 o g carries F_Xi to F_q over Z[xi] to degree {N}; failures {bad}")


def test_criterion_4_xi_congruences():
    N = 14
    bad = []
    for name in NON_LOCAL:
        spec = spec_of(name)
        Xi = xi_of(spec, N)
        lam = xi_lambda(Xi, N)
        for p in primes_upto(13):
            if not is_type(type_from_xi(p, Xi(p)), lam, N).ok:
                bad.append((name, p))
    record(4, not bad, f"{len(NON_LOCAL)} specs x primes <= 13 at degree {N}; failures {bad}")


def test_criterion_5_type_extraction():
    bad = []
    count = 0
    for q in (3, 5):
        spec = L.parse_spec({"base": "Q", "conductor": q, "dimension": 1, "chi": [[[-1]]]})
        basis = cyclotomic_basis(q)
        Q = explicit_Q_cyclotomic([spec.rep.U(0)], basis.gamma)
        Xi = L.xi_from_torus(spec, 13)
        for p in primes_upto(13):
            if q % p == 0:
                continue
            v, status = phi_type(basis, 1, p)
            count += 1
            if status != "verified" or extract_type(Q, v, 1) != type_from_xi(p, Xi(p)):
                bad.append((q, p))
    record(5, not bad, f"upper-left block of Q^-1 v_p Q equals pI - Xi(p) Delta in {count} cases; failures {bad}")


def test_criterion_6_fixed_pair_equivariance():
    N = 8
    t = time.perf_counter()
    bad = []
    for q in (3, 5):
        spec = L.parse_spec({"base": "Q", "conductor": q, "dimension": 1, "chi": [[[-1]]]})
        basis = cyclotomic_basis(q)
        phi = build_phi(1, basis, N, method="multiplication")
        checks = Checks()
        data = _action_data(spec, basis, phi, checks)
        Q = explicit_Q_cyclotomic([spec.rep.U(0)], basis.gamma)
        cert = verify_condition_iii(Q, data.D_set, 1)
        try:
            res = build_fixed_pair(data, Q, 1, xi_lambda(L.xi_from_torus(spec, N), N), cert)
            if set(res.equivariance.values()) != {"pass"} or phi.dim != q - 1:
                bad.append(q)
        except Exception as exc:  # recorded as a failure below
            bad.append((q, str(exc)))
    elapsed = time.perf_counter() - t
    record(6, not bad and elapsed < 60, f"sigma o f = f and f integral hom at degree {N} for q=3,5 in {elapsed:.1f}s; "
                                        f"failures {bad}")


def test_criterion_7_cross_construction():
    N = 12
    a = from_logarithm(xi_lambda(quadratic_xi(1, 1, N), N))
    Xi_cyc = L.xi_from_torus(spec_of("q3_d1_norm_one"), N)
    b = from_logarithm(xi_lambda(Xi_cyc, N))
    fwd = hom_from_linear([[1]], a, b)
    back = hom_from_linear([[1]], b, a)
    xi2 = (quadratic_xi(1, 1, N)(2), Xi_cyc(2))
    ok = fwd.integral and back.integral and xi2 == ([[-1]], [[-1]])
    record(7, ok, f"quadratic (1,1) and q=3 laws strongly isomorphic over Z to degree {N}; Xi(2) = {xi2}")


@pytest.mark.slow
def test_criterion_8_realization_and_composition():
    N = 8
    bad = []
    t = time.perf_counter()
    for name in NON_LOCAL:
        spec = spec_of(name)
        basis = cyclotomic_basis(spec.q) if spec.kind == "cyclotomic" else quadratic_basis(spec.r, spec.s)
        phi = build_phi(spec.d, basis, N, method="multiplication")
        checks = Checks()
        data = _action_data(spec, basis, phi, checks)
        if data is not None:
            _composition_checks(spec, basis, data, checks)
        failed = [c["name"] for c in checks.items if c["status"] != "pass"]
        if data is None or failed:
            bad.append((name, failed))
    elapsed = time.perf_counter() - t
    record(8, not bad, f"{len(NON_LOCAL)} specs realized integrally at degree {N} with composition law "
                       f"in {elapsed:.0f}s; failures {bad}")


def test_criterion_9_isomorphic_away_from_two():
    D = [[1, 1], [-1, 1]]

    def pair(p):
        u = FrobeniusPolynomial(p, [mx.scale(mx.identity(2), p), [[-1, 0], [0, 1]]])
        u2 = FrobeniusPolynomial(p, [mx.scale(mx.identity(2), p), [[0, -1], [-1, 0]]])
        return u, u2

    odd = {}
    for p in (3, 5, 7):
        u, u2 = pair(p)
        ok = hom_criterion_witness(u, D, u2).ok and isomorphism_witness(u, D, u2).ok
        # the same answer read off the laws: lambda_u^-1 o D lambda_u2 and back are p-integral
        Fu, Fu2 = from_logarithm(lambda_from_type(u, 10)), from_logarithm(lambda_from_type(u2, 10))
        pred = lambda c, p=p: is_p_integral(c, p)  # noqa: E731
        ok = ok and hom_from_linear(D, Fu2, Fu, pred).integral and hom_from_linear(mx.inverse(D), Fu, Fu2, pred).integral
        odd[p] = ok
    u, u2 = pair(2)
    two = isomorphism_witness(u, D, u2)
    ok = all(odd.values()) and not two.ok
    record(9, ok, f"isomorphic for p in (3,5,7): {odd}; p=2 rejected ({two.reason})")


# property suites, each run with at least 50 cases

C1 = SeriesContext(1, 6)
C2 = SeriesContext(2, 4)


@settings(max_examples=50, deadline=None)
@given(series(C1, 2, max_terms=4), series(C2, 2, max_terms=3), series(C2, 2, max_terms=3))
def _axioms(t1, a, b):
    assert check_axioms(from_logarithm((C1.var(0) + t1,))).passed
    X = C2.variables()
    assert check_axioms(from_logarithm((X[0] + a, X[1] + b))).passed


@settings(max_examples=50, deadline=None)
@given(series(C2, 2, max_terms=3), series(C2, 2, max_terms=3))
def _log_round_trip(a, b):
    X = C2.variables()
    lam = (X[0] + a, X[1] + b)
    assert logarithm(from_logarithm(lam)) == lam


@settings(max_examples=50, deadline=None)
@given(tangent_identity_tuple(SeriesContext(2, 5), max_terms=4))
def _invert_round_trip(f):
    g = invert_tuple(f)
    ident = identity_tuple(SeriesContext(2, 5))
    assert compose_many(f, g) == ident and compose_many(g, f) == ident


@settings(max_examples=50, deadline=None)
@given(int_matrix(2, 2), int_matrix(2, 3), int_matrix(2, 2), int_matrix(3, 2))
def _kron_identities(A, B, A2, B2):
    assert mx.mul(mx.kron(A, B), mx.kron(A2, B2)) == mx.kron(mx.mul(A, A2), mx.mul(B, B2))
    assert mx.transpose(mx.kron(A, B)) == mx.kron(mx.transpose(A), mx.transpose(B))
    assert mx.kron(mx.identity(2), mx.identity(3)) == mx.identity(6)


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 4).flatmap(lambda m: st.integers(1, 4).flatmap(lambda n: int_matrix(m, n, -6, 6))))
def _snf_unimodular(A):
    U, D, V = L.smith_normal_form(A)
    assert mx.mul(mx.mul(U, A), V) == D
    assert abs(mx.det(U)) == 1 and abs(mx.det(V)) == 1


def test_criterion_10_property_suites():
    results = {}
    for name, fn in [("axioms", _axioms), ("log round trip", _log_round_trip), ("invert_tuple", _invert_round_trip),
                     ("kronecker", _kron_identities), ("snf", _snf_unimodular)]:
        try:
            fn()
            results[name] = "pass"
        except Exception as exc:  # a falsified property; hypothesis prints the example
            results[name] = f"fail: {type(exc).__name__}"
    ok = all(v == "pass" for v in results.values())
    record(10, ok, f"50 random cases per suite: {results}")
