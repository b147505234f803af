"""Fixed pairs for a group acting on Phi.

Given automorphisms sigma of Phi with linear parts theta(sigma)^T, a fixed pair
is an e-dimensional law F with a homomorphism f: F -> Phi such that
sigma o f = f.  The linear part of f is Q I_{r,e}, where the first e columns
of the unimodular Q span the common kernel of the D = theta(sigma)^T - I.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from . import matrix as mx
from .arith import is_integral
from .formal_group import FglHom, FormalGroupLaw, from_logarithm
from .honda import FrobeniusPolynomial
from .lattice import SpecError, saturated_kernel, smith_normal_form, unimodular_completion
from .series import (
    compose_many,
    first_difference,
    first_non_integral,
    linear_coefficient,
    matrix_apply,
    tuple_context,
)
from .weil import GammaIndex, RestrictedLaw, apply_restricted_exponential


class FixedPairError(RuntimeError):
    pass


@dataclass
class ActionData:
    """Phi with the realized generators: (label, theta^T, automorphism)."""

    phi: RestrictedLaw
    action: list

    @property
    def D_set(self) -> list:
        r = self.phi.dim
        return [mx.sub(T, mx.identity(r)) for _, T, _ in self.action]


def generic_Q(D_set: Sequence) -> tuple[list, int]:
    """(Q, e): the first e columns of Q are the Hermite basis of the saturated common kernel."""
    if not D_set:
        raise ValueError("empty D_set")
    r = len(D_set[0])
    stacked = [row for D in D_set for row in D]
    if all(not any(row) for row in stacked):
        return mx.identity(r), r
    K = saturated_kernel(stacked, r)
    e = len(K[0]) if K and K[0] else 0
    return (unimodular_completion(K) if e else mx.identity(r)), e


def explicit_Q_unramified(U1, n1: int, n2: int) -> list:
    """Block unitriangular Q_1 with (i, 0) block U_1^{-i} (x) I_{n_2}."""
    if not (mx.is_integer(U1) and abs(mx.det(U1)) == 1):
        raise SpecError("U_1 must be unimodular")
    d = len(U1)
    size = d * n2
    blocks = [[mx.zeros(size, size) for _ in range(n1)] for _ in range(n1)]
    for i in range(n1):
        blocks[i][i] = mx.identity(size)
        if i:
            blocks[i][0] = mx.kron(mx.power(U1, -i), mx.identity(n2))
    return mx.to_int(mx.from_blocks(blocks))


def explicit_Q_cyclotomic(U_list: Sequence, gamma: GammaIndex) -> list:
    """Q with (gamma(alpha), 0) block U_1^{-alpha_1} ... U_k^{-alpha_k} and identity diagonal."""
    d = len(U_list[0])
    n = gamma.n
    blocks = [[mx.zeros(d, d) for _ in range(n)] for _ in range(n)]
    for g in range(n):
        blocks[g][g] = mx.identity(d)
        if g:
            M = mx.identity(d)
            for U, a in zip(U_list, gamma.alpha(g)):
                M = mx.mul(M, mx.power(U, -a))
            blocks[g][0] = M
    return mx.to_int(mx.from_blocks(blocks))


@dataclass
class ConditionCertificate:
    ok: bool
    kind: str  # "certified" | "first-columns" | "rank" | "invariant"
    p: int | None = None
    invariants: list = field(default_factory=list)
    reason: str = ""

    def to_json(self) -> dict:
        return {"ok": self.ok, "kind": self.kind, "p": self.p, "invariants": self.invariants, "reason": self.reason}


def _rank_mod_p(A, p: int) -> int:
    M = [[x % p for x in r] for r in A]
    rows, cols = mx.shape(M)
    rk = 0
    for c in range(cols):
        piv = next((i for i in range(rk, rows) if M[i][c]), None)
        if piv is None:
            continue
        M[rk], M[piv] = M[piv], M[rk]
        inv = pow(M[rk][c], -1, p)
        for i in range(rows):
            if i != rk and M[i][c]:
                f = M[i][c] * inv % p
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[rk])]
        rk += 1
    return rk


def verify_condition_iii(Q, D_set: Sequence, e: int, p: int | None = None) -> ConditionCertificate:
    """Stack the last r - e columns of every Q^{-1} D Q; they must have trivial kernel
    over Z / p (all primes when p is None: full rank with last Smith invariant 1)."""
    r = len(Q)
    Qinv = mx.inverse(Q)
    cols: list = []
    for k, D in enumerate(D_set):
        M = mx.mul(Qinv, mx.mul(D, Q))
        for i in range(r):
            for j in range(e):
                if M[i][j]:
                    return ConditionCertificate(
                        False, "first-columns", p, reason=f"Q^-1 D_{k} Q has entry {M[i][j]} at ({i},{j})"
                    )
        cols.extend([row[e:] for row in M])
    if e == r:
        return ConditionCertificate(True, "certified", p, reason="e = r, nothing to certify")
    S = mx.to_int(cols)
    if p is not None:
        rk = _rank_mod_p(S, p)
        if rk != r - e:
            return ConditionCertificate(False, "rank", p, reason=f"rank {rk} mod {p}, need {r - e}")
        return ConditionCertificate(True, "certified", p)
    _, D, _ = smith_normal_form(S)
    inv = [D[i][i] for i in range(min(mx.shape(D))) if D[i][i]]
    if len(inv) != r - e:
        return ConditionCertificate(False, "rank", None, inv, f"rank {len(inv)}, need {r - e}")
    if inv[-1] != 1:
        return ConditionCertificate(False, "invariant", None, inv, f"last invariant factor {inv[-1]}")
    return ConditionCertificate(True, "certified", None, inv)


def extract_type(Q, v_p: FrobeniusPolynomial, e: int) -> FrobeniusPolynomial:
    """Upper-left e x e block of Q^{-1} v_p Q, coefficientwise in Delta."""
    Qinv = mx.inverse(Q)
    coeffs = []
    for C in v_p.coeffs:
        M = mx.mul(Qinv, mx.mul(C, Q))
        coeffs.append(mx.normalize(mx.submatrix(M, range(e), range(e))))
    return FrobeniusPolynomial(v_p.p, coeffs, v_p.sigma)


@dataclass
class FixedPairResult:
    Q: list
    e: int
    F: FormalGroupLaw
    f: FglHom
    certificates: dict
    equivariance: dict
    types: dict = field(default_factory=dict)


def _phi_law_for_checks(phi: RestrictedLaw):
    from .weil import phi_from_multiplication

    if phi.method == "multiplication":
        return phi.law
    return FormalGroupLaw(phi_from_multiplication(phi.basis, phi.d, phi.degree), phi.logarithm)


def fixed_pair_hom_defect(f, F: FormalGroupLaw, phi: RestrictedLaw):
    """f(F(X, Y)) - Phi(f(X), f(Y)), first differing coefficient or None."""
    Phi = _phi_law_for_checks(phi)
    lhs = compose_many(f, F.law)
    fx = tuple(F.x_embed(s) for s in f)
    fy = tuple(F.y_embed(s) for s in f)
    rhs = compose_many(Phi.law, fx + fy)
    return first_difference(lhs, rhs)


def build_fixed_pair(
    data: ActionData,
    Q,
    e: int,
    lam_F: Sequence,
    certificate: ConditionCertificate | None = None,
    F: FormalGroupLaw | None = None,
) -> FixedPairResult:
    """F = from_logarithm(lam_F) and f = Lambda^{-1} o (Q I_{r,e}) lam_F, fully checked."""
    phi = data.phi
    N = phi.degree
    if tuple_context(lam_F).max_degree != N:
        raise FixedPairError(f"lambda_F has degree cap {tuple_context(lam_F).max_degree}, Phi has {N}")
    if certificate is not None and not certificate.ok:
        raise FixedPairError(f"condition (iii) failed: {certificate.reason}")
    r = phi.dim
    QI = [row[:e] for row in Q]
    F = F if F is not None else from_logarithm(lam_F)
    f = apply_restricted_exponential(phi.basis, phi.d, matrix_apply(QI, lam_F))
    bad = first_non_integral(f, is_integral)
    if bad is not None:
        raise FixedPairError(f"f is not integral: component {bad[0]}, monomial {list(bad[1])}, coefficient {bad[2]}")
    if not mx.equal(linear_coefficient(f), QI):
        raise FixedPairError("linear coefficient of f differs from Q I_{r,e}")
    if len(f) != r:
        raise FixedPairError("f has the wrong number of components")
    defect = fixed_pair_hom_defect(f, F, phi)
    if defect is not None:
        raise FixedPairError(f"f is not a homomorphism F -> Phi: {defect}")
    equivariance = {}
    for label, _, hom in data.action:
        diff = first_difference(compose_many(hom.map, f), f)
        if diff is not None:
            raise FixedPairError(f"{label} o f != f: component {diff[0]}, monomial {list(diff[1])}")
        equivariance[label] = "pass"
    hom = FglHom(F, phi.law, f, QI)
    return FixedPairResult(Q, e, F, hom, {"condition_iii": certificate}, equivariance)
