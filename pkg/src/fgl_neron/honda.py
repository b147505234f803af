"""Honda operators u = sum C_i Delta^i acting on logarithms, types, and F_Xi.

Delta acts on a series by x -> x^p on variables and by the Frobenius sigma on
coefficients; over rational coefficients sigma is the identity.  A series
lambda is of type u when every coefficient of u(lambda) is divisible by p.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import log
from typing import Callable, Mapping, Sequence

from gmpy2 import mpq

from . import matrix as mx
from .arith import QQ, CyclotomicNumber, factorize, is_integral, is_p_integral, primes_upto
from .formal_group import FormalGroupLaw, from_logarithm, lift_tuple
from .series import (
    SeriesContext,
    TruncatedSeries,
    first_non_integral,
    frobenius_substitute,
    tuple_context,
)


class HondaError(ValueError):
    pass


@dataclass
class FrobeniusPolynomial:
    """u = C_0 + C_1 Delta + C_2 Delta^2 + ... at the prime p."""

    p: int
    coeffs: list
    sigma: Callable | None = None

    def __post_init__(self):
        if not self.coeffs:
            raise HondaError("empty operator")
        self.coeffs = [mx.copy(C) for C in self.coeffs]
        r, c = mx.shape(self.coeffs[0])
        if any(mx.shape(C) != (r, c) for C in self.coeffs):
            raise HondaError("coefficient matrices have different shapes")
        while len(self.coeffs) > 1 and mx.is_zero(self.coeffs[-1]):
            self.coeffs.pop()

    @property
    def rows(self) -> int:
        return len(self.coeffs[0])

    @property
    def cols(self) -> int:
        return len(self.coeffs[0][0])

    @property
    def d(self) -> int:
        return self.rows

    def coefficient(self, i: int):
        return self.coeffs[i] if i < len(self.coeffs) else mx.zeros(self.rows, self.cols)

    def is_type_shape(self) -> bool:
        return self.rows == self.cols and mx.equal(self.coeffs[0], mx.scale(mx.identity(self.rows), self.p))

    def __eq__(self, other) -> bool:
        if not isinstance(other, FrobeniusPolynomial) or other.p != self.p:
            return False
        n = max(len(self.coeffs), len(other.coeffs))
        return all(mx.equal(self.coefficient(i), other.coefficient(i)) for i in range(n))

    def to_json(self) -> dict:
        return {"p": self.p, "coeffs": [mx.to_json(C) for C in self.coeffs]}


def type_from_xi(p: int, xi_p) -> FrobeniusPolynomial:
    """pI - Xi(p) Delta."""
    d = len(xi_p)
    return FrobeniusPolynomial(p, [mx.scale(mx.identity(d), p), mx.neg(xi_p)])


def _sigma_power(sigma: Callable | None, i: int) -> Callable | None:
    if sigma is None or i == 0:
        return None

    def f(a):
        for _ in range(i):
            a = sigma(a)
        return a

    return f


def _operator_ring(u: FrobeniusPolynomial, ring):
    for C in u.coeffs:
        for r in C:
            for a in r:
                if isinstance(a, CyclotomicNumber):
                    return a.ring
    return ring


def apply(u: FrobeniusPolynomial, lam: Sequence[TruncatedSeries]) -> tuple[TruncatedSeries, ...]:
    """(u lambda)(X) = sum_i C_i sigma^i(lambda)(X^{p^i})."""
    ctx = tuple_context(lam)
    if len(lam) != u.cols:
        raise HondaError(f"operator has {u.cols} columns but lambda has {len(lam)} components")
    ring = _operator_ring(u, ctx.ring)
    lam = lift_tuple(lam, ring)
    ctx = lam[0].ctx
    out = [ctx.zero() for _ in range(u.rows)]
    cur = tuple(lam)
    for i, C in enumerate(u.coeffs):
        if i:
            cur = tuple(frobenius_substitute(s, u.p, u.sigma) for s in cur)
            if all(s.is_zero() for s in cur):
                break
        for r in range(u.rows):
            for c in range(u.cols):
                a = C[r][c]
                if a and cur[c].terms:
                    out[r] = out[r] + cur[c].scale(a)
    return tuple(out)


@dataclass
class TypeCheck:
    ok: bool
    p: int
    degree: int
    witness: tuple | None = None

    def describe(self) -> str:
        if self.ok:
            return f"type holds at p={self.p} to degree {self.degree}"
        comp, exps, c = self.witness
        return f"p={self.p}: component {comp}, monomial {list(exps)}: coefficient {c} not divisible by p"


def is_type(u: FrobeniusPolynomial, lam: Sequence[TruncatedSeries], degree: int | None = None) -> TypeCheck:
    """Whether u(lambda) = 0 mod p coefficientwise, up to degree."""
    if not u.is_type_shape():
        raise HondaError("a type must have constant coefficient pI")
    N = tuple_context(lam).max_degree if degree is None else degree
    res = apply(u, lam)
    inv_p = mpq(1, u.p)
    for i, s in enumerate(res):
        for k in sorted(s.terms):
            if k // s.ctx.degw > N:
                break
            c = s.terms[k]
            if not is_p_integral(c * inv_p, u.p):
                return TypeCheck(False, u.p, N, (i, s.ctx.unpack(k), c))
    return TypeCheck(True, u.p, N)


def lambda_from_type(u: FrobeniusPolynomial, degree: int, ring=QQ) -> tuple[TruncatedSeries, ...]:
    """The canonical logarithm (u^{-1} p)(X) of type u.

    Solves lambda = X - (1/p) sum_{i>=1} C_i sigma^i(lambda)(X^{p^i}); the degree-m
    part only sees degrees m / p^i, so iterating from X stabilises.
    """
    if not u.is_type_shape():
        raise HondaError("a type must have constant coefficient pI")
    ctx = SeriesContext(u.d, degree, _operator_ring(u, ring))
    X = ctx.variables()
    tail = FrobeniusPolynomial(u.p, [mx.zeros(u.d, u.d)] + u.coeffs[1:], u.sigma)
    lam = X
    inv_p = mpq(1, u.p)
    for _ in range(int(log(max(degree, 2), u.p)) + 3):
        t = apply(tail, lam)
        new = tuple(x - s.scale(inv_p) for x, s in zip(X, t))
        if new == lam:
            break
        lam = new
    return lam


# ---------------------------------------------------------------------------
# Xi maps


@dataclass
class XiMap:
    """A commuting family of integer matrices Xi(p) indexed by primes."""

    d: int
    entries: Mapping[int, list]
    provenance: str = "user-supplied"
    bound: int = field(default=0)

    def __post_init__(self):
        self.entries = {int(p): mx.to_int(M) for p, M in sorted(self.entries.items())}
        for p, M in self.entries.items():
            if mx.shape(M) != (self.d, self.d):
                raise HondaError(f"Xi({p}) is not {self.d}x{self.d}")
        ps = list(self.entries)
        for i, p in enumerate(ps):
            for q in ps[i + 1 :]:
                if not mx.commute(self.entries[p], self.entries[q]):
                    raise HondaError(f"Xi({p}) and Xi({q}) do not commute")
        if not self.bound:
            self.bound = max(ps) if ps else 1

    def __call__(self, p: int):
        if p not in self.entries:
            raise HondaError(f"Xi({p}) is not defined")
        return self.entries[p]

    def covers(self, N: int) -> bool:
        return all(p in self.entries for p in primes_upto(N))

    def to_json(self) -> dict:
        return {str(p): mx.to_json(M) for p, M in self.entries.items()}


def xi_coefficients(Xi: XiMap, N: int) -> list:
    """[A_1, ..., A_N] with A_m = prod Xi(p_i)^{t_i} for m = prod p_i^{t_i}."""
    if not Xi.covers(N):
        missing = [p for p in primes_upto(N) if p not in Xi.entries]
        raise HondaError(f"Xi is missing primes {missing}")
    out = []
    for m in range(1, N + 1):
        A = mx.identity(Xi.d)
        for p, t in factorize(m):
            A = mx.mul(A, mx.power(Xi(p), t))
        out.append(A)
    return out


def xi_lambda(Xi: XiMap, N: int) -> tuple[TruncatedSeries, ...]:
    """lambda_Xi = sum_m A_m X^m / m, where X^m = (x_1^m, ..., x_d^m)."""
    d = Xi.d
    ctx = SeriesContext(d, N)
    A = xi_coefficients(Xi, N)
    out = []
    for l in range(d):
        terms = {}
        for m in range(1, N + 1):
            for k in range(d):
                a = A[m - 1][l][k]
                if a:
                    e = [0] * d
                    e[k] = m
                    terms[ctx.pack(e)] = mpq(a, m)
        out.append(TruncatedSeries(ctx, terms))
    return tuple(out)


def xi_fgl(Xi: XiMap, N: int) -> tuple[FormalGroupLaw, tuple | None]:
    """F_Xi and the first non-integer coefficient of it (None when integral)."""
    F = from_logarithm(xi_lambda(Xi, N))
    return F, first_non_integral(F.law, is_integral)


# ---------------------------------------------------------------------------
# the hom criterion u' D = w u


@dataclass
class WitnessResult:
    ok: bool
    p: int
    w: list
    failed_at: int | None = None
    reason: str = ""


def default_delta_bound(p: int, degree: int) -> int:
    k = 0
    while p ** (k + 1) <= degree:
        k += 1
    return k + 1


def hom_criterion_witness(
    u_target: FrobeniusPolynomial,
    D,
    u_source: FrobeniusPolynomial,
    delta_degree_bound: int | None = None,
    degree: int = 16,
) -> WitnessResult:
    """Solve u_target D = w u_source for w = sum w_j Delta^j and test p-integrality.

    Comparing Delta^m coefficients (with Delta a = sigma(a) Delta and C_0 = pI):
        p w_m = C'_m sigma^m(D) - sum_{i=1..m} w_{m-i} sigma^{m-i}(C_i).
    """
    p = u_source.p
    if u_target.p != p:
        raise HondaError("types at different primes")
    if not u_source.is_type_shape():
        raise HondaError("source operator must have constant coefficient pI")
    if mx.shape(D) != (u_target.rows, u_source.rows):
        raise HondaError("D has the wrong shape")
    bound = default_delta_bound(p, degree) if delta_degree_bound is None else delta_degree_bound
    sigma = u_source.sigma

    def sig(A, i):
        f = _sigma_power(sigma, i)
        return A if f is None else mx.map_entries(A, f)

    inv_p = mpq(1, p)
    w: list = []
    for m in range(bound + 1):
        acc = mx.mul(u_target.coefficient(m), sig(D, m))
        for i in range(1, m + 1):
            acc = mx.sub(acc, mx.mul(w[m - i], sig(u_source.coefficient(i), m - i)))
        wm = mx.scale(acc, inv_p)
        w.append(wm)
        if not all(is_p_integral(a, p) for r in wm for a in r):
            return WitnessResult(False, p, w, m, f"w_{m} is not {p}-integral")
    return WitnessResult(True, p, w)


def isomorphism_witness(u_target, D, u_source, delta_degree_bound=None, degree=16) -> WitnessResult:
    """Hom criterion with D and, back again, with D^{-1}: both must be p-integral."""
    fwd = hom_criterion_witness(u_target, D, u_source, delta_degree_bound, degree)
    if not fwd.ok:
        return fwd
    back = hom_criterion_witness(u_source, mx.inverse(D), u_target, delta_degree_bound, degree)
    if not back.ok:
        back.reason = "inverse direction: " + back.reason
    return back if not back.ok else fwd
