"""Formal group laws, their logarithms and homomorphisms, and the explicit catalog."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from gmpy2 import mpq

from .arith import QQ, CyclotomicNumber, MonogenicRing, is_integral, quadratic_discriminant
from .series import (
    SeriesContext,
    SeriesError,
    TruncatedSeries,
    change_ring,
    compose_inverse,
    compose_many,
    embed,
    first_difference,
    first_non_integral,
    linear_coefficient,
    matrix_apply,
    mul_truncated,
    tuple_context,
)


class NotAFormalGroupLaw(ValueError):
    pass


class FormalGroupLaw:
    """A d-tuple of series in 2d variables (x_1..x_d, y_1..y_d)."""

    def __init__(self, law: Sequence[TruncatedSeries], logarithm: Sequence[TruncatedSeries] | None = None):
        ctx = tuple_context(law)
        if ctx.num_vars != 2 * len(law):
            raise NotAFormalGroupLaw(
                f"a {len(law)}-dimensional law needs {2 * len(law)} variables, got {ctx.num_vars}"
            )
        self.law = tuple(law)
        self.dim = len(law)
        self.ctx = ctx
        self.ring = ctx.ring
        self.degree = ctx.max_degree
        self.xctx = SeriesContext(self.dim, self.degree, self.ring)
        self._log = tuple(logarithm) if logarithm is not None else None
        D = linear_coefficient(self.law)
        d = self.dim
        want = [[1 if j % d == i else 0 for j in range(2 * d)] for i in range(d)]
        if any(self.law[i].terms.get(0) for i in range(d)) or D != want:
            raise NotAFormalGroupLaw("law is not X + Y modulo degree 2")

    def logarithm(self) -> tuple[TruncatedSeries, ...]:
        if self._log is None:
            self._log = logarithm(self)
        return self._log

    def x_embed(self, f: TruncatedSeries) -> TruncatedSeries:
        return embed(f, self.ctx, list(range(self.dim)))

    def y_embed(self, f: TruncatedSeries) -> TruncatedSeries:
        return embed(f, self.ctx, list(range(self.dim, 2 * self.dim)))

    def truncated(self, degree: int) -> "FormalGroupLaw":
        ctx = self.ctx.with_degree(degree)
        law = tuple(TruncatedSeries(ctx, dict(s.truncate(degree).terms)) for s in self.law)
        lg = None
        if self._log is not None:
            xctx = self.xctx.with_degree(degree)
            lg = tuple(TruncatedSeries(xctx, dict(s.truncate(degree).terms)) for s in self._log)
        return FormalGroupLaw(law, lg)

    def __eq__(self, other) -> bool:
        return isinstance(other, FormalGroupLaw) and self.law == other.law

    def __repr__(self) -> str:
        return f"FormalGroupLaw(dim={self.dim}, N={self.degree}, ring={self.ring!r})"


# ---------------------------------------------------------------------------
# axioms


@dataclass
class AxiomReport:
    degree: int
    failures: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def first_failure(self) -> dict | None:
        return self.failures[0] if self.failures else None


def _failure(axiom: str, diff) -> dict:
    comp, exps, lhs, rhs = diff
    return {
        "axiom": axiom,
        "component": comp,
        "exponents": list(exps),
        "degree": sum(exps),
        "lhs": lhs,
        "rhs": rhs,
    }


def check_axioms(F: FormalGroupLaw, degree: int | None = None) -> AxiomReport:
    """F(X,0) = X, F(X,Y) = F(Y,X) and F(X,F(Y,Z)) = F(F(X,Y),Z) up to degree."""
    N = F.degree if degree is None else min(degree, F.degree)
    G = F if N == F.degree else F.truncated(N)
    d = G.dim
    report = AxiomReport(N)
    ctx = G.ctx
    X = ctx.variables()[:d]

    zero_y = tuple(
        TruncatedSeries(ctx, {k: c for k, c in s.terms.items() if not any(ctx.unpack(k)[d:])})
        for s in G.law
    )
    diff = first_difference(zero_y, X)
    if diff:
        report.failures.append(_failure("identity", diff))

    swap = list(range(d, 2 * d)) + list(range(d))
    swapped = tuple(embed(s, ctx, swap) for s in G.law)
    diff = first_difference(G.law, swapped)
    if diff:
        report.failures.append(_failure("commutativity", diff))

    c3 = SeriesContext(3 * d, N, G.ring)
    V = c3.variables()
    xs, ys, zs = V[:d], V[d : 2 * d], V[2 * d :]
    F_xy = tuple(embed(s, c3, list(range(2 * d))) for s in G.law)
    F_yz = tuple(embed(s, c3, list(range(d, 3 * d))) for s in G.law)
    lhs = compose_many(G.law, xs + F_yz)
    rhs = compose_many(G.law, F_xy + zs)
    diff = first_difference(lhs, rhs)
    if diff:
        report.failures.append(_failure("associativity", diff))
    return report


# ---------------------------------------------------------------------------
# logarithms


def _matrix_inverse_series(M: list[list[TruncatedSeries]], degree: int) -> list[list[TruncatedSeries]]:
    """Inverse of a matrix of series whose constant part is the identity."""
    d = len(M)
    ctx = M[0][0].ctx
    one = ctx.constant(1)
    Nm = [[M[i][j] - (one if i == j else ctx.zero()) for j in range(d)] for i in range(d)]
    if any(Nm[i][j].terms.get(0) for i in range(d) for j in range(d)):
        raise NotAFormalGroupLaw("dF/dY(X,0) does not start with the identity")
    inv = [[one if i == j else ctx.zero() for j in range(d)] for i in range(d)]
    for k in range(1, degree + 1):
        new = []
        for i in range(d):
            row = []
            for j in range(d):
                acc = one if i == j else ctx.zero()
                for m in range(d):
                    if Nm[i][m].terms and inv[m][j].terms:
                        acc = acc - mul_truncated(Nm[i][m], inv[m][j], k)
                row.append(acc)
            new.append(row)
        inv = new
    return inv


def logarithm(F: FormalGroupLaw, verify: bool = True) -> tuple[TruncatedSeries, ...]:
    """The unique lambda = X mod deg 2 with lambda(F(X,Y)) = lambda(X) + lambda(Y).

    The Y-linear part of the functional equation gives the Jacobian
    d(lambda)(X) = (dF/dY(X,0))^{-1}; lambda is recovered degree by degree
    from it through Euler's identity sum_j x_j d_j lambda_m = m lambda_m.
    A non-closed Jacobian, or a failed re-substitution, means F is not a law.
    """
    d, N = F.dim, F.degree
    xctx = F.xctx
    ctx = F.ctx
    M = [[{} for _ in range(d)] for _ in range(d)]
    for i, s in enumerate(F.law):
        for k, c in s.terms.items():
            exps = ctx.unpack(k)
            ye = exps[d:]
            if sum(ye) == 1:
                M[i][ye.index(1)][xctx.pack(exps[:d])] = c
    Ms = [[TruncatedSeries(xctx, M[i][j]) for j in range(d)] for i in range(d)]
    J = _matrix_inverse_series(Ms, N - 1)
    lam = []
    for l in range(d):
        acc: dict = {}
        for j in range(d):
            unit = xctx.units[j]
            for k, c in J[l][j].terms.items():
                if k + unit < xctx.limit:
                    acc[k + unit] = acc.get(k + unit, 0) + c
        terms = {}
        for k, c in acc.items():
            v = c * mpq(1, k // xctx.degw)
            if v:
                terms[k] = v
        lam_l = TruncatedSeries(xctx, terms)
        for j in range(d):
            if lam_l.derivative(j).truncate(N - 1) != J[l][j].truncate(N - 1):
                raise NotAFormalGroupLaw("the invariant differential is not closed")
        lam.append(lam_l)
    lam = tuple(lam)
    if verify:
        lhs = compose_many(lam, F.law)
        rhs = tuple(F.x_embed(s) + F.y_embed(s) for s in lam)
        diff = first_difference(lhs, rhs)
        if diff:
            raise NotAFormalGroupLaw(f"no logarithm: lambda(F) differs at {diff[1]}")
    return lam


def from_logarithm(lam: Sequence[TruncatedSeries]) -> FormalGroupLaw:
    """F_lambda(X,Y) = lambda^{-1}(lambda(X) + lambda(Y))."""
    xctx = tuple_context(lam)
    d = len(lam)
    if xctx.num_vars != d:
        raise SeriesError("logarithm must have as many components as variables")
    ctx = SeriesContext(2 * d, xctx.max_degree, xctx.ring)
    target = tuple(
        embed(s, ctx, list(range(d))) + embed(s, ctx, list(range(d, 2 * d))) for s in lam
    )
    law = compose_inverse(lam, target)
    return FormalGroupLaw(law, lam)


# ---------------------------------------------------------------------------
# homomorphisms


@dataclass
class FglHom:
    source: FormalGroupLaw
    target: FormalGroupLaw
    map: tuple
    linear_coefficient: list
    integral: bool = True
    witness: tuple | None = None

    def check(self) -> tuple | None:
        """First coefficient where f(F(X,Y)) and F'(f(X), f(Y)) disagree, if any."""
        return hom_defect(self.map, self.source, self.target)


def hom_defect(f: Sequence[TruncatedSeries], F: FormalGroupLaw, G: FormalGroupLaw) -> tuple | None:
    lhs = compose_many(f, F.law)
    fx = tuple(F.x_embed(s) for s in f)
    fy = tuple(F.y_embed(s) for s in f)
    rhs = compose_many(G.law, fx + fy)
    return first_difference(lhs, rhs)


def common_ring(*rings):
    for r in rings:
        if isinstance(r, MonogenicRing):
            return r
    return QQ


def lift_tuple(t: Sequence[TruncatedSeries], ring) -> tuple[TruncatedSeries, ...]:
    if tuple_context(t).ring is ring:
        return tuple(t)
    return tuple(change_ring(s, ring) for s in t)


def hom_from_linear(
    D: Sequence[Sequence],
    F: FormalGroupLaw,
    G: FormalGroupLaw,
    predicate: Callable = is_integral,
) -> FglHom:
    """f = lambda_G^{-1} o D lambda_F, with an integrality verdict under predicate."""
    if len(D) != G.dim or any(len(row) != F.dim for row in D):
        raise ValueError(f"linear coefficient must be {G.dim}x{F.dim}")
    ring = common_ring(F.ring, G.ring, *[c.ring for row in D for c in row if isinstance(c, CyclotomicNumber)])
    lam = lift_tuple(F.logarithm(), ring)
    lam2 = lift_tuple(G.logarithm(), ring)
    if lam[0].ctx.max_degree != lam2[0].ctx.max_degree:
        raise SeriesError("source and target laws have different degree caps")
    f = compose_inverse(lam2, matrix_apply(D, lam))
    bad = first_non_integral(f, predicate)
    return FglHom(F, G, f, [list(r) for r in D], bad is None, bad)


def identity_hom(F: FormalGroupLaw) -> FglHom:
    d = F.dim
    return FglHom(F, F, F.xctx.variables(), [[1 if i == j else 0 for j in range(d)] for i in range(d)])


# ---------------------------------------------------------------------------
# catalog


def _law_context(d: int, N: int, ring=QQ) -> SeriesContext:
    return SeriesContext(2 * d, N, ring)


def additive(N: int, d: int = 1) -> FormalGroupLaw:
    ctx = _law_context(d, N)
    V = ctx.variables()
    lg = SeriesContext(d, N).variables()
    return FormalGroupLaw(tuple(V[i] + V[d + i] for i in range(d)), lg)


def multiplicative_logarithm(N: int, d: int = 1, ring=QQ) -> tuple[TruncatedSeries, ...]:
    """L_m(x) = sum (-1)^{i+1} x^i / i in each coordinate."""
    ctx = SeriesContext(d, N, ring)
    out = []
    for l in range(d):
        terms = {}
        for i in range(1, N + 1):
            e = [0] * d
            e[l] = i
            terms[ctx.pack(e)] = ring.coerce(mpq((-1) ** (i + 1), i))
        out.append(TruncatedSeries(ctx, terms))
    return tuple(out)


def multiplicative(N: int, d: int = 1) -> FormalGroupLaw:
    ctx = _law_context(d, N)
    V = ctx.variables()
    law = tuple(V[i] + V[d + i] + V[i] * V[d + i] for i in range(d))
    return FormalGroupLaw(law, multiplicative_logarithm(N, d))


def f_rs(r: int, s: int, N: int) -> FormalGroupLaw:
    """F_{r,s}(x,y) = (x + y + r x y)(1 - s x y)^{-1}."""
    ctx = _law_context(1, N)
    x, y = ctx.variables()
    num = x + y + (x * y).scale(r)
    sxy = (x * y).scale(s)
    geo = ctx.constant(1)
    term = ctx.constant(1)
    for _ in range(N // 2):
        term = term * sxy
        geo = geo + term
    return FormalGroupLaw((num * geo,))


def sqrt_disc(ring: MonogenicRing):
    """sqrt(q) = r - 2 xi in the quadratic ring Z[xi]."""
    _, r, _ = ring.label
    return ring.xi() * (-2) + r


def f_q(ring: MonogenicRing, N: int) -> FormalGroupLaw:
    """F_q(x,y) = x + y + sqrt(q) x y over Z[xi]."""
    root = sqrt_disc(ring)
    if root * root != ring.coerce(quadratic_discriminant(ring)):
        raise ValueError("r - 2 xi does not square to the discriminant")
    ctx = _law_context(1, N, ring)
    x, y = ctx.variables()
    return FormalGroupLaw((x + y + (x * y).scale(root),))


def direct_sum(F: FormalGroupLaw, G: FormalGroupLaw) -> FormalGroupLaw:
    if F.ring is not G.ring or F.degree != G.degree:
        raise ValueError("direct sum needs laws over the same ring and degree")
    a, b = F.dim, G.dim
    d = a + b
    ctx = _law_context(d, F.degree, F.ring)
    xctx = SeriesContext(d, F.degree, F.ring)
    fmap = list(range(a)) + list(range(d, d + a))
    gmap = list(range(a, d)) + list(range(d + a, 2 * d))
    law = tuple(embed(s, ctx, fmap) for s in F.law) + tuple(embed(s, ctx, gmap) for s in G.law)
    lg = None
    if F._log is not None and G._log is not None:
        lg = tuple(embed(s, xctx, list(range(a))) for s in F._log) + tuple(
            embed(s, xctx, list(range(a, d))) for s in G._log
        )
    return FormalGroupLaw(law, lg)
