"""Weil restriction of formal group laws along a free basis of Z[xi] over Z.

A point of the restriction in nd variables z_{jd+l} (basis index j, torus
coordinate l) is the d-tuple x_l = sum_j z_{jd+l} e_j over K.  Restricting a
series means substituting these x_l and reading off e-coordinates.  The main
output is Phi, the restriction of the d-fold multiplicative law, with its
logarithm Lambda.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial, gcd
from typing import Sequence

from gmpy2 import mpq

from . import matrix as mx
from .arith import (
    QQ,
    CyclotomicNumber,
    MonogenicRing,
    RingError,
    cyclotomic_ring,
    discrete_log,
    factorize,
    is_generator,
    is_integral,
    kronecker_symbol,
    primitive_root,
    quadratic_discriminant,
    quadratic_ring,
)
from .formal_group import FormalGroupLaw, from_logarithm, multiplicative_logarithm
from .honda import FrobeniusPolynomial
from .series import (
    SeriesContext,
    TruncatedSeries,
    compose_many,
    first_non_integral,
    tuple_context,
)


class WeilError(ValueError):
    pass


# ---------------------------------------------------------------------------
# bases


class ExtensionBasis:
    """A Q-basis e_0..e_{n-1} of K given in power-basis coordinates.

    ``transition`` has the power coordinates of e_j in column j; ``to_basis``
    is its inverse and converts power coordinates to e-coordinates.
    """

    def __init__(self, ring: MonogenicRing, elements: Sequence[CyclotomicNumber], kind: str = "custom", gamma=None):
        self.ring = ring
        self.elements = tuple(elements)
        self.n = ring.degree
        if len(self.elements) != self.n:
            raise WeilError("basis has the wrong length")
        self.kind = kind
        self.gamma = gamma
        self.transition = mx.transpose([list(e.coords) for e in self.elements])
        try:
            self.to_basis = mx.inverse(self.transition)
        except ZeroDivisionError as exc:
            raise WeilError("basis elements are linearly dependent") from exc
        self.unimodular = mx.is_integer(self.transition) and abs(mx.det(self.transition)) == 1
        self._table = None

    def coords(self, a) -> list:
        """e-coordinates of a."""
        if not isinstance(a, CyclotomicNumber):
            a = self.ring.coerce(a)
        return mx.mat_vec(self.to_basis, list(a.coords))

    def element(self, coords: Sequence) -> CyclotomicNumber:
        out = self.ring.zero
        for c, e in zip(coords, self.elements):
            if c:
                out = out + e * c
        return out

    def structure_constants(self) -> list:
        """table[a][b] = e-coordinates of e_a e_b."""
        if self._table is None:
            self._table = [
                [mx.normalize([self.coords(ea * eb)])[0] for eb in self.elements] for ea in self.elements
            ]
        return self._table

    def galois_matrix(self, map_index: int) -> list:
        """M with sigma(e_b) = sum_a M[a][b] e_a."""
        from .arith import galois_apply

        cols = [self.coords(galois_apply(self.ring, map_index, e)) for e in self.elements]
        return mx.normalize(mx.transpose(cols))

    def to_json(self) -> dict:
        out = {"kind": self.kind, "elements": [[str(c) for c in e.coords] for e in self.elements]}
        if self.gamma is not None:
            out["primes"] = list(self.gamma.primes)
            out["s"] = list(self.gamma.s)
        return out


@dataclass(frozen=True)
class GammaIndex:
    """gamma(alpha) = sum alpha_i n_i with n_i = prod_{j<i} (p_j - 1)."""

    q: int
    primes: tuple
    s: tuple

    @property
    def orders(self) -> tuple:
        return tuple(p - 1 for p in self.primes)

    @property
    def strides(self) -> tuple:
        out, acc = [], 1
        for p in self.primes:
            out.append(acc)
            acc *= p - 1
        return tuple(out)

    @property
    def n(self) -> int:
        out = 1
        for p in self.primes:
            out *= p - 1
        return out

    def gamma(self, alpha: Sequence[int]) -> int:
        return sum(a * m for a, m in zip(alpha, self.strides))

    def alpha(self, g: int) -> tuple:
        return tuple((g // m) % o for m, o in zip(self.strides, self.orders))

    def log(self, t: int) -> tuple:
        """(r_1(t), ..., r_k(t)) with t = s_i^{r_i} mod p_i."""
        return tuple(discrete_log(t % p, s, p) for p, s in zip(self.primes, self.s))

    def generator_unit(self, i: int) -> int:
        """t with t = s_i mod p_i and t = 1 mod p_j for j != i (the map sigma_i)."""
        t = 0
        for j, p in enumerate(self.primes):
            target = self.s[j] if j == i else 1
            m = self.q // p
            t += target * m * pow(m, -1, p)
        return t % self.q


def cyclotomic_basis(q: int, s_choices: Sequence[int] | None = None, ring: MonogenicRing | None = None) -> ExtensionBasis:
    """The basis e_{gamma(alpha)} = prod xi_i^{s_i^{alpha_i}}, xi_i = xi^{q/p_i}."""
    ring = ring or cyclotomic_ring(q)
    primes = tuple(p for p, _ in factorize(q))
    if s_choices is None:
        s = tuple(primitive_root(p) for p in primes)
    else:
        s = tuple(int(x) for x in s_choices)
        if len(s) != len(primes):
            raise WeilError(f"need one generator per prime of {q}, got {len(s)}")
        for si, p in zip(s, primes):
            if not is_generator(si, p):
                raise WeilError(f"{si} does not generate (Z/{p})^*")
    G = GammaIndex(q, primes, s)
    xi = ring.xi()
    elements = []
    for g in range(G.n):
        alpha = G.alpha(g)
        exp = sum((q // p) * pow(si, a, p) for p, si, a in zip(primes, s, alpha)) % q
        elements.append(xi**exp)
    basis = ExtensionBasis(ring, elements, "cyclotomic", G)
    if not basis.unimodular:
        raise WeilError("cyclotomic basis is not a Z-basis of Z[xi]")
    return basis


def quadratic_basis(r: int, s: int, ring: MonogenicRing | None = None) -> ExtensionBasis:
    """The basis (1, xi) of Z[xi], xi^2 - r xi + s = 0."""
    ring = ring or quadratic_ring(r, s)
    return ExtensionBasis(ring, [ring.one, ring.xi()], "quadratic")


def sqrt_basis(ring: MonogenicRing) -> ExtensionBasis:
    """The basis (1, r - 2 xi) = (1, sqrt q); only a basis of Z[sqrt q]."""
    _, r, _ = ring.label
    return ExtensionBasis(ring, [ring.one, ring.xi() * (-2) + r], "sqrt")


def transition_matrix(old: ExtensionBasis, new: ExtensionBasis) -> list:
    """W with new_j = sum_i W[i][j] old_i."""
    if old.ring is not new.ring:
        raise WeilError("bases over different rings")
    return mx.normalize(mx.transpose([old.coords(e) for e in new.elements]))


# ---------------------------------------------------------------------------
# restriction of series


def variable_index(j: int, l: int, d: int) -> int:
    """0-based position of z_{jd+l} for basis index j and coordinate l (0-based)."""
    return j * d + l


def _split(series_over_k: TruncatedSeries, basis: ExtensionBasis, ctx: SeriesContext) -> list[TruncatedSeries]:
    comps = [dict() for _ in range(basis.n)]
    for k, c in series_over_k.terms.items():
        for j, v in enumerate(basis.coords(c)):
            if v:
                comps[j][k] = mpq(v)
    return [TruncatedSeries(ctx, t) for t in comps]


def restrict_tuple(t: Sequence[TruncatedSeries], basis: ExtensionBasis, doubled: bool = False) -> tuple[TruncatedSeries, ...]:
    """Weil restriction of a tuple of series over K.

    With ``doubled`` the input lives in 2d variables (X, Y) and the output in
    2nd variables (z, z'), as needed for a group law.
    """
    ctx_in = tuple_context(t)
    d = len(t)
    blocks = 2 if doubled else 1
    if ctx_in.num_vars != blocks * d:
        raise WeilError("series tuple has the wrong number of variables")
    n = basis.n
    K = basis.ring
    nd = n * d
    kctx = SeriesContext(blocks * nd, ctx_in.max_degree, K)
    qctx = SeriesContext(blocks * nd, ctx_in.max_degree, QQ)
    inner = []
    for b in range(blocks):
        for l in range(d):
            terms = {}
            for j in range(n):
                terms[kctx.units[b * nd + variable_index(j, l, d)]] = basis.elements[j]
            inner.append(TruncatedSeries(kctx, terms))
    lifted = []
    for s in t:
        lifted.append(TruncatedSeries(SeriesContext(ctx_in.num_vars, ctx_in.max_degree, K),
                                      {k: K.coerce(c) for k, c in s.terms.items()}))
    images = compose_many(lifted, inner)
    out: list = [None] * nd
    for l, img in enumerate(images):
        for j, comp in enumerate(_split(img, basis, qctx)):
            out[variable_index(j, l, d)] = comp
    return tuple(out)


def restrict_logarithm(lam: Sequence[TruncatedSeries], basis: ExtensionBasis) -> tuple[TruncatedSeries, ...]:
    """Lambda with sum_j Lambda_{jd+l} e_j = lambda_l(sum_i z_{id+.} e_i)."""
    return restrict_tuple(lam, basis)


def restrict_law(F: FormalGroupLaw, basis: ExtensionBasis) -> FormalGroupLaw:
    return FormalGroupLaw(restrict_tuple(F.law, basis, doubled=True))


def _monomial_products(basis: ExtensionBasis, N: int):
    """Yield (exponents a, e-coords of prod e_i^{a_i}) for 1 <= |a| <= N (graded)."""
    n = basis.n
    table = basis.structure_constants()
    one = basis.coords(basis.ring.one)
    prev = {tuple([0] * n): [mpq(c) for c in one]}
    for deg in range(1, N + 1):
        cur = {}
        for a, v in prev.items():
            start = max((i for i, e in enumerate(a) if e), default=0)
            for i in range(start, n):
                b = list(a)
                b[i] += 1
                b = tuple(b)
                w = [0] * n
                for m, x in enumerate(v):
                    if x:
                        row = table[m][i]
                        for j, c in enumerate(row):
                            if c:
                                w[j] += x * c
                cur[b] = w
        for b, w in cur.items():
            yield b, w
        prev = cur


def _restrict_power_series(coeff, basis: ExtensionBasis, d: int, N: int) -> tuple[TruncatedSeries, ...]:
    """Restriction of the one-variable series g(x) = sum coeff(m) x^m, applied to each coordinate.

    Uses g(sum z_i e_i) = sum_a coeff(|a|) multinomial(a) prod e_i^{a_i} z^a.
    """
    n = basis.n
    ctx = SeriesContext(n * d, N)
    comps = [[dict() for _ in range(d)] for _ in range(n)]
    for a, w in _monomial_products(basis, N):
        m = sum(a)
        multi = factorial(m)
        for e in a:
            multi //= factorial(e)
        c = coeff(m) * multi
        if not c:
            continue
        for l in range(d):
            exps = [0] * (n * d)
            for i, e in enumerate(a):
                exps[variable_index(i, l, d)] = e
            key = ctx.pack(exps)
            for j, x in enumerate(w):
                if x:
                    comps[j][l][key] = c * x
    out: list = [None] * (n * d)
    for j in range(n):
        for l in range(d):
            out[variable_index(j, l, d)] = TruncatedSeries(ctx, comps[j][l])
    return tuple(out)


def restricted_multiplicative_logarithm(basis: ExtensionBasis, d: int, N: int) -> tuple[TruncatedSeries, ...]:
    """Lambda = restriction of L_m^d, by the multinomial expansion."""
    return _restrict_power_series(lambda m: mpq((-1) ** (m + 1), m), basis, d, N)


def restricted_exponential(basis: ExtensionBasis, d: int, N: int) -> tuple[TruncatedSeries, ...]:
    """Lambda^{-1} = restriction of (exp - 1)^d."""
    return _restrict_power_series(lambda m: mpq(1, factorial(m)), basis, d, N)


def apply_restricted_exponential(basis: ExtensionBasis, d: int, G: Sequence[TruncatedSeries]) -> tuple[TruncatedSeries, ...]:
    """Lambda^{-1} o G, evaluated as exp(sum_j G_{jd+l} e_j) - 1 in K[[Z]].

    exp is expanded with the graded recurrence m E_m = sum_k k psi_k E_{m-k}, so
    the cost is that of one truncated product per coordinate l.
    """
    gctx = tuple_context(G)
    n = basis.n
    if len(G) != n * d:
        raise WeilError("G must have nd components")
    K = basis.ring
    N = gctx.max_degree
    kctx = SeriesContext(gctx.num_vars, N, K)
    qctx = SeriesContext(gctx.num_vars, N, QQ)
    out: list = [None] * (n * d)
    for l in range(d):
        psi: dict = {}
        for j in range(n):
            e = basis.elements[j]
            for k, c in G[variable_index(j, l, d)].terms.items():
                if k < kctx.degw:
                    raise WeilError("G has a constant term")
                v = e * c
                psi[k] = psi[k] + v if k in psi else v
        psi_parts = [TruncatedSeries(kctx, {}) for _ in range(N + 1)]
        for k, v in psi.items():
            if v:
                psi_parts[k // kctx.degw].terms[k] = v
        E = [TruncatedSeries(kctx, {0: K.one})]
        for m in range(1, N + 1):
            acc = TruncatedSeries(kctx, {})
            for k in range(1, m + 1):
                if psi_parts[k].terms and E[m - k].terms:
                    acc = acc + (psi_parts[k] * E[m - k]).scale(k)
            E.append(acc.scale(mpq(1, m)))
        total = TruncatedSeries(kctx, {})
        for m in range(1, N + 1):
            total = total + E[m]
        for j, comp in enumerate(_split(total, basis, qctx)):
            out[variable_index(j, l, d)] = comp
    return tuple(out)


# ---------------------------------------------------------------------------
# Phi


@dataclass
class RestrictedLaw:
    law: FormalGroupLaw
    d: int
    basis: ExtensionBasis
    logarithm: tuple
    method: str

    @property
    def dim(self) -> int:
        return self.law.dim

    @property
    def degree(self) -> int:
        return self.law.degree


def phi_from_multiplication(basis: ExtensionBasis, d: int, N: int) -> tuple[TruncatedSeries, ...]:
    """Phi as coordinates of (1 + x)(1 + y) - 1 = x + y + x y in K^d."""
    n = basis.n
    nd = n * d
    table = basis.structure_constants()
    ctx = SeriesContext(2 * nd, N)
    V = ctx.variables()
    out: list = [None] * nd
    for l in range(d):
        for j in range(n):
            idx = variable_index(j, l, d)
            s = V[idx] + V[nd + idx]
            for a in range(n):
                for b in range(n):
                    c = table[a][b][j]
                    if c:
                        s = s + (V[variable_index(a, l, d)] * V[nd + variable_index(b, l, d)]).scale(c)
            out[idx] = s
    return tuple(out)


def build_phi(d: int, basis: ExtensionBasis, N: int, method: str = "logarithm") -> RestrictedLaw:
    """Phi = restriction of the d-fold multiplicative law, with logarithm Lambda.

    ``method="logarithm"`` forms Lambda^{-1}(Lambda(X) + Lambda(Y)) with the
    generic series engine; ``method="multiplication"`` writes Phi directly from
    the multiplication table of the basis.  Both must give the same law.
    """
    lam = restricted_multiplicative_logarithm(basis, d, N)
    if method == "logarithm":
        law = from_logarithm(lam).law
    elif method == "multiplication":
        law = phi_from_multiplication(basis, d, N)
    else:
        raise WeilError(f"unknown method {method!r}")
    bad = first_non_integral(law, is_integral)
    if bad is not None:
        raise WeilError(f"Phi has a non-integral coefficient at component {bad[0]}, monomial {bad[1]}: {bad[2]}")
    return RestrictedLaw(FormalGroupLaw(law, lam), d, basis, lam, method)


def basis_change_hom(F: FormalGroupLaw, old: ExtensionBasis, new: ExtensionBasis):
    """The hom from the restriction along ``new`` to the one along ``old``.

    Its linear coefficient is I_d (x) W with W the transition matrix; the map
    is that linear substitution exactly.
    """
    from .formal_group import hom_from_linear

    W = transition_matrix(old, new)
    d = F.dim
    R_old = restrict_law(F, old)
    R_new = restrict_law(F, new)
    D = mx.kron(mx.identity(d), W)
    return hom_from_linear(D, R_new, R_old, predicate=lambda c: True)


# ---------------------------------------------------------------------------
# types of Lambda


def _cyclotomic_V(basis: ExtensionBasis, p: int) -> tuple[list, str]:
    G = basis.gamma
    factors = []
    status = "verified"
    if G.q % p:
        r = G.log(p)
        for pi, ri in zip(G.primes, r):
            factors.append(mx.power(mx.perm_matrix(pi - 1), ri))
    else:
        i = G.primes.index(p)
        status = "stated"
        for j, pj in enumerate(G.primes):
            if j == i:
                factors.append(mx.sub(mx.scale(mx.identity(pj - 1), pj), mx.jp_matrix(pj - 1)))
            else:
                rj = discrete_log(p % pj, G.s[j], pj)
                factors.append(mx.power(mx.perm_matrix(pj - 1), rj))
    return mx.kron_all(factors), status


def _quadratic_V(basis: ExtensionBasis, p: int) -> tuple[list, str]:
    _, r, _ = basis.ring.label
    q = quadratic_discriminant(basis.ring)
    chi = kronecker_symbol(q, p)
    if chi == 1:
        return mx.identity(2), "verified"
    if chi == -1:
        return [[1, r], [0, -1]], "verified"
    return [[1, mpq(r, 2)], [0, 0]], "stated"


def phi_type(basis: ExtensionBasis, d: int, p: int) -> tuple[FrobeniusPolynomial, str]:
    """v_p = pI_{nd} - (I_d (x) V_p) Delta, with a status tag.

    The tag is "verified" on the unramified branch, where the type is a
    consequence of the Frobenius permuting the basis, and "stated" at
    ramified primes, where the matrix is taken as given.
    """
    if basis.kind == "cyclotomic":
        V, status = _cyclotomic_V(basis, p)
    elif basis.kind == "quadratic":
        V, status = _quadratic_V(basis, p)
    else:
        raise WeilError("types are known only for the cyclotomic and quadratic bases")
    nd = basis.n * d
    return FrobeniusPolynomial(p, [mx.scale(mx.identity(nd), p), mx.neg(mx.kron(mx.identity(d), V))]), status


def phi_type_unramified(basis: ExtensionBasis, d: int, p: int) -> FrobeniusPolynomial:
    u, status = phi_type(basis, d, p)
    if status != "verified":
        raise RingError(f"{p} is ramified; use phi_type for the stated matrix")
    return u


def conductor_of(basis: ExtensionBasis) -> int:
    if basis.kind == "cyclotomic":
        return basis.gamma.q
    if basis.kind in ("quadratic", "sqrt"):
        return abs(quadratic_discriminant(basis.ring))
    raise WeilError("unknown conductor")


def is_unramified(basis: ExtensionBasis, p: int) -> bool:
    return gcd(conductor_of(basis), p) == 1
