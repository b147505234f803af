"""Sparse multivariate power series truncated by total degree.

A monomial x^e in ``n`` variables with total degree ``k <= N`` is packed into a
single integer key::

    key = k * B**n + e_1 * B**(n-1) + ... + e_n,      B = N + 1

Since every exponent is at most N < B, adding keys multiplies monomials with
no carries, the truncation test ``deg(a) + deg(b) <= N`` becomes the single
comparison ``key_a + key_b < (N + 1) * B**n``, and sorting keys lists the
terms in graded-lexicographic order.
"""

from __future__ import annotations

from typing import Callable, Iterable, Mapping, Sequence

from gmpy2 import mpq

from .arith import QQ, CyclotomicNumber, MonogenicRing, format_rational, parse_rational


class SeriesError(ValueError):
    pass


class SeriesContext:
    """Ambient ring A[[x_1..x_n]] / (degree > N)."""

    __slots__ = ("num_vars", "max_degree", "ring", "base", "weights", "degw", "limit", "units")

    def __init__(self, num_vars: int, max_degree: int, ring=QQ):
        if num_vars < 1:
            raise SeriesError("need at least one variable")
        if max_degree < 1:
            raise SeriesError("degree cap must be positive")
        self.num_vars = num_vars
        self.max_degree = max_degree
        self.ring = ring
        self.base = b = max_degree + 1
        self.weights = tuple(b ** (num_vars - 1 - i) for i in range(num_vars))
        self.degw = b**num_vars
        self.limit = b * self.degw
        self.units = tuple(self.degw + w for w in self.weights)

    def __eq__(self, other) -> bool:
        return self is other or (
            isinstance(other, SeriesContext)
            and self.num_vars == other.num_vars
            and self.max_degree == other.max_degree
            and self.ring is other.ring
        )

    def __hash__(self) -> int:
        return hash((self.num_vars, self.max_degree, id(self.ring)))

    def __repr__(self) -> str:
        return f"SeriesContext(vars={self.num_vars}, N={self.max_degree}, ring={self.ring!r})"

    def with_degree(self, max_degree: int) -> "SeriesContext":
        return SeriesContext(self.num_vars, max_degree, self.ring)

    # keys ------------------------------------------------------------------
    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != self.num_vars:
            raise SeriesError("exponent vector has the wrong length")
        deg = sum(exps)
        if any(e < 0 for e in exps):
            raise SeriesError("negative exponent")
        return deg * self.degw + sum(e * w for e, w in zip(exps, self.weights))

    def unpack(self, key: int) -> tuple[int, ...]:
        rest = key % self.degw
        out = []
        for w in self.weights:
            e, rest = divmod(rest, w)
            out.append(e)
        return tuple(out)

    def degree_of(self, key: int) -> int:
        return key // self.degw

    def degree_limit(self, degree: int) -> int:
        return (degree + 1) * self.degw

    # constructors ----------------------------------------------------------
    def zero(self) -> "TruncatedSeries":
        return TruncatedSeries(self, {})

    def constant(self, c) -> "TruncatedSeries":
        c = self.ring.coerce(c)
        return TruncatedSeries(self, {0: c} if c else {})

    def var(self, i: int) -> "TruncatedSeries":
        return TruncatedSeries(self, {self.units[i]: self.ring.one})

    def variables(self) -> tuple["TruncatedSeries", ...]:
        return tuple(self.var(i) for i in range(self.num_vars))

    def from_terms(self, terms: Mapping[Sequence[int], object] | Iterable) -> "TruncatedSeries":
        items = terms.items() if isinstance(terms, Mapping) else terms
        out: dict[int, object] = {}
        for exps, c in items:
            if sum(exps) > self.max_degree:
                continue
            k = self.pack(tuple(exps))
            c = self.ring.coerce(c)
            out[k] = out[k] + c if k in out else c
        return TruncatedSeries(self, {k: v for k, v in out.items() if v})


def _coerce_scalar(ring, c):
    if isinstance(c, CyclotomicNumber):
        return c
    return mpq(c)


class TruncatedSeries:
    """Immutable sparse series; ``terms`` maps packed keys to nonzero coefficients."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: SeriesContext, terms: dict):
        self.ctx = ctx
        self.terms = terms

    # inspection ----------------------------------------------------------
    def items(self) -> list[tuple[tuple[int, ...], object]]:
        """(exponents, coefficient) pairs in graded-lexicographic order."""
        return [(self.ctx.unpack(k), self.terms[k]) for k in sorted(self.terms)]

    def coefficient(self, exps: Sequence[int]):
        if sum(exps) > self.ctx.max_degree:
            raise SeriesError("monomial above the truncation degree")
        return self.terms.get(self.ctx.pack(tuple(exps)), self.ctx.ring.zero)

    def constant_term(self):
        return self.terms.get(0, self.ctx.ring.zero)

    def valuation(self) -> int | None:
        if not self.terms:
            return None
        return min(self.terms) // self.ctx.degw

    def degree(self) -> int | None:
        if not self.terms:
            return None
        return max(self.terms) // self.ctx.degw

    def homogeneous(self, k: int) -> "TruncatedSeries":
        lo, hi = k * self.ctx.degw, (k + 1) * self.ctx.degw
        return TruncatedSeries(self.ctx, {key: c for key, c in self.terms.items() if lo <= key < hi})

    def truncate(self, k: int) -> "TruncatedSeries":
        hi = (k + 1) * self.ctx.degw
        return TruncatedSeries(self.ctx, {key: c for key, c in self.terms.items() if key < hi})

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, TruncatedSeries):
            return self.ctx == other.ctx and self.terms == other.terms
        if isinstance(other, int) and other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.terms.items(), key=lambda kv: kv[0])))

    def __repr__(self) -> str:
        return f"TruncatedSeries({to_string(self)})"

    # arithmetic ----------------------------------------------------------
    def _check(self, other: "TruncatedSeries") -> None:
        if self.ctx != other.ctx:
            raise SeriesError(f"context mismatch: {self.ctx} vs {other.ctx}")

    def __add__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self + self.ctx.constant(other)
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k)
            if v is None:
                out[k] = c
            else:
                v = v + c
                if v:
                    out[k] = v
                else:
                    del out[k]
        return TruncatedSeries(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.ctx, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self + (-other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "TruncatedSeries":
        c = _coerce_scalar(self.ctx.ring, c)
        if not c:
            return self.ctx.zero()
        out = {}
        for k, v in self.terms.items():
            w = v * c
            if w:
                out[k] = w
        return TruncatedSeries(self.ctx, out)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check(other)
            return TruncatedSeries(self.ctx, _mul_terms(self.terms, sorted(other.terms.items()), self.ctx.limit))
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def __pow__(self, k: int):
        if k < 0:
            raise SeriesError("negative power")
        out = self.ctx.constant(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def map_coefficients(self, fn: Callable) -> "TruncatedSeries":
        out = {}
        for k, c in self.terms.items():
            v = fn(c)
            if v:
                out[k] = v
        return TruncatedSeries(self.ctx, out)

    def derivative(self, i: int) -> "TruncatedSeries":
        ctx = self.ctx
        unit, w = ctx.units[i], ctx.weights[i]
        out = {}
        for k, c in self.terms.items():
            e = (k % ctx.degw) // w % ctx.base
            if e:
                out[k - unit] = c * e
        return TruncatedSeries(ctx, out)


def _mul_terms(a: dict, b_sorted: list, limit: int) -> dict:
    out: dict = {}
    get = out.get
    for ka, ca in a.items():
        room = limit - ka
        for kb, cb in b_sorted:
            if kb >= room:
                break
            k = ka + kb
            v = get(k)
            out[k] = ca * cb if v is None else v + ca * cb
    return {k: v for k, v in out.items() if v}


def mul_truncated(a: TruncatedSeries, b: TruncatedSeries, degree: int) -> TruncatedSeries:
    """a * b keeping only terms of total degree <= degree."""
    a._check(b)
    return TruncatedSeries(a.ctx, _mul_terms(a.terms, sorted(b.terms.items()), a.ctx.degree_limit(degree)))


# ---------------------------------------------------------------------------
# tuples


SeriesTuple = tuple  # tuple[TruncatedSeries, ...] sharing one context


def tuple_context(t: Sequence[TruncatedSeries]) -> SeriesContext:
    if not t:
        raise SeriesError("empty series tuple")
    ctx = t[0].ctx
    for s in t[1:]:
        if s.ctx != ctx:
            raise SeriesError("series tuple components live in different contexts")
    return ctx


def identity_tuple(ctx: SeriesContext) -> tuple[TruncatedSeries, ...]:
    return ctx.variables()


def matrix_apply(M: Sequence[Sequence], t: Sequence[TruncatedSeries]) -> tuple[TruncatedSeries, ...]:
    """The tuple M t for a matrix of scalars M (rows = output components)."""
    ctx = tuple_context(t)
    if any(len(row) != len(t) for row in M):
        raise SeriesError("matrix/tuple size mismatch")
    out = []
    for row in M:
        acc = ctx.zero()
        for c, s in zip(row, t):
            if c:
                acc = acc + s.scale(c)
        out.append(acc)
    return tuple(out)


def tuple_add(a: Sequence[TruncatedSeries], b: Sequence[TruncatedSeries]) -> tuple:
    return tuple(x + y for x, y in zip(a, b, strict=True))


def tuple_sub(a: Sequence[TruncatedSeries], b: Sequence[TruncatedSeries]) -> tuple:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def compose(outer: TruncatedSeries, inner: Sequence[TruncatedSeries], max_degree: int | None = None) -> TruncatedSeries:
    """outer(inner_1, ..., inner_m), exact up to the inner context's degree cap."""
    return compose_many([outer], inner, max_degree)[0]


def compose_many(
    outers: Sequence[TruncatedSeries],
    inner: Sequence[TruncatedSeries],
    max_degree: int | None = None,
) -> tuple[TruncatedSeries, ...]:
    """Substitute one inner tuple into several outer series, sharing monomial powers."""
    if not outers:
        return ()
    octx = tuple_context(outers)
    ictx = tuple_context(inner)
    if len(inner) != octx.num_vars:
        raise SeriesError(f"outer has {octx.num_vars} variables but {len(inner)} inner series given")
    for g in inner:
        if g.terms.get(0):
            raise SeriesError("inner series has a nonzero constant term")
    N = ictx.max_degree if max_degree is None else min(max_degree, ictx.max_degree)
    limit = ictx.degree_limit(N)
    vals = [g.valuation() for g in inner if g.terms]
    minval = min(vals) if vals else N + 1
    inner_sorted = [sorted(g.terms.items()) for g in inner]
    units = octx.units
    odegw = octx.degw
    cache: dict[int, dict] = {0: {0: ictx.ring.one}}

    def value(key: int) -> dict:
        got = cache.get(key)
        if got is not None:
            return got
        exps = octx.unpack(key)
        i = next(j for j, e in enumerate(exps) if e)
        prev = value(key - units[i])
        v = _mul_terms(prev, inner_sorted[i], limit) if prev else {}
        cache[key] = v
        return v

    results = []
    for f in outers:
        acc: dict = {}
        for key in sorted(f.terms):
            if (key // odegw) * minval > N:
                break
            c = f.terms[key]
            for k, v in value(key).items():
                if k < limit:
                    w = acc.get(k)
                    acc[k] = v * c if w is None else w + v * c
        results.append(TruncatedSeries(ictx, {k: v for k, v in acc.items() if v}))
    return tuple(results)


def linear_coefficient(t: Sequence[TruncatedSeries]) -> list[list]:
    """Matrix D with t(X) = D X mod degree 2."""
    ctx = tuple_context(t)
    return [[s.terms.get(u, ctx.ring.zero) for u in ctx.units] for s in t]


def _is_identity_linear(t: Sequence[TruncatedSeries]) -> bool:
    D = linear_coefficient(t)
    return all(D[i][j] == (1 if i == j else 0) for i in range(len(D)) for j in range(len(D[i])))


def invert_tuple(f: Sequence[TruncatedSeries]) -> tuple[TruncatedSeries, ...]:
    """Compositional inverse of f, which must be X modulo degree 2."""
    ctx = tuple_context(f)
    if len(f) != ctx.num_vars or not _is_identity_linear(f) or any(s.terms.get(0) for s in f):
        raise SeriesError("invert_tuple needs f = X mod degree 2")
    X = ctx.variables()
    return compose_inverse(f, X)


def compose_inverse(lam: Sequence[TruncatedSeries], target: Sequence[TruncatedSeries]) -> tuple[TruncatedSeries, ...]:
    """lam^{-1} o target, solved by the fixed point g = target - (lam - X) o g.

    Each pass makes one more degree exact, so pass k only composes to degree k.
    """
    lctx = tuple_context(lam)
    tctx = tuple_context(target)
    if len(lam) != lctx.num_vars or len(target) != lctx.num_vars:
        raise SeriesError("dimension mismatch in compose_inverse")
    if not _is_identity_linear(lam) or any(s.terms.get(0) for s in lam):
        raise SeriesError("compose_inverse needs lam = X mod degree 2")
    if any(s.terms.get(0) for s in target):
        raise SeriesError("target has a nonzero constant term")
    X = lctx.variables()
    h = [s - x for s, x in zip(lam, X)]
    N = tctx.max_degree
    g = tuple(s.truncate(1) for s in target)
    for k in range(2, N + 1):
        hg = compose_many(h, g, max_degree=k)
        g = tuple(t.truncate(k) - e for t, e in zip(target, hg))
    return g


def frobenius_substitute(f: TruncatedSeries, p: int, coeff_map: Callable | None = None) -> TruncatedSeries:
    """x_i -> x_i^p on monomials and a -> coeff_map(a) on coefficients."""
    ctx = f.ctx
    N = ctx.max_degree
    out = {}
    for k, c in f.terms.items():
        if (k // ctx.degw) * p <= N:
            v = coeff_map(c) if coeff_map is not None else c
            if v:
                out[k * p] = v
    return TruncatedSeries(ctx, out)


def embed(f: TruncatedSeries, ctx: SeriesContext, var_map: Sequence[int]) -> TruncatedSeries:
    """Rename variable i of f to variable var_map[i] of ctx (degree cap of ctx applies)."""
    if len(var_map) != f.ctx.num_vars:
        raise SeriesError("variable map has the wrong length")
    w = [ctx.weights[j] for j in var_map]
    out = {}
    for k, c in f.terms.items():
        deg = k // f.ctx.degw
        if deg > ctx.max_degree:
            continue
        exps = f.ctx.unpack(k)
        out[deg * ctx.degw + sum(e * x for e, x in zip(exps, w))] = ctx.ring.coerce(c) \
            if not isinstance(ctx.ring, MonogenicRing) else _to_ring(ctx.ring, c)
    return TruncatedSeries(ctx, out)


def _to_ring(ring: MonogenicRing, c):
    if isinstance(c, CyclotomicNumber):
        if c.ring is not ring:
            raise SeriesError("coefficient ring mismatch")
        return c
    return ring.coerce(c)


def change_ring(f: TruncatedSeries, ring) -> TruncatedSeries:
    """Same series with rational coefficients viewed in a larger ring."""
    ctx = SeriesContext(f.ctx.num_vars, f.ctx.max_degree, ring)
    return TruncatedSeries(ctx, {k: _to_ring(ring, c) if isinstance(ring, MonogenicRing) else c
                                 for k, c in f.terms.items()})


# ---------------------------------------------------------------------------
# text and serialization


def _coef_str(c) -> str:
    if isinstance(c, CyclotomicNumber):
        return "(" + ", ".join(format_rational(x) for x in c.coords) + ")"
    c = mpq(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def to_string(f: TruncatedSeries, names: Sequence[str] | None = None) -> str:
    ctx = f.ctx
    if names is None:
        names = [f"x{i + 1}" for i in range(ctx.num_vars)]
    parts = []
    for exps, c in f.items():
        mono = "*".join(
            names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(exps) if e
        )
        parts.append(f"{_coef_str(c)}*{mono}" if mono else _coef_str(c))
    return " + ".join(parts) if parts else "0"


def serialize_coefficient(c):
    if isinstance(c, CyclotomicNumber):
        return [format_rational(x) for x in c.coords]
    return format_rational(c)


def parse_coefficient(data, ring):
    if isinstance(data, list):
        if not isinstance(ring, MonogenicRing):
            raise SeriesError("coordinate vector given for a rational series")
        return ring.from_coords(parse_rational(x) for x in data)
    c = parse_rational(str(data))
    return ring.coerce(c)


def serialize_series(f: TruncatedSeries) -> list[dict]:
    return [
        {"exponents": list(exps), "coefficient": serialize_coefficient(c)}
        for exps, c in f.items()
    ]


def deserialize_series(data: Sequence[Mapping], ctx: SeriesContext) -> TruncatedSeries:
    out = {}
    for rec in data:
        exps = tuple(int(e) for e in rec["exponents"])
        if len(exps) != ctx.num_vars:
            raise SeriesError("serialized exponent vector has the wrong length")
        if sum(exps) > ctx.max_degree:
            raise SeriesError(f"serialized monomial {exps} exceeds degree {ctx.max_degree}")
        k = ctx.pack(exps)
        if k in out:
            raise SeriesError(f"duplicate monomial {exps}")
        c = parse_coefficient(rec["coefficient"], ctx.ring)
        if c:
            out[k] = c
    return TruncatedSeries(ctx, out)


def first_non_integral(t: Sequence[TruncatedSeries], predicate: Callable) -> tuple | None:
    """(component, exponents, coefficient) of the first coefficient failing predicate."""
    for i, s in enumerate(t):
        for k in sorted(s.terms):
            c = s.terms[k]
            if not predicate(c):
                return i, s.ctx.unpack(k), c
    return None


def first_difference(a: Sequence[TruncatedSeries], b: Sequence[TruncatedSeries]) -> tuple | None:
    """(component, exponents, a-coefficient, b-coefficient) of the lowest disagreement."""
    best = None
    for i, (x, y) in enumerate(zip(a, b, strict=True)):
        diff = x - y
        if diff.terms:
            k = min(diff.terms)
            if best is None or k < best[0]:
                best = (k, i, x.ctx.unpack(k), x.terms.get(k, x.ctx.ring.zero), y.terms.get(k, y.ctx.ring.zero))
    return None if best is None else best[1:]
