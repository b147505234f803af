"""Exact coefficient rings: the rationals and monogenic number rings Z[xi].

Rationals are ``gmpy2.mpq`` values.  A ``MonogenicRing`` presents Q(xi) by a
monic integer minimal polynomial; its elements (``CyclotomicNumber``) are
stored as power-basis coordinates, fully reduced, so equality is structural.
Every constructor here produces a ring where Z[xi] is the maximal order, which
is what lets p-integrality be read off the power-basis denominators.
"""

from __future__ import annotations

from functools import lru_cache
from math import gcd, isqrt
from typing import Iterable, Sequence

from gmpy2 import mpq

Rational = type(mpq(0))

ZERO = mpq(0)
ONE = mpq(1)


class RingError(ValueError):
    """Raised for invalid ring data (non-squarefree conductor, bad discriminant, ...)."""


def rational(x, den=None) -> Rational:
    if den is None:
        if isinstance(x, str):
            return parse_rational(x)
        return mpq(x)
    return mpq(x, den)


def parse_rational(text: str) -> Rational:
    text = text.strip()
    if "/" in text:
        num, den = text.split("/")
        return mpq(int(num), int(den))
    return mpq(int(text))


def format_rational(c) -> str:
    c = mpq(c)
    return f"{c.numerator}/{c.denominator}"


# ---------------------------------------------------------------------------
# small number theory


def factorize(n: int) -> list[tuple[int, int]]:
    n = abs(n)
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def is_prime(n: int) -> bool:
    return n >= 2 and factorize(n) == [(n, 1)]


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for i in range(2, isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i :: i] = bytearray(len(sieve[i * i :: i]))
    return [i for i, flag in enumerate(sieve) if flag]


def is_squarefree(n: int) -> bool:
    return n != 0 and all(e == 1 for _, e in factorize(n))


def mobius(n: int) -> int:
    f = factorize(n)
    if any(e > 1 for _, e in f):
        return 0
    return -1 if len(f) % 2 else 1


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def kronecker_symbol(a: int, p: int) -> int:
    """(a/p) for a prime p; at p = 2 it is the Kronecker reading (a mod 8)."""
    if a % p == 0:
        return 0
    if p == 2:
        return 1 if a % 8 in (1, 7) else -1
    return 1 if pow(a % p, (p - 1) // 2, p) == 1 else -1


def primitive_root(p: int) -> int:
    """Smallest generator of (Z/p)^*."""
    if p == 2:
        return 1
    factors = [f for f, _ in factorize(p - 1)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // f, p) != 1 for f in factors):
            return g
    raise RingError(f"no primitive root mod {p}")


def is_generator(s: int, p: int) -> bool:
    if p == 2:
        return s % 2 == 1
    return s % p != 0 and len({pow(s, k, p) for k in range(p - 1)}) == p - 1


def discrete_log(a: int, s: int, p: int) -> int:
    """r in 0..p-2 with s^r = a mod p, by exhaustive search."""
    a %= p
    x = 1 % p
    for r in range(max(p - 1, 1)):
        if x == a:
            return r
        x = x * s % p
    raise RingError(f"{a} is not a power of {s} mod {p}")


# ---------------------------------------------------------------------------
# integer polynomials (coefficient lists, lowest degree first)


def _poly_trim(a: list[int]) -> list[int]:
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_trim(out)


def poly_divexact(a: Sequence[int], b: Sequence[int]) -> list[int]:
    """Exact quotient of integer polynomials with b monic."""
    a = list(a)
    if b[-1] != 1:
        raise ValueError("divisor must be monic")
    q = [0] * max(len(a) - len(b) + 1, 1)
    for k in range(len(a) - len(b), -1, -1):
        c = a[k + len(b) - 1]
        q[k] = c
        if c:
            for j, y in enumerate(b):
                a[k + j] -= c * y
    if any(a):
        raise ValueError("division is not exact")
    return _poly_trim(q)


@lru_cache(maxsize=None)
def _cyclotomic(q: int) -> tuple:
    num = [-1] + [0] * (q - 1) + [1]
    for d in range(1, q):
        if q % d == 0:
            num = poly_divexact(num, _cyclotomic(d))
    return tuple(num)


def cyclotomic_polynomial(q: int) -> list[int]:
    """Phi_q by dividing x^q - 1 by Phi_d for every proper divisor d."""
    return list(_cyclotomic(q))


# ---------------------------------------------------------------------------
# rings


class _RationalField:
    """Descriptor for Q as a coefficient ring."""

    name = "Q"
    degree = 1
    zero = ZERO
    one = ONE

    def coerce(self, x) -> Rational:
        return mpq(x)

    def __repr__(self) -> str:
        return "QQ"


QQ = _RationalField()


class MonogenicRing:
    """Q(xi) = Q[x]/(min_poly) with explicit Galois maps xi -> g_k(xi)."""

    def __init__(
        self,
        min_poly: Sequence[int],
        galois_images: Sequence[Sequence[int]],
        label: object = None,
        galois_labels: Sequence[object] | None = None,
    ):
        min_poly = [int(c) for c in min_poly]
        if len(min_poly) < 2 or min_poly[-1] != 1:
            raise RingError("minimal polynomial must be monic of degree >= 1")
        self.min_poly = tuple(min_poly)
        self.degree = n = len(min_poly) - 1
        self.label = label
        self.name = f"Q[x]/({_poly_str(min_poly)})"
        # xi^k for n <= k <= 2n-2 as sparse coordinate rows
        high = []
        cur = [-c for c in min_poly[:-1]]
        for _ in range(n, 2 * n - 1):
            high.append(tuple((i, mpq(c)) for i, c in enumerate(cur) if c))
            top = cur[-1]
            cur = [0] + cur[:-1]
            if top:
                for i in range(n):
                    cur[i] -= top * min_poly[i]
        self._high = high
        self.zero = CyclotomicNumber(self, (ZERO,) * n)
        self.one = CyclotomicNumber(self, (ONE,) + (ZERO,) * (n - 1))
        self.galois_images = tuple(tuple(int(c) for c in g) for g in galois_images)
        self.galois_labels = tuple(galois_labels) if galois_labels else tuple(
            range(len(self.galois_images))
        )
        self._galois_mats = []
        for g in self.galois_images:
            img = self.from_poly(g)
            if self.eval_poly(self.min_poly, img) != self.zero:
                raise RingError(f"galois image {g} is not a root of the minimal polynomial")
            cols = [self.one]
            for _ in range(1, n):
                cols.append(cols[-1] * img)
            self._galois_mats.append(tuple(c.coords for c in cols))

    # construction -----------------------------------------------------
    def from_coords(self, coords: Iterable) -> "CyclotomicNumber":
        coords = tuple(mpq(c) for c in coords)
        if len(coords) != self.degree:
            raise RingError("wrong number of coordinates")
        return CyclotomicNumber(self, coords)

    def from_poly(self, coeffs: Sequence) -> "CyclotomicNumber":
        xi = self.xi()
        out = self.zero
        power = self.one
        for c in coeffs:
            if c:
                out = out + power * mpq(c)
            power = power * xi
        return out

    def xi(self) -> "CyclotomicNumber":
        if self.degree == 1:
            return self.from_coords([-self.min_poly[0]])
        return CyclotomicNumber(self, tuple(ONE if i == 1 else ZERO for i in range(self.degree)))

    def coerce(self, x) -> "CyclotomicNumber":
        if isinstance(x, CyclotomicNumber):
            if x.ring is not self:
                raise RingError("element of a different ring")
            return x
        return CyclotomicNumber(self, (mpq(x),) + (ZERO,) * (self.degree - 1))

    def eval_poly(self, coeffs: Sequence[int], a: "CyclotomicNumber") -> "CyclotomicNumber":
        out = self.zero
        for c in reversed(coeffs):
            out = out * a + c
        return out

    # arithmetic kernels ----------------------------------------------
    def _mul(self, a: tuple, b: tuple) -> tuple:
        n = self.degree
        prod = [ZERO] * (2 * n - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        prod[i + j] += x * y
        out = prod[:n]
        for k, row in enumerate(self._high):
            c = prod[n + k]
            if c:
                for i, t in row:
                    out[i] += c * t
        return tuple(out)

    @property
    def num_galois(self) -> int:
        return len(self.galois_images)

    def __repr__(self) -> str:
        return f"MonogenicRing({self.name}, label={self.label!r})"


def _poly_str(coeffs: Sequence[int]) -> str:
    terms = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c:
            mono = "" if k == 0 else ("x" if k == 1 else f"x^{k}")
            if mono and abs(c) == 1:
                coef = "-" if c < 0 else "+"
            else:
                coef = f"{c:+d}"
            terms.append(f"{coef}{mono}")
    s = "".join(terms) or "0"
    return s[1:] if s.startswith("+") else s


class CyclotomicNumber:
    """Element of a MonogenicRing in power-basis coordinates."""

    __slots__ = ("ring", "coords")

    def __init__(self, ring: MonogenicRing, coords: tuple):
        self.ring = ring
        self.coords = coords

    def _lift(self, other):
        if isinstance(other, CyclotomicNumber):
            if other.ring is not self.ring:
                raise RingError("elements of different rings")
            return other.coords
        if isinstance(other, (int, Rational)):
            return (mpq(other),) + (ZERO,) * (self.ring.degree - 1)
        return None

    def __add__(self, other):
        b = self._lift(other)
        if b is None:
            return NotImplemented
        return CyclotomicNumber(self.ring, tuple(x + y for x, y in zip(self.coords, b)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicNumber(self.ring, tuple(-x for x in self.coords))

    def __sub__(self, other):
        b = self._lift(other)
        if b is None:
            return NotImplemented
        return CyclotomicNumber(self.ring, tuple(x - y for x, y in zip(self.coords, b)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            return CyclotomicNumber(self.ring, tuple(x * other for x in self.coords))
        if isinstance(other, CyclotomicNumber):
            if other.ring is not self.ring:
                raise RingError("elements of different rings")
            return CyclotomicNumber(self.ring, self.ring._mul(self.coords, other.coords))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            inv = 1 / mpq(other)
            return CyclotomicNumber(self.ring, tuple(x * inv for x in self.coords))
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = self.ring.one
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __bool__(self) -> bool:
        return any(self.coords)

    def __eq__(self, other) -> bool:
        if isinstance(other, CyclotomicNumber):
            return other.ring is self.ring and other.coords == self.coords
        if isinstance(other, (int, Rational)):
            return self.coords == self._lift(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coords)

    def __repr__(self) -> str:
        return "CyclotomicNumber(" + ", ".join(format_rational(c) for c in self.coords) + ")"


# ---------------------------------------------------------------------------
# constructors and queries


def cyclotomic_ring(q: int) -> MonogenicRing:
    """Q(zeta_q) for squarefree q >= 3, with every map xi -> xi^t, gcd(t, q) = 1."""
    if q < 3:
        raise RingError(f"conductor must be >= 3, got {q}")
    if not is_squarefree(q):
        raise RingError(
            f"conductor {q} is not squarefree: the extension would be wildly ramified"
        )
    phi = cyclotomic_polynomial(q)
    units = [t for t in range(1, q) if gcd(t, q) == 1]
    images = []
    for t in units:
        img = [0] * (t + 1)
        img[t] = 1
        images.append(img)
    ring = MonogenicRing(phi, images, label=q, galois_labels=units)
    return ring


def quadratic_ring(r: int, s: int) -> MonogenicRing:
    """Z[xi] with xi^2 - r xi + s = 0, tame and non-split: r^2 - 4s odd, non-square."""
    q = r * r - 4 * s
    if q % 2 == 0:
        raise RingError(f"discriminant {q} is even: 2 would be wildly ramified")
    if is_square(q):
        raise RingError(f"discriminant {q} is a square: the extension splits")
    if not is_squarefree(q):
        raise RingError(f"discriminant {q} is not squarefree: Z[xi] is not maximal")
    return MonogenicRing([s, -r, 1], [[0, 1], [r, -1]], label=("quadratic", r, s),
                         galois_labels=["id", "sigma"])


def quadratic_discriminant(ring: MonogenicRing) -> int:
    _, r, s = ring.label
    return r * r - 4 * s


def galois_apply(ring: MonogenicRing, map_index: int, a):
    """Image of a under the map_index-th Galois map; rationals are fixed."""
    if not 0 <= map_index < ring.num_galois:
        raise IndexError(f"galois map index {map_index} out of range")
    if not isinstance(a, CyclotomicNumber):
        return a
    mat = ring._galois_mats[map_index]
    n = ring.degree
    out = [ZERO] * n
    for k, c in enumerate(a.coords):
        if c:
            for i, t in enumerate(mat[k]):
                if t:
                    out[i] += c * t
    return CyclotomicNumber(ring, tuple(out))


def galois_map(ring: MonogenicRing, map_index: int):
    """The map_index-th Galois map as a callable on coefficients."""
    return lambda a: galois_apply(ring, map_index, a)


def is_p_integral(a, p: int) -> bool:
    if isinstance(a, CyclotomicNumber):
        return all(mpq(c).denominator % p for c in a.coords)
    return mpq(a).denominator % p != 0


def is_integral(a) -> bool:
    if isinstance(a, CyclotomicNumber):
        return all(mpq(c).denominator == 1 for c in a.coords)
    return mpq(a).denominator == 1


def p_valuation(a, p: int) -> int | None:
    """p-adic valuation of a rational (None for zero)."""
    a = mpq(a)
    if not a:
        return None
    v = 0
    num, den = a.numerator, a.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def frobenius_index(ring_or_q, p: int) -> int:
    """Index of the map xi -> xi^(p mod q) in a cyclotomic ring."""
    if isinstance(ring_or_q, MonogenicRing):
        q = ring_or_q.label
        ring = ring_or_q
    else:
        q = ring_or_q
        ring = None
    if q % p == 0:
        raise RingError(f"{p} divides the conductor {q}: ramified prime has no Frobenius")
    t = p % q
    units = ring.galois_labels if ring is not None else [u for u in range(1, q) if gcd(u, q) == 1]
    return list(units).index(t)


def galois_index_of(ring: MonogenicRing, t: int) -> int:
    """Index of xi -> xi^t in a cyclotomic ring."""
    return list(ring.galois_labels).index(t % ring.label)


def galois_order(ring: MonogenicRing, map_index: int) -> int:
    a = ring.xi()
    x = a
    for k in range(1, ring.degree + 1):
        x = galois_apply(ring, map_index, x)
        if x == a:
            return k
    raise RingError("galois map has order exceeding the degree")
