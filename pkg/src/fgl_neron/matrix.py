"""Small exact matrices as lists of rows (entries int, mpq or ring elements).

``kron`` follows the block convention used throughout the package: in
``kron(A, B)`` the entry a_ij b_i'j' sits at row i'*m + i, column j'*n + j,
so A carries the fast index and B picks the block.  This is ``numpy.kron``
with the factors swapped; it is what makes the variable order z_{jd+l}
(basis index j outside, torus coordinate l inside) read as kron(I_d, V).
"""

from __future__ import annotations

from typing import Callable, Sequence

from gmpy2 import mpq

Matrix = list  # list[list[entry]]


def zeros(m: int, n: int) -> Matrix:
    return [[0] * n for _ in range(m)]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def shape(A: Sequence[Sequence]) -> tuple[int, int]:
    return len(A), (len(A[0]) if A else 0)


def copy(A: Sequence[Sequence]) -> Matrix:
    return [list(r) for r in A]


def transpose(A: Sequence[Sequence]) -> Matrix:
    return [list(c) for c in zip(*A)] if A else []


def add(A, B) -> Matrix:
    return [[a + b for a, b in zip(ra, rb, strict=True)] for ra, rb in zip(A, B, strict=True)]


def sub(A, B) -> Matrix:
    return [[a - b for a, b in zip(ra, rb, strict=True)] for ra, rb in zip(A, B, strict=True)]


def scale(A, c) -> Matrix:
    return [[a * c for a in r] for r in A]


def neg(A) -> Matrix:
    return [[-a for a in r] for r in A]


def mul(A, B) -> Matrix:
    if shape(A)[1] != len(B):
        raise ValueError(f"cannot multiply {shape(A)} by {shape(B)}")
    Bt = transpose(B)
    out = []
    for r in A:
        row = []
        for c in Bt:
            acc = 0
            for x, y in zip(r, c):
                if x and y:
                    acc = acc + x * y
            row.append(acc)
        out.append(row)
    return out


def mat_vec(A, v) -> list:
    return [sum((a * x for a, x in zip(r, v) if a and x), 0) for r in A]


def equal(A, B) -> bool:
    return shape(A) == shape(B) and all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb))


def is_zero(A) -> bool:
    return all(not a for r in A for a in r)


def map_entries(A, fn: Callable) -> Matrix:
    return [[fn(a) for a in r] for r in A]


def is_integer(A) -> bool:
    return all(mpq(a).denominator == 1 for r in A for a in r)


def to_int(A) -> Matrix:
    if not is_integer(A):
        raise ValueError("matrix has non-integer entries")
    return [[int(mpq(a)) for a in r] for r in A]


def normalize(A) -> Matrix:
    """Entries as int where integral, mpq otherwise."""
    return [[int(mpq(a)) if mpq(a).denominator == 1 else mpq(a) for a in r] for r in A]


def submatrix(A, rows: Sequence[int], cols: Sequence[int]) -> Matrix:
    return [[A[i][j] for j in cols] for i in rows]


def block(A, i: int, j: int, size: int) -> Matrix:
    return [r[j * size : (j + 1) * size] for r in A[i * size : (i + 1) * size]]


def from_blocks(blocks: Sequence[Sequence[Matrix]]) -> Matrix:
    out = []
    for brow in blocks:
        for k in range(len(brow[0])):
            out.append([x for b in brow for x in b[k]])
    return out


def hstack(*mats) -> Matrix:
    return [sum((list(m[i]) for m in mats), []) for i in range(len(mats[0]))]


def vstack(*mats) -> Matrix:
    return [list(r) for m in mats for r in m]


def inverse(A) -> Matrix:
    """Exact inverse over Q by Gauss-Jordan elimination."""
    n, m = shape(A)
    if n != m:
        raise ValueError("inverse of a non-square matrix")
    M = [[mpq(x) for x in r] + [mpq(1 if i == j else 0) for j in range(n)] for i, r in enumerate(A)]
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col]), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        M[col] = [x * inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return normalize([r[n:] for r in M])


def det(A) -> object:
    n = len(A)
    M = [[mpq(x) for x in r] for r in A]
    out = mpq(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if M[r][col]), None)
        if piv is None:
            return 0
        if piv != col:
            M[col], M[piv] = M[piv], M[col]
            out = -out
        out *= M[col][col]
        for r in range(col + 1, n):
            if M[r][col]:
                f = M[r][col] / M[col][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return int(out) if out.denominator == 1 else out


def rank(A) -> int:
    if not A or not A[0]:
        return 0
    M = [[mpq(x) for x in r] for r in A]
    rows, cols = shape(M)
    rk = 0
    for col in range(cols):
        piv = next((r for r in range(rk, rows) if M[r][col]), None)
        if piv is None:
            continue
        M[rk], M[piv] = M[piv], M[rk]
        for r in range(rk + 1, rows):
            if M[r][col]:
                f = M[r][col] / M[rk][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[rk])]
        rk += 1
    return rk


def power(A, k: int) -> Matrix:
    """A^k; negative k uses the exact inverse."""
    if k < 0:
        return power(inverse(A), -k)
    out = identity(len(A))
    base = A
    while k:
        if k & 1:
            out = mul(out, base)
        k >>= 1
        if k:
            base = mul(base, base)
    return out


def kron(A, B) -> Matrix:
    """A (x) B with A on the fast index: entry a_ij b_i'j' at (i'm + i, j'n + j)."""
    m, n = shape(A)
    mb, nb = shape(B)
    out = zeros(m * mb, n * nb)
    for ip in range(mb):
        for jp in range(nb):
            b = B[ip][jp]
            if b:
                for i in range(m):
                    for j in range(n):
                        if A[i][j]:
                            out[ip * m + i][jp * n + j] = A[i][j] * b
    return out


def kron_all(mats: Sequence) -> Matrix:
    out = mats[0]
    for M in mats[1:]:
        out = kron(out, M)
    return out


def perm_matrix(n: int) -> Matrix:
    """P_n: ones at (i+1, i) and (0, n-1), so P e_i = e_{i+1} cyclically."""
    out = zeros(n, n)
    for i in range(n):
        out[(i + 1) % n][i] = 1
    return out


def j_matrix(n: int) -> Matrix:
    """J_n: a single 1 in the upper-left corner."""
    out = zeros(n, n)
    out[0][0] = 1
    return out


def jp_matrix(n: int) -> Matrix:
    """J'_n: all entries 1."""
    return [[1] * n for _ in range(n)]


def inclusion_matrix(m: int, n: int) -> Matrix:
    """I_{m,n}: the m x n matrix (I_n over a zero block)."""
    out = zeros(m, n)
    for i in range(n):
        out[i][i] = 1
    return out


def order(A, bound: int = 1000) -> int:
    """Multiplicative order of an invertible integer matrix (up to bound)."""
    n = len(A)
    Id = identity(n)
    M = A
    for k in range(1, bound + 1):
        if equal(M, Id):
            return k
        M = mul(M, A)
    raise ValueError("matrix has no finite order below the bound")


def commute(A, B) -> bool:
    return equal(mul(A, B), mul(B, A))


def to_json(A) -> list:
    out = []
    for r in A:
        row = []
        for a in r:
            a = mpq(a)
            row.append(int(a) if a.denominator == 1 else f"{a.numerator}/{a.denominator}")
        out.append(row)
    return out


def from_json(data) -> Matrix:
    out = []
    for r in data:
        row = []
        for a in r:
            if isinstance(a, str):
                from .arith import parse_rational

                a = parse_rational(a)
                row.append(int(a) if a.denominator == 1 else a)
            else:
                row.append(int(a))
        out.append(row)
    return out
