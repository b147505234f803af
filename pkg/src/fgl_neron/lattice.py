"""Integer lattices and Galois representations on character lattices.

Smith and Hermite forms with unimodular transforms, saturated kernels,
torus specifications, the representations chi, psi and theta = chi (x) psi,
and the realization of theta(sigma)^T as an automorphism of Phi.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

from . import matrix as mx
from .arith import (
    RingError,
    discrete_log,
    primitive_root,
    galois_index_of,
    is_integral,
    is_prime,
    is_squarefree,
    kronecker_symbol,
    primes_upto,
    quadratic_discriminant,
)
from .formal_group import FglHom, hom_defect
from .honda import XiMap
from .series import compose_inverse, first_difference, first_non_integral, linear_coefficient, matrix_apply
from .weil import ExtensionBasis, GammaIndex, RestrictedLaw, apply_restricted_exponential, cyclotomic_basis


class SpecError(ValueError):
    """Malformed or unsupported torus data."""


# ---------------------------------------------------------------------------
# Smith / Hermite


def smith_normal_form(A: Sequence[Sequence[int]]) -> tuple[list, list, list]:
    """(U, D, V) with U A V = D diagonal, d_1 | d_2 | ..., U and V unimodular."""
    m, n = mx.shape(A)
    M = [list(map(int, r)) for r in A]
    U = mx.identity(m)
    V = mx.identity(n)

    def swap_rows(i, j):
        M[i], M[j] = M[j], M[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in M:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, f):  # row_dst += f * row_src
        M[dst] = [a + f * b for a, b in zip(M[dst], M[src])]
        U[dst] = [a + f * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, f):
        for row in M:
            row[dst] += f * row[src]
        for row in V:
            row[dst] += f * row[src]

    for t in range(min(m, n)):
        while True:
            piv = None
            for i in range(t, m):
                for j in range(t, n):
                    if M[i][j] and (piv is None or abs(M[i][j]) < abs(M[piv[0]][piv[1]])):
                        piv = (i, j)
            if piv is None:
                return U, M, V
            swap_rows(t, piv[0])
            swap_cols(t, piv[1])
            done = True
            for i in range(t + 1, m):
                if M[i][t]:
                    add_row(i, t, -(M[i][t] // M[t][t]))
                    if M[i][t]:
                        done = False
            for j in range(t + 1, n):
                if M[t][j]:
                    add_col(j, t, -(M[t][j] // M[t][t]))
                    if M[t][j]:
                        done = False
            if not done:
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if M[i][j] % M[t][t]), None
            )
            if bad is not None:
                add_row(t, bad, 1)
                continue
            break
        if M[t][t] < 0:
            M[t] = [-a for a in M[t]]
            U[t] = [-a for a in U[t]]
    return U, M, V


def smith_invariants(A) -> list[int]:
    _, D, _ = smith_normal_form(A)
    return [D[i][i] for i in range(min(mx.shape(D))) if D[i][i]]


def hermite_rows(A: Sequence[Sequence[int]]) -> list:
    """Row-style Hermite normal form: echelon, positive pivots, reduced above pivots."""
    M = [list(map(int, r)) for r in A if any(r)]
    if not M:
        return []
    m, n = mx.shape(M)
    r = 0
    for c in range(n):
        rows = [i for i in range(r, m) if M[i][c]]
        if not rows:
            continue
        while True:
            rows = [i for i in range(r, m) if M[i][c]]
            if not rows:
                break
            i0 = min(rows, key=lambda i: abs(M[i][c]))
            M[r], M[i0] = M[i0], M[r]
            others = [i for i in range(r + 1, m) if M[i][c]]
            if not others:
                break
            for i in others:
                f = M[i][c] // M[r][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        if not M[r][c]:
            continue
        if M[r][c] < 0:
            M[r] = [-a for a in M[r]]
        for i in range(r):
            f = M[i][c] // M[r][c]
            if f:
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == m:
            break
    return [row for row in M if any(row)]


def saturated_kernel(A: Sequence[Sequence[int]], ncols: int | None = None) -> list:
    """Basis (as columns of an n x e matrix) of the saturated lattice {v : A v = 0}.

    The basis is the row Hermite form of the kernel vectors, so it is canonical.
    """
    n = ncols if ncols is not None else mx.shape(A)[1]
    if not A:
        return mx.identity(n)
    _, D, V = smith_normal_form(A)
    rk = sum(1 for i in range(min(mx.shape(D))) if D[i][i])
    vecs = [[V[i][j] for i in range(n)] for j in range(rk, n)]
    H = hermite_rows(vecs)
    return mx.transpose(H) if H else [[] for _ in range(n)]


def unimodular_completion(K: Sequence[Sequence[int]]) -> list:
    """Unimodular Q whose first e columns are the n x e saturated basis K."""
    n, e = len(K), (len(K[0]) if K and K[0] else 0)
    if e == 0:
        return mx.identity(n)
    U, D, V = smith_normal_form(K)
    if any(D[i][i] != 1 for i in range(e)):
        raise SpecError("lattice is not saturated; no unimodular completion")
    Uinv = mx.to_int(mx.inverse(U))
    Vinv = mx.to_int(mx.inverse(V))
    T = mx.identity(n)
    for i in range(e):
        for j in range(e):
            T[i][j] = Vinv[i][j]
    Q = mx.mul(Uinv, T)
    assert mx.equal(mx.submatrix(Q, range(n), range(e)), K)
    return Q


def is_unimodular(A) -> bool:
    return mx.is_integer(A) and mx.shape(A)[0] == mx.shape(A)[1] and abs(mx.det(A)) == 1


# ---------------------------------------------------------------------------
# representations and torus data


@dataclass
class GaloisRep:
    """chi on the character lattice: generator matrices with declared orders.

    chi(sigma) maps the coordinate vector of a character to that of its
    sigma-conjugate, so its columns are the images of the basis characters.
    """

    d: int
    generators: list
    orders: list

    def __post_init__(self):
        self.generators = [mx.to_int(g) for g in self.generators]
        if len(self.generators) != len(self.orders):
            raise SpecError("one declared order per generator is required")
        for k, (g, o) in enumerate(zip(self.generators, self.orders)):
            if mx.shape(g) != (self.d, self.d):
                raise SpecError(f"chi generator {k} is not {self.d}x{self.d}")
            if not mx.equal(mx.power(g, o), mx.identity(self.d)):
                raise SpecError(f"chi generator {k} does not have order dividing {o}")
        for i in range(len(self.generators)):
            for j in range(i + 1, len(self.generators)):
                if not mx.commute(self.generators[i], self.generators[j]):
                    raise SpecError(f"chi generators {i} and {j} do not commute")

    def element(self, exponents: Sequence[int]) -> list:
        out = mx.identity(self.d)
        for g, e, o in zip(self.generators, exponents, self.orders):
            out = mx.mul(out, mx.power(g, e % o))
        return out

    def U(self, i: int) -> list:
        return mx.transpose(self.generators[i])


@dataclass
class TorusSpec:
    """A torus split over a tame abelian extension, with its character data."""

    base: object  # "Q" or ("Qp", p)
    kind: str  # "cyclotomic" | "quadratic" | "local"
    d: int
    rep: GaloisRep
    q: int | None = None
    r: int | None = None
    s: int | None = None
    n1: int | None = None
    n2: int | None = None
    s_choices: list | None = None
    raw: dict = field(default_factory=dict)

    @property
    def p(self) -> int | None:
        return self.base[1] if isinstance(self.base, tuple) else None

    @property
    def conductor(self) -> int:
        if self.kind == "cyclotomic":
            return self.q
        if self.kind == "quadratic":
            return self.r * self.r - 4 * self.s
        raise SpecError("local specs have no global conductor")

    def to_json(self) -> dict:
        out: dict = {"base": "Q" if self.base == "Q" else {"Qp": self.p}}
        if self.kind == "cyclotomic":
            out["conductor"] = self.q
        elif self.kind == "quadratic":
            out["conductor"] = {"quadratic": {"r": self.r, "s": self.s}}
        else:
            out["conductor"] = {"local": {"n1": self.n1, "n2": self.n2}}
        out["dimension"] = self.d
        out["chi"] = [mx.to_json(g) for g in self.rep.generators]
        if self.s_choices is not None:
            out["s_choices"] = list(self.s_choices)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "TorusSpec":
        return parse_spec(data)


def _as_int(x, what: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise SpecError(f"{what} must be an integer, got {x!r}")
    return x


def parse_spec(data: dict) -> TorusSpec:
    if not isinstance(data, dict):
        raise SpecError("spec must be a JSON object")
    for key in ("base", "conductor", "dimension", "chi"):
        if key not in data:
            raise SpecError(f"spec is missing {key!r}")
    base_raw = data["base"]
    if base_raw == "Q":
        base: object = "Q"
    elif isinstance(base_raw, dict) and set(base_raw) == {"Qp"}:
        p = _as_int(base_raw["Qp"], "Qp")
        if not is_prime(p):
            raise SpecError(f"Qp needs a prime, got {p}")
        base = ("Qp", p)
    else:
        raise SpecError(f"unknown base {base_raw!r}")
    d = _as_int(data["dimension"], "dimension")
    if d < 1:
        raise SpecError("dimension must be positive")
    chi = data["chi"]
    if not isinstance(chi, list) or not all(isinstance(g, list) for g in chi):
        raise SpecError("chi must be a list of matrices")
    try:
        gens = [[[_as_int(x, "chi entry") for x in row] for row in g] for g in chi]
    except TypeError as exc:
        raise SpecError("chi matrices must be lists of integer rows") from exc
    cond = data["conductor"]
    s_choices = data.get("s_choices")
    if isinstance(cond, int) and not isinstance(cond, bool):
        if base != "Q":
            raise SpecError("a cyclotomic conductor needs base Q (use local data over Qp)")
        q = cond
        if q < 3:
            raise SpecError(f"conductor must be >= 3, got {q}")
        if not is_squarefree(q):
            raise SpecError(f"conductor {q} is not squarefree: wild ramification is not supported")
        primes = [p for p in primes_upto(q) if q % p == 0]
        if len(gens) != len(primes):
            raise SpecError(f"conductor {q} needs {len(primes)} chi generators, got {len(gens)}")
        rep = GaloisRep(d, gens, [p - 1 for p in primes])
        return TorusSpec("Q", "cyclotomic", d, rep, q=q, s_choices=s_choices, raw=data)
    if isinstance(cond, dict) and set(cond) == {"quadratic"}:
        if base != "Q":
            raise SpecError("quadratic data needs base Q")
        r = _as_int(cond["quadratic"].get("r"), "r")
        s = _as_int(cond["quadratic"].get("s"), "s")
        disc = r * r - 4 * s
        if disc % 2 == 0:
            raise SpecError(f"discriminant {disc} is even: 2 would be wildly ramified")
        if disc >= 0 and int(disc**0.5) ** 2 == disc:
            raise SpecError(f"discriminant {disc} is a square")
        if not is_squarefree(disc):
            raise SpecError(f"discriminant {disc} is not squarefree")
        if d != 1 or len(gens) != 1 or gens[0][0][0] not in (1, -1):
            raise SpecError("the quadratic path covers rank-1 tori: dimension 1 and chi = [[1]] or [[-1]]")
        rep = GaloisRep(d, gens, [2])
        return TorusSpec("Q", "quadratic", d, rep, r=r, s=s, raw=data)
    if isinstance(cond, dict) and set(cond) == {"local"}:
        if base == "Q":
            raise SpecError("local data needs base Qp")
        p = base[1]
        n1 = _as_int(cond["local"].get("n1"), "n1")
        n2 = _as_int(cond["local"].get("n2"), "n2")
        if n1 < 1 or n2 < 1:
            raise SpecError("n1 and n2 must be positive")
        if (p - 1) % n2:
            raise SpecError(f"inertia order {n2} does not divide p - 1 = {p - 1}: wild ramification")
        if len(gens) != 2:
            raise SpecError("local data needs chi(sigma_1) and chi(sigma_2)")
        rep = GaloisRep(d, gens, [n1, n2])
        return TorusSpec(base, "local", d, rep, n1=n1, n2=n2, raw=data)
    raise SpecError(f"unknown conductor {cond!r}")


# ---------------------------------------------------------------------------
# psi, theta and the realized action


def psi_matrix(basis: ExtensionBasis, map_index: int) -> list:
    """psi(sigma) = (M_sigma^{-1})^T for M_sigma the matrix of sigma on the basis."""
    M = basis.galois_matrix(map_index)
    if not is_unimodular(M):
        raise SpecError("sigma does not act unimodularly on the basis")
    return mx.to_int(mx.transpose(mx.inverse(M)))


def theta(chi_sigma, psi_sigma) -> list:
    """theta(sigma) = chi(sigma) (x) psi(sigma) (chi on the fast index)."""
    return mx.kron(chi_sigma, psi_sigma)


def theta_transpose(chi_sigma, psi_sigma) -> list:
    return mx.transpose(theta(chi_sigma, psi_sigma))


class RealizationError(RuntimeError):
    pass


def realize_action(phi: RestrictedLaw, thetaT, verify_hom: bool = False, method: str = "exponential") -> FglHom:
    """The automorphism Lambda^{-1} o theta^T Lambda of Phi, checked to be integral.

    ``method="exponential"`` evaluates Lambda^{-1} as the restricted exponential;
    ``method="generic"`` inverts Lambda with the series engine.
    """
    lam = phi.logarithm
    G = matrix_apply(thetaT, lam)
    if method == "exponential":
        f = apply_restricted_exponential(phi.basis, phi.d, G)
    elif method == "generic":
        f = compose_inverse(lam, G)
    else:
        raise ValueError(f"unknown method {method!r}")
    bad = first_non_integral(f, is_integral)
    if bad is not None:
        raise RealizationError(
            f"realized action has a non-integral coefficient at component {bad[0]}, monomial {bad[1]}: {bad[2]}"
        )
    if not mx.equal(linear_coefficient(f), thetaT):
        raise RealizationError("realized action has the wrong linear coefficient")
    hom = FglHom(phi.law, phi.law, f, mx.copy(thetaT))
    if verify_hom:
        diff = hom_defect(f, phi.law, phi.law)
        if diff is not None:
            raise RealizationError(f"realized action is not an endomorphism: {diff}")
    return hom


# ---------------------------------------------------------------------------
# Galois data per torus kind


@dataclass
class GaloisElement:
    label: str
    map_index: int
    chi: list


def generator_elements(spec: TorusSpec, basis: ExtensionBasis) -> list[GaloisElement]:
    """The generators sigma_i with their ring map indices and chi matrices."""
    if spec.kind == "cyclotomic":
        G = basis.gamma
        out = []
        for i, p in enumerate(G.primes):
            t = G.generator_unit(i)
            out.append(GaloisElement(f"sigma_{i + 1}", galois_index_of(basis.ring, t), spec.rep.generators[i]))
        return out
    if spec.kind == "quadratic":
        return [GaloisElement("sigma", 1, spec.rep.generators[0])]
    raise SpecError("local specs carry no global Galois maps")


def cyclotomic_element(spec: TorusSpec, basis: ExtensionBasis, t: int) -> GaloisElement:
    """xi -> xi^t as a word in the generators, with chi(t) = prod chi(sigma_i)^{r_i(t)}."""
    G = basis.gamma
    r = G.log(t)
    return GaloisElement(f"t={t % G.q}", galois_index_of(basis.ring, t), spec.rep.element(r))


def theta_T_of(spec: TorusSpec, basis: ExtensionBasis, g: GaloisElement) -> list:
    return theta_transpose(g.chi, psi_matrix(basis, g.map_index))


# ---------------------------------------------------------------------------
# Xi from a torus


def xi_from_torus(spec: TorusSpec, bound: int) -> XiMap:
    """Xi(p) for every prime p <= bound (and every prime of the conductor)."""
    d = spec.d
    entries = {}
    if spec.kind == "cyclotomic":
        q = spec.q
        primes_q = [p for p in primes_upto(q) if q % p == 0]
        if spec.s_choices is not None:
            G = cyclotomic_basis(q, spec.s_choices).gamma
        else:
            G = GammaIndex(q, tuple(primes_q), tuple(primitive_root(p) for p in primes_q))
        U = [spec.rep.U(i) for i in range(len(primes_q))]
        for p in sorted(set(primes_upto(bound)) | set(primes_q)):
            if q % p:
                r = G.log(p)
                M = mx.identity(d)
                for Ui, ri in zip(U, r):
                    M = mx.mul(M, mx.power(Ui, ri))
            else:
                i = primes_q.index(p)
                S = mx.zeros(d, d)
                for j in range(p - 1):
                    S = mx.add(S, mx.power(U[i], j))
                M = mx.sub(mx.scale(mx.identity(d), p), S)
                for j, pj in enumerate(primes_q):
                    if j != i:
                        M = mx.mul(M, mx.power(U[j], discrete_log(p % pj, G.s[j], pj)))
            entries[p] = M
        return XiMap(d, entries, "torus-derived", bound)
    if spec.kind == "quadratic":
        disc = spec.conductor
        chi = spec.rep.generators[0][0][0]
        for p in sorted(set(primes_upto(bound)) | {f for f in primes_upto(abs(disc)) if disc % f == 0}):
            k = kronecker_symbol(disc, p)
            if chi == 1:
                entries[p] = [[1]]
            else:
                entries[p] = [[k]]
        return XiMap(d, entries, "torus-derived", bound)
    raise SpecError("Xi is defined for global specs only")


# ---------------------------------------------------------------------------
# the local split into anisotropic and split parts


@dataclass
class LocalSplit:
    d_s: int
    d_a: int
    U1_tilde: list
    Q: list
    kernel: list

    def to_json(self) -> dict:
        return {"d_s": self.d_s, "d_a": self.d_a, "U1_tilde": mx.to_json(self.U1_tilde), "Q": mx.to_json(self.Q)}


def split_anisotropic_dims(chi1, chi2, n2: int, p: int | None = None) -> LocalSplit:
    """d_s = rank of rho_s = sum_j chi2^j, d_a = rank of rho_a = chi2 - 1, and the
    action U~_1 of sigma_1 on X / Ker rho_s (transposed), in an SNF-completed basis."""
    d = len(chi1)
    if p is not None and (p - 1) % n2:
        raise SpecError(f"inertia order {n2} does not divide p - 1")
    rho_s = mx.zeros(d, d)
    for j in range(n2):
        rho_s = mx.add(rho_s, mx.power(chi2, j))
    rho_a = mx.sub(chi2, mx.identity(d))
    K = saturated_kernel(rho_s, d)
    e = len(K[0]) if K and K[0] else 0
    d_s = d - e
    d_a = mx.rank(rho_a) if any(any(r) for r in rho_a) else 0
    if d_s + d_a != d:
        raise SpecError(f"d_s + d_a = {d_s} + {d_a} != {d}")
    Q = unimodular_completion(K) if e else mx.identity(d)
    conj = mx.to_int(mx.mul(mx.inverse(Q), mx.mul(chi1, Q)))
    if any(conj[i][j] for i in range(e, d) for j in range(e)):
        raise SpecError("sigma_1 does not preserve Ker rho_s")
    chi_tilde = mx.submatrix(conj, range(e, d), range(e, d))
    return LocalSplit(d_s, d_a, mx.transpose(chi_tilde), Q, K)


def generic_realization_check(phi: RestrictedLaw, thetaT) -> tuple | None:
    """Difference between the exponential and generic realizations (None if equal)."""
    a = realize_action(phi, thetaT, method="exponential").map
    b = realize_action(phi, thetaT, method="generic").map
    return first_difference(a, b)


def ensure_tame_local(p: int, n2: int) -> None:
    if gcd(p, n2) != 1 or (p - 1) % n2:
        raise RingError("wild inertia")
