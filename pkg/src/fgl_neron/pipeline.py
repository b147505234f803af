"""From torus data to the formal group law of the Neron model completion.

Every flow returns a ``CompletionReport``: a plain JSON-ready dict with the
law, its logarithm, the Xi table, Q and a list of named checks.  The verdict
is "pass" exactly when no check failed; checks skipped by the cost budget are
listed as "skipped".  Reports carry no timings so that two runs on the same
input serialize to identical bytes.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Sequence

from . import matrix as mx
from .arith import (
    RingError,
    galois_apply,
    is_integral,
    is_p_integral,
    kronecker_symbol,
    primes_upto,
    quadratic_ring,
)
from .fixed_pair import (
    ActionData,
    FixedPairError,
    build_fixed_pair,
    explicit_Q_cyclotomic,
    extract_type,
    generic_Q,
    verify_condition_iii,
)
from .formal_group import (
    FormalGroupLaw,
    check_axioms,
    f_q,
    f_rs,
    from_logarithm,
    hom_defect,
    hom_from_linear,
    lift_tuple,
)
from .honda import FrobeniusPolynomial, XiMap, is_type, lambda_from_type, type_from_xi, xi_lambda
from .lattice import (
    GaloisElement,
    RealizationError,
    SpecError,
    TorusSpec,
    generator_elements,
    parse_spec,
    realize_action,
    split_anisotropic_dims,
    theta_T_of,
    xi_from_torus,
)
from .series import (
    SeriesContext,
    compose_many,
    deserialize_series,
    first_difference,
    first_non_integral,
    serialize_coefficient,
    serialize_series,
)
from .weil import ExtensionBasis, RestrictedLaw, build_phi, cyclotomic_basis, phi_type, quadratic_basis

DEFAULT_BUDGET = 50_000


# ---------------------------------------------------------------------------
# plumbing


def thread_count() -> int:
    raw = os.environ.get("FGL_NERON_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


def ordered_map(fn: Callable, items: Sequence) -> list:
    """map with optional threads; results always come back in input order."""
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def estimated_terms(num_vars: int, N: int) -> int:
    """Monomial count of a law in 2 num_vars variables up to degree N."""
    return comb(2 * num_vars + N, N)


def phi_degree_within_budget(num_vars: int, N: int, budget: int) -> int:
    """Largest N' <= N with estimated_terms(num_vars, N') <= budget (0 if even N' = 2 is too big)."""
    best = 0
    for k in range(2, N + 1):
        if estimated_terms(num_vars, k) <= budget:
            best = k
        else:
            break
    return best


def series_witness(bad) -> dict | None:
    if bad is None:
        return None
    out = {"component": bad[0], "exponents": list(bad[1]), "coefficient": _coef_json(bad[2])}
    if len(bad) > 3:
        out = {"component": bad[0], "exponents": list(bad[1]), "lhs": _coef_json(bad[2]), "rhs": _coef_json(bad[3])}
    return out


def _coef_json(c):
    return serialize_coefficient(c)


@dataclass
class Checks:
    items: list = field(default_factory=list)

    def add(self, name: str, status: str, witness=None, **extra) -> None:
        rec = {"name": name, "status": status, "witness": witness}
        rec.update(extra)
        self.items.append(rec)

    def ok(self, name: str, cond: bool, witness=None, **extra) -> bool:
        self.add(name, "pass" if cond else "fail", None if cond else witness, **extra)
        return cond

    def skip(self, name: str, reason: str) -> None:
        self.add(name, "skipped", reason)

    @property
    def verdict(self) -> str:
        return "fail" if any(c["status"] == "fail" for c in self.items) else "pass"


def _types_json(u: FrobeniusPolynomial) -> list:
    return [mx.to_json(C) for C in u.coeffs]


def canonical_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# shared pieces


def _law_checks(checks: Checks, F: FormalGroupLaw, integral: Callable, degree: int) -> None:
    bad = first_non_integral(F.law, integral)
    checks.ok("F_integral", bad is None, series_witness(bad))
    rep = check_axioms(F, degree)
    checks.ok("F_axioms", rep.passed, rep.first_failure())


def _xi_type_checks(checks: Checks, Xi: XiMap, lam, N: int, ramified: Sequence[int]) -> None:
    primes = primes_upto(N)

    def one(p):
        return p, is_type(type_from_xi(p, Xi(p)), lam, N)

    for p, res in ordered_map(one, primes):
        checks.ok(
            f"type_p{p}",
            res.ok,
            None if res.ok else {"component": res.witness[0], "exponents": list(res.witness[1]),
                                 "coefficient": _coef_json(res.witness[2])},
            ramified=p in ramified,
        )


def _action_data(spec: TorusSpec, basis: ExtensionBasis, phi: RestrictedLaw, checks: Checks) -> ActionData | None:
    action = []
    for g in generator_elements(spec, basis):
        T = theta_T_of(spec, basis, g)
        try:
            hom = realize_action(phi, T)
        except RealizationError as exc:
            checks.add(f"realize_{g.label}", "fail", str(exc))
            return None
        checks.add(f"realize_{g.label}", "pass", None, theta_T=mx.to_json(T))
        action.append((g.label, T, hom))
    return ActionData(phi, action)


def _composition_checks(spec: TorusSpec, basis: ExtensionBasis, data: ActionData, checks: Checks) -> None:
    """realize(g h) = realize(h) o realize(g) for every ordered pair of generators."""
    gens = generator_elements(spec, basis)
    homs = {label: hom for label, _, hom in data.action}
    for a in gens:
        for b in gens:
            chi = mx.mul(a.chi, b.chi)
            idx = _product_map_index(basis, a.map_index, b.map_index)
            T = theta_T_of(spec, basis, GaloisElement(f"{a.label}*{b.label}", idx, chi))
            prod = realize_action(data.phi, T).map
            comp = compose_many(homs[b.label].map, homs[a.label].map)
            diff = first_difference(prod, comp)
            checks.ok(f"composition_{a.label}_{b.label}", diff is None, series_witness(diff))


def _product_map_index(basis: ExtensionBasis, i: int, j: int) -> int:
    """Index of the ring automorphism g_i o g_j."""
    ring = basis.ring
    target = galois_apply(ring, i, galois_apply(ring, j, ring.xi()))
    for k in range(ring.num_galois):
        if galois_apply(ring, k, ring.xi()) == target:
            return k
    raise RingError("Galois maps do not compose inside the group")


def _fixed_pair_checks(
    checks: Checks,
    spec: TorusSpec,
    basis: ExtensionBasis,
    phi: RestrictedLaw,
    Q,
    e: int,
    lam_F,
    compositions: bool = True,
) -> dict:
    data = _action_data(spec, basis, phi, checks)
    if data is None:
        checks.skip("fixed_pair", "realization failed")
        return {}
    if compositions:
        _composition_checks(spec, basis, data, checks)
    cert = verify_condition_iii(Q, data.D_set, e)
    try:
        res = build_fixed_pair(data, Q, e, lam_F, cert if cert.ok else None)
    except FixedPairError as exc:
        checks.add("fixed_pair", "fail", str(exc))
        return {}
    checks.add("fixed_pair", "pass", None, degree=phi.degree, equivariance=res.equivariance)
    return {"f": [serialize_series(s) for s in res.f.map]}


# ---------------------------------------------------------------------------
# global (cyclotomic) flow


def global_completion(spec: TorusSpec, N: int, budget: int = DEFAULT_BUDGET) -> dict:
    if spec.kind != "cyclotomic":
        raise SpecError("global_completion needs a cyclotomic spec")
    if N < 2:
        raise SpecError("degree must be at least 2")
    q, d = spec.q, spec.d
    basis = cyclotomic_basis(q, spec.s_choices)
    G = basis.gamma
    ramified = list(G.primes)
    checks = Checks()

    Xi = xi_from_torus(spec, N)
    lam = xi_lambda(Xi, N)
    F = from_logarithm(lam)
    _law_checks(checks, F, is_integral, N)
    _xi_type_checks(checks, Xi, lam, N, ramified)

    U = [spec.rep.U(i) for i in range(len(G.primes))]
    Q = explicit_Q_cyclotomic(U, G)
    r = basis.n * d
    D_set = []
    for g in generator_elements(spec, basis):
        D_set.append(mx.sub(theta_T_of(spec, basis, g), mx.identity(r)))
    cert = verify_condition_iii(Q, D_set, d)
    checks.ok("condition_iii", cert.ok, cert.reason, invariants=cert.invariants)
    Qg, eg = generic_Q(D_set)
    same = eg == d and _same_span(Qg, Q, d)
    checks.ok("generic_Q_agrees", same, {"e": eg, "Q_generic": mx.to_json(Qg)}, e_generic=eg)

    for p in primes_upto(N):
        v, status = phi_type(basis, d, p)
        u = extract_type(Q, v, d)
        want = type_from_xi(p, Xi(p))
        checks.ok(f"extract_type_p{p}", u == want, {"extracted": _types_json(u), "expected": _types_json(want)},
                  v_status=status)
        if q % p:
            loc = local_type_for_base_change(spec, p)
            checks.ok(f"local_compat_p{p}", loc == want, {"local": _types_json(loc)})

    Nphi = phi_degree_within_budget(r, N, budget)
    if Nphi < 2:
        checks.skip("phi_level", f"Phi in {2 * r} variables exceeds the budget of {budget} terms even at degree 2")
    else:
        if Nphi < N:
            checks.add("phi_budget", "pass", None, phi_degree=Nphi,
                       note=f"Phi-level checks run at degree {Nphi} (budget {budget})")
        phi = build_phi(d, basis, Nphi, method="multiplication")
        for p in primes_upto(Nphi):
            v, status = phi_type(basis, d, p)
            res = is_type(v, phi.logarithm, Nphi)
            checks.ok(f"phi_type_p{p}", res.ok, None if res.ok else res.describe(), v_status=status)
        _fixed_pair_checks(checks, spec, basis, phi, Q, d, xi_lambda(Xi, Nphi))

    return _report(
        "global", spec, N, budget, checks, F, lam, Xi, Q, d,
        basis={"kind": "cyclotomic", "s_choices": list(G.s), "primes": list(G.primes)},
        phi_degree=Nphi,
    )


def _same_span(A, B, e: int) -> bool:
    """Whether the first e columns of A and B span the same lattice."""
    KA = [row[:e] for row in A]
    KB = [row[:e] for row in B]
    try:
        Z = _solve_columns(KB, KA)
        W = _solve_columns(KA, KB)
    except ValueError:
        return False
    return Z is not None and W is not None and mx.is_integer(Z) and mx.is_integer(W)


def _solve_columns(K, M):
    """Z with K Z = M (exact over Q); None if no solution."""
    e = len(K[0])
    rows = []
    for i in range(len(K)):
        if mx.rank([K[j] for j in rows + [i]]) > len(rows):
            rows.append(i)
        if len(rows) == e:
            break
    if len(rows) < e:
        raise ValueError("K does not have full column rank")
    Kinv = mx.inverse([K[i] for i in rows])
    Z = mx.mul(Kinv, [M[i] for i in rows])
    return Z if mx.equal(mx.mul(K, Z), M) else None


def local_type_for_base_change(spec: TorusSpec, p: int) -> FrobeniusPolynomial:
    """Type of the local completion after base change to Q_p, for unramified p."""
    loc = base_change(spec, p)
    split = split_anisotropic_dims(loc.rep.generators[0], loc.rep.generators[1], loc.n2, p)
    return _local_type(p, spec.d, split)


def base_change(spec: TorusSpec, p: int) -> TorusSpec:
    """The local spec over Q_p (p unramified): sigma_1 = Frobenius, trivial inertia."""
    if spec.kind != "cyclotomic" or spec.q % p == 0:
        raise SpecError("base change is implemented for unramified primes of cyclotomic specs")
    basis_G = cyclotomic_basis(spec.q, spec.s_choices).gamma
    chi = spec.rep.element(basis_G.log(p))
    n1 = _mult_order(p, spec.q)
    data = {"base": {"Qp": p}, "conductor": {"local": {"n1": n1, "n2": 1}}, "dimension": spec.d,
            "chi": [chi, mx.identity(spec.d)]}
    return parse_spec(data)


def _mult_order(a: int, m: int) -> int:
    k, x = 1, a % m
    while x != 1:
        x = x * a % m
        k += 1
    return k


# ---------------------------------------------------------------------------
# quadratic flow


def quadratic_Q(r: int) -> list:
    return [[-r, (r + 1) // 2], [2, -1]]


def quadratic_xi(r: int, s: int, bound: int, chi: int = -1) -> XiMap:
    q = r * r - 4 * s
    primes = sorted(set(primes_upto(bound)) | {p for p in primes_upto(abs(q)) if q % p == 0})
    return XiMap(1, {p: [[kronecker_symbol(q, p) if chi == -1 else 1]] for p in primes}, "torus-derived", bound)


def quadratic_completion(r: int, s: int, N: int, budget: int = DEFAULT_BUDGET, chi: int = -1) -> dict:
    q = r * r - 4 * s
    try:
        ring = quadratic_ring(r, s)
    except RingError as exc:
        raise SpecError(str(exc)) from exc
    if N < 2:
        raise SpecError("degree must be at least 2")
    spec = parse_spec({"base": "Q", "conductor": {"quadratic": {"r": r, "s": s}}, "dimension": 1, "chi": [[[chi]]]})
    ramified = [p for p in primes_upto(abs(q)) if q % p == 0]
    checks = Checks()
    Xi = quadratic_xi(r, s, N, chi)
    lam = xi_lambda(Xi, N)
    F = from_logarithm(lam)
    _law_checks(checks, F, is_integral, N)
    _xi_type_checks(checks, Xi, lam, N, ramified)

    iso_section = {}
    if chi == -1:
        Frs = f_rs(r, s, N)
        g = hom_from_linear([[1]], F, Frs)
        g_inv = hom_from_linear([[1]], Frs, F)
        checks.ok("strong_iso_F_rs", g.integral, series_witness(g.witness))
        checks.ok("strong_iso_F_rs_inverse", g_inv.integral, series_witness(g_inv.witness))
        defect = hom_defect(g.map, F, Frs)
        checks.ok("strong_iso_F_rs_hom", defect is None, series_witness(defect))
        h, comp = strong_iso_to_F_q(ring, g.map, N)
        Fq = f_q(ring, N)
        Fl = FormalGroupLaw(lift_tuple(F.law, ring))
        bad = first_non_integral(comp, is_integral)
        checks.ok("strong_iso_F_q_integral", bad is None, series_witness(bad))
        defect = hom_defect(comp, Fl, Fq)
        checks.ok("strong_iso_F_q_hom", defect is None, series_witness(defect))
        iso_section = {
            "to_F_rs": [serialize_series(x) for x in g.map],
            "to_F_q": [serialize_series(x) for x in comp],
        }
    else:
        checks.skip("strong_iso_F_rs", "split torus: F is the multiplicative law")

    basis = quadratic_basis(r, s, ring)
    gens = generator_elements(spec, basis)
    D_set = [mx.sub(theta_T_of(spec, basis, g), mx.identity(2)) for g in gens]
    Qg, e = generic_Q(D_set)
    if chi == -1:
        Q = quadratic_Q(r)
        checks.ok("generic_Q_agrees", e == 1 and _same_span(Qg, Q, 1), {"Q_generic": mx.to_json(Qg)})
    else:
        Q = Qg
    cert = verify_condition_iii(Q, D_set, e)
    checks.ok("condition_iii", cert.ok, cert.reason, invariants=cert.invariants)
    for p in primes_upto(N):
        v, status = phi_type(basis, 1, p)
        u = extract_type(Q, v, e)
        want = type_from_xi(p, Xi(p))
        checks.ok(f"extract_type_p{p}", u == want, {"extracted": _types_json(u), "expected": _types_json(want)},
                  v_status=status)

    Nphi = phi_degree_within_budget(2, N, budget)
    if Nphi < 2:
        checks.skip("phi_level", "Phi exceeds the budget")
    else:
        phi = build_phi(1, basis, Nphi, method="multiplication")
        _fixed_pair_checks(checks, spec, basis, phi, Q, e, xi_lambda(Xi, Nphi))
    report = _report(
        "quadratic", spec, N, budget, checks, F, lam, Xi, Q, e,
        basis={"kind": "quadratic", "r": r, "s": s}, phi_degree=Nphi,
    )
    if iso_section:
        report["isomorphisms"] = iso_section
    return report


def strong_iso_to_F_q(ring, g_map, N: int):
    """h(x) = x (1 + xi x)^{-1} and h o g over Z[xi]."""
    ctx = SeriesContext(1, N, ring)
    x = ctx.var(0)
    xi = ring.xi()
    geo = ctx.constant(1)
    term = ctx.constant(1)
    step = x.scale(-xi)
    for _ in range(N):
        term = term * step
        if not term.terms:
            break
        geo = geo + term
    h = (x * geo,)
    g = lift_tuple(g_map, ring)
    return h, compose_many(h, g)


# ---------------------------------------------------------------------------
# local flow


def _local_type(p: int, d: int, split) -> FrobeniusPolynomial:
    C = mx.zeros(d, d)
    for i in range(split.d_s):
        for j in range(split.d_s):
            C[i][j] = split.U1_tilde[i][j]
    return FrobeniusPolynomial(p, [mx.scale(mx.identity(d), p), mx.neg(C)])


def local_completion(spec: TorusSpec, N: int, budget: int = DEFAULT_BUDGET) -> dict:
    if spec.kind != "local":
        raise SpecError("local_completion needs local data over Q_p")
    if N < 2:
        raise SpecError("degree must be at least 2")
    p, d = spec.p, spec.d
    chi1, chi2 = spec.rep.generators
    split = split_anisotropic_dims(chi1, chi2, spec.n2, p)
    u = _local_type(p, d, split)
    lam = lambda_from_type(u, N)
    F = from_logarithm(lam)
    checks = Checks()
    _law_checks(checks, F, lambda c: is_p_integral(c, p), N)
    res = is_type(u, lam, N)
    checks.ok(f"type_p{p}", res.ok, None if res.ok else res.describe())
    checks.ok("dimension_split", split.d_s + split.d_a == d, {"d_s": split.d_s, "d_a": split.d_a})
    summary = {
        "d_s": split.d_s,
        "d_a": split.d_a,
        "unramified": spec.n2 == 1,
        "multiplicative_part": f"dimension {split.d_s}, type pI - U1~ Delta",
        "additive_copies": split.d_a,
        "quotient_basis": mx.to_json(split.Q),
    }
    report = _report("local", spec, N, budget, checks, F, lam, None, split.Q, split.d_s,
                     basis={"kind": "local", "p": p}, phi_degree=0)
    report["type"] = u.to_json()
    report["decomposition"] = summary
    return report


# ---------------------------------------------------------------------------
# induced homomorphisms


def is_equivariant(spec: TorusSpec, spec2: TorusSpec, C) -> int | None:
    """Index of the first generator with chi'(s)^T C^T != C^T chi(s)^T, or None."""
    CT = mx.transpose(C)
    for i, (a, b) in enumerate(zip(spec.rep.generators, spec2.rep.generators)):
        if not mx.equal(mx.mul(mx.transpose(b), CT), mx.mul(CT, mx.transpose(a))):
            return i
    return None


def induced_hom(spec: TorusSpec, spec2: TorusSpec, C, N: int) -> dict:
    """The hom F_Xi -> F'_Xi with linear coefficient C^T, checked integral."""
    if spec.kind == "local" or spec2.kind == "local":
        return local_induced_hom(spec, spec2, C, N)
    if spec.kind != spec2.kind or spec.conductor != spec2.conductor:
        raise SpecError("both tori must split over the same field")
    if (spec.s_choices or None) != (spec2.s_choices or None):
        raise SpecError("both specs must use the same generator choices")
    if mx.shape(C) != (spec.d, spec2.d):
        raise SpecError(f"C must be {spec.d}x{spec2.d}")
    bad = is_equivariant(spec, spec2, C)
    if bad is not None:
        raise SpecError(f"C is not equivariant for generator {bad + 1}")
    Xi1 = _xi_for(spec, N)
    Xi2 = _xi_for(spec2, N)
    F1 = from_logarithm(xi_lambda(Xi1, N))
    F2 = from_logarithm(xi_lambda(Xi2, N))
    CT = mx.transpose(C)
    hom = hom_from_linear(CT, F1, F2)
    checks = Checks()
    checks.ok("hom_integral", hom.integral, series_witness(hom.witness))
    defect = hom_defect(hom.map, F1, F2)
    checks.ok("hom_property", defect is None, series_witness(defect))
    return {
        "kind": "induced_hom",
        "N": N,
        "source": spec.to_json(),
        "target": spec2.to_json(),
        "C": mx.to_json(C),
        "linear_coefficient": mx.to_json(CT),
        "map": [serialize_series(s) for s in hom.map],
        "checks": checks.items,
        "verdict": checks.verdict,
    }, hom


def local_induced_hom(spec: TorusSpec, spec2: TorusSpec, C, N: int) -> dict:
    """Local version: C splits as [[C_a, *], [0, C_s]] in the SNF-completed bases
    (kernel of rho_s first) and the hom has linear coefficient diag(C_s^T, C_a^T).

    The blocks depend on those bases; the report carries both Q matrices.
    """
    if spec.kind != "local" or spec2.kind != "local":
        raise SpecError("both tori must be local")
    if (spec.p, spec.n1, spec.n2) != (spec2.p, spec2.n1, spec2.n2):
        raise SpecError("both tori must split over the same local field")
    if mx.shape(C) != (spec.d, spec2.d):
        raise SpecError(f"C must be {spec.d}x{spec2.d}")
    bad = is_equivariant(spec, spec2, C)
    if bad is not None:
        raise SpecError(f"C is not equivariant for generator {bad + 1}")
    p = spec.p
    sp1 = split_anisotropic_dims(*spec.rep.generators, spec.n2, p)
    sp2 = split_anisotropic_dims(*spec2.rep.generators, spec2.n2, p)
    e1, e2 = sp1.d_a, sp2.d_a
    M = mx.to_int(mx.mul(mx.inverse(sp1.Q), mx.mul(C, sp2.Q)))
    if any(M[i][j] for i in range(e1, spec.d) for j in range(e2)):
        raise SpecError("C does not map the kernel of rho_s' into the kernel of rho_s")
    C_a = mx.submatrix(M, range(e1), range(e2))
    C_s = mx.submatrix(M, range(e1, spec.d), range(e2, spec2.d))
    L = mx.zeros(spec2.d, spec.d)
    for i in range(sp2.d_s):
        for j in range(sp1.d_s):
            L[i][j] = C_s[j][i]
    for i in range(e2):
        for j in range(e1):
            L[sp2.d_s + i][sp1.d_s + j] = C_a[j][i]
    F1 = from_logarithm(lambda_from_type(_local_type(p, spec.d, sp1), N))
    F2 = from_logarithm(lambda_from_type(_local_type(p, spec2.d, sp2), N))
    hom = hom_from_linear(L, F1, F2, predicate=lambda c: is_p_integral(c, p))
    checks = Checks()
    checks.ok("hom_integral", hom.integral, series_witness(hom.witness))
    defect = hom_defect(hom.map, F1, F2)
    checks.ok("hom_property", defect is None, series_witness(defect))
    return {
        "kind": "induced_hom",
        "N": N,
        "source": spec.to_json(),
        "target": spec2.to_json(),
        "C": mx.to_json(C),
        "C_s": mx.to_json(C_s),
        "C_a": mx.to_json(C_a),
        "Q_source": mx.to_json(sp1.Q),
        "Q_target": mx.to_json(sp2.Q),
        "linear_coefficient": mx.to_json(L),
        "map": [serialize_series(s) for s in hom.map],
        "checks": checks.items,
        "verdict": checks.verdict,
    }, hom


def _xi_for(spec: TorusSpec, N: int) -> XiMap:
    if spec.kind == "quadratic":
        return quadratic_xi(spec.r, spec.s, N, spec.rep.generators[0][0][0])
    return xi_from_torus(spec, N)


# ---------------------------------------------------------------------------
# reports


def _report(kind, spec, N, budget, checks: Checks, F, lam, Xi, Q, e, basis, phi_degree) -> dict:
    return {
        "kind": kind,
        "spec": spec.to_json(),
        "N": N,
        "budget": budget,
        "basis": basis,
        "verdict": checks.verdict,
        "F": [serialize_series(s) for s in F.law],
        "lambda": [serialize_series(s) for s in lam],
        "xi": Xi.to_json() if Xi is not None else None,
        "Q": mx.to_json(Q),
        "e": e,
        "phi_degree": phi_degree,
        "checks": checks.items,
    }


def compute(spec: TorusSpec, N: int, budget: int = DEFAULT_BUDGET) -> dict:
    """Dispatch on the base field and the kind of splitting data."""
    if spec.kind == "cyclotomic":
        return global_completion(spec, N, budget)
    if spec.kind == "quadratic":
        return quadratic_completion(spec.r, spec.s, N, budget, chi=spec.rep.generators[0][0][0])
    return local_completion(spec, N, budget)


def report_laws(report: dict) -> tuple[FormalGroupLaw, tuple]:
    """The law and logarithm embedded in a report, parsed back."""
    N = int(report["N"])
    lam_data = report["lambda"]
    d = len(lam_data)
    xctx = SeriesContext(d, N)
    lctx = SeriesContext(2 * d, N)
    lam = tuple(deserialize_series(s, xctx) for s in lam_data)
    law = tuple(deserialize_series(s, lctx) for s in report["F"])
    if len(law) != d:
        raise ValueError("F and lambda have different dimensions")
    return FormalGroupLaw(law, lam), lam


def first_divergence(a, b, path: str = "") -> str | None:
    """JSON path of the first place two JSON values differ."""
    if type(a) is not type(b):
        return path or "/"
    if isinstance(a, dict):
        for k in list(a) + [k for k in b if k not in a]:
            if k not in a or k not in b:
                return f"{path}/{k}"
            sub = first_divergence(a[k], b[k], f"{path}/{k}")
            if sub:
                return sub
        return None
    if isinstance(a, list):
        for i, (x, y) in enumerate(zip(a, b)):
            sub = first_divergence(x, y, f"{path}/{i}")
            if sub:
                return sub
        return None if len(a) == len(b) else f"{path}/{min(len(a), len(b))}"
    return None if a == b else (path or "/")


def verify_report(report: dict, recompute: bool = True) -> tuple[int, list[str]]:
    """(status, messages): 0 when the report's own verdict is pass and, with
    ``recompute``, a fresh run from the embedded spec serializes identically."""
    msgs: list[str] = []
    for key in ("kind", "spec", "N", "F", "lambda", "checks", "verdict"):
        if key not in report:
            return 1, [f"report is missing {key!r}"]
    failed = [c for c in report["checks"] if c.get("status") == "fail"]
    for c in failed:
        msgs.append(f"check {c['name']} failed: {json.dumps(c.get('witness'))}")
    skipped = [c["name"] for c in report["checks"] if c.get("status") == "skipped"]
    if skipped:
        msgs.append("skipped: " + ", ".join(skipped))
    try:
        F, lam = report_laws(report)
    except Exception as exc:  # malformed embedded data
        return 1, msgs + [f"embedded series do not parse at degree {report.get('N')}: {exc}"]
    if report["kind"] in ("global", "quadratic"):
        again = from_logarithm(lam)
        diff = first_difference(again.law, F.law)
        if diff is not None:
            return 1, msgs + [f"F differs from the law of the embedded lambda: {series_witness(diff)}"]
    if not recompute:
        return (1, msgs) if failed or report["verdict"] != "pass" else (0, msgs + ["pass"])
    try:
        spec = parse_spec(report["spec"])
        fresh = compute(spec, int(report["N"]), int(report.get("budget", DEFAULT_BUDGET)))
    except (SpecError, RingError, ValueError) as exc:
        return 1, msgs + [f"recomputation failed: {exc}"]
    a, b = canonical_json(report), canonical_json(fresh)
    if a != b:
        return 1, msgs + [f"recomputed report differs at {first_divergence(report, fresh)}"]
    if failed or report["verdict"] != "pass":
        return 1, msgs
    return 0, msgs + ["pass"]


def compare_reports(a: dict, b: dict, mode: str = "strong-iso", D=None) -> tuple[int, list[str]]:
    """Integrality of lambda_B^{-1} o D lambda_A (and back, when D is invertible)."""
    Fa, _ = report_laws(a)
    Fb, _ = report_laws(b)
    if mode == "strong-iso":
        if Fa.dim != Fb.dim:
            raise SpecError(f"dimension mismatch: {Fa.dim} vs {Fb.dim}")
        D = mx.identity(Fa.dim)
    elif D is None:
        raise SpecError("hom mode needs a matrix")
    if mx.shape(D) != (Fb.dim, Fa.dim):
        raise SpecError(f"matrix must be {Fb.dim}x{Fa.dim}")
    if Fa.degree != Fb.degree:
        raise SpecError(f"degree mismatch: {Fa.degree} vs {Fb.degree}")
    pa = a["spec"]["base"]
    pb = b["spec"]["base"]
    if isinstance(pa, dict) and pa == pb:
        p = pa["Qp"]
        pred = lambda c: is_p_integral(c, p)  # noqa: E731
    else:
        pred = is_integral
    msgs = []
    fwd = hom_from_linear(D, Fa, Fb, predicate=pred)
    status = 0
    if not fwd.integral:
        msgs.append(f"forward map not integral: {series_witness(fwd.witness)}")
        status = 1
    if len(D) == len(D[0]) and mx.det(D) != 0:
        back = hom_from_linear(mx.inverse(D), Fb, Fa, predicate=pred)
        if not back.integral:
            msgs.append(f"inverse map not integral: {series_witness(back.witness)}")
            status = 1
    if status == 0:
        msgs.append("pass")
    return status, msgs


def format_text(report: dict) -> str:
    lines = [f"kind: {report['kind']}", f"degree: {report['N']}", f"verdict: {report['verdict']}"]
    if report.get("xi"):
        lines.append("Xi: " + ", ".join(f"{p}:{M}" for p, M in report["xi"].items()))
    lines.append(f"Q: {report['Q']}  e: {report['e']}")
    for c in report["checks"]:
        w = "" if c["witness"] is None else f"  {json.dumps(c['witness'])}"
        lines.append(f"  [{c['status']}] {c['name']}{w}")
    return "\n".join(lines) + "\n"
