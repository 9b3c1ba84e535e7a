"""Elliptic units rho(a), their Galois conjugates, the descent unit and u_c.

Elements of the Hilbert class field H are never built symbolically.  An
element is a vector of complex values indexed by the ideal classes: the
entry at class b is its image under the Artin symbol (b, H/E), read off the
action formula

    rho(a)^(b, H/E) = rho(b^-1 a) / rho(b^-1).

The complementary embeddings are the complex conjugates.

Every residual on a multiplicative quantity is relative: |x - y| / |y|.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import mpmath
from mpmath import mpc, mpf

from .algrec import IntPolynomial, algdep, coefficient_bits, minpoly_from_conjugates
from .errors import NonPrincipal, NoRelationFound, RecognitionFailed, VerificationFailed
from .heights import log_gamma_product
from .modforms import eta24, homogeneous_eval
from .numkernel import PrecisionContext, rel_diff
from .quadratic import (AlgebraicElementE, ClassGroup, FieldData, cm_point,
                        ideal_from_form, ideal_power, principal_generator,
                        reduced_forms, roots_of_unity)


@dataclass
class EllipticUnitTable:
    field: FieldData
    classgroup: ClassGroup
    b_gen: tuple[AlgebraicElementE, ...]
    rho: tuple[mpc, ...]
    ctx: PrecisionContext
    taus: tuple[mpc, ...] = field(repr=False)
    eta24_vals: tuple[mpc, ...] = field(repr=False)
    eta24_OE: mpc = field(repr=False)

    @property
    def h(self) -> int:
        return self.classgroup.h

    @property
    def bits(self) -> int:
        return self.ctx.bits


@dataclass
class ConjugateVector:
    """An element of H given by its values under (b, H/E), b in Cl(E)."""

    values: tuple[mpc, ...]
    ctx: PrecisionContext

    def __getitem__(self, i):
        return self.values[i]

    def __len__(self):
        return len(self.values)

    @property
    def value(self) -> mpc:
        return self.values[0]

    def min_gap(self) -> mpf:
        vals = self.values
        with self.ctx.work():
            if len(vals) < 2:
                return mpf("inf")
            return min(abs(a - b) for a, b in itertools.combinations(vals, 2))

    def min_rel_gap(self) -> mpf:
        """min |x - y| / max(|x|, |y|) over distinct pairs of conjugates."""
        vals = self.values
        with self.ctx.work():
            if len(vals) < 2:
                return mpf("inf")
            return min(abs(a - b) / max(abs(a), abs(b))
                       for a, b in itertools.combinations(vals, 2))


def rho_table(fd: FieldData, ctx: PrecisionContext, cg: ClassGroup | None = None) -> EllipticUnitTable:
    """rho(a) = Delta(O_E)^h / (b(a)^12 Delta(a)^h) for every reduced form a.

    b(a) generates a^h; Delta is evaluated homogeneously on the lattice of a
    as eta^24 (the (2 pi)^12 normalizations cancel).
    """
    cg = cg or reduced_forms(fd)
    h = cg.h
    z_E = fd.z_E(ctx)
    d_OE = homogeneous_eval(12, z_E, 1, ctx)
    gens, rhos, taus, etas = [], [], [], []
    for f in cg:
        try:
            b = principal_generator(ideal_power(ideal_from_form(fd, f), h))
        except NonPrincipal as exc:  # a^h is always principal
            raise AssertionError(f"a^h not principal for {f}") from exc
        with ctx.work():
            z1 = mpc(mpf(-f.b) / 2, mpmath.sqrt(fd.D) / 2)
            z2 = mpc(f.a)
        d_a = homogeneous_eval(12, z1, z2, ctx)
        tau = cm_point(f, ctx)
        b12 = (b ** 12).embed(ctx)
        with ctx.work():
            rhos.append(d_OE ** h / (b12 * d_a ** h))
        gens.append(b)
        taus.append(tau)
        etas.append(eta24(tau, ctx))
    return EllipticUnitTable(fd, cg, tuple(gens), tuple(rhos), ctx,
                             tuple(taus), tuple(etas), d_OE)


def rho_conjugate(table: EllipticUnitTable, a: int, b: int) -> mpc:
    """rho(a)^(b, H/E) = rho(b^-1 a) rho(b^-1)^-1 (classes by index)."""
    cg = table.classgroup
    binv = cg.inv(b)
    with table.ctx.work():
        return table.rho[cg.mul(binv, a)] / table.rho[binv]


def conjugates(table: EllipticUnitTable, a: int) -> ConjugateVector:
    return ConjugateVector(tuple(rho_conjugate(table, a, b) for b in range(table.h)), table.ctx)


def _log_petersson_invariant(table: EllipticUnitTable, i: int) -> mpf:
    """log( Im(z)^6 |eta^24(z)| ) at the CM point of class i."""
    with table.ctx.work():
        tau = table.taus[i]
        return 6 * mpmath.log(tau.imag) + mpmath.log(abs(table.eta24_vals[i]))


def check_abs_formula(table: EllipticUnitTable, a: int) -> mpf:
    """Relative residual of |rho(a^-1)| = Im(z_1)^6h |eta24(z_1)|^h / (Im(z_a)^6h |eta24(z_a)|^h)."""
    cg, h = table.classgroup, table.h
    ainv = cg.inv(a)
    p_id = _log_petersson_invariant(table, 0)
    p_a = _log_petersson_invariant(table, a)
    with table.ctx.work():
        predicted = mpmath.exp(h * (p_id - p_a))
        return rel_diff(abs(table.rho[ainv]), predicted)


def unit_norm_check(table: EllipticUnitTable, a: int) -> mpf:
    """Absolute norm N_{H/Q}(rho(a)) = prod_b |rho(a)^(b)|^2 (should be 1)."""
    conj = conjugates(table, a)
    with table.ctx.work():
        out = mpf(1)
        for v in conj.values:
            out *= abs(v) ** 2
        return out


def _boosted_table(table: EllipticUnitTable, values_of, ctx: PrecisionContext) -> EllipticUnitTable:
    """Table with enough working precision for the coefficients of prod (X - v)."""
    need = ctx.bits + coefficient_bits(values_of(table)) + 16
    if table.ctx.bits >= need:
        return table
    return rho_table(table.field, table.ctx.with_bits(need), table.classgroup)


def charpoly_over_E(table: EllipticUnitTable, a: int, ctx: PrecisionContext) -> list[AlgebraicElementE]:
    """prod_b (X - rho(a)^(b)) with coefficients rounded into O_E (ascending).

    The table is recomputed at higher precision when the coefficients are
    large; the rounding residual must be below ctx.tol and the constant term
    must have absolute norm 1.
    """
    values_of = lambda t: conjugates(t, a).values  # noqa: E731
    work = _boosted_table(table, values_of, ctx)
    coeffs, _ = minpoly_from_conjugates(values_of(work), table.field, ctx)
    if abs(coeffs[0].norm()) != 1:
        raise RecognitionFailed(f"constant term {coeffs[0]} is not a unit")
    return coeffs


def charpoly_residual(table: EllipticUnitTable, a: int, ctx: PrecisionContext) -> tuple[list, mpf]:
    values_of = lambda t: conjugates(t, a).values  # noqa: E731
    work = _boosted_table(table, values_of, ctx)
    return minpoly_from_conjugates(values_of(work), table.field, ctx)


def cocycle_u(table: EllipticUnitTable, sigma: int) -> mpc:
    """u(sigma) = rho(a(sigma)^-1)^-1."""
    with table.ctx.work():
        return 1 / table.rho[table.classgroup.inv(sigma)]


def cocycle_action(table: EllipticUnitTable, tau: int, sigma: int) -> mpc:
    """tau(u(sigma)) via the action on rho."""
    with table.ctx.work():
        return 1 / rho_conjugate(table, table.classgroup.inv(sigma), tau)


def cocycle_residuals(table: EllipticUnitTable) -> mpf:
    """max over (sigma, tau) of rel |tau(u(sigma)) - u(tau sigma)/u(tau)|."""
    cg = table.classgroup
    worst = mpf(0)
    for s in range(table.h):
        for t in range(table.h):
            lhs = cocycle_action(table, t, s)
            with table.ctx.work():
                rhs = cocycle_u(table, cg.mul(t, s)) / cocycle_u(table, t)
                worst = max(worst, rel_diff(lhs, rhs))
    return worst


def descent_unit(table: EllipticUnitTable) -> tuple[ConjugateVector, mpf]:
    """u = (prod_tau u(tau))^-1 with sigma(u)/u = u(sigma)^h.

    Returns the conjugate vector of u and the largest relative residual of
    that identity.
    """
    cg, h = table.classgroup, table.h
    vals = []
    for s in range(h):
        with table.ctx.work():
            prod = mpc(1)
        for t in range(h):
            # sigma(u(tau))^-1 = rho(tau^-1)^(sigma)
            v = rho_conjugate(table, cg.inv(t), s)
            with table.ctx.work():
                prod *= v
        vals.append(prod)
    u = ConjugateVector(tuple(vals), table.ctx)
    worst = mpf(0)
    with table.ctx.work():
        for s in range(h):
            worst = max(worst, rel_diff(u[s] / u[0], cocycle_u(table, s) ** h))
    return u, worst


def class_invariant_uc(table: EllipticUnitTable) -> ConjugateVector:
    """u_c = prod_a rho(a) together with its conjugates under Gal(H|E)."""
    h = table.h
    vals = []
    for b in range(h):
        with table.ctx.work():
            prod = mpc(1)
        for a in range(h):
            v = rho_conjugate(table, a, b)
            with table.ctx.work():
                prod *= v
        vals.append(prod)
    return ConjugateVector(tuple(vals), table.ctx)


def uc_action_residual(table: EllipticUnitTable, uc: ConjugateVector) -> mpf:
    """max_b rel |(b, H/E)(u_c) - u_c rho(b^-1)^(-h)|."""
    cg, h = table.classgroup, table.h
    with table.ctx.work():
        return max(rel_diff(uc[b], uc[0] / table.rho[cg.inv(b)] ** h) for b in range(h))


def uc_imag_residual(uc: ConjugateVector) -> mpf:
    with uc.ctx.work():
        return abs(uc.value.imag) / abs(uc.value)


def uc_minpoly(table: EllipticUnitTable, ctx: PrecisionContext) -> IntPolynomial:
    """Minimal polynomial of u_c over Q from its h conjugates."""
    values_of = lambda t: class_invariant_uc(t).values  # noqa: E731
    work = _boosted_table(table, values_of, ctx)
    poly, _ = minpoly_from_conjugates(values_of(work), "Z", ctx)
    return poly


def rho_inverse_is_conjugate(table: EllipticUnitTable) -> mpf:
    """max_a rel |rho(a^-1) - conj(rho(a))|."""
    cg = table.classgroup
    with table.ctx.work():
        return max(rel_diff(table.rho[cg.inv(a)], mpmath.conj(table.rho[a]))
                   for a in range(table.h))


@dataclass
class ConjectureReport:
    D: int
    h: int
    m: int
    values: tuple[mpf, ...]          # V_sigma
    target: mpf                      # D^(-3h^2) Gamma-product^(3 w_E h)
    residual_target: mpf             # max_sigma |V_sigma - R| / R
    residual_constancy: mpf          # max_sigma |V_sigma - V_1| / V_1
    uc_sign: int
    ctx: PrecisionContext = field(repr=False)

    @property
    def residual(self) -> mpf:
        return max(self.residual_target, self.residual_constancy)

    @property
    def passed(self) -> bool:
        return self.residual < self.ctx.tol


def conjecture_verify(fd: FieldData, table: EllipticUnitTable, ctx: PrecisionContext,
                      raise_on_fail: bool = True) -> ConjectureReport:
    """Per-embedding Petersson norms of u_c^-1 eta^(24 h^2) against the Gamma constant.

    For the class sigma = (b, H/E) the curve A_sigma is C / b^-1, so

        V_sigma = ||eta^(24 h^2)(z_{b^-1})||_Pet / |sigma(u_c)|,
        R = D^(-3 h^2) [prod Gamma(j/D)^chi(j)]^(3 w_E h).
    """
    cg, h = table.classgroup, table.h
    m = 12 * h * h
    uc = class_invariant_uc(table)
    lg = log_gamma_product(fd, ctx)
    logs = []
    for b in range(h):
        t = cg.inv(b)
        tau = table.taus[t]
        with ctx.work():
            log_norm = (h * h * mpmath.log(abs(table.eta24_vals[t]))
                        + mpf(m) / 2 * (mpmath.log(tau.imag) + mpmath.log(4 * mpmath.pi)))
            logs.append(log_norm - mpmath.log(abs(uc[b])))
    with ctx.work():
        log_R = -3 * h * h * mpmath.log(fd.D) + 3 * fd.w_E * h * lg
        R = mpmath.exp(log_R)
        V = tuple(mpmath.exp(x) for x in logs)
        res_t = max(abs(mpmath.expm1(x - log_R)) for x in logs)
        res_c = max(abs(mpmath.expm1(x - logs[0])) for x in logs)
        sign = 1 if uc.value.real > 0 else -1
    report = ConjectureReport(fd.D, h, m, V, R, res_t, res_c, sign, ctx)
    if raise_on_fail and not report.passed:
        worst = max(range(h), key=lambda i: abs(logs[i] - log_R))
        raise VerificationFailed(
            f"D={fd.D}: Petersson value of class {cg.forms[worst]} off by {mpmath.nstr(report.residual, 5)}",
            label=str(cg.forms[worst]), residual=report.residual)
    return report


def log_embedding(table: EllipticUnitTable, a: int) -> tuple[mpf, ...]:
    conj = conjugates(table, a)
    with table.ctx.work():
        return tuple(mpmath.log(abs(v)) for v in conj.values)


def small_multiplicative_relations(table: EllipticUnitTable, bound: int = 10) -> list[tuple[int, ...]]:
    """Exponent vectors k (|k_i| <= bound, k != 0) over the nonprincipal classes
    with prod rho(a_i)^k_i a root of unity, i.e. all log-embeddings cancel."""
    classes = list(range(1, table.h))
    if (2 * bound + 1) ** len(classes) > 2_000_000:
        raise ValueError("search space too large")
    logs = [log_embedding(table, a) for a in classes]
    tol = table.ctx.tol
    found = []
    with table.ctx.work():
        size = max(abs(x) for L in logs for x in L)
        for k in itertools.product(range(-bound, bound + 1), repeat=len(classes)):
            if not any(k):
                continue
            worst = max(abs(sum(k_i * L[b] for k_i, L in zip(k, logs))) for b in range(table.h))
            if worst < tol * max(1, bound * size):
                found.append(k)
    return found


def _divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def minimal_descent_exponent(table: EllipticUnitTable, ctx: PrecisionContext) -> int:
    """Smallest e | h for which u(.)^e is numerically a coboundary in U(O_H).

    A coboundary v satisfies v^(h/e) = zeta u_c with zeta a root of unity of
    E, so every (h/e)-th root of zeta u_c is tried: its would-be conjugates
    v u(sigma)^e must have a characteristic polynomial over O_E.
    """
    h = table.h
    fd = table.field
    units = roots_of_unity(fd)
    for e in _divisors(h):
        if e == h:
            return h
        k = h // e

        def candidates(t: EllipticUnitTable):
            uc = class_invariant_uc(t)
            out = []
            with t.ctx.work():
                us = [cocycle_u(t, s) ** e for s in range(h)]
                for z in units:
                    base = z.embed(t.ctx) * uc.value
                    r0 = mpmath.root(base, k)
                    for j in range(k):
                        r = r0 * mpmath.expjpi(mpf(2 * j) / k)
                        out.append(tuple(r * u for u in us))
            return out

        need = ctx.bits + max(coefficient_bits(c) for c in candidates(table)) + 16
        work = table if table.ctx.bits >= need else rho_table(fd, table.ctx.with_bits(need), table.classgroup)
        for vals in candidates(work):
            try:
                coeffs, _ = minpoly_from_conjugates(vals, fd, ctx)
            except RecognitionFailed:
                continue
            if abs(coeffs[0].norm()) == 1:
                return e
    return h


def uc_algdep(fd: FieldData, cg: ClassGroup | None = None, start_bits: int = 256,
              max_bits: int = 16384) -> tuple[IntPolynomial, int]:
    """Minimal polynomial of u_c from its real value alone (LLL, no conjugates).

    Precision doubles from ``start_bits``; a relation is accepted once two
    consecutive precisions return the same polynomial.  Returns the
    polynomial and the precision at which it was confirmed.
    """
    cg = cg or reduced_forms(fd)
    prev = None
    bits = start_bits
    while bits <= max_bits:
        ctx = PrecisionContext(bits)
        uc = class_invariant_uc(rho_table(fd, ctx, cg))
        try:
            with ctx.work():
                p = algdep(uc.value.real, cg.h, ctx)
        except NoRelationFound:
            p = None
        if p is not None and p == prev:
            return p, bits
        prev = p
        bits *= 2
    raise NoRelationFound(f"D={fd.D}: algdep on u_c unstable up to {max_bits} bits")
