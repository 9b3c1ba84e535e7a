"""Exact recognition of integer polynomials from numerical data.

* an exact integral LLL (all arithmetic in Python ints),
* ``algdep`` on top of it,
* expansion of prod (X - v) followed by rounding into Z or O_E,
* Hilbert class polynomials and coefficient heights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath
import sympy
from mpmath import mpc, mpf

from .errors import DependentRows, NoRelationFound, RecognitionFailed
from .modforms import j_invariant
from .numkernel import PrecisionContext, log2_abs
from .quadratic import AlgebraicElementE, ClassGroup, FieldData, cm_point, element_from_complex


@dataclass(frozen=True)
class IntPolynomial:
    """Integer polynomial, coefficients in ascending degree order."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        c = [int(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    @property
    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = math.gcd(g, c)
        return g

    def primitive(self) -> "IntPolynomial":
        g = self.content or 1
        return IntPolynomial(tuple(c // g for c in self.coeffs))

    def normalized(self) -> "IntPolynomial":
        """Primitive part with positive leading coefficient."""
        p = self.primitive()
        if p.leading < 0:
            p = IntPolynomial(tuple(-c for c in p.coeffs))
        return p

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def reversed(self) -> "IntPolynomial":
        return IntPolynomial(tuple(reversed(self.coeffs)))

    def to_sympy(self, var):
        return sympy.Poly(list(reversed(self.coeffs)), var)

    def decimal_coeffs(self) -> list[str]:
        return [str(c) for c in self.coeffs]

    def __str__(self):
        terms = []
        for k in range(self.degree, -1, -1):
            c = self.coeffs[k]
            if c == 0 and self.degree > 0:
                continue
            mono = "" if k == 0 else ("X" if k == 1 else f"X^{k}")
            if mono and abs(c) == 1:
                s = mono
            else:
                s = f"{abs(c)}{'*' if mono else ''}{mono}"
            terms.append(("-" if c < 0 else "+", s))
        out = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        for sign, s in terms[1:]:
            out += f" {sign} {s}"
        return out


# ---------------------------------------------------------------------------
# LLL


@dataclass
class LatticeBasis:
    rows: list[list[int]]

    @property
    def dim(self) -> int:
        return len(self.rows)

    @property
    def ambient(self) -> int:
        return len(self.rows[0]) if self.rows else 0


def _dot(u, v) -> int:
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(basis: LatticeBasis | Sequence[Sequence[int]],
               delta: Fraction = Fraction(99, 100)) -> tuple[LatticeBasis, list[list[int]]]:
    """Integral LLL reduction (exact Gram-Schmidt via subdeterminants).

    Returns the reduced basis and the unimodular matrix U with
    reduced = U * original.
    """
    rows = basis.rows if isinstance(basis, LatticeBasis) else basis
    b = [[int(x) for x in r] for r in rows]
    n = len(b)
    if n == 0:
        return LatticeBasis([]), []
    H = [[int(i == j) for j in range(n)] for i in range(n)]
    p, q = delta.numerator, delta.denominator
    # 1-based bookkeeping: d[0] = 1, d[i] = Gram determinant of the first i rows
    d = [0] * (n + 1)
    d[0] = 1
    lam = [[0] * (n + 1) for _ in range(n + 1)]

    def vec(i):
        return b[i - 1]

    d[1] = _dot(vec(1), vec(1))
    if d[1] == 0:
        raise DependentRows("zero row in basis")
    if n == 1:
        return LatticeBasis(b), H

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l]:
            qq = (2 * lam[k][l] + d[l]) // (2 * d[l])
            b[k - 1] = [x - qq * y for x, y in zip(b[k - 1], b[l - 1])]
            H[k - 1] = [x - qq * y for x, y in zip(H[k - 1], H[l - 1])]
            lam[k][l] -= qq * d[l]
            for i in range(1, l):
                lam[k][i] -= qq * lam[l][i]

    def swap(k):
        b[k - 1], b[k - 2] = b[k - 2], b[k - 1]
        H[k - 1], H[k - 2] = H[k - 2], H[k - 1]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lk = lam[k][k - 1]
        B = (d[k - 2] * d[k] + lk * lk) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - lk * t) // d[k - 1]
            lam[i][k - 1] = (B * t + lk * lam[i][k]) // d[k]
        d[k - 1] = B

    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = _dot(vec(k), vec(j))
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise DependentRows("basis rows are linearly dependent")
                    d[k] = u
        red(k, k - 1)
        if q * (d[k] * d[k - 2] + lam[k][k - 1] ** 2) < p * d[k - 1] ** 2:
            swap(k)
            k = max(2, k - 1)
            continue
        for l in range(k - 2, 0, -1):
            red(k, l)
        k += 1
    return LatticeBasis(b), H


def gram_schmidt(rows: Sequence[Sequence[int]]) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
    """Exact Gram-Schmidt: (b*, mu)."""
    bs: list[list[Fraction]] = []
    mu = [[Fraction(0)] * len(rows) for _ in rows]
    for i, r in enumerate(rows):
        v = [Fraction(x) for x in r]
        for j in range(i):
            nj = _dot(bs[j], bs[j])
            mu[i][j] = _dot([Fraction(x) for x in r], bs[j]) / nj
            v = [a - mu[i][j] * c for a, c in zip(v, bs[j])]
        bs.append(v)
    return bs, mu


def is_lll_reduced(rows, delta: Fraction = Fraction(99, 100)) -> bool:
    bs, mu = gram_schmidt(rows)
    for i in range(len(rows)):
        for j in range(i):
            if abs(mu[i][j]) > Fraction(1, 2):
                return False
    for k in range(1, len(rows)):
        lhs = _dot(bs[k], bs[k])
        rhs = (delta - mu[k][k - 1] ** 2) * _dot(bs[k - 1], bs[k - 1])
        if lhs < rhs:
            return False
    return True


# ---------------------------------------------------------------------------
# algdep


def _normalized_residual(p: IntPolynomial, x) -> mpf:
    scale = sum(abs(c) * abs(x) ** k for k, c in enumerate(p.coeffs))
    return abs(p(x)) / scale if scale else mpf(0)


def _minimal_factor(p: IntPolynomial, x) -> IntPolynomial:
    X = sympy.Symbol("X")
    _, factors = sympy.factor_list(p.to_sympy(X).as_expr(), X)
    best, best_res = p, None
    for fac, _mult in factors:
        coeffs = sympy.Poly(fac, X).all_coeffs()
        cand = IntPolynomial(tuple(int(c) for c in reversed(coeffs)))
        if cand.degree < 1:
            continue
        res = _normalized_residual(cand, x)
        if best_res is None or res < best_res:
            best, best_res = cand, res
    return best.normalized()


def algdep(x, maxdeg: int, ctx: PrecisionContext) -> IntPolynomial:
    """Integer polynomial of degree <= maxdeg vanishing at the real number x.

    The relation comes from LLL on the rows (e_k, round(C x^k)); the scale C
    leaves room for the magnitude of x^maxdeg within the available precision.
    For |x| < 1 the reciprocal is recognized and the polynomial reversed.
    The irreducible factor of the relation that vanishes at x is returned,
    primitive with positive leading coefficient.
    """
    if maxdeg < 1:
        raise ValueError("maxdeg must be >= 1")
    with ctx.work():
        x = mpf(x)
        if x == 0:
            return IntPolynomial((0, 1))
        if abs(x) < 1:
            p = algdep(1 / x, maxdeg, ctx)
            return IntPolynomial(p.coeffs[::-1]).normalized()
        grow = math.ceil(maxdeg * max(0.0, log2_abs(x)))
        scale_bits = ctx.bits - grow
        if scale_bits < 32:
            raise NoRelationFound(
                f"precision {ctx.bits} too low for degree {maxdeg} at |x| ~ 2^{grow // maxdeg}")
        C = mpmath.ldexp(mpf(1), scale_bits)
        rows = []
        for k in range(maxdeg + 1):
            row = [0] * (maxdeg + 1)
            row[k] = 1
            row.append(int(mpmath.nint(C * x ** k)))
            rows.append(row)
    reduced, _ = lll_reduce(LatticeBasis(rows))
    tol_bits = ctx.bits // 4
    # a generic lattice vector has coefficients near 2^(scale_bits/(maxdeg+1));
    # anything that large is an artefact of the scale, not a relation
    height_bits = scale_bits // (maxdeg + 1) - 8
    with ctx.work():
        for row in reduced.rows:
            cand = IntPolynomial(tuple(row[:maxdeg + 1]))
            if all(c == 0 for c in cand.coeffs) or cand.degree < 1:
                continue
            if max(abs(c) for c in cand.coeffs).bit_length() > height_bits:
                continue
            res = _normalized_residual(cand, x)
            if res < mpmath.ldexp(mpf(1), -tol_bits):
                return _minimal_factor(cand, x)
    raise NoRelationFound(f"no relation of degree <= {maxdeg} at {ctx.bits} bits")


# ---------------------------------------------------------------------------
# polynomials from conjugates


def poly_from_roots(values: Sequence) -> list:
    """Coefficients (ascending) of prod (X - v), multiset semantics."""
    coeffs = [mpc(1)]
    for v in values:
        nxt = [mpc(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] += c
            nxt[i] -= v * c
        coeffs = nxt
    return coeffs


def coefficient_bits(values: Sequence) -> int:
    """Upper bound on log2 of the largest coefficient of prod (X - v)."""
    total = sum(max(0.0, log2_abs(v)) for v in values)
    return math.ceil(total + len(values)) + 1


def round_to_integers(coeffs: Sequence) -> tuple[IntPolynomial, mpf]:
    ints = []
    resid = mpf(0)
    for c in coeffs:
        c = mpc(c)
        r = int(mpmath.nint(c.real))
        ints.append(r)
        resid = max(resid, abs(c - r))
    return IntPolynomial(tuple(ints)), resid


def round_to_OE(fd: FieldData, coeffs: Sequence) -> tuple[list[AlgebraicElementE], mpf]:
    out = []
    resid = mpf(0)
    for c in coeffs:
        e, r = element_from_complex(fd, mpc(c))
        out.append(e)
        resid = max(resid, r)
    return out, resid


def minpoly_from_conjugates(values: Sequence, ring, ctx: PrecisionContext):
    """Round prod (X - v) into Z[X] (ring == "Z") or O_E[X] (ring a FieldData).

    ``values`` must already be accurate to ctx.bits beyond the size of the
    coefficients; see :func:`coefficient_bits`.  Raises RecognitionFailed if
    the rounding residual is not below ctx.tol.
    """
    with mpmath.workprec(ctx.prec + coefficient_bits(values)):
        coeffs = poly_from_roots(values)
        if ring == "Z":
            poly, resid = round_to_integers(coeffs)
        else:
            poly, resid = round_to_OE(ring, coeffs)
    if not resid < ctx.tol:
        raise RecognitionFailed(
            f"coefficient rounding residual {mpmath.nstr(resid, 5)} >= 2^{ctx.tol_log2}", resid)
    return poly, resid


def hilbert_class_polynomial(cg: ClassGroup, ctx: PrecisionContext) -> tuple[IntPolynomial, mpf]:
    """prod_a (X - j(z_a)) with integer coefficients and its rounding residual.

    j is evaluated with enough extra bits to cover the coefficient size.
    """
    rough = PrecisionContext(64)
    est = coefficient_bits([j_invariant(cm_point(f, rough), rough) for f in cg])
    work = ctx.with_bits(ctx.bits + est + 16)
    js = [j_invariant(cm_point(f, work), work) for f in cg]
    return minpoly_from_conjugates(js, "Z", ctx)


def coeff_height(p: IntPolynomial) -> mpf:
    """log max |coefficient|."""
    m = max(abs(c) for c in p.coeffs)
    if m == 0:
        raise ValueError("zero polynomial")
    with mpmath.workprec(max(64, m.bit_length() + 64)):
        return mpmath.log(m)
