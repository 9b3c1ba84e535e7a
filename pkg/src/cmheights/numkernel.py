"""Arbitrary-precision kernel.

Real and complex numbers are mpmath ``mpf``/``mpc`` values; every routine
takes a :class:`PrecisionContext` and evaluates inside
``mpmath.workprec(ctx.bits + ctx.guard_bits)``.  Results are deterministic
for fixed inputs and context.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
from mpmath import mpc, mpf

from .errors import InputError, PrecisionTooLow

BigReal = mpf
BigComplex = mpc

MIN_BITS = 64
MIN_GUARD = 16


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision policy.

    ``bits`` is the target precision, ``guard_bits`` are carried on top of it
    internally, and ``tol`` (derived) is the comparison tolerance 2^(-bits/2).
    """

    bits: int = 256
    guard_bits: int = 32

    def __post_init__(self):
        if self.bits < MIN_BITS:
            raise PrecisionTooLow(f"bits={self.bits} < {MIN_BITS}")
        if self.guard_bits < MIN_GUARD:
            raise PrecisionTooLow(f"guard_bits={self.guard_bits} < {MIN_GUARD}")

    @property
    def prec(self) -> int:
        return self.bits + self.guard_bits

    @property
    def tol(self) -> mpf:
        return mpmath.ldexp(mpf(1), -(self.bits // 2))

    @property
    def tol_log2(self) -> int:
        return -(self.bits // 2)

    def work(self):
        return mpmath.workprec(self.prec)

    def with_bits(self, bits: int) -> "PrecisionContext":
        return PrecisionContext(bits, self.guard_bits)

    def doubled(self) -> "PrecisionContext":
        return self.with_bits(2 * self.bits)

    @property
    def digits(self) -> int:
        """Decimal digits justified by ``bits``."""
        return max(1, int(self.bits * math.log10(2)))


def decimal_string(x, ctx: PrecisionContext) -> str:
    """Render a real number with the digit count implied by ``ctx.bits``."""
    with ctx.work():
        return mpmath.nstr(mpf(x), ctx.digits, min_fixed=-5, max_fixed=40)


@lru_cache(maxsize=None)
def bernoulli(n: int) -> Fraction:
    p, q = mpmath.bernfrac(n)
    return Fraction(int(p), int(q))


def _as_fraction(q) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, int):
        return Fraction(q)
    if isinstance(q, tuple):
        return Fraction(*q)
    raise InputError(f"expected an exact rational, got {q!r}")


def _stirling_log_gamma(x: Fraction, prec: int) -> mpf:
    """log Gamma(x) for rational x >> 1 by the Stirling series.

    The series is summed until the bound on the first omitted term,
    |B_{2k}| / (2k (2k-1) x^(2k-1)), drops below 2^(-prec).
    """
    xf = mpf(x.numerator) / x.denominator
    s = (xf - mpf(1) / 2) * mpmath.log(xf) - xf + mpmath.log(2 * mpmath.pi) / 2
    eps = mpmath.ldexp(mpf(1), -prec)
    x2 = xf * xf
    power = xf  # x^(2k-1)
    k = 1
    while True:
        b = bernoulli(2 * k)
        term = mpf(b.numerator) / (b.denominator * (2 * k) * (2 * k - 1)) / power
        if abs(term) < eps:
            # alternating-sign real series: error bounded by this term
            break
        s += term
        power *= x2
        k += 1
        if k > 4 * prec:
            raise ArithmeticError("Stirling series did not reach target accuracy")
    return s


def _shift_count(q: Fraction, bits: int) -> int:
    target = max(8, -(-bits // 4))
    return max(0, math.ceil(target - q))


def log_gamma_rational(q, ctx: PrecisionContext) -> mpf:
    """log Gamma(q) for rational 0 < q < 1.

    Gamma(q) = Gamma(q + k) / prod_{i<k} (q + i) with k chosen so that
    q + k >= bits/4; the product is formed exactly.
    """
    q = _as_fraction(q)
    if not 0 < q < 1:
        raise InputError(f"gamma_rational needs 0 < q < 1, got {q}")
    k = _shift_count(q, ctx.bits)
    num, den = q.numerator, q.denominator
    prod_num = 1
    for i in range(k):
        prod_num *= num + i * den
    with ctx.work():
        lg = _stirling_log_gamma(q + k, ctx.prec + 8)
        return lg - mpmath.log(mpf(prod_num)) + k * mpmath.log(mpf(den))


def gamma_rational(q, ctx: PrecisionContext) -> mpf:
    """Gamma(q) for rational 0 < q < 1, relative error < 2^(-bits+8)."""
    lg = log_gamma_rational(q, ctx)
    with ctx.work():
        return mpmath.exp(lg)


def hurwitz_zeta_deriv0(x, ctx: PrecisionContext) -> mpf:
    """d/ds zeta(s, x) at s = 0 for rational 0 < x <= 1.

    Euler-Maclaurin with N explicit terms, differentiated term by term::

        zeta'(0,x) = -sum_{n<N} log(n+x) + a log a - a - log(a)/2
                     + sum_k B_2k / (2k (2k-1)) a^(1-2k),    a = N + x

    Deliberately independent of :func:`log_gamma_rational`: explicit log sums,
    a different cut point, and no log(2 pi) constant.
    """
    x = _as_fraction(x)
    if not 0 < x <= 1:
        raise InputError(f"hurwitz_zeta_deriv0 needs 0 < x <= 1, got {x}")
    n_terms = max(16, ctx.bits // 3)
    prec = ctx.prec + 8
    with mpmath.workprec(prec):
        xf = mpf(x.numerator) / x.denominator
        s = -mpmath.fsum(mpmath.log(n + xf) for n in range(n_terms))
        a = n_terms + xf
        la = mpmath.log(a)
        s += a * la - a - la / 2
        eps = mpmath.ldexp(mpf(1), -prec)
        a2 = a * a
        power = a
        k = 1
        while True:
            b = bernoulli(2 * k)
            term = mpf(b.numerator) / (b.denominator * (2 * k) * (2 * k - 1)) / power
            if abs(term) < eps:
                break
            s += term
            power *= a2
            k += 1
    with ctx.work():
        return +s


def pi(ctx: PrecisionContext) -> mpf:
    with ctx.work():
        return +mpmath.pi


def rel_diff(a, b) -> mpf:
    """|a - b| / |b| (|a - b| when b == 0)."""
    d = abs(a - b)
    m = abs(b)
    return d / m if m else d


def log2_abs(x) -> float:
    """Cheap float estimate of log2 |x| for arbitrarily large/small mpf/mpc."""
    if x == 0:
        return -math.inf
    return float(mpmath.log(abs(x), 2))
