"""Genus-one modular forms: eta, eta^24, E4, E6, j and Petersson norms."""
from __future__ import annotations

import math

import mpmath
from mpmath import mpc, mpf

from .errors import NotPositivelyOriented, NotUpperHalfPlane
from .numkernel import PrecisionContext


def _check_tau(tau) -> mpc:
    if not isinstance(tau, mpc):
        # exact conversion: never round the caller's value
        with mpmath.workprec(max(mpmath.mp.prec, 64)):
            tau = mpc(tau)
    if not tau.imag > 0:
        raise NotUpperHalfPlane(f"Im(tau) = {tau.imag} is not positive")
    return tau


def _abs_q_log2(tau: mpc) -> float:
    # log2 |q| = -2 pi Im(tau) / ln 2
    return -2 * math.pi * float(tau.imag) / math.log(2)


def product_terms(tau, ctx: PrecisionContext) -> int:
    """Number N of factors of prod (1 - q^n) needed at this precision.

    The truncated tail satisfies |log prod_{n>N} (1 - q^n)| <~ sum_{n>N} |q|^n
    = |q|^(N+1) / (1 - |q|) < 2^(-bits-8).
    """
    lq = _abs_q_log2(mpc(tau))  # negative
    absq = 2.0 ** lq
    slack = -math.log2(1 - absq) if absq < 1 else 64.0
    target = ctx.prec + 8 + slack
    return max(1, math.ceil(target / -lq))


def eta_product(tau, ctx: PrecisionContext) -> mpc:
    """prod_{n >= 1} (1 - q^n), q = exp(2 pi i tau)."""
    tau = _check_tau(tau)
    N = product_terms(tau, ctx)
    with ctx.work():
        q = mpmath.expjpi(2 * tau)
        p = mpc(1)
        qn = mpc(1)
        for _ in range(N):
            qn *= q
            p *= 1 - qn
        return p


def eta(tau, ctx: PrecisionContext) -> mpc:
    """Dedekind eta: exp(pi i tau / 12) * prod (1 - q^n)."""
    tau = _check_tau(tau)
    p = eta_product(tau, ctx)
    with ctx.work():
        return mpmath.expjpi(tau / 12) * p


def eta24(tau, ctx: PrecisionContext) -> mpc:
    """eta(tau)^24 = q * prod (1 - q^n)^24 (the discriminant divided by (2 pi)^12)."""
    tau = _check_tau(tau)
    p = eta_product(tau, ctx)
    with ctx.work():
        return mpmath.expjpi(2 * tau) * p ** 24


def log_abs_eta24(tau, ctx: PrecisionContext) -> mpf:
    """log |eta^24(tau)| = -2 pi Im(tau) + 24 log |prod (1 - q^n)|."""
    tau = _check_tau(tau)
    p = eta_product(tau, ctx)
    with ctx.work():
        return -2 * mpmath.pi * tau.imag + 24 * mpmath.log(abs(p))


def _lambert_terms(tau, ctx: PrecisionContext, power: int) -> int:
    # sum_{n>N} n^power |q|^n / (1 - |q|^n): bounded once n^power |q|^n < 2^-prec
    lq = -_abs_q_log2(mpc(tau))
    n = max(1, math.ceil((ctx.prec + 16) / lq))
    while power * math.log2(n) - n * lq > -(ctx.prec + 16):
        n += 1
    return n


def _eisenstein(tau, ctx: PrecisionContext, k: int, const: int) -> mpc:
    tau = _check_tau(tau)
    N = _lambert_terms(tau, ctx, k - 1)
    with ctx.work():
        q = mpmath.expjpi(2 * tau)
        s = mpc(0)
        qn = mpc(1)
        for n in range(1, N + 1):
            qn *= q
            s += mpf(n) ** (k - 1) * qn / (1 - qn)
        return 1 + const * s


def eisenstein_e4(tau, ctx: PrecisionContext) -> mpc:
    return _eisenstein(tau, ctx, 4, 240)


def eisenstein_e6(tau, ctx: PrecisionContext) -> mpc:
    return _eisenstein(tau, ctx, 6, -504)


def j_invariant(tau, ctx: PrecisionContext) -> mpc:
    """j = E4^3 / eta^24."""
    e4 = eisenstein_e4(tau, ctx)
    d = eta24(tau, ctx)
    with ctx.work():
        return e4 ** 3 / d


def j_invariant_e4e6(tau, ctx: PrecisionContext) -> mpc:
    """j = 1728 E4^3 / (E4^3 - E6^2); independent of the eta product."""
    e4 = eisenstein_e4(tau, ctx)
    e6 = eisenstein_e6(tau, ctx)
    with ctx.work():
        c = e4 ** 3
        return 1728 * c / (c - e6 ** 2)


def homogeneous_eval(weight: int, z1, z2, ctx: PrecisionContext) -> mpc:
    """eta^24 power of weight ``weight`` evaluated on the lattice Z z1 + Z z2.

    f(Lambda) = z2^(-w) f(z1 / z2) for the positively oriented basis (z1, z2).
    """
    if weight % 12:
        raise ValueError("only weights divisible by 12 (powers of eta^24) are supported")
    with ctx.work():
        z1, z2 = mpc(z1), mpc(z2)
        tau = z1 / z2
    if not tau.imag > 0:
        raise NotPositivelyOriented("basis (z1, z2) is not positively oriented")
    f = eta24(tau, ctx)
    with ctx.work():
        return z2 ** (-weight) * f ** (weight // 12)


def petersson_g1(fval_abs, im_tau, weight: int, ctx: PrecisionContext | None = None) -> mpf:
    """||f|| = |f(tau)| Im(tau)^(w/2) (4 pi)^(w/2)."""
    ctx = ctx or PrecisionContext(max(64, mpmath.mp.prec - 32))
    with ctx.work():
        half = mpf(weight) / 2
        return mpf(fval_abs) * mpf(im_tau) ** half * (4 * mpmath.pi) ** half


def log_petersson_g1(log_fval_abs, im_tau, weight: int, ctx: PrecisionContext) -> mpf:
    """log of :func:`petersson_g1`; avoids overflow-sized intermediates."""
    with ctx.work():
        half = mpf(weight) / 2
        return mpf(log_fval_abs) + half * (mpmath.log(im_tau) + mpmath.log(4 * mpmath.pi))
