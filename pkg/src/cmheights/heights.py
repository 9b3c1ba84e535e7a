"""Faltings heights of CM elliptic curves and the Chowla-Selberg identity.

The height is computed two ways:

* from Gamma values through the group-algebra pairing of the CM type with
  the odd characters of G = Gal(E|Q) = Z/2 (Lerch / class number formula);
* from eta values at the CM points of every ideal class.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpf

from .errors import GroupMismatch
from .modforms import eta_product
from .numkernel import (PrecisionContext, decimal_string, hurwitz_zeta_deriv0,
                        log_gamma_rational)
from .quadratic import ClassGroup, FieldData, character_table, cm_point, reduced_forms


# ---------------------------------------------------------------------------
# functions on a finite abelian group


@dataclass(frozen=True)
class GroupFunction:
    """Complex function on G = Z/n1 x ... x Z/nk, values listed in product order."""

    moduli: tuple[int, ...]
    values: tuple

    def __post_init__(self):
        n = 1
        for m in self.moduli:
            n *= m
        if len(self.values) != n:
            raise ValueError(f"expected {n} values, got {len(self.values)}")

    @property
    def order(self) -> int:
        return len(self.values)

    def elements(self):
        return list(itertools.product(*(range(m) for m in self.moduli)))

    def __call__(self, g) -> object:
        return self.values[self.elements().index(tuple(g))]

    @classmethod
    def from_callable(cls, moduli, fn):
        moduli = tuple(moduli)
        elts = itertools.product(*(range(m) for m in moduli))
        return cls(moduli, tuple(fn(g) for g in elts))

    def __add__(self, other):
        _check_same(self, other)
        return GroupFunction(self.moduli, tuple(a + b for a, b in zip(self.values, other.values)))

    def scale(self, c):
        return GroupFunction(self.moduli, tuple(c * v for v in self.values))

    def dual(self) -> "GroupFunction":
        """f^vee(g) = f(g^-1)."""
        return GroupFunction.from_callable(
            self.moduli, lambda g: self(tuple(-x % m for x, m in zip(g, self.moduli))))


def _check_same(f: GroupFunction, g: GroupFunction):
    if f.moduli != g.moduli:
        raise GroupMismatch(f"functions on {f.moduli} and {g.moduli}")


def convolve(f: GroupFunction, g: GroupFunction) -> GroupFunction:
    """(f * g)(l) = (1/#G) sum_gamma f(gamma) g(gamma^-1 l)."""
    _check_same(f, g)
    elts = f.elements()
    mods = f.moduli
    out = []
    for lam in elts:
        s = 0
        for gam in elts:
            s += f(gam) * g(tuple((l - x) % m for l, x, m in zip(lam, gam, mods)))
        out.append(Fraction(s) / len(elts) if not isinstance(s, complex) else s / len(elts))
    return GroupFunction(mods, tuple(out))


def inner(f: GroupFunction, g: GroupFunction):
    """<f, g> = (1/#G) sum f(gamma) conj(g(gamma))."""
    _check_same(f, g)
    s = sum(a * b.conjugate() for a, b in zip(f.values, g.values))
    return Fraction(s) / f.order if not isinstance(s, complex) else s / f.order


def z2_identity() -> GroupFunction:
    """CM type of an elliptic curve: the indicator of the identity on Z/2."""
    return GroupFunction((2,), (Fraction(1), Fraction(0)))


def z2_odd_character() -> GroupFunction:
    return GroupFunction((2,), (Fraction(1), Fraction(-1)))


def pairing_coefficient() -> Fraction:
    """<Phi * Phi^vee, chi> for the only odd character chi of Z/2."""
    phi = z2_identity()
    return inner(convolve(phi, phi.dual()), z2_odd_character())


# ---------------------------------------------------------------------------
# Gamma products and L-values


def log_gamma_product(fd: FieldData, ctx: PrecisionContext) -> mpf:
    """sum_{j=1}^{D-1} chi(j) log Gamma(j/D)."""
    chi = character_table(fd.D)
    js = [j for j in range(1, fd.D) if chi[j]]
    terms = [log_gamma_rational(Fraction(j, fd.D), ctx) for j in js]
    with ctx.work():
        return mpmath.fsum(chi[j] * t for j, t in zip(js, terms))


def gamma_product(fd: FieldData, ctx: PrecisionContext) -> mpf:
    """prod_{j=1}^{D-1} Gamma(j/D)^chi(j)."""
    lg = log_gamma_product(fd, ctx)
    with ctx.work():
        return mpmath.exp(lg)


@dataclass(frozen=True)
class LData:
    L0: Fraction
    Lprime0: mpf
    conductor: int

    @property
    def log_derivative(self) -> mpf:
        return self.Lprime0 / (mpf(self.L0.numerator) / self.L0.denominator)


def lfunction_data(fd: FieldData, ctx: PrecisionContext, h: int | None = None) -> LData:
    """L(chi, 0) = 2h/w_E and L'(chi, 0) via Lerch's formula."""
    if h is None:
        h = reduced_forms(fd).h
    L0 = Fraction(2 * h, fd.w_E)
    lg = log_gamma_product(fd, ctx)
    with ctx.work():
        L0f = mpf(L0.numerator) / L0.denominator
        ratio = -mpmath.log(fd.D) + mpf(fd.w_E) / (2 * h) * lg
        return LData(L0, L0f * ratio, fd.D)


def l0_hurwitz(D: int) -> Fraction:
    """L(chi, 0) = sum chi(j) zeta(0, j/D) with zeta(0, x) = 1/2 - x."""
    chi = character_table(D)
    return sum((chi[j] * (Fraction(1, 2) - Fraction(j, D)) for j in range(1, D)), Fraction(0))


def lprime0_hurwitz(D: int, ctx: PrecisionContext) -> mpf:
    """L'(chi, 0) = -log(D) L(chi, 0) + sum chi(j) zeta'(0, j/D)."""
    chi = character_table(D)
    L0 = l0_hurwitz(D)
    js = [j for j in range(1, D) if chi[j]]
    terms = [hurwitz_zeta_deriv0(Fraction(j, D), ctx) for j in js]
    with ctx.work():
        return (-mpmath.log(D) * mpf(L0.numerator) / L0.denominator
                + mpmath.fsum(chi[j] * t for j, t in zip(js, terms)))


# ---------------------------------------------------------------------------
# Faltings heights


def faltings_gamma(fd: FieldData, ctx: PrecisionContext, h: int | None = None) -> mpf:
    """h_Fal = -sum_{chi odd} <Phi*Phi^vee, chi> [2 L'(chi,0)/L(chi,0) + log f_chi].

    For an imaginary quadratic field this is
    (1/4) log D - (w_E / 4h) sum chi(j) log Gamma(j/D).
    """
    ld = lfunction_data(fd, ctx, h)
    c = pairing_coefficient()
    with ctx.work():
        cf = mpf(c.numerator) / c.denominator
        return -cf * (2 * ld.log_derivative + mpmath.log(ld.conductor))


def faltings_gamma_closed_form(fd: FieldData, ctx: PrecisionContext, h: int) -> mpf:
    lg = log_gamma_product(fd, ctx)
    with ctx.work():
        return mpmath.log(fd.D) / 4 - mpf(fd.w_E) / (4 * h) * lg


def log_cs_factor(tau, ctx: PrecisionContext) -> mpf:
    """log( Im(tau) |eta(tau)|^4 4 pi )."""
    p = eta_product(tau, ctx)
    with ctx.work():
        tau = mpmath.mpc(tau)
        log_abs_eta = -mpmath.pi * tau.imag / 12 + mpmath.log(abs(p))
        return mpmath.log(tau.imag) + 4 * log_abs_eta + mpmath.log(4 * mpmath.pi)


def faltings_eta(cg: ClassGroup, ctx: PrecisionContext) -> mpf:
    """-(1/2h) sum_a log( Im(z_a) |eta(z_a)|^4 4 pi )."""
    terms = [log_cs_factor(cm_point(f, ctx), ctx) for f in cg]
    with ctx.work():
        return -mpmath.fsum(terms) / (2 * cg.h)


@dataclass
class HeightReport:
    D: int
    h: int
    w_E: int
    h_fal_gamma: mpf
    h_fal_eta: mpf
    cs_lhs: mpf
    cs_rhs: mpf
    max_abs_diff: mpf
    bits: int
    ctx: PrecisionContext = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.max_abs_diff < self.ctx.tol

    def to_json(self) -> dict:
        ds = lambda x: decimal_string(x, self.ctx)  # noqa: E731
        return {
            "h_fal_gamma": ds(self.h_fal_gamma),
            "h_fal_eta": ds(self.h_fal_eta),
            "cs_lhs": ds(self.cs_lhs),
            "cs_rhs": ds(self.cs_rhs),
            "cs_residual": ds(self.max_abs_diff),
        }


def cs_verify(fd: FieldData, ctx: PrecisionContext, cg: ClassGroup | None = None) -> HeightReport:
    """Both sides of the Chowla-Selberg formula.

    LHS = [prod_a Im(z_a) |eta(z_a)|^4 4 pi]^(1/2h),
    RHS = D^(-1/4) [prod Gamma(j/D)^chi(j)]^(w_E / 4h).
    ``max_abs_diff`` is the relative difference |LHS - RHS| / RHS.
    """
    cg = cg or reduced_forms(fd)
    h = cg.h
    h_eta = faltings_eta(cg, ctx)
    h_gam = faltings_gamma(fd, ctx, h)
    lg = log_gamma_product(fd, ctx)
    with ctx.work():
        lhs = mpmath.exp(-h_eta)
        rhs = mpmath.power(fd.D, mpf(-1) / 4) * mpmath.exp(mpf(fd.w_E) / (4 * h) * lg)
        diff = abs(lhs - rhs) / rhs
    return HeightReport(fd.D, h, fd.w_E, h_gam, h_eta, lhs, rhs, diff, ctx.bits, ctx)
