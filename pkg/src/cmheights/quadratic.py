"""Imaginary quadratic fields, reduced binary quadratic forms and ideals.

Everything here is exact (Python ints and Fractions) except the complex
embeddings, which go through :mod:`mpmath` at the caller's precision.

Elements of O_E are written x + y*omega with omega = (1 + sqrt(-D))/2 when
D = 3 mod 4 and omega = sqrt(-d0) otherwise; omega^2 = t*omega - n.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import mpmath
from mpmath import mpc, mpf

from .errors import (DiscriminantMismatch, NonPrincipal, NotFundamental,
                     NotSquarefree, ZeroElement)
from .numkernel import PrecisionContext


def is_squarefree(n: int) -> bool:
    if n < 1:
        return False
    p = 2
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 1
    return True


def is_fundamental(D: int) -> bool:
    """True iff -D is a fundamental discriminant (D > 0)."""
    if D < 3:
        return False
    if D % 4 == 3:
        return is_squarefree(D)
    if D % 4 == 0:
        m = D // 4
        return m % 4 in (1, 2) and is_squarefree(m)
    return False


def fundamental_discriminants(dmax: int, dmin: int = 3) -> list[int]:
    return [D for D in range(max(3, dmin), dmax + 1) if is_fundamental(D)]


@dataclass(frozen=True)
class FieldData:
    """E = Q(sqrt(-d0)) with discriminant -D."""

    d0: int
    D: int
    w_E: int

    @property
    def t(self) -> int:
        """Trace of omega."""
        return 1 if self.D % 4 == 3 else 0

    @property
    def n(self) -> int:
        """Norm of omega."""
        return (1 + self.D) // 4 if self.D % 4 == 3 else self.d0

    def omega(self, ctx: PrecisionContext) -> mpc:
        with ctx.work():
            if self.D % 4 == 3:
                return mpc(mpf(1) / 2, mpmath.sqrt(self.d0) / 2)
            return mpc(0, mpmath.sqrt(self.d0))

    def z_E(self, ctx: PrecisionContext) -> mpc:
        """Canonical CM point: O_E = Z + Z*z_E."""
        return self.omega(ctx)

    def one(self) -> "AlgebraicElementE":
        return AlgebraicElementE(self, Fraction(1), Fraction(0))


def field_data(d0: int) -> FieldData:
    if d0 < 1 or not is_squarefree(d0):
        raise NotSquarefree(f"d0={d0} is not a squarefree positive integer")
    D = d0 if d0 % 4 == 3 else 4 * d0
    w_E = {3: 6, 4: 4}.get(D, 2)
    return FieldData(d0, D, w_E)


def field_from_discriminant(D: int) -> FieldData:
    if not is_fundamental(D):
        raise NotFundamental(f"-{D} is not a fundamental discriminant")
    return field_data(D if D % 4 == 3 else D // 4)


def _jacobi(a: int, n: int) -> int:
    assert n > 0 and n % 2 == 1
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_chi(D: int, n: int) -> int:
    """Kronecker symbol (-D | n) for a fundamental discriminant -D."""
    if not is_fundamental(D):
        raise NotFundamental(f"-{D} is not a fundamental discriminant")
    if n == 0:
        return 0
    disc = -D
    sign = 1
    if n < 0:
        n = -n
        if disc < 0:
            sign = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if disc % 2 == 0:
            return 0
        if disc % 8 in (3, 5) and v % 2 == 1:
            sign = -sign
    return sign * _jacobi(disc, n)


@lru_cache(maxsize=None)
def character_table(D: int) -> tuple[int, ...]:
    """chi(j) for j = 0..D-1."""
    return tuple(kronecker_chi(D, j) for j in range(D))


# ---------------------------------------------------------------------------
# binary quadratic forms


@dataclass(frozen=True, order=True)
class QuadForm:
    a: int
    b: int
    c: int

    @property
    def disc(self) -> int:
        return self.b * self.b - 4 * self.a * self.c

    def is_reduced(self) -> bool:
        a, b, c = self.a, self.b, self.c
        if not (abs(b) <= a <= c):
            return False
        if (abs(b) == a or a == c) and b < 0:
            return False
        return True

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.c)

    def __str__(self):
        return f"({self.a},{self.b},{self.c})"


def reduce_form(f: QuadForm) -> QuadForm:
    """Reduced representative of a positive definite form."""
    a, b, c = f.a, f.b, f.c
    if a <= 0 or f.disc >= 0:
        raise ValueError(f"{f} is not positive definite")
    while True:
        # normalize: -a < b <= a
        if not (-a < b <= a):
            r = (a - b) // (2 * a)
            b, c = b + 2 * r * a, a * r * r + b * r + c
        if a > c:
            a, b, c = c, -b, a
            continue
        if a == c and b < 0:
            b = -b
        return QuadForm(a, b, c)


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, u, v) with u*a + v*b = g = gcd(a, b) >= 0."""
    u0, v0, u1, v1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        u0, u1 = u1, u0 - q * u1
        v0, v1 = v1, v0 - q * v1
    if a < 0:
        a, u0, v0 = -a, -u0, -v0
    return a, u0, v0


def compose_forms(f: QuadForm, g: QuadForm) -> QuadForm:
    """Gauss composition (Dirichlet/Shanks style), reduced."""
    if f.disc != g.disc:
        raise DiscriminantMismatch(f"{f} and {g} have different discriminants")
    a1, b1, _ = f.as_tuple()
    a2, b2, c2 = g.as_tuple()
    if a1 > a2:
        a1, b1, a2, b2, c2 = a2, b2, a1, b1, f.c
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, u, _ = _xgcd(a2, a1)
        y1 = u
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, x2, v = _xgcd(s, d)
        y2 = -v
    v1, v2 = a1 // d1, a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    b3 = b2 + 2 * v2 * r
    a3 = v1 * v2
    c3 = (b3 * b3 - f.disc) // (4 * a3)
    return reduce_form(QuadForm(a3, b3, c3))


def class_inverse(f: QuadForm) -> QuadForm:
    return reduce_form(QuadForm(f.a, -f.b, f.c))


def cm_point(f: QuadForm, ctx: PrecisionContext) -> mpc:
    """tau_f = (-b + i sqrt(D)) / (2a): Z + Z*tau_f is homothetic to the ideal of f."""
    D = -f.disc
    with ctx.work():
        return mpc(mpf(-f.b) / (2 * f.a), mpmath.sqrt(D) / (2 * f.a))


def _form_sort_key(f: QuadForm):
    return (f.a, abs(f.b), -f.b)


@dataclass(frozen=True)
class ClassGroup:
    field: FieldData
    forms: tuple[QuadForm, ...]
    index: dict = field(compare=False, hash=False, repr=False)

    @property
    def h(self) -> int:
        return len(self.forms)

    @property
    def identity(self) -> QuadForm:
        return self.forms[0]

    def __iter__(self) -> Iterator[QuadForm]:
        return iter(self.forms)

    def __len__(self):
        return len(self.forms)

    def position(self, f: QuadForm) -> int:
        return self.index[reduce_form(f)]

    def mul(self, i: int, j: int) -> int:
        return self.index[compose_forms(self.forms[i], self.forms[j])]

    def inv(self, i: int) -> int:
        return self.index[class_inverse(self.forms[i])]

    def power(self, i: int, k: int) -> int:
        r = 0
        base = i
        if k < 0:
            base, k = self.inv(i), -k
        for _ in range(k):
            r = self.mul(r, base)
        return r

    def order(self, i: int) -> int:
        k, r = 1, i
        while r != 0:
            r = self.mul(r, i)
            k += 1
        return k


def reduced_forms(fd: FieldData) -> ClassGroup:
    """All reduced primitive forms of discriminant -D, principal form first."""
    D = fd.D
    if not is_fundamental(D):
        raise NotFundamental(f"-{D} is not a fundamental discriminant")
    forms = []
    a = 1
    while 3 * a * a <= D:
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b + D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            f = QuadForm(a, b, c)
            if c >= a and f.is_reduced() and math.gcd(math.gcd(a, b), c) == 1:
                forms.append(f)
        a += 1
    forms.sort(key=_form_sort_key)
    return ClassGroup(fd, tuple(forms), {f: i for i, f in enumerate(forms)})


def class_group(D: int) -> ClassGroup:
    return reduced_forms(field_from_discriminant(D))


# ---------------------------------------------------------------------------
# elements and ideals of O_E


@dataclass(frozen=True)
class AlgebraicElementE:
    field: FieldData
    x: Fraction
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "y", Fraction(self.y))

    @property
    def is_integral(self) -> bool:
        return self.x.denominator == 1 and self.y.denominator == 1

    def norm(self) -> Fraction:
        x, y, t, n = self.x, self.y, self.field.t, self.field.n
        return x * x + t * x * y + n * y * y

    def trace(self) -> Fraction:
        return 2 * self.x + self.field.t * self.y

    def conjugate(self) -> "AlgebraicElementE":
        # conj(omega) = t - omega
        return AlgebraicElementE(self.field, self.x + self.field.t * self.y, -self.y)

    def __add__(self, other):
        return AlgebraicElementE(self.field, self.x + other.x, self.y + other.y)

    def __neg__(self):
        return AlgebraicElementE(self.field, -self.x, -self.y)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return AlgebraicElementE(self.field, self.x * other, self.y * other)
        t, n = self.field.t, self.field.n
        x1, y1, x2, y2 = self.x, self.y, other.x, other.y
        yy = y1 * y2
        return AlgebraicElementE(self.field, x1 * x2 - n * yy, x1 * y2 + x2 * y1 + t * yy)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        r = self.field.one()
        for _ in range(k):
            r = r * self
        return r

    def embed(self, ctx: PrecisionContext) -> mpc:
        with ctx.work():
            return (mpf(self.x.numerator) / self.x.denominator
                    + mpf(self.y.numerator) / self.y.denominator * self.field.omega(ctx))

    def as_pair(self) -> tuple[str, str]:
        return (str(self.x), str(self.y))

    def __str__(self):
        return f"{self.x} + {self.y}*w"


def element_from_complex(fd: FieldData, z: mpc) -> tuple[AlgebraicElementE, mpf]:
    """Round a complex number to the nearest x + y*omega with x, y integers.

    Returns the element and the absolute rounding residual.
    """
    im_omega = mpmath.sqrt(fd.d0) / (2 if fd.D % 4 == 3 else 1)
    yr = z.imag / im_omega
    xr = z.real - yr * (mpf(fd.t) / 2)
    x, y = int(mpmath.nint(xr)), int(mpmath.nint(yr))
    elt = AlgebraicElementE(fd, Fraction(x), Fraction(y))
    approx = mpc(x + y * mpf(fd.t) / 2, y * im_omega)
    return elt, abs(z - approx)


def _hnf2(vectors: list[tuple[int, int]]) -> tuple[int, int, int]:
    """HNF of an integer lattice in Z^2 spanned by ``vectors`` (rank 2).

    Returns (A, B, C) for the basis rows (A, 0), (B, C), A, C > 0, 0 <= B < A.
    """
    rows = [list(v) for v in vectors if v != (0, 0)]
    # column 2 gcd into one row
    g, gx = 0, [0, 0]
    others = []
    for r in rows:
        if r[1] == 0:
            others.append(r)
            continue
        if g == 0:
            g, gx = r[1], r
            continue
        d, u, v = _xgcd(gx[1], r[1])
        new = [u * gx[0] + v * r[0], d]
        ka, kb = r[1] // d, gx[1] // d
        others.append([ka * gx[0] - kb * r[0], 0])
        gx, g = new, d
    if g == 0:
        raise ValueError("lattice is not of rank 2")
    if g < 0:
        gx = [-gx[0], -gx[1]]
    A = 0
    for r in others:
        A = math.gcd(A, r[0])
    if A == 0:
        raise ValueError("lattice is not of rank 2")
    return A, gx[0] % A, gx[1]


@dataclass(frozen=True)
class IdealLattice:
    """Fractional ideal Z*A + Z*(B + C*omega) scaled by 1/den (HNF)."""

    field: FieldData
    A: int
    B: int
    C: int
    den: int = 1

    @property
    def norm(self) -> Fraction:
        return Fraction(self.A * self.C, self.den * self.den)

    @property
    def is_integral(self) -> bool:
        return self.den == 1

    def basis(self) -> tuple[AlgebraicElementE, AlgebraicElementE]:
        fd, d = self.field, self.den
        return (AlgebraicElementE(fd, Fraction(self.A, d), 0),
                AlgebraicElementE(fd, Fraction(self.B, d), Fraction(self.C, d)))

    def contains(self, x: AlgebraicElementE) -> bool:
        # x = u*(A,0) + v*(B,C) over 1/den
        X, Y = x.x * self.den, x.y * self.den
        if Y.denominator != 1 or X.denominator != 1:
            return False
        if Y % self.C:
            return False
        v = Y // self.C
        return (X - v * self.B) % self.A == 0


def ideal_from_generators(fd: FieldData, gens: list[AlgebraicElementE]) -> IdealLattice:
    """The O_E-module generated by ``gens`` (multiplied out by omega)."""
    omega = AlgebraicElementE(fd, 0, 1)
    zgens = []
    for g in gens:
        zgens.extend([g, g * omega])
    den = 1
    for g in zgens:
        den = den * g.x.denominator // math.gcd(den, g.x.denominator)
        den = den * g.y.denominator // math.gcd(den, g.y.denominator)
    vecs = [(int(g.x * den), int(g.y * den)) for g in zgens]
    A, B, C = _hnf2(vecs)
    g = math.gcd(math.gcd(A, B), math.gcd(C, den))
    return IdealLattice(fd, A // g, B // g, C // g, den // g)


def unit_ideal(fd: FieldData) -> IdealLattice:
    return IdealLattice(fd, 1, 0, 1)


def ideal_from_form(fd: FieldData, f: QuadForm) -> IdealLattice:
    """Z*a + Z*(-b + sqrt(-D))/2 in HNF; its norm is a."""
    if f.disc != -fd.D:
        raise DiscriminantMismatch(f"{f} does not have discriminant -{fd.D}")
    if fd.D % 4 == 3:
        B = -(f.b + 1) // 2
    else:
        B = -f.b // 2
    return IdealLattice(fd, f.a, B % f.a, 1)


def ideal_multiply(I: IdealLattice, J: IdealLattice) -> IdealLattice:
    if I.field != J.field:
        raise DiscriminantMismatch("ideals live in different fields")
    gens = [p * q for p in I.basis() for q in J.basis()]
    return ideal_from_generators(I.field, gens)


def ideal_power(I: IdealLattice, k: int) -> IdealLattice:
    R = unit_ideal(I.field)
    for _ in range(k):
        R = ideal_multiply(R, I)
    return R


def principal_ideal(x: AlgebraicElementE) -> IdealLattice:
    return ideal_from_generators(x.field, [x])


def form_from_ideal(I: IdealLattice) -> QuadForm:
    """Reduced form of the class of I (inverse of :func:`ideal_from_form`)."""
    fd = I.field
    e1, e2 = I.basis()
    # N(u*e1 + v*e2)/N(I) as a binary form in (u, v), oriented positively
    n = I.norm
    a = e1.norm() / n
    c = e2.norm() / n
    b = ((e1 + e2).norm() - e1.norm() - e2.norm()) / n
    f = QuadForm(int(a), int(b), int(c))
    assert f.disc == -fd.D, (f, fd)
    # basis (A, B + C*omega) with A, C > 0 is positively oriented as (e2, e1);
    # the form of the oriented pair (e1, e2) must be conjugated.
    return reduce_form(QuadForm(f.a, -f.b, f.c))


def _canonical_unit_multiple(x: AlgebraicElementE) -> AlgebraicElementE:
    """Among the w_E unit multiples of x pick the one with arg in (-pi/w, pi/w]."""
    fd = x.field
    units = roots_of_unity(fd)
    ctx = PrecisionContext(128)
    best = None
    with ctx.work():
        half = mpmath.pi / fd.w_E
        for u in units:
            y = u * x
            arg = mpmath.arg(y.embed(ctx))
            if -half + mpf(2) ** -100 < arg <= half + mpf(2) ** -100:
                best = y
                break
    assert best is not None
    return best


def roots_of_unity(fd: FieldData) -> list[AlgebraicElementE]:
    """All units of O_E (every unit is a root of unity)."""
    out = []
    for y in (-1, 0, 1):
        for x in range(-2, 3):
            e = AlgebraicElementE(fd, x, y)
            if e.norm() == 1:
                out.append(e)
    return out


def principal_generator(I: IdealLattice) -> AlgebraicElementE:
    """A generator of the integral ideal I, canonicalized up to roots of unity.

    Exact enumeration of gamma = x + y*omega in I with N(gamma) = N(I);
    N(x + y omega) = (x + t y/2)^2 + (D/4) y^2 bounds |y| <= sqrt(4 N / D).
    """
    if not I.is_integral:
        raise NonPrincipal("principal_generator needs an integral ideal")
    fd = I.field
    N = I.norm.numerator
    t, n = fd.t, fd.n
    ymax = math.isqrt(4 * N // fd.D) + 1
    found = None
    for y in sorted(range(-ymax, ymax + 1), key=lambda v: (abs(v), -v)):
        # x^2 + t*y*x + (n*y^2 - N) = 0
        disc = t * t * y * y - 4 * (n * y * y - N)
        if disc < 0:
            continue
        r = math.isqrt(disc)
        if r * r != disc:
            continue
        for num in (-t * y + r, -t * y - r):
            if num % 2:
                continue
            cand = AlgebraicElementE(fd, num // 2, y)
            if I.contains(cand):
                found = cand
                break
        if found is not None:
            break
    if found is None:
        raise NonPrincipal(f"ideal of norm {N} is not principal")
    return _canonical_unit_multiple(found)


def norm_lemma_check(x: AlgebraicElementE, ctx: PrecisionContext) -> tuple[mpf, int]:
    """(prod over both embeddings of |sigma(x)|, #(O_E / x O_E))."""
    if not x.is_integral:
        raise ValueError("norm_lemma_check needs an integral element")
    if x.x == 0 and x.y == 0:
        raise ZeroElement("x = 0")
    with ctx.work():
        z = x.embed(ctx)
        analytic = abs(z) * abs(mpmath.conj(z))
    # index of x*O_E: |det| of multiplication by x on the basis (1, omega)
    omega = AlgebraicElementE(x.field, 0, 1)
    c1, c2 = x, x * omega
    index = abs(int(c1.x * c2.y - c1.y * c2.x))
    return analytic, index
