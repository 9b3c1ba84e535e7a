import itertools
import math
from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from cmheights.errors import DiscriminantMismatch, NonPrincipal, NotFundamental, NotSquarefree, ZeroElement
from cmheights.numkernel import PrecisionContext
from cmheights.quadratic import (AlgebraicElementE, QuadForm, character_table, class_inverse,
                                 cm_point, compose_forms, field_data, field_from_discriminant,
                                 form_from_ideal, fundamental_discriminants, ideal_from_form,
                                 ideal_multiply, ideal_power, is_fundamental, kronecker_chi,
                                 norm_lemma_check, principal_generator, principal_ideal,
                                 reduced_forms, roots_of_unity, unit_ideal)

ALL_D = fundamental_discriminants(200)


def brute_reduced_forms(D):
    """Every primitive reduced form of discriminant -D, by a naive search."""
    out = set()
    for a in range(1, D + 1):
        for b in range(-a, a + 1):
            if (b * b + D) % (4 * a):
                continue
            c = (b * b + D) // (4 * a)
            if c < a or math.gcd(math.gcd(a, b), c) != 1:
                continue
            if (b < 0) and (-b == a or a == c):
                continue
            out.add((a, b, c))
    return out


def test_fundamental_count():
    assert len(ALL_D) == 62
    assert ALL_D[:6] == [3, 4, 7, 8, 11, 15]


@pytest.mark.parametrize("d0,D,w,omega", [
    (3, 3, 6, (0.5, 0.8660254037844386)),
    (1, 4, 4, (0.0, 1.0)),
    (5, 20, 2, (0.0, 2.23606797749979)),
])
def test_field_data(d0, D, w, omega, ctx128):
    fd = field_data(d0)
    assert (fd.D, fd.w_E) == (D, w)
    z = fd.omega(ctx128)
    assert abs(complex(z) - complex(*omega)) < 1e-15
    assert len(roots_of_unity(fd)) == w


def test_field_data_rejects():
    with pytest.raises(NotSquarefree):
        field_data(12)
    with pytest.raises(NotFundamental):
        field_from_discriminant(17)
    assert not is_fundamental(16) and is_fundamental(8)


@pytest.mark.parametrize("D", ALL_D)
def test_w_divides_12(D):
    w = field_from_discriminant(D).w_E
    assert 12 % w == 0 and w == len(roots_of_unity(field_from_discriminant(D)))


@pytest.mark.parametrize("D,n,val", [(4, 1, 1), (4, 2, 0), (4, 3, -1), (3, 2, -1)])
def test_kronecker_examples(D, n, val):
    assert kronecker_chi(D, n) == val


@pytest.mark.parametrize("D", ALL_D)
def test_kronecker_matches_sympy(D):
    table = character_table(D)
    for n in range(1, 2 * D + 1):
        assert kronecker_chi(D, n) == sympy.kronecker_symbol(-D, n)
    assert table[1:D] == tuple(kronecker_chi(D, j) for j in range(1, D))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(ALL_D), st.integers(1, 400), st.integers(1, 400))
def test_kronecker_multiplicative_periodic(D, m, n):
    assert kronecker_chi(D, m * n) == kronecker_chi(D, m) * kronecker_chi(D, n)
    assert kronecker_chi(D, n + D) == kronecker_chi(D, n)
    assert (kronecker_chi(D, n) == 0) == (math.gcd(n, D) > 1)


@pytest.mark.parametrize("D", ALL_D)
def test_character_sum_zero(D):
    assert sum(kronecker_chi(D, j) for j in range(1, D + 1)) == 0


@pytest.mark.parametrize("D,forms", [
    (4, [(1, 0, 1)]),
    (20, [(1, 0, 5), (2, 2, 3)]),
    (23, [(1, 1, 6), (2, 1, 3), (2, -1, 3)]),
])
def test_reduced_forms_examples(D, forms):
    cg = reduced_forms(field_from_discriminant(D))
    assert [f.as_tuple() for f in cg] == forms


@pytest.mark.parametrize("D", ALL_D)
def test_reduced_forms_match_bruteforce(D):
    cg = reduced_forms(field_from_discriminant(D))
    assert {f.as_tuple() for f in cg} == brute_reduced_forms(D)
    assert cg.identity.a == 1
    # Dirichlet: h = -(w / 2D) sum_{j<D} chi(j) j
    w = cg.field.w_E
    s = -sum(kronecker_chi(D, j) * j for j in range(1, D))
    assert Fraction(w * s, 2 * D) == cg.h


@pytest.mark.parametrize("D", ALL_D)
def test_group_axioms(D):
    cg = reduced_forms(field_from_discriminant(D))
    h = cg.h
    for i in range(h):
        assert cg.mul(i, 0) == i == cg.mul(0, i)
        assert cg.mul(i, cg.inv(i)) == 0
        for j in range(h):
            assert cg.mul(i, j) == cg.mul(j, i)
            for k in range(h):
                assert cg.mul(cg.mul(i, j), k) == cg.mul(i, cg.mul(j, k))


def test_compose_examples():
    a, b = QuadForm(2, 1, 3), QuadForm(2, -1, 3)
    assert compose_forms(a, b) == QuadForm(1, 1, 6)
    assert compose_forms(a, a) == b
    assert class_inverse(a) == b
    assert class_inverse(QuadForm(1, 1, 6)) == QuadForm(1, 1, 6)
    assert class_inverse(QuadForm(2, 2, 3)) == QuadForm(2, 2, 3)
    with pytest.raises(DiscriminantMismatch):
        compose_forms(QuadForm(1, 0, 1), QuadForm(1, 1, 6))


@pytest.mark.parametrize("D", [D for D in ALL_D if D <= 100])
def test_compose_agrees_with_ideals(D):
    fd = field_from_discriminant(D)
    cg = reduced_forms(fd)
    for f, g in itertools.product(cg, repeat=2):
        prod = ideal_multiply(ideal_from_form(fd, f), ideal_from_form(fd, g))
        assert prod.norm == f.a * g.a
        assert form_from_ideal(prod) == compose_forms(f, g)


def test_cm_points(ctx128):
    assert cm_point(QuadForm(1, 0, 1), ctx128) == mpmath.mpc(0, 1)
    z = cm_point(QuadForm(2, 1, 3), ctx128)
    with ctx128.work():
        assert abs(z - mpmath.mpc(-0.25, mpmath.sqrt(23) / 4)) < ctx128.tol


@pytest.mark.parametrize("D", ALL_D)
def test_cm_point_in_fundamental_domain(D):
    for f in reduced_forms(field_from_discriminant(D)):
        # Im = sqrt(D)/(2a) >= sqrt(3)/2  <=>  D >= 3 a^2
        assert D >= 3 * f.a * f.a


def test_ideal_examples():
    fd23, fd20 = field_from_discriminant(23), field_from_discriminant(20)
    assert ideal_from_form(fd23, QuadForm(1, 1, 6)) == unit_ideal(fd23)
    a = ideal_from_form(fd23, QuadForm(2, 1, 3))
    assert a.norm == 2
    assert a.contains(AlgebraicElementE(fd23, 2, 0))
    # (-1 + sqrt(-23))/2 = omega - 1
    assert a.contains(AlgebraicElementE(fd23, -1, 1))
    assert ideal_multiply(a, unit_ideal(fd23)) == a
    assert ideal_power(a, 2).norm == 4
    p = ideal_from_form(fd20, QuadForm(2, 2, 3))
    assert p.contains(AlgebraicElementE(fd20, -1, 1))
    assert ideal_power(p, 2) == principal_ideal(AlgebraicElementE(fd20, 2, 0))


def test_principal_generator_examples():
    fd23, fd20 = field_from_discriminant(23), field_from_discriminant(20)
    assert principal_generator(unit_ideal(fd23)) == fd23.one()
    a3 = ideal_power(ideal_from_form(fd23, QuadForm(2, 1, 3)), 3)
    g = principal_generator(a3)
    # (3 + sqrt(-23))/2 = 1 + omega
    assert (g.x, g.y) == (1, 1) and g.norm() == 8
    with pytest.raises(NonPrincipal):
        principal_generator(ideal_from_form(fd20, QuadForm(2, 2, 3)))


@pytest.mark.parametrize("D", ALL_D)
def test_generator_of_a_h(D):
    fd = field_from_discriminant(D)
    cg = reduced_forms(fd)
    for f in cg:
        I = ideal_power(ideal_from_form(fd, f), cg.h)
        g = principal_generator(I)
        assert principal_ideal(g) == I


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(ALL_D), st.integers(-50, 50), st.integers(-50, 50))
def test_norm_lemma(D, x, y):
    if x == 0 and y == 0:
        return
    fd = field_from_discriminant(D)
    for bits in (128, 256):
        ctx = PrecisionContext(bits)
        elt = AlgebraicElementE(fd, x, y)
        analytic, index = norm_lemma_check(elt, ctx)
        assert index == elt.norm()
        with ctx.work():
            assert abs(analytic - index) / index < ctx.tol


def test_norm_lemma_examples(ctx128):
    fd = field_from_discriminant(23)
    assert norm_lemma_check(fd.one(), ctx128)[1] == 1
    assert norm_lemma_check(AlgebraicElementE(fd, 2, 0), ctx128)[1] == 4
    assert norm_lemma_check(AlgebraicElementE(fd, 1, 1), ctx128)[1] == 8
    with pytest.raises(ZeroElement):
        norm_lemma_check(AlgebraicElementE(fd, 0, 0), ctx128)
