"""End-to-end acceptance criteria, one summary line each (see the terminal summary)."""
import math
import random
import subprocess
import sys
import time

import mpmath
import sympy
from mpmath import mpc, mpf

from conftest import ACCEPTANCE_LINES
from cmheights import units as U
from cmheights.algrec import coeff_height, hilbert_class_polynomial
from cmheights.errors import RecognitionFailed
from cmheights.heights import cs_verify, faltings_eta, faltings_gamma
from cmheights.modforms import eta, eta24
from cmheights.numkernel import PrecisionContext
from cmheights.quadratic import (AlgebraicElementE, field_from_discriminant,
                                 fundamental_discriminants, kronecker_chi, norm_lemma_check,
                                 reduced_forms)

ALL_D = fundamental_discriminants(200)
CTX = PrecisionContext(256)
TWO_M128 = mpmath.ldexp(1, -128)
TWO_M64 = mpmath.ldexp(1, -64)


def record(num, label, ok, detail):
    ACCEPTANCE_LINES.append((num, label, bool(ok), detail))
    assert ok, detail


def fmt(x):
    return mpmath.nstr(x, 3) if x else "0"


_tables = {}


def table(D):
    if D not in _tables:
        fd = field_from_discriminant(D)
        _tables[D] = U.rho_table(fd, CTX, reduced_forms(fd))
    return _tables[D]


def test_1_chowla_selberg():
    t0 = time.perf_counter()
    worst, bad = mpf(0), []
    anchor = None
    for D in ALL_D:
        rep = cs_verify(field_from_discriminant(D), CTX)
        worst = max(worst, rep.max_abs_diff)
        if not rep.max_abs_diff < CTX.tol:
            bad.append(D)
        if D == 4:
            anchor = (float(rep.cs_lhs), float(rep.cs_rhs))
    elapsed = time.perf_counter() - t0
    anchor_ok = all(abs(v - 2.09211) / 2.09211 < 1e-4 for v in anchor)
    ok = not bad and elapsed < 60 and anchor_ok
    record(1, "Chowla-Selberg", ok,
           f"{len(ALL_D)} D, max rel diff {fmt(worst)} (tol 2^-128), {elapsed:.1f}s, "
           f"D=4 sides {anchor[0]:.6f}/{anchor[1]:.6f}, failures {bad}")


def test_2_faltings_double():
    worst, bad = mpf(0), []
    for D in ALL_D:
        fd = field_from_discriminant(D)
        cg = reduced_forms(fd)
        a, b = faltings_eta(cg, CTX), faltings_gamma(fd, CTX, cg.h)
        with CTX.work():
            d = abs(a - b)
        worst = max(worst, d)
        if not d < TWO_M128:
            bad.append(D)
        if D == 4:
            h4 = float(b)
    ok = not bad and abs(h4 + 0.73817) < 1e-4
    record(2, "Faltings height double computation", ok,
           f"max |eta - gamma| {fmt(worst)}, h_Fal(4) = {h4:.6f}, failures {bad}")


def test_3_unit_checks():
    worst = {"norm": mpf(0), "cocycle": mpf(0), "abs formula": mpf(0)}
    bad = []
    for D in ALL_D:
        t = table(D)
        for a in range(t.h):
            with CTX.work():
                n = abs(U.unit_norm_check(t, a) - 1)
            f = U.check_abs_formula(t, a)
            worst["norm"] = max(worst["norm"], n)
            worst["abs formula"] = max(worst["abs formula"], f)
            if not (n < TWO_M128 and f < TWO_M128):
                bad.append((D, a))
        c = U.cocycle_residuals(t)
        worst["cocycle"] = max(worst["cocycle"], c)
        if not c < TWO_M128:
            bad.append((D, "cocycle"))
    record(3, "elliptic unit norm, cocycle, |rho(a^-1)| formula", not bad,
           ", ".join(f"{k} {fmt(v)}" for k, v in worst.items()) + f", failures {bad}")


def test_4_integrality():
    ctx = PrecisionContext(128)  # tol 2^-64
    cases, retried, bad = 0, [], []
    worst = mpf(0)
    for D in fundamental_discriminants(100):
        fd = field_from_discriminant(D)
        cg = reduced_forms(fd)
        if cg.h > 8:
            continue
        t = U.rho_table(fd, ctx, cg)
        for a in range(cg.h):
            cases += 1
            use = ctx
            try:
                coeffs, resid = U.charpoly_residual(t, a, use)
                if abs(coeffs[0].norm()) != 1:
                    raise RecognitionFailed("constant term not a unit")
            except RecognitionFailed:
                retried.append((D, a))
                use = ctx.doubled()
                try:
                    coeffs, resid = U.charpoly_residual(U.rho_table(fd, use, cg), a, use)
                except RecognitionFailed:
                    bad.append((D, a))
                    continue
            with use.work():
                vals = U.conjugates(U.rho_table(fd, use, cg), a).values
                nrm = abs(mpmath.fprod(abs(v) for v in vals) ** 2 - 1)
            worst = max(worst, resid)
            if not (resid < TWO_M64 and nrm < TWO_M64 and abs(coeffs[0].norm()) == 1
                    and all(c.is_integral for c in coeffs)):
                bad.append((D, a))
    record(4, "charpoly over O_E integrality", not bad,
           f"{cases} classes (D <= 100, h <= 8), max rounding residual {fmt(worst)}, "
           f"retried {retried}, failures {bad}")


def test_5_conjecture():
    worst, bad = mpf(0), []
    anchor = None
    for D in ALL_D:
        rep = U.conjecture_verify(field_from_discriminant(D), table(D), CTX, raise_on_fail=False)
        worst = max(worst, rep.residual)
        if not rep.residual < TWO_M128:
            bad.append(D)
        if D == 4:
            anchor = (float(rep.values[0]), float(rep.target))
    anchor_ok = all(abs(v - 7030.3) / 7030.3 < 1e-4 for v in anchor)
    record(5, "Petersson values at m = 12h^2", not bad and anchor_ok,
           f"{len(ALL_D)} D, max residual {fmt(worst)}, D=4 {anchor[0]:.2f}/{anchor[1]:.2f}, "
           f"failures {bad}")


def test_6_hilbert_class_polynomial():
    want = {3: (0, 1), 4: (-1728, 1), 23: (12771880859375, -5151296875, 3491750, 1)}
    got, resid = {}, {}
    for D in want:
        p, r = hilbert_class_polynomial(reduced_forms(field_from_discriminant(D)), CTX)
        got[D], resid[D] = p.coeffs, r
    ok = got == want and all(r < TWO_M64 for r in resid.values())
    record(6, "Hilbert class polynomial", ok,
           f"D=23 {got[23]}, residuals " + ", ".join(f"{D}:{fmt(r)}" for D, r in resid.items()))


def test_7_class_invariant():
    parts, ok = [], True
    for D in (23, 31, 47):
        t = table(D)
        uc = U.class_invariant_uc(t)
        imag = U.uc_imag_residual(uc)
        with CTX.work():
            abs_gap = uc.min_gap()
        poly = U.uc_minpoly(t, CTX)
        hcp, _ = hilbert_class_polynomial(t.classgroup, CTX)
        hu, hj = coeff_height(poly), coeff_height(hcp)
        real_ok = imag < TWO_M128
        orbit_ok = len(uc) == t.h and abs_gap > TWO_M64 and uc.min_rel_gap() > TWO_M64
        height_ok = hu < hj
        ok = ok and real_ok and orbit_ok and height_ok
        parts.append(f"D={D} real {'ok' if real_ok else 'NO'} orbit {'ok' if orbit_ok else 'NO'} "
                     f"height {float(hu):.2f} vs {float(hj):.2f} {'ok' if height_ok else 'NO'}")
    record(7, "class invariant u_c", ok, "; ".join(parts))


def test_8_algdep_oracle():
    cases, bad, top = 0, [], 0
    for D in fundamental_discriminants(100):
        fd = field_from_discriminant(D)
        cg = reduced_forms(fd)
        if cg.h > 5:
            continue
        cases += 1
        p, bits = U.uc_algdep(fd, cg)
        top = max(top, bits)
        q = U.uc_minpoly(U.rho_table(fd, CTX, cg), CTX).normalized()
        if p != q:
            bad.append(D)
    record(8, "algdep on u_c vs conjugate product", not bad,
           f"{cases} D (<= 100, h <= 5), highest confirming precision {top} bits, failures {bad}")


def _random_sl2(rng):
    while True:
        c, d = rng.randint(-9, 9), rng.randint(-9, 9)
        if math.gcd(c, d) == 1:
            g, x, y = sympy.gcdex(d, -c)  # x d - y c = 1 up to sign
            a, b = int(x), int(y)
            if a * d - b * c == 1:
                return a, b, c, d


def _properties(bits, rng, n=12):
    """Failure labels from sampled property checks at one precision."""
    ctx = PrecisionContext(bits)
    fails = []
    for _ in range(n):
        with ctx.work():
            tau = mpc(rng.uniform(-0.5, 0.5), rng.uniform(0.6, 2.5))
            inv = -1 / tau
        e = eta(tau, ctx)
        with ctx.work():
            ok_t = abs(eta(tau + 1, ctx) - mpmath.expjpi(mpf(1) / 12) * e) < ctx.tol
            ok_s = abs(abs(eta(inv, ctx)) - mpmath.sqrt(abs(tau)) * abs(e)) < ctx.tol
        if not (ok_t and ok_s):
            fails.append("eta functional equation")
        a, b, c, d = _random_sl2(rng)
        with ctx.work():
            g = (a * tau + b) / (c * tau + d)
        if g.imag > 0.01:
            with ctx.work():
                v0 = abs(eta24(tau, ctx)) * tau.imag ** 6
                v1 = abs(eta24(g, ctx)) * g.imag ** 6
                if not abs(v1 - v0) / v0 < ctx.tol:
                    fails.append("SL2 invariance")
        D = rng.choice(ALL_D)
        fd = field_from_discriminant(D)
        x, y = rng.randint(-40, 40), rng.randint(-40, 40)
        if (x, y) != (0, 0):
            elt = AlgebraicElementE(fd, x, y)
            analytic, index = norm_lemma_check(elt, ctx)
            with ctx.work():
                if index != elt.norm() or not abs(analytic - index) / index < ctx.tol:
                    fails.append("norm lemma")
    return fails


def test_9_property_suites():
    rng = random.Random(20260101)
    fails = []
    for bits in (128, 256):
        fails += [f"{f}@{bits}" for f in _properties(bits, rng)]
    # exact checks: group axioms and character identities for every D
    for D in ALL_D:
        cg = reduced_forms(field_from_discriminant(D))
        for i in range(cg.h):
            if cg.mul(i, cg.inv(i)) != 0 or cg.mul(i, 0) != i:
                fails.append(f"group axioms D={D}")
            for j in range(cg.h):
                if cg.mul(i, j) != cg.mul(j, i):
                    fails.append(f"commutativity D={D}")
        for m in range(1, 60):
            if kronecker_chi(D, m + D) != kronecker_chi(D, m):
                fails.append(f"chi periodic D={D}")
            for n in (2, 3, 7):
                if kronecker_chi(D, m * n) != kronecker_chi(D, m) * kronecker_chi(D, n):
                    fails.append(f"chi multiplicative D={D}")
        if sum(kronecker_chi(D, j) for j in range(1, D + 1)) != 0:
            fails.append(f"chi sum D={D}")
    record(9, "property suites at 128 and 256 bits", not fails,
           "eta, SL2 weight-12 invariance, norm lemma, group axioms, character identities; "
           f"failures {sorted(set(fails))}")


def test_10_determinism(tmp_path):
    outs, codes = [], []
    for k in range(2):
        path = tmp_path / f"sweep{k}.json"
        proc = subprocess.run([sys.executable, "-m", "cmheights.cli", "sweep", "--dmax", "100",
                               "--bits", "256", "--quiet", "--json", str(path)], capture_output=True)
        codes.append(proc.returncode)
        outs.append(path.read_bytes() if path.exists() else b"")
    ok = outs[0] == outs[1] and outs[0] != b"" and codes == [0, 0]
    record(10, "sweep --dmax 100 determinism", ok,
           f"exit codes {codes}, {len(outs[0])} bytes, identical {outs[0] == outs[1]}")
