"""Command line driver.

    cmheights <verb> (-D N | --d0 N) [--bits B] [--json PATH] [--quiet]
    cmheights sweep --dmax N [--bits B] [--json PATH] [--quiet]

One JSON document per invocation (stdout unless --json is given).  Exit
status: 0 all checks passed, 1 a numeric check failed after the retry at
doubled precision, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

import mpmath

from . import units as U
from .algrec import coeff_height, hilbert_class_polynomial
from .errors import CMHeightsError, InputError, NumericFailure
from .heights import cs_verify
from .numkernel import PrecisionContext, decimal_string
from .quadratic import (FieldData, field_data, field_from_discriminant,
                        fundamental_discriminants, reduced_forms)

VERBS = ("cs-verify", "class-group", "elliptic-units", "class-invariant",
         "hilbert-poly", "conjecture-check", "sweep")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class Checks:
    """Collects named residuals and booleans; ``passed`` is their conjunction."""

    def __init__(self, ctx: PrecisionContext):
        self.ctx = ctx
        self.results: dict[str, bool] = {}

    def below(self, name: str, residual, tol=None) -> bool:
        tol = self.ctx.tol if tol is None else tol
        ok = bool(residual < tol)
        self.results[name] = ok
        return ok

    def flag(self, name: str, ok: bool) -> bool:
        self.results[name] = bool(ok)
        return bool(ok)

    @property
    def passed(self) -> bool:
        return all(self.results.values())


def _ds(x, ctx):
    return decimal_string(x, ctx)


def _poly_json(p) -> list[str]:
    return [str(c) for c in p.coeffs]


# -- record sections --------------------------------------------------------


def _section_forms(fd, cg, ctx, chk, rec):
    rec["forms"] = [str(f) for f in cg]


def _section_heights(fd, cg, ctx, chk, rec):
    rep = cs_verify(fd, ctx, cg)
    rec.update(rep.to_json())
    chk.below("chowla_selberg", rep.max_abs_diff)
    with ctx.work():
        chk.below("faltings_double", abs(rep.h_fal_eta - rep.h_fal_gamma))


def _section_units(fd, cg, ctx, chk, rec, table):
    h = cg.h
    with ctx.work():
        rec["rho_abs"] = {str(f): _ds(abs(table.rho[i]), ctx) for i, f in enumerate(cg)}
        norm_res = max(abs(U.unit_norm_check(table, a) - 1) for a in range(h))
    abs_res = max(U.check_abs_formula(table, a) for a in range(h))
    conj_res = U.rho_inverse_is_conjugate(table)
    with ctx.work():
        principal_res = abs(table.rho[0] - 1)
    integral = []
    for a in range(h):
        coeffs, resid = U.charpoly_residual(table, a, ctx)
        integral.append(abs(coeffs[0].norm()) == 1)
    cocycle = U.cocycle_residuals(table)
    _, descent = U.descent_unit(table)
    rec["unit_checks"] = {
        "principal_residual": _ds(principal_res, ctx),
        "norm_residual_max": _ds(norm_res, ctx),
        "abs_formula_residual_max": _ds(abs_res, ctx),
        "inverse_conjugate_residual_max": _ds(conj_res, ctx),
        "charpoly_integral": all(integral),
        "descent_residual_max": _ds(descent, ctx),
        "minimal_descent_exponent": U.minimal_descent_exponent(table, ctx),
    }
    rec["cocycle_residual_max"] = _ds(cocycle, ctx)
    chk.below("rho_principal", principal_res)
    chk.below("unit_norm", norm_res)
    chk.below("abs_formula", abs_res)
    chk.below("inverse_conjugate", conj_res)
    chk.flag("charpoly_integral", all(integral))
    chk.below("cocycle", cocycle)
    chk.below("descent", descent)


def _section_invariant(fd, cg, ctx, chk, rec, table):
    uc = U.class_invariant_uc(table)
    imag = U.uc_imag_residual(uc)
    action = U.uc_action_residual(table, uc)
    gap = uc.min_rel_gap()
    poly = U.uc_minpoly(table, ctx)
    hcp, _ = hilbert_class_polynomial(cg, ctx)
    with ctx.work():
        rec["u_c"] = _ds(uc.value.real, ctx)
        rec["u_c_sign"] = 1 if uc.value.real > 0 else -1
        rec["u_c_action_residual"] = _ds(action, ctx)
        rec["u_c_imag_residual"] = _ds(imag, ctx)
        rec["u_c_orbit_rel_gap"] = _ds(gap, ctx) if cg.h > 1 else None
        rec["u_c_minpoly"] = _poly_json(poly)
        rec["hcp"] = _poly_json(hcp)
        hu, hj = _height_or_zero(poly), _height_or_zero(hcp)
        rec["height_ratio"] = _ds(hu / hj, ctx) if hj else None
    chk.below("u_c_real", imag)
    chk.below("u_c_action", action)
    # conjugates can be ~1e-300 in size, so separation is measured relatively
    chk.flag("u_c_orbit_distinct", cg.h == 1 or gap > mpmath.ldexp(1, -64))
    chk.flag("u_c_minpoly_monic_unit", poly.leading == 1 and abs(poly.coeffs[0]) == 1)


def _height_or_zero(p):
    if max(abs(c) for c in p.coeffs) <= 1:
        return mpmath.mpf(0)
    return coeff_height(p)


def _section_hcp(fd, cg, ctx, chk, rec):
    hcp, resid = hilbert_class_polynomial(cg, ctx)
    rec["hcp"] = _poly_json(hcp)
    rec["hcp_residual"] = _ds(resid, ctx)
    rec["hcp_height"] = _ds(_height_or_zero(hcp), ctx)
    chk.below("hcp_integral", resid)


def _section_conjecture(fd, cg, ctx, chk, rec, table):
    rep = U.conjecture_verify(fd, table, ctx, raise_on_fail=False)
    rec["conjecture_m"] = rep.m
    rec["conjecture_target"] = _ds(rep.target, ctx)
    rec["conjecture_residual_max"] = _ds(rep.residual, ctx)
    rec["u_c_sign"] = rep.uc_sign
    chk.below("conjecture", rep.residual)


def _needs_table(verb: str) -> bool:
    return verb in ("elliptic-units", "class-invariant", "conjecture-check", "sweep")


def build_record(verb: str, fd: FieldData, ctx: PrecisionContext) -> tuple[dict, bool]:
    cg = reduced_forms(fd)
    rec: dict = {"D": fd.D, "h": cg.h, "w_E": fd.w_E}
    chk = Checks(ctx)
    table = U.rho_table(fd, ctx, cg) if _needs_table(verb) else None
    if verb in ("class-group", "sweep"):
        _section_forms(fd, cg, ctx, chk, rec)
    if verb in ("cs-verify", "sweep"):
        _section_heights(fd, cg, ctx, chk, rec)
    if verb in ("elliptic-units", "sweep"):
        _section_units(fd, cg, ctx, chk, rec, table)
    if verb in ("class-invariant", "sweep"):
        _section_invariant(fd, cg, ctx, chk, rec, table)
    if verb == "hilbert-poly":
        _section_hcp(fd, cg, ctx, chk, rec)
    if verb in ("conjecture-check", "sweep"):
        _section_conjecture(fd, cg, ctx, chk, rec, table)
    rec["checks"] = dict(sorted(chk.results.items()))
    return rec, chk.passed


def run_one(verb: str, fd: FieldData, bits: int,
            builder: Callable = build_record) -> dict:
    """Build one record, retrying once at 2*bits on a numeric failure."""
    ctx = PrecisionContext(bits)
    retries = 0
    while True:
        try:
            rec, ok = builder(verb, fd, ctx)
        except NumericFailure as exc:
            rec, ok = {"D": fd.D, "error": str(exc)}, False
        if ok or retries == 1:
            break
        retries += 1
        ctx = ctx.doubled()
    rec["bits_used"] = ctx.bits
    rec["retries"] = retries
    rec["pass"] = ok
    return rec


def emit_report(records: list[dict], json_path: str | None, header: dict | None = None) -> str:
    """Serialize records (sorted by D, keys sorted) and write them out."""
    if not records:
        raise ValueError("no records to emit")
    doc = dict(header or {})
    doc["records"] = sorted(records, key=lambda r: r["D"])
    doc["pass"] = all(r["pass"] for r in records)
    text = json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=False) + "\n"
    if json_path is None:
        sys.stdout.write(text)
    else:
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--bits", type=int, default=256, help="target precision in bits (>= 64)")
    common.add_argument("--json", dest="json_path", metavar="PATH", help="write the JSON report here")
    common.add_argument("--quiet", action="store_true", help="no per-discriminant summary on stderr")

    p = argparse.ArgumentParser(prog="cmheights", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True, metavar="verb")
    for verb in VERBS:
        sp = sub.add_parser(verb, parents=[common])
        if verb == "sweep":
            sp.add_argument("--dmax", type=int, required=True)
        else:
            g = sp.add_mutually_exclusive_group(required=True)
            g.add_argument("-D", type=int, dest="D", help="discriminant is -D")
            g.add_argument("--d0", type=int, help="field Q(sqrt(-d0)), d0 squarefree")
    return p


def _fields(args) -> list[FieldData]:
    if args.verb == "sweep":
        if args.dmax < 3:
            raise InputError(f"--dmax {args.dmax} < 3: no fundamental discriminants")
        return [field_from_discriminant(D) for D in fundamental_discriminants(args.dmax)]
    if args.D is not None:
        return [field_from_discriminant(args.D)]
    return [field_data(args.d0)]


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.bits < 64:
            raise InputError(f"--bits {args.bits} < 64")
        fields = _fields(args)
    except InputError as exc:
        print(f"cmheights: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    records = []
    for fd in fields:
        try:
            rec = run_one(args.verb, fd, args.bits)
        except CMHeightsError as exc:  # not numeric: an input problem
            print(f"cmheights: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        records.append(rec)
        if not args.quiet:
            status = "ok" if rec["pass"] else "FAIL"
            print(f"D={fd.D:<4} h={rec.get('h', '?'):<3} bits={rec['bits_used']:<5} {status}",
                  file=sys.stderr)
    try:
        emit_report(records, args.json_path, {"command": args.verb, "bits": args.bits})
    except OSError as exc:
        print(f"cmheights: error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK if all(r["pass"] for r in records) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
