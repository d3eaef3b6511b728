"""Command-line entry point.

Subcommands: coeff, cert42, audit42, cert84, paramsys, psd, sdp-export,
sdp-verify, reproduce, verify-all.  Every command is deterministic for a
given invocation (worker count included) and uses exit codes as the
machine contract: 0 on success/verified, 1 on a failed verification,
2 on bad usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import cert42, cert84, checks, golden, necklace, psdcert, sdpio
from .necklace import BudgetExceeded, TraceProblem
from .poly import Affine, mono_str

DEFAULT_BUDGET = necklace.DEFAULT_BUDGET


class UnknownObject(ValueError):
    """reproduce was asked for an identifier it does not know."""


class GoldenMismatch(RuntimeError):
    """A regenerated object differs from its bundled transcription."""


def _write_out(args, payload: dict) -> None:
    text = json.dumps(payload, indent=1, sort_keys=True)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)


def _budget(args) -> int | None:
    if getattr(args, "big", False):
        return None
    return getattr(args, "budget", DEFAULT_BUDGET)


def cmd_coeff(args) -> int:
    problem = TraceProblem(args.m, args.r, args.n, diagonal_a=args.diagonal_a)
    if args.oracle == "necklace":
        p = necklace.trace_coeff_necklace(problem, budget=_budget(args),
                                          workers=args.workers)
    else:
        p = necklace.trace_coeff_matrix(problem, budget=_budget(args))
    payload = {"m": args.m, "r": args.r, "n": args.n,
               "diagonal_a": args.diagonal_a, "oracle": args.oracle,
               "terms": p.to_jsonable()}
    _write_out(args, payload)
    return 0


def cmd_cert42(args) -> int:
    cert = cert42.build_certificate42(args.n)
    payload = {
        "n": args.n,
        "q1": cert.q1.to_jsonable(),
        "q2": cert.q2.to_jsonable(),
        "z1": [p.text() for p in cert.z1],
        "z2": {f"{i},{j}": [p.text() for p in vec]
               for (i, j), vec in sorted(cert.z2_family.items())},
        "entry_sum": str(cert.entry_sum()),
    }
    if args.emit:
        args.out = args.emit
    _write_out(args, payload)
    return 0


def cmd_audit42(args) -> int:
    report = cert42.accounting_audit(args.n, budget=_budget(args))
    if args.json:
        print(json.dumps({
            "n": report.n, "ok": report.ok,
            "total_expected": report.total_expected,
            "total_assigned": report.total_assigned,
            "mismatches": [[repr(c), e, a] for c, e, a in report.mismatches],
        }, indent=1, sort_keys=True))
    else:
        print(report.summary())
        for cell, expected, actual in report.mismatches[:20]:
            print(f"  mismatch {cell}: entry {expected}, counted {actual}")
    return 0 if report.ok else 1


def _q3_entry_str(x) -> str:
    if isinstance(x, Affine):
        (k, _), = x.linear.items()
        return f"x{k}"
    return str(x)


def cmd_cert84(args) -> int:
    if args.general_a:
        print("general symmetric A is out of scope for the degree-8 "
              "certificate; diagonalize A by an orthogonal change of basis "
              "first (the coefficient polynomial is basis-invariant)",
              file=sys.stderr)
        return 2
    if args.params == "published":
        params = None
    elif args.params == "symbolic":
        params = cert84.SYMBOLIC
    else:
        with open(args.params) as fh:
            raw = json.load(fh)
        params = {int(str(k).lstrip("x")): Fraction(v) for k, v in raw.items()}
    cert = cert84.build_certificate84(args.n, params=params)
    payload = {
        "n": args.n,
        "rows": [[_q3_entry_str(x) for x in row] for row in cert.q3],
        "z3_blocks_sizes": list(cert84.z3_block_sizes(args.n)) if args.n >= 2 else [],
        "entry_sum": str(cert.entry_sum()),
    }
    if args.emit:
        args.out = args.emit
    _write_out(args, payload)
    return 0


def cmd_paramsys(args) -> int:
    system = cert84.derive_param_system(args.n)
    if args.emit:
        args.out = args.emit
    if getattr(args, "out", None) or args.json:
        _write_out(args, system.to_jsonable())
    else:
        print(system)
        print(f"rank {system.rank} over {cert84.PARAM_COUNT} parameters")
    return 0


def cmd_psd(args) -> int:
    with open(args.infile) as fh:
        mat = psdcert.RationalMatrix.from_jsonable(json.load(fh))
    method = args.method
    if method in ("auto", "charpoly"):
        cert = psdcert.verify_charpoly_signs(mat)
    elif method == "ldlt":
        try:
            cert = psdcert.verify_ldlt_pd(mat)
        except psdcert.SingularLeadingBlock as exc:
            print(f"ldlt is for positive-definite input only ({exc}); "
                  f"use --method auto for singular PSD matrices",
                  file=sys.stderr)
            return 2
    elif method == "schur":
        if args.split is None:
            print("--split is required for the schur method", file=sys.stderr)
            return 2
        cert = psdcert.verify_schur(mat, args.split)
    elif method == "gram":
        if not args.factor:
            print("--factor is required for the gram method", file=sys.stderr)
            return 2
        with open(args.factor) as fh:
            u = psdcert.RationalMatrix.from_jsonable(json.load(fh))
        cert = psdcert.verify_gram_factor(mat, u, Fraction(args.scale))
    else:
        print(f"unknown method {method}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(cert.to_jsonable(), fh, indent=1, sort_keys=True)
            fh.write("\n")
    verdict = "PSD" if cert.psd else "NOT PSD"
    extra = f", nullity {cert.nullity}" if cert.nullity is not None else ""
    print(f"{verdict} via {cert.method}{extra}")
    return 0 if cert.psd else 1


def cmd_sdp_export(args) -> int:
    problem = TraceProblem(args.m, args.r, args.n, diagonal_a=args.diagonal_a)
    if args.basis == "auto":
        basis = sdpio.auto_basis(problem)
    elif (args.m, args.r) == (4, 2):
        basis = sdpio.certificate_basis_42(args.n)
    elif (args.m, args.r) == (8, 4) and args.diagonal_a:
        basis = sdpio.certificate_basis_84(args.n)
    else:
        print("--basis certificate is only available for (4,2) and "
              "diagonal-A (8,4)", file=sys.stderr)
        return 2
    prob = sdpio.build_sdp(problem, basis, budget=_budget(args),
                           entry_sum_constraint=args.entry_sum)
    sdpio.export_sdpa(prob, args.out)
    print(f"wrote {args.out}: {len(prob.constraints)} constraints, "
          f"blocks {list(prob.blocks)}")
    return 0


def cmd_sdp_verify(args) -> int:
    prob = sdpio.import_sdpa(args.prob)
    with open(args.solution) as fh:
        sol = json.load(fh)
    report = sdpio.rationalize_and_verify(prob, sol,
                                          denominator_bound=args.den_bound)
    if report.accepted:
        print("accepted: constraints hold exactly and every block is PSD")
        return 0
    print(f"rejected: {report.reason}")
    for name, got, want in report.violations[:10]:
        print(f"  {name}: got {got}, want {want}")
    return 1


def _golden_matrix_check(built_rows, golden_name, key="rows"):
    want = golden.load(golden_name)[key]
    got = [[int(x) for x in row] for row in built_rows]
    if got != want:
        diff = next(((i, j) for i in range(len(want))
                     for j in range(len(want[0])) if got[i][j] != want[i][j]))
        raise GoldenMismatch(f"{golden_name} differs first at {diff}")
    return f"matches {golden_name} ({len(want)}x{len(want[0])})"


def _reproduce_q1_n3():
    return _golden_matrix_check(cert42.build_certificate42(3).q1.rows,
                                "q1_n3_42")


def _reproduce_q2_n3():
    return _golden_matrix_check(cert42.build_certificate42(3).q2.rows,
                                "q2_n3_42")


def _reproduce_u_n3():
    u, scale = cert42.build_q1_gram_factor(3)
    msg = _golden_matrix_check(u.rows, "u_n3_42")
    cert = psdcert.verify_gram_factor(cert42.build_certificate42(3).q1, u, scale)
    return msg + f"; Q1 = {scale} U^T U verified ({cert.psd})"


def _reproduce_q1_n1():
    q1 = cert42.build_certificate42(1).q1
    if [[int(x) for x in row] for row in q1.rows] != [[6]]:
        raise GoldenMismatch(f"Q1(n=1) is {q1.rows}, expected [[6]]")
    return "Q1(n=1) = [6]"


def _reproduce_z_n3():
    cert = cert42.build_certificate42(3)
    want_z1 = golden.load("z1_n3_42")["entries"]
    got_z1 = [mono_str(next(iter(p.terms))) for p in cert.z1]
    if got_z1 != want_z1:
        raise GoldenMismatch("z1(n=3) differs from transcription")
    want_z2 = golden.load("z2_n3_42")["vectors"]
    for (i, j), vec in cert.z2_family.items():
        got = [mono_str(next(iter(p.terms))) for p in vec]
        if got != want_z2[f"{i}_{j}"]:
            raise GoldenMismatch(f"z2({i},{j}) differs from transcription")
    return "z1 and z2 family at n=3 match transcription"


def _reproduce_counterexample():
    res = checks.check_counterexample()
    if not res.ok:
        raise GoldenMismatch(res.detail)
    return res.detail


def _reproduce_q3_n5():
    return _golden_matrix_check(cert84.build_certificate84(5).q3, "q3_n5_84")


def _reproduce_q3_n5_symbolic():
    grid = cert84.q3_grid(5, params=cert84.SYMBOLIC)
    want = golden.load("q3_symbolic_n5_84")["entries"]
    got = [[_q3_entry_str(x) for x in row] for row in grid]
    want_s = [[str(x) for x in row] for row in want]
    if got != want_s:
        diff = next(((i, j) for i in range(24) for j in range(24)
                     if got[i][j] != want_s[i][j]))
        raise GoldenMismatch(f"symbolic Q3 differs first at {diff}")
    return "parametrized Q3(n=5) matches transcription"


def _reproduce_q3_n5_charpoly():
    cert = psdcert.verify_charpoly_signs(cert84.build_certificate84(5).q3_matrix())
    want = golden.load("q3_charpoly_n5_84")
    if cert.witness["charpoly"] != want["coeffs_desc"]:
        raise GoldenMismatch("characteristic polynomial differs")
    if cert.nullity != want["nullity"]:
        raise GoldenMismatch(f"nullity {cert.nullity} != {want['nullity']}")
    return (f"all {len(want['coeffs_desc'])} coefficients match, "
            f"PSD with nullity {cert.nullity}")


def _reproduce_q2_84_n5():
    return _golden_matrix_check(cert84.build_certificate84(5).q2.rows,
                                "q2_n5_84")


def _reproduce_z2_84_n5():
    got = [mono_str(next(iter(p.terms)))
           for p in cert84.build_certificate84(5).z2]
    if got != golden.load("z2_n5_84")["entries"]:
        raise GoldenMismatch("z2(n=5) differs from transcription")
    return "z2(n=5) matches transcription (30 entries)"


def _reproduce_z3_84_n5():
    want = golden.load("z3_n5_84")["vectors"]
    for (i, j), vec in cert84.build_certificate84(5).z3_family.items():
        got = [mono_str(next(iter(p.terms))) for p in vec]
        if got != want[f"{i}_{j}"]:
            raise GoldenMismatch(f"z3({i},{j}) differs from transcription")
    return "all ten z3 vectors at n=5 match transcription"


def _reproduce_param_system():
    derived = cert84.derive_param_system(5)
    published = cert84.ParamSystem.published()
    if not derived.equivalent(published):
        raise GoldenMismatch("derived system not equivalent to the published one")
    missing = [eq for eq in published.equations if not derived.contains(eq)]
    if missing:
        raise GoldenMismatch(f"published equations missing: {missing}")
    if not derived.satisfied_by(cert84.published_params()):
        raise GoldenMismatch("published values violate the derived system")
    return "derived system reproduces all 11 published equations"


def _reproduce_x_values():
    vals = cert84.published_params()
    if len(vals) != 22 or any(v < 0 for v in vals.values()):
        raise GoldenMismatch("published values must be 22 nonnegative numbers")
    if not cert84.ParamSystem.published().satisfied_by(vals):
        raise GoldenMismatch("published values violate the published system")
    return "22 nonnegative values satisfying the published system"


REPRODUCIBLES = {
    "Q1-n3": _reproduce_q1_n3,
    "Q2-n3": _reproduce_q2_n3,
    "U-n3": _reproduce_u_n3,
    "Q1-n1": _reproduce_q1_n1,
    "z-n3": _reproduce_z_n3,
    "counterexample-ABAB": _reproduce_counterexample,
    "Q3-n5": _reproduce_q3_n5,
    "Q3-n5-symbolic": _reproduce_q3_n5_symbolic,
    "Q3-n5-charpoly": _reproduce_q3_n5_charpoly,
    "Q2-84-n5": _reproduce_q2_84_n5,
    "z2-84-n5": _reproduce_z2_84_n5,
    "z3-84-n5": _reproduce_z3_84_n5,
    "param-system": _reproduce_param_system,
    "x-values": _reproduce_x_values,
}


def cmd_reproduce(args) -> int:
    names = list(REPRODUCIBLES) if args.object == "all" else [args.object]
    unknown = [n for n in names if n not in REPRODUCIBLES]
    if unknown:
        raise UnknownObject(
            f"unknown object {unknown[0]!r}; known: {', '.join(REPRODUCIBLES)}")
    results = []
    ok = True
    for name in names:
        try:
            detail = REPRODUCIBLES[name]()
            results.append({"object": name, "ok": True, "detail": detail})
        except GoldenMismatch as exc:
            ok = False
            results.append({"object": name, "ok": False, "detail": str(exc)})
    if args.json:
        print(json.dumps(results, indent=1, sort_keys=True))
    else:
        for res in results:
            print(f"{'OK  ' if res['ok'] else 'FAIL'} {res['object']}: "
                  f"{res['detail']}")
    return 0 if ok else 1


def cmd_verify_all(args) -> int:
    results = checks.run_all(max_n_42=args.max_n_42, max_n_84=args.max_n_84,
                             big=args.big, workers=args.workers)
    if args.json:
        print(json.dumps(
            [{"name": r.name, "ok": r.ok, "detail": r.detail, "notes": r.notes}
             for r in results], indent=1, sort_keys=True))
    else:
        for r in results:
            print(r.line())
    failed = [r for r in results if not r.ok]
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tracesos",
        description="Exact certificates for trace-power coefficients")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, budget=True, workers=False, out=True):
        if budget:
            p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                           help="max enumeration visits (default 1e8)")
            p.add_argument("--big", action="store_true",
                           help="lift the enumeration budget")
        if workers:
            p.add_argument("--workers", type=int, default=1)
        if out:
            p.add_argument("--out", help="write JSON here instead of stdout")

    p = sub.add_parser("coeff", help="compute one coefficient polynomial")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--diagonal-a", action="store_true")
    p.add_argument("--oracle", choices=("necklace", "matrix"),
                   default="necklace")
    add_common(p, workers=True)
    p.set_defaults(func=cmd_coeff)

    p = sub.add_parser("cert42", help="build the degree-4 certificate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--emit", help="write matrices and vectors to this file")
    add_common(p, budget=False)
    p.set_defaults(func=cmd_cert42)

    p = sub.add_parser("audit42", help="replay the necklace accounting")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--json", action="store_true")
    add_common(p, out=False)
    p.set_defaults(func=cmd_audit42)

    p = sub.add_parser("cert84", help="build the degree-8 diagonal-A certificate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--params", default="published",
                   help="'published', 'symbolic', or a JSON file of x values")
    p.add_argument("--general-a", action="store_true",
                   help=argparse.SUPPRESS)
    p.add_argument("--emit", help="write the Q3 matrix to this file")
    add_common(p, budget=False)
    p.set_defaults(func=cmd_cert84)

    p = sub.add_parser("paramsys", help="re-derive the parameter constraints")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--emit", help="write the system to this file")
    p.add_argument("--json", action="store_true")
    add_common(p, budget=False)
    p.set_defaults(func=cmd_paramsys)

    p = sub.add_parser("psd", help="certify positive semidefiniteness")
    p.add_argument("--in", dest="infile", required=True,
                   help="matrix JSON ({'rows': [[...]]})")
    p.add_argument("--method", default="auto",
                   choices=("auto", "charpoly", "ldlt", "schur", "gram"))
    p.add_argument("--split", type=int, help="leading block size for schur")
    p.add_argument("--factor", help="factor matrix JSON for gram")
    p.add_argument("--scale", default="1", help="scale for gram")
    p.add_argument("--out", help="write the certificate JSON here")
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("sdp-export", help="write a coefficient-matching SDP")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--diagonal-a", action="store_true")
    p.add_argument("--basis", choices=("auto", "certificate"), default="auto")
    p.add_argument("--entry-sum", action="store_true",
                   help="add the total-count linear constraint")
    p.add_argument("--out", required=True)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    p.add_argument("--big", action="store_true")
    p.set_defaults(func=cmd_sdp_export)

    p = sub.add_parser("sdp-verify", help="rationalize and verify a solution")
    p.add_argument("--prob", required=True)
    p.add_argument("--solution", required=True,
                   help="JSON {block label: row-major entries}")
    p.add_argument("--den-bound", type=int, default=10**4)
    p.set_defaults(func=cmd_sdp_verify)

    p = sub.add_parser("reproduce", help="regenerate a published object "
                       "and diff against the bundled transcription")
    p.add_argument("object", help="object id, or 'all'")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("verify-all", help="run the full verification suite")
    p.add_argument("--max-n-42", type=int, default=5)
    p.add_argument("--max-n-84", type=int, default=5)
    p.add_argument("--big", action="store_true",
                   help="include n = 8, 9 in the degree-8 identity")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify_all)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (BudgetExceeded, UnknownObject) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
