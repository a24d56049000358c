"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a check fails (the report
carries the witness), 2 for usage, parse or window errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import conditions, qelliptic, quotient, vertex
from .errors import ZhuforgeError
from .exactcore import format_scalar
from .funring import MODES, fr_derive
from .parsing import ParseError, parse_function, parse_p_spec, parse_scalar, parse_state

Z_CAP, Q_CAP, N_CAP = 64, 32, 12

FUNCTION_HELP = """\
function syntax: expressions in u = 1/(e^{cz}-1) (trig domain) or z (rational
domain) with the parameter c, integer/rational literals, + - * /, and ^ with
integer exponents.  Examples: "c*(u+1)", "z^-1 + z", "-z^-2 + 1".
state syntax: sums of mode words on the vacuum, e.g. "a(-1)a(-2)|0>",
"L(-2)L(-2)|0> - 1/2*|0>" (a for Heisenberg, L for Virasoro).
values starting with "-" must be attached with "=", e.g. --g=-z^-2+1.
"""


@dataclass
class Outcome:
    payload: dict
    passed: bool
    rows: list[dict] = field(default_factory=list)


# -- argument types -------------------------------------------------------------


def capped(lo: int, hi: int):
    def convert(text: str) -> int:
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if not lo <= v <= hi:
            raise argparse.ArgumentTypeError(f"{v} outside the allowed range [{lo}, {hi}]")
        return v

    return convert


def scalar(text: str) -> Fraction:
    try:
        return parse_scalar(text)
    except ParseError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def algebra_from(args) -> vertex.AlgebraSpec:
    if args.algebra == "heisenberg":
        return vertex.heisenberg()
    return vertex.virasoro(args.central_charge)


# -- handlers -------------------------------------------------------------------


def _condition_rows(report) -> list[dict]:
    rows = []
    for name in conditions.CONDITION_NAMES:
        v = report.verdicts[name]
        rows.append({"condition": name, "verdict": "pass" if v.passed else "fail", "j": v.j, "witness": v.witness or ""})
    return rows


def cmd_check_conditions(args) -> Outcome:
    f = parse_function(args.f, args.c)
    g = fr_derive(f, 1) if args.g == "deriv" else parse_function(args.g, args.c, domain=f.domain)
    report = conditions.check_conditions(f, g, args.jmax, args.mode)
    return Outcome(report.to_json(), report.passed, _condition_rows(report))


def cmd_check_family(args) -> Outcome:
    report = conditions.check_F_family(parse_p_spec(args.p), args.c, args.jmax, args.mode)
    return Outcome(report.to_json(), report.passed, _condition_rows(report))


def cmd_solve_ode(args) -> Outcome:
    s = conditions.solve_ode(args.f0, args.order)
    # f(-z) f(z) - f'(z) must vanish wherever it is known
    residual = s.negate_arg() * s - s.derive()
    ok = residual.is_zero()
    payload = {
        "f0": format_scalar(args.f0),
        "order": args.order,
        "series": s.to_string(),
        "coefficients": {str(e): format_scalar(c) for e, c in sorted(s.coeffs.items())},
        "ode_residual_zero": ok,
    }
    rows = [{"exponent": e, "coefficient": format_scalar(c)} for e, c in sorted(s.coeffs.items())]
    return Outcome(payload, ok, rows)


def cmd_verify_elliptic(args) -> Outcome:
    window = (-args.xorder, args.xorder)
    records = qelliptic.closure_check(args.jmax, window, args.qorder)
    records += qelliptic.verify_expansions(args.worder, window, args.qorder)
    payload = {
        "x_window": list(window),
        "q_order": args.qorder,
        "j_max": args.jmax,
        "w_order": args.worder,
        "records": [r.to_json() for r in records],
    }
    rows = [{"check": r.name, "verdict": "pass" if r.passed else "fail"} for r in records]
    return Outcome(payload, all(r.passed for r in records), rows)


def cmd_eisenstein(args) -> Outcome:
    s = qelliptic.gbar(args.k, args.qorder) if args.gbar else qelliptic.eisenstein(args.k, args.qorder)
    name = f"gbar_{2 * args.k}" if args.gbar else f"E_{2 * args.k}"
    payload = {
        "series": name,
        "q_order": args.qorder,
        "value": s.to_string(),
        "coefficients": {str(n): format_scalar(c) for n, c in sorted(s.coeffs.items())},
    }
    rows = [{"n": n, "coefficient": format_scalar(c)} for n, c in sorted(s.coeffs.items())]
    return Outcome(payload, True, rows)


def cmd_bernoulli_identity(args) -> Outcome:
    table = qelliptic.bernoulli_identity(args.nmax)
    rows = [
        {"n": r["n"], "lhs": format_scalar(r["lhs"]), "rhs": format_scalar(r["rhs"]), "verdict": "pass" if r["passed"] else "fail"}
        for r in table
    ]
    return Outcome({"n_max": args.nmax, "rows": rows}, all(r["passed"] for r in table), rows)


def cmd_axioms(args) -> Outcome:
    spec = algebra_from(args)
    sample = None
    if args.sample:
        monos = set()
        for text in args.sample:
            monos.update(parse_state(text, spec).terms)
        sample = sorted(monos, key=vertex.monomial_key)
    modes = vertex.AXIOM_MODES + ("grading",) if args.mode == "all" else (args.mode,)
    reports = []
    for mode in modes:
        if mode == "grading":
            reports.append(vertex.grading_check(spec, args.max_weight, args.range))
        else:
            reports.append(vertex.axiom_check(spec, mode, sample, args.range, args.max_weight))
    payload = {
        "algebra": str(spec),
        "max_weight": args.max_weight,
        "index_range": [-args.range, args.range],
        "reports": [r.to_json() for r in reports],
    }
    rows = [{"mode": r.mode, "checked": r.checked, "failures": len(r.failures), "verdict": "pass" if r.passed else "fail"} for r in reports]
    return Outcome(payload, all(r.passed for r in reports), rows)


def _presentation_outcome(pres, checks: dict, extra: dict | None = None) -> Outcome:
    payload = pres.to_json(checks)
    if extra:
        payload.update(extra)
    rows = [
        {"index": i, "representative": s, "weight": vertex.weight(m)}
        for i, (s, m) in enumerate(zip(pres.representative_strings(), pres.representatives))
    ]
    return Outcome(payload, all(c.passed for c in checks.values()), rows)


def _product_extra(args, spec, pres) -> dict:
    if not args.product:
        return {}
    a, b = (parse_state(t, spec) for t in args.product)
    return {"product": {"a": args.product[0], "b": args.product[1], "value": pres.product(a, b).to_string(spec.symbol)}}


def cmd_zhu(args) -> Outcome:
    spec = algebra_from(args)
    pres = quotient.build_variant(args.variant, spec, args.cutoff, args.c)
    checks = quotient.verify_algebra(pres)
    if args.stabilize:
        checks["stabilization"] = quotient.stabilization(args.variant, spec, args.cutoff, args.c)
    return _presentation_outcome(pres, checks, _product_extra(args, spec, pres))


def cmd_c2(args) -> Outcome:
    spec = algebra_from(args)
    pres = quotient.build_variant("c2", spec, args.cutoff)
    checks = quotient.verify_algebra(pres)
    checks.update(quotient.c2_poisson(pres))
    extra = {"bracket_table": quotient.bracket_table(pres)}
    extra.update(_product_extra(args, spec, pres))
    return _presentation_outcome(pres, checks, extra)


def cmd_variant(args) -> Outcome:
    spec = algebra_from(args)
    p_spec = parse_p_spec(args.p) if args.p else []
    data = quotient.variant_series(args.name, args.cutoff, args.c, p_spec)
    pres = quotient.build_variant(args.name, spec, args.cutoff, args.c, p_spec)
    checks = quotient.verify_algebra(pres)
    extra = {
        "f_series": data.f_series.to_string(),
        "g_series": data.g_series.to_string(),
        "include_TV": data.include_TV,
    }
    extra.update(_product_extra(args, spec, pres))
    return _presentation_outcome(pres, checks, extra)


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--emit", metavar="PATH", help="write the report to PATH instead of stdout")

    alg = argparse.ArgumentParser(add_help=False)
    alg.add_argument("--algebra", choices=("heisenberg", "virasoro"), default="heisenberg")
    alg.add_argument("--central-charge", type=scalar, default=Fraction(1, 2), help="Virasoro central charge")

    parser = argparse.ArgumentParser(
        prog="zhuforge",
        description="Exact checks for f-products, Zhu-type quotients and q-series identities.",
        epilog=FUNCTION_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text, parents=(common,)):
        p = sub.add_parser(
            name, parents=list(parents), help=help_text, epilog=FUNCTION_HELP,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.set_defaults(handler=handler)
        return p

    p = add("check-conditions", cmd_check_conditions, "closure/unit conditions for a pair (f, g)")
    p.add_argument("--f", required=True, help="function expression")
    p.add_argument("--g", default="deriv", help='function expression, or "deriv" for g = df/dz')
    p.add_argument("--c", type=scalar, default=Fraction(1))
    p.add_argument("--jmax", type=capped(2, Z_CAP), default=6)
    p.add_argument("--mode", choices=MODES, default="strict")

    p = add("solve-ode", cmd_solve_ode, "solve f(-z) f(z) = f'(z) with f = z^-1 + f0 + ...")
    p.add_argument("--f0", type=scalar, default=Fraction(0))
    p.add_argument("--order", type=capped(1, Z_CAP), default=12)

    p = add("check-family", cmd_check_family, "conditions for F = f + p in the TV-augmented setting")
    p.add_argument("--p", default="", help='derivatives of g as "k:coeff,...", e.g. "0:-1"')
    p.add_argument("--c", type=scalar, default=Fraction(1))
    p.add_argument("--jmax", type=capped(2, Z_CAP), default=6)
    p.add_argument("--mode", choices=MODES, default="allow_constants")

    p = add("verify-elliptic", cmd_verify_elliptic, "closure and expansion checks for P and Z")
    p.add_argument("--jmax", type=capped(2, Z_CAP), default=4)
    p.add_argument("--qorder", type=capped(1, Q_CAP), default=6)
    p.add_argument("--xorder", type=capped(2, Z_CAP), default=12, help="x-window is [-xorder, xorder)")
    p.add_argument("--worder", type=capped(4, Z_CAP), default=10)

    p = add("eisenstein", cmd_eisenstein, "q-expansion of E_2k (or gbar_2k)")
    p.add_argument("--k", type=capped(1, Q_CAP), default=1)
    p.add_argument("--qorder", type=capped(1, Q_CAP), default=8)
    p.add_argument("--gbar", action="store_true", help="normalized -B_2k E_2k / (2k)!")

    p = add("bernoulli-identity", cmd_bernoulli_identity, "Bernoulli number identity for 2 <= n <= nmax")
    p.add_argument("--nmax", type=capped(2, Z_CAP), default=40)

    p = add("axioms", cmd_axioms, "exhaustive vertex algebra axiom checks", (common, alg))
    p.add_argument("--mode", choices=("all",) + vertex.AXIOM_MODES + ("grading",), default="all")
    p.add_argument("--max-weight", type=capped(0, N_CAP), default=4)
    p.add_argument("--range", type=capped(0, N_CAP), default=4, help="indices in [-range, range]")
    p.add_argument("--sample", action="append", help="restrict to the monomials of this state (repeatable)")

    p = add("zhu", cmd_zhu, "Zhu-type quotient presentation", (common, alg))
    p.add_argument("--variant", choices=("zhu", "c2"), default="zhu")
    p.add_argument("--c", type=scalar, default=Fraction(1))
    p.add_argument("--cutoff", type=capped(0, N_CAP), default=6)
    p.add_argument("--stabilize", action="store_true", help="compare dims with cutoff + 2")
    p.add_argument("--product", nargs=2, metavar="STATE", help="multiply two states in the quotient")

    p = add("c2", cmd_c2, "C2 algebra R_V with its Poisson bracket", (common, alg))
    p.add_argument("--cutoff", type=capped(0, N_CAP), default=6)
    p.add_argument("--product", nargs=2, metavar="STATE")

    p = add("variant", cmd_variant, "other quotient variants", (common, alg))
    p.add_argument("--name", choices=quotient.VARIANTS, default="zhu_half")
    p.add_argument("--p", default="", help='family only: "k:coeff,..."')
    p.add_argument("--c", type=scalar, default=Fraction(1))
    p.add_argument("--cutoff", type=capped(0, N_CAP), default=4)
    p.add_argument("--product", nargs=2, metavar="STATE")
    return parser


# -- rendering ------------------------------------------------------------------


def render(command: str, outcome: Outcome, fmt: str) -> str:
    verdict = "pass" if outcome.passed else "fail"
    if fmt == "json":
        doc = {"schema": 1, "command": command, "verdict": verdict}
        doc.update({k: v for k, v in outcome.payload.items() if k != "schema"})
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    rows = outcome.rows or [{k: v for k, v in outcome.payload.items() if not isinstance(v, (dict, list))}]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()
    lines = [f"{command}: {verdict}"]
    for k, v in outcome.payload.items():
        if isinstance(v, (str, int, bool)) and k != "schema":
            lines.append(f"{k}: {v}")
        elif isinstance(v, list) and all(isinstance(x, int) for x in v):
            lines.append(f"{k}: {v}")
    if "product" in outcome.payload:
        prod = outcome.payload["product"]
        lines.append(f"product: [{prod['a']}] * [{prod['b']}] = {prod['value']}")
    for r in rows:
        lines.append("  " + "  ".join(f"{k}={v}" for k, v in r.items()))
    return "\n".join(lines) + "\n"


def run(args) -> int:
    try:
        outcome = args.handler(args)
    except ParseError as exc:
        print(f"zhuforge: parse error: {exc}", file=sys.stderr)
        return 2
    except ZhuforgeError as exc:
        print(f"zhuforge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    text = render(args.command, outcome, args.format)
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if outcome.passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
