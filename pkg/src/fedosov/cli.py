"""Command-line front end.

Commands wrap the library one to one and print deterministic text or JSON:
same inputs and seed give byte-identical output.  Exit code 0 means success
(and, for check-style commands, that every check passed); 1 means a check
failed; 2 means bad input.
"""

from __future__ import annotations

import argparse
import json
import sys

from .checks import SUITES
from .cotangent import check_compatibility, lift_connection, load_metric
from .diffop import DiffOperator
from .exprs import ParseError, parse_poly, print_canonical
from .geometry import load_chart
from .jets import PolyJet
from .kahler import check_holomorphic_star, kahler_chart
from .quantization import flat_connection, flat_section, flatness_residual, star_product
from .weyl import WeylForm, doubled_degree, format_term


class InputError(Exception):
    pass


def _weyl_form_payload(form: WeylForm):
    rows = []
    for (h, sym, fdeg), jet in form.sorted_terms():
        rows.append(
            {
                "D": doubled_degree((h, sym, fdeg)),
                "hbar": h,
                "y": [form.chart.coords[m] for m in sym],
                "dx": [form.chart.coords[m] for m in fdeg],
                "coeff": print_canonical(jet),
            }
        )
    return rows


def _weyl_form_text(form: WeylForm):
    if form.is_zero():
        return ["0"]
    return [format_term(form.chart, key, jet) for key, jet in form.sorted_terms()]


def _operator_payload(op: DiffOperator):
    rows = []
    for (beta, m), jet in op.sorted_terms():
        rows.append(
            {
                "hbar": m,
                "derivatives": {name: b for name, b in zip(op.vars, beta) if b},
                "coeff": print_canonical(jet),
            }
        )
    return rows


def _load_chart_arg(args):
    if not args.chart:
        raise InputError("this command needs --chart FILE")
    try:
        chart = load_chart(args.chart)
    except (OSError, ValueError, KeyError, ParseError) as err:
        raise InputError(f"cannot read chart file: {err}") from None
    if args.xcap is not None and chart.xcap != args.xcap:
        data = chart.to_json_dict()
        data["xcap"] = args.xcap
        from .geometry import chart_from_json_dict

        chart = chart_from_json_dict(data)
    return chart

def _load_metric_arg(args):
    if not args.metric:
        raise InputError("this command needs --metric FILE")
    try:
        return load_metric(args.metric)
    except (OSError, ValueError, KeyError, ParseError) as err:
        raise InputError(f"cannot read metric file: {err}") from None


def _parse_expr(expr: str, chart, what: str) -> PolyJet:
    if expr is None:
        raise InputError(f"this command needs {what}")
    try:
        return parse_poly(expr, chart.coords, chart.xcap)
    except ParseError as err:
        raise InputError(f"cannot parse {what}: {err}") from None


def _require_dcap(args, minimum=3):
    if args.dcap is None:
        raise InputError("this command needs --dcap N")
    if args.dcap < minimum:
        raise InputError(f"--dcap must be at least {minimum}")
    return args.dcap


def _emit(args, payload: dict, text_lines):
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        for line in text_lines:
            print(line)


def cmd_r_form(args) -> int:
    chart = _load_chart_arg(args)
    dcap = _require_dcap(args)
    conn = flat_connection(chart, dcap)
    payload = {
        "command": "r-form",
        "dcap": dcap,
        "terms": _weyl_form_payload(conn.correction.truncated(dcap)),
    }
    _emit(args, payload, _weyl_form_text(conn.correction.truncated(dcap)))
    return 0


def cmd_star(args) -> int:
    chart = _load_chart_arg(args)
    dcap = _require_dcap(args)
    f = _parse_expr(args.f, chart, "-f EXPR")
    g = _parse_expr(args.g, chart, "-g EXPR")
    conn = flat_connection(chart, dcap)
    expansion = star_product(conn, f, g)
    pairs = expansion.as_pairs()
    payload = {
        "command": "star",
        "dcap": dcap,
        "max_trusted_order": expansion.max_trusted_order,
        "coefficients": [{"order": k, "coeff": print_canonical(jet)} for k, jet in pairs],
    }
    lines = [f"hbar^{k} : {print_canonical(jet)}" for k, jet in pairs]
    lines.append(f"max trusted order: {expansion.max_trusted_order}")
    _emit(args, payload, lines)
    return 0


def cmd_quantize(args) -> int:
    chart = _load_chart_arg(args)
    dcap = _require_dcap(args)
    f = _parse_expr(args.f, chart, "-f EXPR")
    conn = flat_connection(chart, dcap)
    section = flat_section(conn, f)
    payload = {
        "command": "quantize",
        "dcap": dcap,
        "terms": _weyl_form_payload(section.lifted),
    }
    _emit(args, payload, _weyl_form_text(section.lifted))
    return 0


def cmd_flatness(args) -> int:
    chart = _load_chart_arg(args)
    dcap = _require_dcap(args)
    conn = flat_connection(chart, dcap)
    residual = flatness_residual(conn)
    ok = residual.is_zero()
    payload = {
        "command": "flatness",
        "dcap": dcap,
        "residual": _weyl_form_payload(residual),
        "flat": ok,
    }
    lines = [f"flatness residual (dcap {dcap}): {'0' if ok else 'NONZERO'}"]
    if not ok:
        lines.extend(_weyl_form_text(residual))
    _emit(args, payload, lines)
    return 0 if ok else 1


def cmd_lift(args) -> int:
    base = _load_metric_arg(args)
    chart = lift_connection(base)
    data = chart.to_json_dict()
    text = json.dumps(data, sort_keys=True, indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
        print(f"wrote chart to {args.out}")
    else:
        print(text)
    return 0


def cmd_sigma(args) -> int:
    base = _load_metric_arg(args)
    chart_coords = lift_connection(base).coords
    if args.f is None:
        raise InputError("this command needs -f EXPR (a polynomial in q and p)")
    try:
        f = parse_poly(args.f, chart_coords, None)
    except ParseError as err:
        raise InputError(f"cannot parse -f: {err}") from None
    from .cotangent import CotangentQuantizer

    n = base.dim
    max_p = max((sum(e[n:]) for e in f.terms), default=0)
    dcap = args.dcap if args.dcap is not None else 2 * max_p + 4
    if 2 * max_p > dcap:
        raise InputError(f"momentum degree {max_p} needs --dcap >= {2 * max_p}")
    quantizer = CotangentQuantizer(base, dcap)
    op = quantizer.operator(f)
    payload = {
        "command": "sigma",
        "dcap": dcap,
        "vars": list(op.vars),
        "terms": _operator_payload(op),
    }
    _emit(args, payload, str(op).splitlines())
    return 0


def cmd_kahler_check(args) -> int:
    if not args.potential:
        raise InputError("this command needs --potential FILE")
    try:
        with open(args.potential, "r", encoding="utf-8") as handle:
            data = json.load(handle)
        n = int(data["n"])
        from .kahler import kahler_coords

        coords = kahler_coords(n)
        K = parse_poly(str(data["K"]), coords, None)
    except (OSError, ValueError, KeyError, ParseError) as err:
        raise InputError(f"cannot read potential file: {err}") from None
    order = args.order if args.order is not None else 2
    chart = kahler_chart(K)
    f = _parse_expr(args.f, chart, "-f EXPR") if args.f else parse_poly("z1", coords)
    g = _parse_expr(args.g, chart, "-g EXPR") if args.g else parse_poly("z1^2", coords)
    report = check_holomorphic_star(chart, f, g, K, order)
    payload = {
        "command": "kahler-check",
        "order": order,
        "holomorphic_product": report.holomorphic_product,
        "potential_condition": report.potential_condition,
        "passed": report.passed,
        "lines": list(report.lines()),
    }
    lines = list(report.lines())
    lines.append(f"overall: {'pass' if report.passed else 'FAIL'}")
    _emit(args, payload, lines)
    return 0 if report.passed else 1


def cmd_check(args) -> int:
    suite = SUITES.get(args.suite)
    if suite is None:
        raise InputError(f"unknown suite {args.suite!r}; choose from {sorted(SUITES)}")
    items = suite(args.seed)
    ok = all(item.passed for item in items)
    payload = {
        "command": "check",
        "suite": args.suite,
        "seed": args.seed,
        "results": [
            {"name": item.name, "passed": item.passed, "detail": item.detail} for item in items
        ],
        "passed": ok,
    }
    lines = [f"suite {args.suite} (seed {args.seed})"]
    lines.extend(item.line() for item in items)
    lines.append("all checks passed" if ok else "SOME CHECKS FAILED")
    _emit(args, payload, lines)
    return 0 if ok else 1


COMMANDS = {
    "r-form": cmd_r_form,
    "star": cmd_star,
    "quantize": cmd_quantize,
    "flatness": cmd_flatness,
    "lift": cmd_lift,
    "sigma": cmd_sigma,
    "kahler-check": cmd_kahler_check,
    "check": cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedosov",
        description="Exact deformation quantization on local symplectic charts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_seed=False):
        p.add_argument("--chart", help="chart JSON file")
        p.add_argument("--metric", help="base metric JSON file")
        p.add_argument("--potential", help="Kaehler potential JSON file")
        p.add_argument("--dcap", type=int, default=None, help="doubled hbar-degree cap")
        p.add_argument("--xcap", type=int, default=None, help="coordinate-degree cap override")
        p.add_argument("--order", type=int, default=None, help="hbar order for reports")
        p.add_argument("-f", dest="f", help="first expression")
        p.add_argument("-g", dest="g", help="second expression")
        p.add_argument("--out", help="output file (lift)")
        p.add_argument("--format", choices=("text", "json"), default="text")
        p.add_argument("--seed", type=int, default=20120 if needs_seed else 0)

    for name in COMMANDS:
        if name == "check":
            p = sub.add_parser(name, help="run a named randomized check suite")
            p.add_argument("suite", choices=sorted(SUITES))
            common(p, needs_seed=True)
        else:
            p = sub.add_parser(name)
            common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = COMMANDS[args.command]
    try:
        return handler(args)
    except InputError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
