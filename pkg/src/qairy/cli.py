"""Command-line front end: ``qairy eval``, ``qairy verify`` and ``qairy sweep``.

Exit codes: 0 pass, 1 suite failure, 2 domain error, 3 convergence error,
4 usage error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

import numpy as np

from . import verify
from .errors import ConvergenceError, DomainError, OverflowGuard, QSeriesError, ShapeError
from .qcore import (
    as_qbase,
    qpochhammer_finite,
    qpochhammer_infinite,
    sum_series,
    theta_product,
    theta_series_sum,
)
from .resum import g_eval, q_laplace_contour
from .special import BesselOrder, _bessel_parts, qairy_Aiq_sum, ramanujan_Aq_sum

EXIT_PASS, EXIT_FAIL, EXIT_DOMAIN, EXIT_CONVERGENCE, EXIT_USAGE = 0, 1, 2, 3, 4
EPS = float(np.finfo(float).eps)

log = logging.getLogger("qairy")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_complex(text: str) -> complex:
    """Accept ``0.5``, ``0.4+0.1i``, ``-2j`` and the like."""
    try:
        return complex(text.strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError(f"cannot parse {text!r} as a complex number") from None


def format_q(q: complex) -> str:
    q = complex(q)
    if q.imag == 0:
        return repr(q.real)
    sign = "+" if q.imag >= 0 else "-"
    return f"{q.real!r}{sign}{abs(q.imag)!r}i"


# --------------------------------------------------------------------------- #
# eval
# --------------------------------------------------------------------------- #

def _eval_theta(x, cfg, args):
    series, mag = theta_series_sum(x, cfg.q, cfg.params)
    value = theta_product(x, cfg.q, cfg.params)
    return value, max(abs(series - value), EPS * mag)


def _eval_qpoch(x, cfg, args):
    q = cfg.base
    if args.n is not None:
        value = qpochhammer_finite(x, q, args.n)
        return value, EPS * args.n * abs(value)
    value = qpochhammer_infinite(x, q, cfg.params)
    # Euler's expansion sum (-1)^n q^(n(n-1)/2) x^n / (q;q)_n as a second opinion
    euler = sum_series(lambda n: -q.value ** (n - 1) / (1 - q.value ** n), x, cfg.params)
    return value, max(abs(euler.value - value), EPS * euler.magnitude)


def _eval_bessel(kind):
    def run(x, cfg, args):
        pref, power, series = _bessel_parts(kind, BesselOrder(args.nu), x, cfg.q, cfg.params)
        scale = abs(pref * power)
        return pref * power * series.value, EPS * scale * series.magnitude
    return run


def _eval_g(x, cfg, args):
    q = cfg.base
    value = g_eval(x, q, cfg.params)
    q2 = q.squared()
    # (a;q)(-a;q) = (a^2;q^2)
    other = 1.0 / qpochhammer_infinite(q.value ** 4 * x * x, q2, cfg.params)
    return value, max(abs(other - value), EPS * abs(value))


def _eval_laplace(x, cfg, args):
    res = q_laplace_contour(x, cfg.q, cfg.contour(), cfg.params)
    return res.value, res.est_err + EPS * res.magnitude


def _eval_series(fn):
    def run(x, cfg, args):
        s = fn(x, cfg.q, cfg.params)
        return s.value, EPS * s.magnitude
    return run


FUNCTIONS = {
    "Aq": _eval_series(ramanujan_Aq_sum),
    "Aiq": _eval_series(qairy_Aiq_sum),
    "theta": _eval_theta,
    "qpoch": _eval_qpoch,
    "J1": _eval_bessel(1),
    "J2": _eval_bessel(2),
    "J3": _eval_bessel(3),
    "g": _eval_g,
    "laplace_f": _eval_laplace,
}


def cmd_eval(args, cfg: verify.RunConfig) -> int:
    if args.function not in FUNCTIONS:
        raise UsageError(f"unknown function {args.function!r}; choose from {', '.join(FUNCTIONS)}")
    x = parse_complex(args.x)
    value, err = FUNCTIONS[args.function](x, cfg, args)
    value = complex(value)
    sys.stdout.write(verify.dumps({"re": value.real, "im": value.imag, "est_err": float(err)}) + "\n")
    return EXIT_PASS


# --------------------------------------------------------------------------- #
# verify / sweep
# --------------------------------------------------------------------------- #

def _suite_name(args) -> str:
    name = args.suite_opt or args.suite
    if name is None:
        raise UsageError("a suite name is required")
    if name not in verify.SUITES:
        raise UsageError(f"unknown suite {name!r}; choose from {', '.join(verify.SUITES)}")
    return name


def cmd_verify(args, cfg: verify.RunConfig) -> int:
    report = verify.run_suite(_suite_name(args), cfg)
    if cfg.format == "csv":
        sys.stdout.write(report.to_csv())
    else:
        sys.stdout.write(report.to_json(timing=args.timing) + "\n")
    return EXIT_PASS if report.passed else EXIT_FAIL


def cmd_sweep(args, cfg: verify.RunConfig) -> int:
    name = _suite_name(args)
    qs = [parse_complex(part) for item in args.q or [] for part in item.split(",") if part.strip()]
    for q in qs:
        as_qbase(q)
    reports = [verify.run_suite(name, replace(cfg, q=q)) for q in qs]
    if args.format == "json":
        rows = [
            {"q": [r.q.real, r.q.imag], "suite": r.suite, "max_residual": r.max_residual, "pass": r.passed}
            for r in reports
        ]
        sys.stdout.write(verify.dumps(rows) + "\n")
    else:
        sys.stdout.write("q,suite,max_residual,pass\n")
        for r in reports:
            sys.stdout.write(
                f"{format_q(r.q)},{r.suite},{verify.format_number(r.max_residual)},{str(r.passed).lower()}\n"
            )
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_FAIL


# --------------------------------------------------------------------------- #
# Parser
# --------------------------------------------------------------------------- #

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--trunc", type=int, default=1000, help="maximum number of series terms")
    common.add_argument("--tol", type=float, default=1e-16, help="relative truncation tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--points", type=int, default=100, help="sample count per suite")
    common.add_argument("--radius", type=float, default=None, help="contour radius (default 0.5/|q|^2)")
    common.add_argument("--nodes", type=int, default=512, help="trapezoidal nodes on the contour")
    common.add_argument("-v", "--verbose", action="store_true", help="log resampling and timing to stderr")

    parser = _Parser(prog="qairy", description="q-series special functions and identity checks")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    ev = sub.add_parser("eval", parents=[common], help="evaluate one function")
    ev.add_argument("function", help=", ".join(FUNCTIONS))
    ev.add_argument("--x", default="0", help="argument, e.g. 1.5 or 0.3-0.2i")
    ev.add_argument("--q", default="0.5")
    ev.add_argument("--nu", type=parse_complex_arg, default=0.0, help="Bessel order")
    ev.add_argument("--n", type=int, default=None, help="finite Pochhammer length for qpoch")
    ev.add_argument("--format", choices=("json",), default="json")

    ve = sub.add_parser("verify", parents=[common], help="run one verification suite")
    ve.add_argument("suite", nargs="?")
    ve.add_argument("--suite", dest="suite_opt")
    ve.add_argument("--q", default="0.5")
    ve.add_argument("--format", choices=("json", "csv"), default="json")
    ve.add_argument("--timing", action="store_true", help="include wall time in the JSON report")

    sw = sub.add_parser("sweep", parents=[common], help="run a suite over several q")
    sw.add_argument("suite", nargs="?")
    sw.add_argument("--suite", dest="suite_opt")
    sw.add_argument("--q", action="append", help="q value or comma-separated list; repeatable")
    sw.add_argument("--format", choices=("json", "csv"), default="csv")
    return parser


def parse_complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _config(args) -> verify.RunConfig:
    q = 0.5 if args.command == "sweep" else parse_complex(args.q)
    return verify.RunConfig(
        q=q,
        trunc=args.trunc,
        tol=args.tol,
        seed=args.seed,
        format=args.format,
        points=args.points,
        radius=args.radius,
        nodes=args.nodes,
    )


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        print(f"qairy: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ShapeError) as exc:
        print(f"qairy: domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (ConvergenceError, OverflowGuard, QSeriesError, ArithmeticError) as exc:
        print(f"qairy: convergence error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
