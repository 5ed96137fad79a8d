"""Command line front end for weighted fuzzy logic programs.

Exit codes: 0 success, 1 usage error, 2 semantic/validation error,
3 a check command found a failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import inference, logics, transform
from .logics import Flavor, ProgramError
from .formula import atoms
from .parser import ParseError, parse_formula, print_formula, print_program, read_program
from .semantics import evaluate, parse_interpretation

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_CHECK_FAILED = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _unit_float(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return value


def _step(text):
    value = float(text)
    if not 0.0 < value <= 1.0 or abs(round(1.0 / value) * value - 1.0) > 1e-9:
        raise argparse.ArgumentTypeError("grid step must divide [0, 1] evenly")
    return value


def _nonnegative(text):
    value = float(text)
    if not (math.isfinite(value) and value >= 0):
        raise argparse.ArgumentTypeError("must be a nonnegative number")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit JSON")
    common.add_argument(
        "--default-zero", action="store_true", help="atoms missing from --at default to 0"
    )

    parser = _Parser(prog="softlogic", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", parents=[common], help="truth value of a formula")
    p.add_argument("formula")
    p.add_argument("--at", required=True, metavar="INTERPRETATION")

    p = sub.add_parser("density", parents=[common], help="PSL/GPSL density of an interpretation")
    p.add_argument("program")
    p.add_argument("--at", required=True, metavar="INTERPRETATION")
    p.add_argument("--normalize", action="store_true", help="also estimate Z and the normalized density")
    p.add_argument("--grid-step", type=_step, default=None)
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("weight", parents=[common], help="MLN weight and probability")
    p.add_argument("program")
    p.add_argument("--at", required=True, metavar="INTERPRETATION")

    p = sub.add_parser("map", parents=[common], help="most probable interpretation(s)")
    p.add_argument("program")
    p.add_argument("--via-crispify", action="store_true")
    p.add_argument("--alpha", type=_nonnegative, default=1e3)
    p.add_argument("--k", type=int, choices=(1, 2), default=1)
    p.add_argument("--starts", type=_positive_int, default=16)
    p.add_argument("--grid-step", type=_step, default=0.05)
    p.add_argument("--epochs", type=_positive_int, default=40)
    p.add_argument("--iterations", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("marginal", parents=[common], help="estimate P(lower <= F <= upper)")
    p.add_argument("program")
    p.add_argument("--formula", required=True)
    p.add_argument("--lower", type=_unit_float, required=True)
    p.add_argument("--upper", type=_unit_float, required=True)
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("translate", parents=[common], help="MLN -> GPSL (or PSL/GPSL -> MLN)")
    p.add_argument("program")
    p.add_argument("--to", choices=("gpsl", "mln"), default="gpsl")
    p.add_argument("--k", type=int, choices=(1, 2), default=1)
    p.add_argument("--crispify", type=float, default=None, metavar="ALPHA")

    p = sub.add_parser("rewrite", parents=[common], help="equivalent forms of a PSL rule")
    p.add_argument("rule")

    p = sub.add_parser("equiv", parents=[common], help="bounded equivalence check")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--grid", type=_step, default=0.1)
    p.add_argument("--no-grid", action="store_true")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("check", parents=[common], help="verification checks")
    p.add_argument("program")
    p.add_argument("--theorem2", action="store_true", required=True)
    p.add_argument("--k", type=int, choices=(1, 2), default=None, help="default: both")
    return parser


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _load(path):
    try:
        return read_program(path)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def cmd_eval(args) -> int:
    f = parse_formula(args.formula)
    i = parse_interpretation(args.at, sorted(atoms(f)) if args.default_zero else None,
                             default_zero=args.default_zero)
    value = evaluate(f, i)
    _emit(args, {"formula": print_formula(f), "value": value}, _fmt(value))
    return EXIT_OK


def cmd_density(args) -> int:
    program = _load(args.program)
    i = parse_interpretation(args.at, program.signature, args.default_zero)
    norm = None
    if args.normalize:
        norm = logics.normalize(program, step=args.grid_step, samples=args.samples, seed=args.seed)
    report = logics.density(program, i, norm)
    lines = [f"log_unnormalized {_fmt(report.log_unnormalized)}", f"unnormalized {_fmt(report.unnormalized)}"]
    for row in report.per_formula:
        lines.append(f"  [{row.index}] distance {_fmt(row.distance)} penalty {_fmt(row.penalty)}")
    if report.normalized is not None:
        lines.append(f"normalized {_fmt(report.normalized)} (Z via {norm.method})")
    _emit(args, report.to_dict(), "\n".join(lines))
    return EXIT_OK


def cmd_weight(args) -> int:
    program = _load(args.program)
    if program.flavor is not Flavor.MLN:
        raise ProgramError("weight expects an MLN program")
    i = parse_interpretation(args.at, program.signature, args.default_zero)
    log_w = logics.mln_log_weight(program, i)
    prob = logics.mln_probability(program, i)
    payload = {"log_weight": log_w, "weight": math.exp(log_w), "probability": prob}
    _emit(args, payload, f"weight e^{_fmt(log_w)} = {_fmt(math.exp(log_w))}\nprobability {_fmt(prob)}")
    return EXIT_OK


def _describe_map(result: inference.MapResult) -> str:
    lines = [f"objective {_fmt(result.objective)} ({result.method}, converged={result.converged})"]
    lines += [f"  {i!r}" for i in result.argmax]
    return "\n".join(lines)


def cmd_map(args) -> int:
    program = _load(args.program)
    config = dict(starts=args.starts, grid_step=args.grid_step, epochs=args.epochs,
                  iterations=args.iterations, seed=args.seed)
    if args.via_crispify:
        result = inference.map_via_crispification(program, alpha=args.alpha, k=args.k, **config)
        text = (f"continuous:\n{_describe_map(result.continuous)}\nboolean:\n{_describe_map(result.boolean)}\n"
                f"agrees {result.agrees} gap {_fmt(result.gap)}")
        if result.missed:
            text += "\ntied Boolean worlds not reached:\n" + "\n".join(f"  {i!r}" for i in result.missed)
        _emit(args, result.to_dict(), text)
        return EXIT_OK
    if program.flavor is Flavor.MLN:
        result = inference.map_boolean(program)
    else:
        result = inference.map_continuous(program, **config)
    _emit(args, result.to_dict(), _describe_map(result))
    return EXIT_OK


def cmd_marginal(args) -> int:
    program = _load(args.program)
    f = parse_formula(args.formula)
    est = inference.estimate_marginal(program, f, args.lower, args.upper, samples=args.samples, seed=args.seed)
    text = (f"naive_fraction {_fmt(est.naive_fraction)}\n"
            f"weighted_estimate {_fmt(est.weighted_estimate)} +- {_fmt(est.stderr)}")
    _emit(args, est.to_dict(), text)
    return EXIT_OK


def cmd_translate(args) -> int:
    program = _load(args.program)
    if args.to == "gpsl":
        out = transform.mln_to_gpsl(program, args.k)
        if args.crispify is not None:
            out = out.with_formulas(out.formulas + tuple(transform.crispify(program.atoms, args.crispify)))
    else:
        if args.crispify is not None:
            raise UsageError("--crispify only applies to --to gpsl")
        out = transform.to_mln(program)
    text = print_program(out)
    _emit(args, {"program": text}, text.rstrip("\n"))
    return EXIT_OK


def cmd_rewrite(args) -> int:
    rule = parse_formula(args.rule)
    rs = transform.rewrite_rule(rule)
    variants = [print_formula(v) for v in rs.variants]
    payload = {"source": print_formula(rule), "variants": variants, "relation": rs.relation.value}
    _emit(args, payload, "\n".join(variants))
    return EXIT_OK


def cmd_equiv(args) -> int:
    f, g = parse_formula(args.left), parse_formula(args.right)
    res = transform.check_equivalence(f, g, grid_step=None if args.no_grid else args.grid,
                                      samples=args.samples, seed=args.seed)
    text = res.label
    if not res.equivalent:
        text += f"\nwitness {res.witness!r}: {_fmt(res.left_value)} vs {_fmt(res.right_value)}"
    _emit(args, res.to_dict(), text)
    return EXIT_OK if res.equivalent else EXIT_CHECK_FAILED


def cmd_check(args) -> int:
    program = _load(args.program)
    reports = [inference.theorem2_check(program, k) for k in ((args.k,) if args.k else (1, 2))]
    payload = {"theorem2": [r.to_dict() for r in reports], "passed": all(r.passed for r in reports)}
    text = "\n".join(
        f"theorem2 k={r.k}: max residual {r.max_residual:.3g} {'ok' if r.passed else 'FAILED'}" for r in reports
    )
    _emit(args, payload, text)
    return EXIT_OK if payload["passed"] else EXIT_CHECK_FAILED


COMMANDS = {
    "eval": cmd_eval,
    "density": cmd_density,
    "weight": cmd_weight,
    "map": cmd_map,
    "marginal": cmd_marginal,
    "translate": cmd_translate,
    "rewrite": cmd_rewrite,
    "equiv": cmd_equiv,
    "check": cmd_check,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"softlogic: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, ProgramError, ValueError, KeyError) as exc:
        print(f"softlogic: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
