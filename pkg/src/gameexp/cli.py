"""Command-line front end: ``gameexp eval|hit|check``.

Exit codes: 0 success, 1 a check failed, 2 bad input, 3 budget exceeded or a
divergent approximation.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .approx import (
    ApproxOptions,
    ApproxResult,
    lower_expected_hitting_time,
    lower_hitting_probability,
    monotone_limit,
    trace_to_csv,
    upper_expected_hitting_time,
    upper_hitting_probability,
)
from .axioms import check_local_axioms, example_no_lower_cut_continuity
from .errors import BudgetError, GameExpError, ParseError
from .extreal import format_value, is_finite
from .globalexp import conditional_process, lower_exp_finitary_global, upper_exp_finitary_global
from .localmodel import LocalModel
from .martingale import verify_supermartingale
from .oracle import brute_force_lower_exp, brute_force_upper_exp, random_finitary, random_tree
from .process import Process
from .tree import ImpreciseTree, iid_tree, parse_situation, parse_tree
from .variables import FinitaryVariable, GlobalVariable, VariableSequenceSpec, parse_variable, table_spec

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_RESOURCE = 0, 1, 2, 3

MODES = ("upper-prob", "lower-prob", "upper-time", "lower-time")
#: cap on precise selections per random oracle-compare instance
ORACLE_CAP = 50_000

CHECKS = ("axioms", "supermartingale", "oracle-compare", "regression-s8")


@dataclass
class Report:
    command: str
    inputs: dict
    result: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    status: int = EXIT_OK
    csv: str | None = None

    def to_json(self) -> dict:
        return {"command": self.command, "inputs": self.inputs,
                "result": _rounded(self.result), "diagnostics": _rounded(self.diagnostics)}


def _rounded(x: object) -> object:
    """Numbers to 12 significant digits, infinities as strings."""
    if isinstance(x, bool) or x is None or isinstance(x, (str, int)):
        return x
    if isinstance(x, float):
        if not is_finite(x):
            return format_value(x)
        return float(format_value(x))
    if isinstance(x, dict):
        return {k: _rounded(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_rounded(v) for v in x]
    return x


def _text(x: object) -> str:
    if isinstance(x, float):
        return format_value(x)
    if isinstance(x, (dict, list)):
        return json.dumps(_rounded(x))
    return str(x)


def _read_json(path: str, what: str) -> object:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ParseError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{what} file is not valid JSON: {exc}") from None


def _load_tree(args: argparse.Namespace) -> ImpreciseTree:
    if not args.tree:
        raise ParseError("--tree is required")
    return parse_tree(_read_json(args.tree, "tree"))  # type: ignore[arg-type]


def _load_variable(args: argparse.Namespace, tree: ImpreciseTree) -> GlobalVariable:
    if not args.variable:
        raise ParseError("--variable is required")
    var = parse_variable(_read_json(args.variable, "variable"), tree.states)  # type: ignore[arg-type]
    if isinstance(var, VariableSequenceSpec):
        raise ParseError("eval needs a finitary variable (give 'n' for hitting kinds)", "kind")
    return var


def _situation(args: argparse.Namespace, tree: ImpreciseTree):
    s = parse_situation(args.situation or "")
    bad = [x for x in s if x not in tree.states]
    if bad:
        raise ParseError(f"situation label {bad[0]!r} is not a state", "situation")
    return s


def _options(args: argparse.Namespace) -> ApproxOptions:
    return ApproxOptions(tol=args.tol, k_stable=args.k_stable, max_n=args.max_n,
                         budget=args.budget)


# -- commands ---------------------------------------------------------------

def cmd_eval(args: argparse.Namespace) -> Report:
    tree = _load_tree(args)
    f = _load_variable(args, tree)
    s = _situation(args, tree)
    up = upper_exp_finitary_global(tree, f, s, args.budget)
    lo = lower_exp_finitary_global(tree, f, s, args.budget)
    rep = Report("eval", {"tree": args.tree, "variable": args.variable, "situation": args.situation})
    rep.result = {"upper": up.value, "lower": lo.value}
    rep.diagnostics = {"visited": up.visited, "depth": f.depth, "bounded_below": f.bounded_below}
    return rep


def cmd_hit(args: argparse.Namespace) -> Report:
    tree = _load_tree(args)
    s = _situation(args, tree)
    if not args.target:
        raise ParseError("--target is required")
    target = [x.strip() for x in args.target.split(",") if x.strip()]
    bad = [x for x in target if x not in tree.states]
    if bad or not target:
        raise ParseError(f"target label {bad[0]!r} is not a state" if bad else "empty target",
                         "target")
    runner = {
        "upper-prob": upper_hitting_probability,
        "lower-prob": lower_hitting_probability,
        "upper-time": upper_expected_hitting_time,
        "lower-time": lower_expected_hitting_time,
    }[args.mode]
    res: ApproxResult = runner(tree, target, s, _options(args))
    rep = Report("hit", {"tree": args.tree, "target": target, "mode": args.mode,
                         "situation": args.situation})
    rep.result = {
        "estimate": res.estimate,
        "converged": res.converged,
        "bracket": {"value": res.bracket[0], "side": res.bracket[1]} if res.bracket else None,
        "direction": res.direction,
        "trace_length": len(res.trace),
        "divergence_flag": res.divergence_flag,
    }
    rep.diagnostics = {"notes": res.notes, "last_n": res.trace[-1][0]}
    csv_text = trace_to_csv(res, args.trace_csv)
    if args.format == "csv":
        rep.csv = csv_text
    if res.divergence_flag:
        rep.status = EXIT_RESOURCE
        rep.diagnostics["message"] = "possibly +infinite"
    return rep


def _check_axioms(args: argparse.Namespace, rep: Report) -> None:
    if args.tree:
        tree = _load_tree(args)
        models = list(dict.fromkeys(tree.models()))
    else:
        rng = np.random.default_rng(args.seed)
        tree = random_tree(rng, int(rng.integers(2, 4)), 3, "iid")
        models = list(tree.models())
    failures = []
    reports = []
    for i, model in enumerate(models):
        r = check_local_axioms(model, seed=args.seed + i, tol=args.tol)
        reports.append(r.to_json())
        failures.extend({"model": i, "axiom": ax} for ax in r.failing())
    rep.result = {"models": len(models), "passed": not failures, "failures": failures}
    rep.diagnostics = {"reports": reports}


def _check_supermartingale(args: argparse.Namespace, rep: Report) -> None:
    tree = _load_tree(args)
    if args.process:
        m = Process.from_json(_read_json(args.process, "process"), tree.states)  # type: ignore[arg-type]
    else:
        f = _load_variable(args, tree)
        m = conditional_process(tree, f, f.depth, args.budget)
    r = verify_supermartingale(tree, m, tol=args.tol)
    rep.result = {"passed": r.passed, "failures": [v.to_json() for v in r.violations]}
    if not r.bounded_below:
        rep.result["failures"].append({"reason": "not bounded below"})
    rep.diagnostics = {"checked": r.checked, "floor": r.floor}


def _check_oracle(args: argparse.Namespace, rep: Report) -> None:
    pairs: list[tuple[ImpreciseTree, GlobalVariable]] = []
    if args.tree:
        tree = _load_tree(args)
        pairs.append((tree, _load_variable(args, tree)))
    else:
        rng = np.random.default_rng(args.seed)
        for _ in range(args.count):
            n = int(rng.integers(2, 4))
            depth = int(rng.integers(1, 4))
            tree = random_tree(rng, n, 3, "explicit", depth,
                               max_selections=min(args.budget, ORACLE_CAP))
            pairs.append((tree, random_finitary(rng, tree.states, depth)))
    worst = 0.0
    failures = []
    rows = []
    for i, (tree, f) in enumerate(pairs):
        up = upper_exp_finitary_global(tree, f, (), args.budget).value
        lo = lower_exp_finitary_global(tree, f, (), args.budget).value
        bup = brute_force_upper_exp(tree, f, (), args.budget)
        blo = brute_force_lower_exp(tree, f, (), args.budget)
        diff = max(abs(up - bup), abs(lo - blo))
        worst = max(worst, diff)
        rows.append({"upper": up, "oracle_upper": bup, "lower": lo, "oracle_lower": blo,
                     "difference": diff})
        if not diff < args.tol:
            failures.append({"instance": i, "difference": diff})
    rep.result = {"passed": not failures, "max_abs_diff": worst, "failures": failures}
    rep.diagnostics = {"instances": len(pairs)} | ({"values": rows[0]} if len(rows) == 1 else {})


def _check_point_mass_regression(args: argparse.Namespace, rep: Report) -> None:
    states = ("0", "1")
    tree = iid_tree(LocalModel(states, ((1.0, 0.0),)))
    values = {}
    for n in (1, 10, 10**6):
        f = FinitaryVariable(states, 1, [0.0, float(n)])
        values[str(n)] = upper_exp_finitary_global(tree, f).value
    spec = table_spec(states, lambda n: FinitaryVariable(states, 1, [0.0, float(n)]))
    limit = monotone_limit(tree, spec, (), "up", tol=args.tol, k_stable=args.k_stable,
                           max_n=args.max_n)
    ax = check_local_axioms(example_no_lower_cut_continuity, 2, seed=args.seed, tol=args.tol)
    failures = []
    if any(v != 0.0 for v in values.values()):
        failures.append({"check": "finite terms", "values": values})
    if not (limit.converged and limit.estimate == 0.0):
        failures.append({"check": "monotone limit", "estimate": limit.estimate,
                         "converged": limit.converged})
    if ax.failing() != ["E6"]:
        failures.append({"check": "sup-type functional", "failing": ax.failing()})
    rep.result = {
        "passed": not failures,
        "failures": failures,
        "report": f"E_V limit = {format_value(limit.estimate)}; "
                  f"direct sup-model fails {', '.join(ax.failing()) or 'nothing'}",
    }
    rep.diagnostics = {"terms": values, "limit_trace": [v for _, v in limit.trace],
                       "sup_functional_failing": ax.failing()}


def cmd_check(args: argparse.Namespace) -> Report:
    rep = Report("check", {"check": args.check, "tree": args.tree, "variable": args.variable,
                           "seed": args.seed})
    {"axioms": _check_axioms, "supermartingale": _check_supermartingale,
     "oracle-compare": _check_oracle, "regression-s8": _check_point_mass_regression}[args.check](args, rep)
    if not rep.result.get("passed", True):
        rep.status = EXIT_CHECK
    return rep


# -- plumbing ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tree", help="tree JSON file")
    common.add_argument("--variable", help="variable JSON file")
    common.add_argument("--situation", default="", help="comma-separated labels; empty for the root")
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--max-n", type=int, default=64)
    common.add_argument("--k-stable", type=int, default=3)
    common.add_argument("--budget", type=int, default=10**6)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("table", "json", "csv"), default="table")

    parser = argparse.ArgumentParser(prog="gameexp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="upper and lower value of a finitary variable")
    hit = sub.add_parser("hit", parents=[common], help="hitting probabilities and times")
    hit.add_argument("--target", help="comma-separated target labels")
    hit.add_argument("--mode", choices=MODES, default="upper-prob")
    hit.add_argument("--trace-csv", metavar="PATH", help="write the trace as CSV")
    check = sub.add_parser("check", parents=[common], help="verification batteries")
    check.add_argument("check", choices=CHECKS)
    check.add_argument("--process", help="process JSON file (supermartingale check)")
    check.add_argument("--count", type=int, default=100, help="random instances for oracle-compare")
    return parser


def _emit(rep: Report, fmt: str, out) -> None:
    if fmt == "json":
        print(json.dumps(rep.to_json(), indent=2), file=out)
        return
    if fmt == "csv" and rep.csv is not None:
        out.write(rep.csv)
        return
    if fmt == "csv":
        print("key,value", file=out)
        for k, v in {**rep.result, **rep.diagnostics}.items():
            print(f"{k},{_text(v)}", file=out)
        return
    for k, v in rep.result.items():
        print(f"{k:16} {_text(v)}", file=out)
    for k, v in rep.diagnostics.items():
        if k not in ("reports", "values"):
            print(f"{k:16} {_text(v)}", file=out)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    commands = {"eval": cmd_eval, "hit": cmd_hit, "check": cmd_check}
    try:
        rep = commands[args.command](args)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (GameExpError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _emit(rep, args.format, sys.stdout)
    if rep.status == EXIT_RESOURCE:
        print("error: approximation is possibly +infinite", file=sys.stderr)
    return rep.status


if __name__ == "__main__":
    sys.exit(main())
