"""Limits of global upper expectations along monotone sequences.

For a non-decreasing sequence bounded below, or a non-increasing sequence of
finitary variables bounded above, the global upper expectation of the limit
is the limit of the global upper expectations. Every trace value is thus a
one-sided bound on the answer, whether or not the run converged.

Conditional runs at a situation ``s`` count hitting times from the first
state after ``s``.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConsistencyError, ContractError
from .extreal import INF, NEG_INF, ExtReal, ext_neg, format_value, is_finite, to_json
from .globalexp import upper_exp_finitary_global
from .tree import DEFAULT_BUDGET, ImpreciseTree, Situation
from .variables import (
    GlobalVariable,
    VariableSequenceSpec,
    apply_cut,
    generate_term,
    hit_spec,
    hitting_time_spec,
    miss_spec,
)

DEFAULT_TOL = 1e-9
DEFAULT_K_STABLE = 3
DEFAULT_MAX_N = 64
DEFAULT_CEILING = 1e6
DEFAULT_MIN_INCREMENT = 1e-6


@dataclass
class ApproxOptions:
    tol: float = DEFAULT_TOL
    k_stable: int = DEFAULT_K_STABLE
    max_n: int = DEFAULT_MAX_N
    budget: int = DEFAULT_BUDGET
    ceiling: float = DEFAULT_CEILING
    min_increment: float = DEFAULT_MIN_INCREMENT

    def __post_init__(self) -> None:
        if self.k_stable < 1 or self.max_n < 1:
            raise ContractError("k_stable and max_n must be at least 1")
        if self.tol <= 0:
            raise ContractError("tol must be positive")


@dataclass
class ApproxResult:
    """Outcome of a monotone approximation.

    ``bracket`` is ``(value, side)``: the limit is at least ``value`` when
    side is ``"lower"`` (non-decreasing traces), at most ``value`` when side
    is ``"upper"``.
    """

    estimate: ExtReal
    trace: list[tuple[int, ExtReal]]
    direction: str
    converged: bool
    bracket: tuple[ExtReal, str] | None = None
    divergence_flag: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def values(self) -> list[ExtReal]:
        return [v for _, v in self.trace]

    def to_json(self) -> dict:
        return {
            "estimate": to_json(self.estimate),
            "direction": self.direction,
            "converged": self.converged,
            "divergence_flag": self.divergence_flag,
            "bracket": None if self.bracket is None
            else {"value": to_json(self.bracket[0]), "side": self.bracket[1]},
            "trace_length": len(self.trace),
            "trace": [[n, to_json(v)] for n, v in self.trace],
        }


def _delta(a: ExtReal, b: ExtReal) -> float:
    if a == b:
        return 0.0
    if is_finite(a) and is_finite(b):
        return abs(b - a)
    return INF


def _run(term: Callable[[int], GlobalVariable], tree: ImpreciseTree, s: Situation,
         direction: str, opts: ApproxOptions, bound: ExtReal | None = None,
         length: int | None = None) -> ApproxResult:
    """Evaluate the upper expectation of ``term(n)`` for n = 1, 2, ... until stable.

    ``bound`` is an a priori limit on the values (the trace may stop as soon
    as it reaches it); ``length`` caps n for finite sequences.
    """
    if direction not in ("up", "down"):
        raise ContractError(f"direction must be 'up' or 'down', got {direction!r}")
    sign = 1.0 if direction == "up" else -1.0
    trace: list[tuple[int, ExtReal]] = []
    converged = False
    last_n = opts.max_n if length is None else min(opts.max_n, length)
    for n in range(1, last_n + 1):
        v = upper_exp_finitary_global(tree, term(n), s, opts.budget).value
        if trace:
            prev = trace[-1][1]
            # a step against the declared direction beyond tol contradicts monotonicity
            wrong_way = (v < prev) if sign > 0 else (v > prev)
            if wrong_way and _delta(prev, v) > opts.tol:
                raise ConsistencyError(
                    f"trace is not {'non-decreasing' if sign > 0 else 'non-increasing'}"
                    f" at n={n}: {prev!r} then {v!r}")
        trace.append((n, v))
        if v == (INF if sign > 0 else NEG_INF):
            converged = True
            break
        if bound is not None and _delta(v, bound) <= opts.tol:
            converged = True
            break
        if len(trace) > opts.k_stable:
            tail = [_delta(trace[i - 1][1], trace[i][1]) for i in range(-opts.k_stable, 0)]
            if all(d < opts.tol for d in tail):
                converged = True
                break
        if length is not None and n == length:
            converged = True
    last = trace[-1][1]
    result = ApproxResult(
        estimate=last, trace=trace, direction=direction, converged=converged,
        bracket=(last, "lower" if sign > 0 else "upper"),
    )
    if not is_finite(last):
        result.divergence_flag = True
        result.notes.append("limit is infinite")
    elif not converged and _looks_divergent(trace, sign, opts):
        result.divergence_flag = True
        result.estimate = INF if sign > 0 else NEG_INF
        result.notes.append("possibly +infinite" if sign > 0 else "possibly -infinite")
    return result


def _looks_divergent(trace: list[tuple[int, ExtReal]], sign: float, opts: ApproxOptions) -> bool:
    """Heuristic: steady growth over the last ``k_stable`` steps.

    Flags when every recent step moves by at least ``min_increment`` and
    either the value is past ``ceiling`` or the steps have become constant
    (linear growth).
    """
    k = opts.k_stable
    if len(trace) < k + 2:
        return False
    vals = [sign * v for _, v in trace]
    steps = [vals[i] - vals[i - 1] for i in range(len(vals) - k, len(vals))]
    if min(steps) < opts.min_increment:
        return False
    if vals[-1] > opts.ceiling:
        return True
    earlier = vals[-k - 1] - vals[-k - 2]
    steps = [earlier] + steps
    return all(abs(b - a) < opts.tol for a, b in zip(steps, steps[1:]))


def _options(opts: ApproxOptions | None, **overrides) -> ApproxOptions:
    changes = {k: v for k, v in overrides.items() if v is not None}
    return replace(opts or ApproxOptions(), **changes)


def monotone_limit(tree: ImpreciseTree, spec: VariableSequenceSpec, s: Sequence[str] = (),
                   direction: str = "up", tol: float | None = None, k_stable: int | None = None,
                   max_n: int | None = None, opts: ApproxOptions | None = None,
                   bound: ExtReal | None = None) -> ApproxResult:
    """Global upper expectation of the limit of a monotone sequence of variables."""
    s = tree.check_situation(s)
    opts = _options(opts, tol=tol, k_stable=k_stable, max_n=max_n)
    if spec.states != tree.states:
        raise ContractError("sequence and tree use different state lists")
    offset = len(s) if spec.hitting else 0
    return _run(lambda n: generate_term(spec, n, offset), tree, s, direction, opts,
                bound, spec.length)


def upper_hitting_probability(tree: ImpreciseTree, target: Sequence[str], s: Sequence[str] = (),
                              opts: ApproxOptions | None = None) -> ApproxResult:
    spec = hit_spec(tree.states, target)
    return monotone_limit(tree, spec, s, "up", opts=opts, bound=1.0)


def upper_never_hit_probability(tree: ImpreciseTree, target: Sequence[str],
                                s: Sequence[str] = (),
                                opts: ApproxOptions | None = None) -> ApproxResult:
    """Upper probability of never entering the target (non-increasing miss indicators)."""
    spec = miss_spec(tree.states, target)
    return monotone_limit(tree, spec, s, "down", opts=opts, bound=0.0)


def lower_hitting_probability(tree: ImpreciseTree, target: Sequence[str], s: Sequence[str] = (),
                              opts: ApproxOptions | None = None) -> ApproxResult:
    """One minus the upper probability of never hitting, level by level."""
    never = upper_never_hit_probability(tree, target, s, opts)
    trace = [(n, 1.0 - v) for n, v in never.trace]
    last = trace[-1][1]
    return ApproxResult(estimate=1.0 - never.estimate, trace=trace, direction="up",
                        converged=never.converged, bracket=(last, "lower"),
                        divergence_flag=False, notes=never.notes)


def upper_expected_hitting_time(tree: ImpreciseTree, target: Sequence[str],
                                s: Sequence[str] = (),
                                opts: ApproxOptions | None = None) -> ApproxResult:
    spec = hitting_time_spec(tree.states, target)
    return monotone_limit(tree, spec, s, "up", opts=opts)


def lower_expected_hitting_time(tree: ImpreciseTree, target: Sequence[str],
                                s: Sequence[str] = (),
                                opts: ApproxOptions | None = None) -> ApproxResult:
    """Minus the upper expectation of the non-increasing sequence ``-min(tau, n+1)``."""
    s = tree.check_situation(s)
    opts = _options(opts)
    spec = hitting_time_spec(tree.states, target)
    neg = _run(lambda n: generate_term(spec, n, len(s)).negated(), tree, s, "down", opts)
    trace = [(n, ext_neg(v)) for n, v in neg.trace]
    last = trace[-1][1]
    notes = ["possibly +infinite" if "possibly -infinite" in x else x for x in neg.notes]
    return ApproxResult(estimate=ext_neg(neg.estimate), trace=trace, direction="up",
                        converged=neg.converged, bracket=(last, "lower"),
                        divergence_flag=neg.divergence_flag, notes=notes)


def lower_cut_global_limit(tree: ImpreciseTree, f: GlobalVariable, s: Sequence[str] = (),
                           schedule: Sequence[float] = (-1.0, -10.0, -100.0, -1e3, -1e6),
                           tol: float = DEFAULT_TOL,
                           budget: int = DEFAULT_BUDGET) -> ApproxResult:
    """Trace of the upper expectation of ``max(f, a)`` as ``a`` decreases.

    The estimate is the direct value of ``f``. Once the schedule is below
    every finite value of ``f``, a finite direct value must equal the last
    trace value, and a direct value of ``-inf`` must come with a strictly
    decreasing tail; anything else raises :class:`ConsistencyError`.
    """
    s = tree.check_situation(s)
    cuts = [float(a) for a in schedule]
    if not cuts or any(b >= a for a, b in zip(cuts, cuts[1:])):
        raise ContractError("schedule must be non-empty and strictly decreasing")
    trace: list[tuple[int, ExtReal]] = []
    for n, a in enumerate(cuts, start=1):
        v = upper_exp_finitary_global(tree, apply_cut(f, a, "lower"), s, budget).value
        if trace and v > trace[-1][1] and _delta(trace[-1][1], v) > tol:
            raise ConsistencyError(f"lower-cut trace increased at cut {a}")
        trace.append((n, v))
    direct = upper_exp_finitary_global(tree, f, s, budget).value
    finite = [v for v in f.values() if is_finite(v)]
    floor = min(finite) if finite else INF
    past = cuts[-1] <= floor
    result = ApproxResult(estimate=direct, trace=trace, direction="down", converged=False,
                          bracket=(trace[-1][1], "upper"), divergence_flag=direct == NEG_INF)
    if not past:
        result.notes.append("schedule does not reach below every finite value")
        return result
    last = trace[-1][1]
    if direct == NEG_INF:
        if len(trace) >= 2 and not trace[-1][1] < trace[-2][1]:
            raise ConsistencyError("direct value is -inf but the cut trace is flat")
        result.converged = True
    else:
        if _delta(last, direct) > tol:
            raise ConsistencyError(f"cut limit {last!r} differs from direct value {direct!r}")
        result.converged = True
    return result


def trace_to_csv(result: ApproxResult, path: str | Path | None = None) -> str:
    """Write ``n,value`` rows; returns the CSV text."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "value"])
    for n, v in result.trace:
        w.writerow([n, format_value(v)])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text
