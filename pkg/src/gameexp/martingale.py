"""Supermartingales on an imprecise probabilities tree.

A process ``M`` is a supermartingale when, in every situation ``s``, the
local upper expectation of ``x -> M(s x)`` is at most ``M(s)``. Bounded below
supermartingales whose eventual values dominate a variable ``f`` give upper
bounds on the global upper expectation of ``f``; the tools here check that
property on a finite tree and build the standard derived processes.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from itertools import product

from .errors import ContractError
from .extreal import DEFAULT_TOL, NEG_INF, ExtReal, ext_le, ext_mul, ext_sum, is_finite, to_json
from .globalexp import conditional_process
from .localmodel import upper_exp_local
from .oracle import PreciseSelection, sample_paths
from .process import Process
from .tree import ImpreciseTree, Situation, format_situation, resolve_local_model
from .variables import GlobalVariable

__all__ = [
    "BoundCertificate", "CrossingResult", "LevyCheck", "Process", "SupermartingaleReport",
    "Violation", "certify_upper_bound", "combine_supermartingales", "doob_crossing",
    "levy_path_check", "normalize_for_crossing", "truncate_supermartingale",
    "verify_supermartingale",
]


@dataclass(frozen=True)
class Violation:
    situation: Situation
    expected_next: ExtReal
    current: ExtReal

    def to_json(self) -> dict:
        return {"situation": format_situation(self.situation),
                "upper_expectation_of_next": to_json(self.expected_next),
                "value": to_json(self.current)}


@dataclass
class SupermartingaleReport:
    depth: int
    checked: int
    violations: list[Violation] = field(default_factory=list)
    bounded_below: bool = True
    floor: ExtReal = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations and self.bounded_below

    def to_json(self) -> dict:
        return {"passed": self.passed, "depth": self.depth, "checked": self.checked,
                "bounded_below": self.bounded_below, "floor": to_json(self.floor),
                "violations": [v.to_json() for v in self.violations]}


def verify_supermartingale(tree: ImpreciseTree, m: Process, depth: int | None = None,
                           tol: float = DEFAULT_TOL, start: Sequence[str] = ()) -> SupermartingaleReport:
    """Check the supermartingale inequality in every situation shorter than ``depth``.

    Only situations extending ``start`` are inspected. Past the depth of the
    process it is constant along branches, so the inequality holds there
    trivially.
    """
    if tuple(m.states) != tree.states:
        raise ContractError("process and tree use different state lists")
    depth = m.depth if depth is None else depth
    start = tree.check_situation(start)
    report = SupermartingaleReport(depth=depth, checked=0)
    horizon = min(depth, m.depth)
    seen: list[ExtReal] = []
    for s in m.situations(start):
        seen.append(m(s))
        if len(s) >= horizon:
            continue
        report.checked += 1
        nxt = upper_exp_local(resolve_local_model(tree, s), m.children(s))
        if not ext_le(nxt, m(s), tol):
            report.violations.append(Violation(s, nxt, m(s)))
    report.floor = min(seen)
    report.bounded_below = report.floor != NEG_INF
    return report


@dataclass(frozen=True)
class BoundCertificate:
    """A supermartingale witnessing ``bound`` as an upper bound at ``situation``.

    ``leaf_floor_ok`` records whether, on every leaf at ``check_depth`` below
    the situation, the smallest process value over the last ``window``
    levels is at least the variable. Only then is ``bound`` certified.
    """

    process: Process
    situation: Situation
    bound: ExtReal
    check_depth: int
    window: int
    leaf_floor_ok: bool
    worst_leaf: Situation | None = None

    @property
    def certified(self) -> bool:
        return self.leaf_floor_ok


def certify_upper_bound(tree: ImpreciseTree, m: Process, f: GlobalVariable,
                        s: Sequence[str] = (), depth: int | None = None, window: int = 0,
                        tol: float = DEFAULT_TOL) -> BoundCertificate:
    s = tree.check_situation(s)
    depth = max(f.depth, m.depth, len(s)) if depth is None else depth
    if depth < f.depth:
        raise ContractError(f"check depth {depth} is below the variable depth {f.depth}")
    if window < 0:
        raise ContractError("window must be non-negative")
    report = verify_supermartingale(tree, m, depth, tol)
    if not report.passed:
        where = report.violations[0].situation if report.violations else None
        raise ContractError(
            "refusing to certify: process is not a bounded below supermartingale"
            + (f" (fails at {format_situation(where)!r})" if where is not None else ""))
    ok = True
    worst = None
    first = max(depth - window, len(s))
    for leaf in _leaves(tree, s, depth):
        floor = min(m(leaf[:k]) for k in range(first, depth + 1))
        if not ext_le(f.value(leaf), floor, tol):
            ok = False
            worst = leaf
            break
    return BoundCertificate(m, s, m(s), depth, window, ok, worst)


def _leaves(tree: ImpreciseTree, s: Situation, depth: int):
    for tail in product(tree.states, repeat=max(depth - len(s), 0)):
        yield s + tail


def combine_supermartingales(processes: Sequence[Process],
                             weights: Sequence[float]) -> Process:
    """Pointwise ``sum_i w_i M_i`` for non-negative weights with a finite sum."""
    if not processes or len(processes) != len(weights):
        raise ContractError("need one weight per process and at least one process")
    w = [float(x) for x in weights]
    if any(x < 0 or not math.isfinite(x) for x in w):
        raise ContractError("weights must be finite and non-negative")
    first = processes[0]
    for p in processes[1:]:
        if p.depth != first.depth or p.states != first.states:
            raise ContractError("processes must share states and depth")
    if any(p.minimum() == NEG_INF for p in processes):
        raise ContractError("processes need a common finite lower bound")
    return Process(first.states, first.depth,
                   {t: ext_sum(ext_mul(wi, p(t)) for wi, p in zip(w, processes))
                    for t in first.situations()})


def truncate_supermartingale(m: Process, cap: float) -> Process:
    """Pointwise ``min(M, cap)``: again a supermartingale, now bounded above too."""
    if m.minimum() == NEG_INF:
        raise ContractError("truncation needs a bounded below process")
    cap = float(cap)
    return m.map(lambda v: min(v, cap))


# -- crossings --------------------------------------------------------------

def normalize_for_crossing(m: Process, t: Sequence[str] = ()) -> tuple[Process, float, float]:
    """Positive affine image of ``m`` that is non-negative below ``t`` with value 1 at ``t``.

    Returns ``(normalized, low, scale)`` with ``normalized = (m - low) / scale``.
    Supermartingales stay supermartingales under such maps.
    """
    t = tuple(t)
    root = m(t)
    below = [m(s) for s in m.situations(t)]
    if not is_finite(root) or not all(is_finite(v) for v in below):
        raise ContractError("normalization needs finite values below the situation")
    low = min(min(below), root - 1.0)
    scale = root - low
    return m.map(lambda v: (v - low) / scale), low, scale


@dataclass
class CrossingResult:
    """Crossing process and per-leaf counts.

    ``upcrossings[leaf]`` counts completed rises from below ``a`` to above
    ``b``; ``v_index[leaf]`` counts the drops below ``a`` that started a
    segment (the last one may still be open at the leaf).
    """

    process: Process
    a: float
    b: float
    situation: Situation
    upcrossings: dict[Situation, int]
    v_index: dict[Situation, int]
    down_cuts: set[Situation]
    up_cuts: set[Situation]

    def growth_slack(self, leaf: Situation) -> float:
        """``M(leaf) - M(t) - ((k-1)(b-a) - a)`` with k completed upcrossings."""
        k = self.upcrossings[leaf]
        gain = self.process(leaf) - self.process(self.situation)
        return gain - ((k - 1) * (self.b - self.a) - self.a)


def doob_crossing(m: Process, a: float, b: float, t: Sequence[str] = (),
                  depth: int | None = None, tol: float = DEFAULT_TOL) -> CrossingResult:
    """Process that follows the increments of ``m`` only while an upcrossing is under way.

    Along every path from ``t``, a segment opens at the first situation where
    ``m < a`` (possibly ``t`` itself) and closes at the next one strictly
    later where ``m > b``; the next segment can only open strictly after
    that. Outside segments the new process stays put. Situations that do not
    extend ``t`` get the value ``m(t)``.
    """
    t = tuple(t)
    a, b = float(a), float(b)
    if not 0 < a < b:
        raise ContractError("levels must satisfy 0 < a < b")
    depth = m.depth if depth is None else depth
    root = m(t)
    if not is_finite(root) or abs(root - 1.0) > tol:
        raise ContractError(f"process must equal 1 at the start situation, got {root!r}")
    if any(m(s) < -tol for s in _subtree(m.states, t, depth)):
        raise ContractError("process must be non-negative below the start situation")

    values: dict[Situation, ExtReal] = {}
    active: dict[Situation, bool] = {}
    ups: dict[Situation, int] = {}
    downs: dict[Situation, int] = {}
    down_cuts: set[Situation] = set()
    up_cuts: set[Situation] = set()

    values[t] = root
    active[t] = root < a
    ups[t] = 0
    downs[t] = 1 if active[t] else 0
    if active[t]:
        down_cuts.add(t)
    for s in _subtree(m.states, t, depth):
        if len(s) >= depth:
            continue
        for x in m.states:
            u = s + (x,)
            step = m(u) - m(s)
            values[u] = values[s] + step if active[s] else values[s]
            ups[u], downs[u] = ups[s], downs[s]
            if active[s]:
                if m(u) > b:
                    active[u] = False
                    ups[u] += 1
                    up_cuts.add(u)
                else:
                    active[u] = True
            else:
                if m(u) < a:
                    active[u] = True
                    downs[u] += 1
                    down_cuts.add(u)
                else:
                    active[u] = False

    def value(s: Situation) -> ExtReal:
        if s[: len(t)] != t:
            return root
        return values[s]

    process = Process.from_function(m.states, depth, value)
    leaves = [s for s in values if len(s) == depth] if depth >= len(t) else [t]
    return CrossingResult(process, a, b, t,
                          upcrossings={s: ups[s] for s in leaves},
                          v_index={s: downs[s] for s in leaves},
                          down_cuts=down_cuts, up_cuts=up_cuts)


def _subtree(states: Sequence[str], t: Situation, depth: int):
    for k in range(max(depth - len(t), 0) + 1):
        for tail in product(states, repeat=k):
            yield t + tail


# -- sampled paths ----------------------------------------------------------

@dataclass
class LevyCheck:
    """Along each sampled path, conditional values from the variable's depth on."""

    paths: list[Situation]
    min_slack: float
    passed: bool


def levy_path_check(tree: ImpreciseTree, f: GlobalVariable, selection: PreciseSelection,
                    horizon: int, count: int, seed: int = 0,
                    tol: float = DEFAULT_TOL) -> LevyCheck:
    """Sample paths from one precise tree and compare ``E(f | path[:n])`` with ``f(path)``.

    For a finitary ``f`` the conditional value equals ``f`` as soon as ``n``
    reaches the depth of ``f``, so the eventual infimum along the path
    dominates ``f`` on every sampled path.
    """
    if horizon < f.depth:
        raise ContractError("horizon must reach the depth of the variable")
    proc = conditional_process(tree, f, horizon)
    paths = sample_paths(selection, tree, horizon, count, seed)
    slack = math.inf
    for p in paths:
        tail = min(proc(p[:n]) for n in range(f.depth, horizon + 1))
        target = f.value(p)
        slack = min(slack, tail - target if is_finite(tail) and is_finite(target) else
                    (0.0 if tail >= target else -math.inf))
    return LevyCheck(paths, slack, slack >= -tol)
