"""Axiom batteries for abstract upper-expectation functionals on a finite set.

:func:`check_local_axioms` takes any callable mapping an extended real
variable (a tuple, one entry per state) to an extended real and probes it
with a batch of variables plus seeded perturbations. Each axiom is checked
only on the variables in its domain; a gamble-only axiom never sees an
infinite entry.
"""

from __future__ import annotations

import math
import random
from collections.abc import Sequence
from dataclasses import dataclass, field

from .errors import AxiomEvaluationError, ContractError
from .extreal import (
    DEFAULT_TOL,
    INF,
    NEG_INF,
    ExtReal,
    ext_add,
    ext_close,
    ext_le,
    ext_mul,
    ext_neg,
    ext_sum,
    is_finite,
)
from .localmodel import Functional, LocalModel, lower_cut_limit, upper_cut_limit, upper_exp_local

Var = tuple[ExtReal, ...]

AXIOMS = (
    "E1", "E2", "E3", "E4", "E5",
    "E2'", "E3'", "E4'",
    "E6", "E14",
    "E7", "E8", "E9", "E10", "E11", "E12", "E13",
    "C1", "C2", "C3", "C4", "C5", "C6", "C7",
)


@dataclass
class AxiomOutcome:
    checked: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.checked > 0 and not self.failures


@dataclass
class AxiomReport:
    outcomes: dict[str, AxiomOutcome]

    def passed(self, axiom: str) -> bool:
        return self.outcomes[axiom].passed

    def failed(self, axiom: str) -> bool:
        return bool(self.outcomes[axiom].failures)

    @property
    def all_passed(self) -> bool:
        return all(o.passed for o in self.outcomes.values() if o.checked)

    def failing(self) -> list[str]:
        return [name for name, o in self.outcomes.items() if o.failures]

    def lines(self) -> list[str]:
        out = []
        for name, o in self.outcomes.items():
            if not o.checked:
                verdict = "skip"
            else:
                verdict = "pass" if o.passed else f"FAIL ({len(o.failures)})"
            out.append(f"{name:<4} {verdict:<10} checked={o.checked}")
        return out

    def to_json(self) -> dict:
        return {
            name: {"checked": o.checked, "passed": o.passed, "failures": o.failures[:5]}
            for name, o in self.outcomes.items()
        }


# -- variable classes -------------------------------------------------------

def is_gamble(f: Sequence[ExtReal]) -> bool:
    return all(is_finite(v) for v in f)


def is_bounded_below(f: Sequence[ExtReal]) -> bool:
    return all(v != NEG_INF for v in f)


def is_nonnegative(f: Sequence[ExtReal]) -> bool:
    return all(v >= 0 for v in f)


def _add(f: Sequence[ExtReal], g: Sequence[ExtReal]) -> Var:
    return tuple(ext_add(a, b) for a, b in zip(f, g))


def _scale(lam: ExtReal, f: Sequence[ExtReal]) -> Var:
    return tuple(ext_mul(lam, v) for v in f)


def _shift(f: Sequence[ExtReal], mu: ExtReal) -> Var:
    return tuple(ext_add(v, mu) for v in f)


def _neg(f: Sequence[ExtReal]) -> Var:
    return tuple(ext_neg(v) for v in f)


def random_variable(n: int, rng: random.Random, kind: str = "general",
                    scale: float = 10.0, p_inf: float = 0.25) -> Var:
    """Random variable on ``n`` states.

    ``kind`` is ``"gamble"``, ``"bounded_below"``, ``"nonnegative"`` or
    ``"general"``; infinite entries appear with probability ``p_inf`` each.
    """
    vals = [rng.uniform(-scale, scale) for _ in range(n)]
    if kind == "nonnegative":
        vals = [abs(v) for v in vals]
    if kind != "gamble":
        for i in range(n):
            if rng.random() < p_inf:
                if kind == "general":
                    vals[i] = INF if rng.random() < 0.5 else NEG_INF
                else:
                    vals[i] = INF
    return tuple(vals)


def random_batch(n: int, size: int, rng: random.Random) -> list[Var]:
    kinds = ("gamble", "bounded_below", "general", "nonnegative")
    return [random_variable(n, rng, kinds[i % len(kinds)]) for i in range(size)]


def sup_functional(f: Sequence[ExtReal]) -> ExtReal:
    """Vacuous upper expectation on any domain."""
    return max(f)


def example_no_lower_cut_continuity(f: Sequence[ExtReal]) -> ExtReal:
    """``-inf`` for variables below ``+inf`` everywhere with some ``-inf`` entry, else ``sup``.

    It satisfies E1, E2'-E4' and E5 but not continuity with respect to lower
    cuts, so it is the standard negative fixture for :func:`check_local_axioms`.
    """
    if all(v < INF for v in f) and any(v == NEG_INF for v in f):
        return NEG_INF
    return max(f)


def credal_functional(model: LocalModel) -> Functional:
    return lambda f: upper_exp_local(model, f)


# -- the battery ------------------------------------------------------------

class _Battery:
    def __init__(self, fn: Functional, n: int, tol: float):
        self.fn = fn
        self.n = n
        self.tol = tol
        self.outcomes = {name: AxiomOutcome() for name in AXIOMS}

    def E(self, f: Sequence[ExtReal], axiom: str) -> ExtReal:
        v = self.fn(tuple(f))
        v = float(v)
        if math.isnan(v):
            raise AxiomEvaluationError(axiom, tuple(f))
        return v

    def L(self, f: Sequence[ExtReal], axiom: str) -> ExtReal:
        return ext_neg(self.E(_neg(f), axiom))

    def record(self, axiom: str, ok: bool, **detail: object) -> None:
        o = self.outcomes[axiom]
        o.checked += 1
        if not ok:
            o.failures.append({k: _jsonable(v) for k, v in detail.items()})


def _jsonable(v: object) -> object:
    if isinstance(v, float):
        return "inf" if v == INF else "-inf" if v == NEG_INF else v
    if isinstance(v, tuple | list):
        return [_jsonable(x) for x in v]
    return v


def check_local_axioms(functional: Functional | LocalModel, n_states: int | None = None,
                       batch: Sequence[Sequence[ExtReal]] | None = None, seed: int = 0,
                       tol: float = DEFAULT_TOL, domain: str = "all") -> AxiomReport:
    """Run the axiom battery on ``functional``.

    ``domain="bounded_below"`` restricts every probe to variables without
    ``-inf`` entries, for functionals only defined there (the primed axioms
    and E6 are then skipped).
    """
    if isinstance(functional, LocalModel):
        n_states = functional.size if n_states is None else n_states
        functional = credal_functional(functional)
    if n_states is None or n_states < 1:
        raise ContractError("n_states must be a positive integer")
    if domain not in ("all", "bounded_below"):
        raise ContractError(f"unknown domain {domain!r}")
    rng = random.Random(seed)
    if batch is None:
        batch = random_batch(n_states, 8, rng)
    batch = [tuple(float(v) for v in f) for f in batch]
    if not batch:
        raise ContractError("batch must be non-empty")
    if any(len(f) != n_states for f in batch):
        raise ContractError(f"every variable needs {n_states} entries")

    n = n_states
    # point masses at +-inf catch functionals that mishandle a single infinite entry
    probes = list(batch)
    for i in range(n):
        unit = [0.0] * n
        unit[i] = NEG_INF
        probes.append(tuple(unit))
        unit[i] = INF
        probes.append(tuple(unit))
    if domain == "bounded_below":
        probes = [f for f in probes if is_bounded_below(f)]
        if not probes:
            raise ContractError("no bounded below variable to test")

    B = _Battery(functional, n, tol)
    gambles = [f for f in probes if is_gamble(f)]
    if not gambles:
        gambles = [tuple(rng.uniform(-10, 10) for _ in range(n))]
    bounded = [f for f in probes if is_bounded_below(f)]
    general = probes
    pairs_general = list(zip(general, general[1:] + general[:1]))
    pairs_bounded = list(zip(bounded, bounded[1:] + bounded[:1]))
    pairs_gamble = list(zip(gambles, gambles[1:] + gambles[:1]))

    _check_constants(B, rng)
    _check_subadditivity(B, pairs_bounded, "E2")
    _check_homogeneity(B, bounded, rng, "E3")
    _check_monotonicity(B, bounded, rng, "E4", bounded_only=True)
    _check_infinite_scaling(B, general, "E5")
    _check_infinite_scaling(B, general, "E12")
    if domain == "all":
        _check_subadditivity(B, pairs_general, "E2'")
        _check_homogeneity(B, general, rng, "E3'")
        _check_monotonicity(B, general, rng, "E4'", bounded_only=False)
        _check_lower_cuts(B, general)
    _check_upper_cuts(B, bounded)
    _check_bounds(B, bounded)
    _check_constant_additivity(B, bounded, rng)
    _check_zero_scaling(B, bounded)
    _check_mixed_chain(B, pairs_gamble)
    _check_uniform_convergence(B, gambles, rng, "E11")
    _check_countable_subadditivity(B, bounded, rng)
    _check_coherence(B, gambles, pairs_gamble, rng)
    return AxiomReport(B.outcomes)


def _check_constants(B: _Battery, rng: random.Random) -> None:
    for c in (0.0, 1.0, -3.5, rng.uniform(-100, 100), rng.uniform(-1, 1)):
        v = B.E((c,) * B.n, "E1")
        B.record("E1", ext_close(v, c, B.tol), c=c, value=v)


def _check_subadditivity(B: _Battery, pairs: list, axiom: str) -> None:
    for f, g in pairs:
        lhs = B.E(_add(f, g), axiom)
        rhs = ext_add(B.E(f, axiom), B.E(g, axiom))
        B.record(axiom, ext_le(lhs, rhs, B.tol), f=f, g=g, lhs=lhs, rhs=rhs)


def _check_homogeneity(B: _Battery, variables: list, rng: random.Random, axiom: str) -> None:
    for f in variables:
        for lam in (0.5, 3.0, rng.uniform(0.01, 10.0)):
            lhs = B.E(_scale(lam, f), axiom)
            rhs = ext_mul(lam, B.E(f, axiom))
            B.record(axiom, ext_close(lhs, rhs, B.tol * max(1.0, lam)), f=f, lam=lam,
                     lhs=lhs, rhs=rhs)


def _dominating(f: Sequence[ExtReal], rng: random.Random, bounded_only: bool) -> Var:
    out = []
    for v in f:
        r = rng.random()
        if r < 0.15:
            out.append(INF)
        elif r < 0.55:
            bump = rng.uniform(0.0, 5.0)
            out.append(max(v, rng.uniform(-10, 10)) if v == NEG_INF else ext_add(v, bump))
        else:
            out.append(v)
    return tuple(out)


def _check_monotonicity(B: _Battery, variables: list, rng: random.Random, axiom: str,
                        bounded_only: bool) -> None:
    for f in variables:
        for _ in range(2):
            g = _dominating(f, rng, bounded_only)
            lo, hi = B.E(f, axiom), B.E(g, axiom)
            B.record(axiom, ext_le(lo, hi, B.tol), f=f, g=g, Ef=lo, Eg=hi)


def _check_infinite_scaling(B: _Battery, variables: list, axiom: str) -> None:
    # on a finite space E5 is equivalent to this scaling identity for non-negative f
    for f in variables:
        if not is_bounded_below(f):
            continue
        h = tuple(max(v, 0.0) for v in f)
        lhs = B.E(_scale(INF, h), axiom)
        rhs = ext_mul(INF, B.E(h, axiom))
        B.record(axiom, lhs == rhs, f=h, lhs=lhs, rhs=rhs)


def _cut_reach(f: Sequence[ExtReal]) -> float:
    finite = [abs(v) for v in f if is_finite(v)]
    return (max(finite) if finite else 0.0) + 1.0


def _check_lower_cuts(B: _Battery, variables: list) -> None:
    for f in variables:
        r = _cut_reach(f)
        schedule = [-r, -10 * r, -1e3 * r, -1e6 * r]
        tr = lower_cut_limit(lambda g: B.E(g, "E6"), f, schedule)
        direct = B.E(f, "E6")
        ok = tr.status != "unresolved" and ext_close(direct, tr.limit, B.tol)
        B.record("E6", ok, f=f, direct=direct, limit=tr.limit, trace=tr.trace)


def _check_upper_cuts(B: _Battery, variables: list) -> None:
    for f in variables:
        r = _cut_reach(f)
        schedule = [r, 10 * r, 1e3 * r, 1e6 * r]
        tr = upper_cut_limit(lambda g: B.E(g, "E14"), f, schedule)
        direct = B.E(f, "E14")
        ok = tr.status != "unresolved" and ext_close(direct, tr.limit, B.tol)
        B.record("E14", ok, f=f, direct=direct, limit=tr.limit, trace=tr.trace)


def _check_bounds(B: _Battery, variables: list) -> None:
    for f in variables:
        v = B.E(f, "E7")
        ok = min(f) > NEG_INF and ext_le(min(f), v, B.tol) and ext_le(v, max(f), B.tol)
        B.record("E7", ok, f=f, value=v)


def _check_constant_additivity(B: _Battery, variables: list, rng: random.Random) -> None:
    for f in variables:
        for mu in (rng.uniform(-20, 20), 7.25, INF):
            lhs = B.E(_shift(f, mu), "E8")
            rhs = ext_add(B.E(f, "E8"), mu)
            B.record("E8", ext_close(lhs, rhs, B.tol), f=f, mu=mu, lhs=lhs, rhs=rhs)


def _check_zero_scaling(B: _Battery, variables: list) -> None:
    for f in variables:
        lhs = B.E(_scale(0.0, f), "E9")
        rhs = ext_mul(0.0, B.E(f, "E9"))
        B.record("E9", lhs == rhs, f=f, lhs=lhs, rhs=rhs)


def _check_mixed_chain(B: _Battery, pairs: list) -> None:
    for f, g in pairs:
        a = B.L(_add(f, g), "E10")
        b = ext_add(B.E(f, "E10"), B.L(g, "E10"))
        c = B.E(_add(f, g), "E10")
        B.record("E10", ext_le(a, b, B.tol) and ext_le(b, c, B.tol), f=f, g=g,
                 chain=(a, b, c))


def _check_uniform_convergence(B: _Battery, gambles: list, rng: random.Random,
                               axiom: str) -> None:
    for f in gambles:
        base = B.E(f, axiom)
        ok = True
        worst = 0.0
        for k in range(1, 11):
            eps = 2.0 ** -k
            fk = tuple(v + rng.uniform(-eps, eps) for v in f)
            gap = max(abs(a - b) for a, b in zip(f, fk))
            diff = abs(B.E(fk, axiom) - base)
            worst = diff
            # |E(f) - E(f_k)| <= sup |f - f_k| forces convergence along the sequence
            ok = ok and diff <= gap + B.tol
        B.record(axiom, ok and worst <= 2.0 ** -10 + B.tol, f=f, last_gap=worst)


def _check_countable_subadditivity(B: _Battery, variables: list, rng: random.Random) -> None:
    family = [tuple(max(v, 0.0) for v in f) for f in variables]
    for start in range(len(family)):
        chunk = [family[(start + i) % len(family)] for i in range(min(4, len(family)))]
        extra = tuple(abs(rng.uniform(-3, 3)) * 2.0 ** -start for _ in range(B.n))
        chunk.append(extra)
        total = chunk[0]
        for g in chunk[1:]:
            total = _add(total, g)
        lhs = B.E(total, "E13")
        rhs = ext_sum(B.E(g, "E13") for g in chunk)
        B.record("E13", ext_le(lhs, rhs, B.tol), terms=len(chunk), lhs=lhs, rhs=rhs)


def _check_coherence(B: _Battery, gambles: list, pairs: list, rng: random.Random) -> None:
    for f in gambles:
        v = B.E(f, "C1")
        B.record("C1", is_finite(v) and v <= max(f) + B.tol, f=f, value=v)
        lo = B.L(f, "C5")
        B.record("C5", min(f) - B.tol <= lo <= v + B.tol and v <= max(f) + B.tol,
                 f=f, lower=lo, upper=v)
        for lam in (0.25, rng.uniform(0.01, 10.0)):
            lhs = B.E(_scale(lam, f), "C3")
            B.record("C3", ext_close(lhs, lam * v, B.tol * max(1.0, lam)), f=f, lam=lam)
        g = tuple(x + abs(rng.uniform(0, 5)) for x in f)
        B.record("C4", v <= B.E(g, "C4") + B.tol, f=f, g=g)
        mu = rng.uniform(-20, 20)
        B.record("C6", ext_close(B.E(_shift(f, mu), "C6"), v + mu, B.tol), f=f, mu=mu)
    for f, g in pairs:
        lhs = B.E(_add(f, g), "C2")
        B.record("C2", lhs <= B.E(f, "C2") + B.E(g, "C2") + B.tol, f=f, g=g)
    _check_uniform_convergence(B, gambles, rng, "C7")
