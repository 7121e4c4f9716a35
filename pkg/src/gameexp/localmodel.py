"""Local upper expectations given by finitely generated credal sets.

A :class:`LocalModel` is a finite list of probability mass functions (the
vertices of a credal set) over an ordered state list. Its upper expectation
of a local variable ``f`` is the largest vertex expectation, where each
expectation is accumulated with extended-real arithmetic. With those
conventions the envelope already is the lower-cut/upper-cut extension of the
coherent upper prevision on gambles, so no limits are needed to evaluate it.
The cut-limit functions below exist to check that claim.
"""

from __future__ import annotations

import math
import operator
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field

from .errors import ContractError, ParseError
from .extreal import (
    DEFAULT_TOL,
    INF,
    NEG_INF,
    ExtReal,
    ext,
    ext_close,
    ext_mul,
    ext_neg,
    ext_sum,
    is_finite,
    to_json,
)

LocalVariable = Sequence[ExtReal]
Functional = Callable[[Sequence[ExtReal]], ExtReal]

PMF_TOL = 1e-9


@dataclass(frozen=True)
class LocalModel:
    states: tuple[str, ...]
    vertices: tuple[tuple[float, ...], ...]

    def __post_init__(self) -> None:
        states = tuple(str(s) for s in self.states)
        if not states:
            raise ContractError("a local model needs at least one state")
        if len(set(states)) != len(states):
            raise ContractError(f"duplicate state labels in {states}")
        if not self.vertices:
            raise ContractError("a local model needs at least one vertex")
        seen: set[tuple[float, ...]] = set()
        cleaned: list[tuple[float, ...]] = []
        for i, row in enumerate(self.vertices):
            p = tuple(float(v) for v in row)
            if len(p) != len(states):
                raise ContractError(
                    f"vertex {i} has {len(p)} entries, expected {len(states)}")
            if any(math.isnan(v) or v < 0 for v in p):
                raise ContractError(f"vertex {i} has a negative or NaN entry: {p}")
            total = math.fsum(p)
            if abs(total - 1.0) > PMF_TOL:
                raise ContractError(f"pmf sums to {total:.12g}")
            key = tuple(round(v, 12) for v in p)
            if key in seen:
                continue
            seen.add(key)
            cleaned.append(p)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "vertices", tuple(cleaned))

    @property
    def size(self) -> int:
        return len(self.states)

    def index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise ContractError(f"unknown state label {label!r}") from None

    def variable(self, table: Mapping[str, object]) -> tuple[ExtReal, ...]:
        """Local variable from a ``label -> value`` mapping, in state order."""
        missing = [s for s in self.states if s not in table]
        if missing:
            raise ContractError(f"variable misses states {missing}")
        extra = [k for k in table if k not in self.states]
        if extra:
            raise ContractError(f"variable has unknown states {extra}")
        return tuple(ext(table[s]) for s in self.states)

    def with_vertex(self, p: Sequence[float]) -> LocalModel:
        return LocalModel(self.states, self.vertices + (tuple(p),))

    def to_json(self) -> dict:
        return {"states": list(self.states), "vertices": [list(p) for p in self.vertices]}

    @classmethod
    def from_json(cls, doc: object, states: Sequence[str] | None = None,
                  path: str = "") -> LocalModel:
        if not isinstance(doc, Mapping):
            raise ParseError("local model must be an object", path)
        doc_states = doc.get("states", states)
        if doc_states is None:
            raise ParseError("missing 'states'", path)
        if states is not None and list(doc_states) != list(states):
            raise ParseError(f"states {list(doc_states)} differ from tree states {list(states)}",
                             f"{path}.states" if path else "states")
        rows = doc.get("vertices")
        if not isinstance(rows, list) or not rows:
            raise ParseError("'vertices' must be a non-empty list",
                             f"{path}.vertices" if path else "vertices")
        for i, row in enumerate(rows):
            where = f"{path}.vertices[{i}]" if path else f"vertices[{i}]"
            if not isinstance(row, list) or len(row) != len(doc_states):
                raise ParseError(f"vertex must list {len(doc_states)} probabilities", where)
            try:
                vals = [float(v) for v in row]
            except (TypeError, ValueError):
                raise ParseError("vertex entries must be numbers", where) from None
            if any(v < 0 or math.isnan(v) for v in vals):
                raise ParseError("vertex entries must be non-negative", where)
            total = math.fsum(vals)
            if abs(total - 1.0) > PMF_TOL:
                raise ParseError(f"pmf sums to {round(total, 12):g}", where)
        return cls(tuple(str(s) for s in doc_states), tuple(tuple(r) for r in rows))


def vacuous_model(states: Sequence[str]) -> LocalModel:
    """All degenerate pmfs: the upper expectation is the pointwise maximum."""
    n = len(states)
    return LocalModel(tuple(states),
                      tuple(tuple(1.0 if i == j else 0.0 for j in range(n)) for i in range(n)))


def precise_model(states: Sequence[str], pmf: Sequence[float]) -> LocalModel:
    return LocalModel(tuple(states), (tuple(pmf),))


def _check_length(model: LocalModel, f: LocalVariable) -> None:
    if len(f) != model.size:
        raise ContractError(f"variable has {len(f)} entries, model has {model.size} states")


def vertex_expectation(p: Sequence[float], f: LocalVariable) -> ExtReal:
    """``sum_x p(x) f(x)`` accumulated left to right under the extended conventions."""
    if all(map(math.isfinite, f)):
        return sum(map(operator.mul, p, f))
    return ext_sum(ext_mul(pi, fi) for pi, fi in zip(p, f))


def upper_exp_local(model: LocalModel, f: LocalVariable) -> ExtReal:
    _check_length(model, f)
    if all(map(math.isfinite, f)):
        return max(sum(map(operator.mul, p, f)) for p in model.vertices)
    return max(ext_sum(ext_mul(pi, fi) for pi, fi in zip(p, f)) for p in model.vertices)


def lower_exp_local(model: LocalModel, f: LocalVariable) -> ExtReal:
    _check_length(model, f)
    return ext_neg(upper_exp_local(model, [ext_neg(v) for v in f]))


def argmax_vertices(model: LocalModel, f: LocalVariable,
                    tol: float = DEFAULT_TOL) -> frozenset[int]:
    values = [vertex_expectation(p, f) for p in model.vertices]
    best = max(values)
    return frozenset(i for i, v in enumerate(values) if ext_close(v, best, tol))


# -- cut limits -------------------------------------------------------------

@dataclass
class CutTrace:
    """Values of the functional along a cut schedule.

    ``status`` is ``"converged"`` when the last two cuts beyond every finite
    entry give exactly the same value, ``"diverging"`` when they differ (the limit is
    then taken as ``+inf`` for upper cuts, ``-inf`` for lower cuts) and
    ``"unresolved"`` when the schedule never got past the finite entries.
    """

    cuts: list[float]
    trace: list[ExtReal]
    status: str
    value: ExtReal
    direction: str = field(default="up")

    @property
    def diverging(self) -> bool:
        return self.status == "diverging"

    @property
    def limit(self) -> ExtReal:
        """Best reading of the limit: the divergence target, else the last value."""
        if self.status == "diverging":
            return INF if self.direction == "up" else NEG_INF
        return self.value


def upper_cut(f: LocalVariable, c: float) -> tuple[ExtReal, ...]:
    return tuple(min(v, c) for v in f)


def lower_cut(f: LocalVariable, c: float) -> tuple[ExtReal, ...]:
    return tuple(max(v, c) for v in f)


def _classify(cuts: list[float], trace: list[ExtReal], stable_from: float,
              direction: str) -> CutTrace:
    past = [i for i, c in enumerate(cuts)
            if (c >= stable_from if direction == "up" else c <= stable_from)]
    # past every finite entry the cut only moves infinite entries, so any change
    # at all means mass sits on them; compare exactly
    if len(past) >= 2 and trace[past[-1]] == trace[past[-2]]:
        status = "converged"
    elif len(past) >= 2:
        status = "diverging"
    else:
        status = "unresolved"
    return CutTrace(list(cuts), trace, status, trace[-1], direction)


def upper_cut_limit(model: LocalModel | Functional, f: LocalVariable,
                    schedule: Sequence[float]) -> CutTrace:
    """Trace ``E(f ^ c)`` over an increasing schedule for bounded below ``f``."""
    fn = _as_functional(model, f)
    if any(v == NEG_INF for v in f):
        raise ContractError("upper cuts need a bounded below variable (no -inf entries)")
    cuts = [float(c) for c in schedule]
    if not cuts or any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise ContractError("schedule must be non-empty and strictly increasing")
    trace = [fn(upper_cut(f, c)) for c in cuts]
    finite = [v for v in f if is_finite(v)]
    has_inf = any(v == INF for v in f)
    stable_from = max(finite) if finite else (cuts[0] if has_inf else INF)
    if not has_inf:
        # f ^ c == f once c >= max f: the tail is exact, no divergence possible
        past = [c for c in cuts if c >= max(f)]
        status = "converged" if past else "unresolved"
        return CutTrace(cuts, trace, status, trace[-1], "up")
    return _classify(cuts, trace, stable_from, "up")


def lower_cut_limit(model: LocalModel | Functional, f: LocalVariable,
                    schedule: Sequence[float]) -> CutTrace:
    """Trace ``E(f v c)`` over a decreasing schedule."""
    fn = _as_functional(model, f)
    cuts = [float(c) for c in schedule]
    if not cuts or any(b >= a for a, b in zip(cuts, cuts[1:])):
        raise ContractError("schedule must be non-empty and strictly decreasing")
    trace = [fn(lower_cut(f, c)) for c in cuts]
    finite = [v for v in f if is_finite(v)]
    has_neg_inf = any(v == NEG_INF for v in f)
    stable_from = min(finite) if finite else (cuts[0] if has_neg_inf else NEG_INF)
    if not has_neg_inf:
        past = [c for c in cuts if c <= min(f)]
        status = "converged" if past else "unresolved"
        return CutTrace(cuts, trace, status, trace[-1], "down")
    return _classify(cuts, trace, stable_from, "down")


def _as_functional(model: LocalModel | Functional, f: LocalVariable) -> Functional:
    if isinstance(model, LocalModel):
        _check_length(model, f)
        return lambda g: upper_exp_local(model, g)
    return model


def variable_to_json(model: LocalModel, f: LocalVariable) -> dict:
    return {"table": {s: to_json(v) for s, v in zip(model.states, f)}}


def variable_from_json(model: LocalModel, doc: object) -> tuple[ExtReal, ...]:
    if not isinstance(doc, Mapping) or not isinstance(doc.get("table"), Mapping):
        raise ParseError("local variable must be {'table': {...}}")
    try:
        return model.variable(doc["table"])
    except (ValueError, TypeError) as exc:
        raise ParseError(str(exc), "table") from None
