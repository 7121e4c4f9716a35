"""Global variables that depend on finitely many states.

Every variable here has a ``depth`` n and only looks at the first n labels of
a path. Tables (:class:`FinitaryVariable`) store all ``|X|**n`` values; the
hitting variables are lazy and expose a compressed :meth:`key` so that the
backward recursion can share work between situations with the same future.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Hashable, Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import product

from .errors import BudgetError, ContractError, ParseError
from .extreal import INF, NEG_INF, ExtReal, ext, ext_neg, to_json
from .tree import DEFAULT_BUDGET, Situation, format_situation, parse_situation


class GlobalVariable:
    """Base class: an n-measurable variable over a fixed state list."""

    states: tuple[str, ...]
    depth: int

    def value(self, prefix: Situation) -> ExtReal:
        raise NotImplementedError

    def key(self, t: Situation) -> Hashable:
        """Summary of ``t`` that determines ``f`` on the cylinder of ``t``.

        Two situations of the same length with equal keys must satisfy
        ``f(t + u) == f(t' + u)`` for every continuation ``u``.
        """
        return t

    def constant_on(self, t: Situation) -> ExtReal | None:
        """The value of ``f`` if it is constant on every path through ``t``."""
        if len(t) >= self.depth:
            return self.value(t)
        return None

    def values(self) -> Iterable[ExtReal]:
        for tail in product(self.states, repeat=self.depth):
            yield self.value(tail)

    @property
    def bounded_below(self) -> bool:
        return all(v != NEG_INF for v in self.values())

    @property
    def bounded_above(self) -> bool:
        return all(v != INF for v in self.values())

    @property
    def finite(self) -> bool:
        return self.bounded_below and self.bounded_above

    def negated(self) -> GlobalVariable:
        return MappedVariable(self, ext_neg)

    def map(self, fn: Callable[[ExtReal], ExtReal]) -> GlobalVariable:
        return MappedVariable(self, fn)

    def tabulate(self, budget: int = DEFAULT_BUDGET) -> FinitaryVariable:
        size = len(self.states) ** self.depth
        if size > budget:
            raise BudgetError(f"tabulating a depth-{self.depth} variable", size, budget)
        return FinitaryVariable(self.states, self.depth, tuple(self.values()))


def _check_prefix(f: GlobalVariable, prefix: Sequence[str]) -> Situation:
    prefix = tuple(prefix)
    if len(prefix) < f.depth:
        raise ContractError(f"prefix of length {len(prefix)} is shorter than depth {f.depth}")
    return prefix


class FinitaryVariable(GlobalVariable):
    """Depth-n table, stored in the lexicographic order of ``product(states, repeat=n)``."""

    def __init__(self, states: Sequence[str], depth: int, values: Sequence[object]):
        self.states = tuple(states)
        if depth < 0:
            raise ContractError("depth must be non-negative")
        self.depth = depth
        expected = len(self.states) ** depth
        vals = tuple(ext(v) for v in values)
        if len(vals) != expected:
            raise ContractError(f"table has {len(vals)} entries, expected {expected}")
        self._values = vals
        self._pos = {s: i for i, s in enumerate(self.states)}

    @classmethod
    def constant(cls, states: Sequence[str], c: object, depth: int = 0) -> FinitaryVariable:
        return cls(states, depth, [c] * len(states) ** depth)

    @classmethod
    def from_function(cls, states: Sequence[str], depth: int,
                      fn: Callable[[Situation], object]) -> FinitaryVariable:
        return cls(states, depth, [fn(t) for t in product(states, repeat=depth)])

    @classmethod
    def from_table(cls, states: Sequence[str], depth: int,
                   table: Mapping[Situation, object]) -> FinitaryVariable:
        missing = [t for t in product(states, repeat=depth) if tuple(t) not in table]
        if missing:
            raise ContractError(f"table misses {len(missing)} sequences, e.g. {missing[0]}")
        return cls.from_function(states, depth, lambda t: table[t])

    def _index(self, t: Sequence[str]) -> int:
        i = 0
        n = len(self.states)
        try:
            for label in t:
                i = i * n + self._pos[label]
        except KeyError as exc:
            raise ContractError(f"label {exc.args[0]!r} is not a state") from None
        return i

    def value(self, prefix: Situation) -> ExtReal:
        prefix = _check_prefix(self, prefix)
        return self._values[self._index(prefix[: self.depth])]

    def values(self) -> Iterable[ExtReal]:
        return iter(self._values)

    @property
    def table(self) -> dict[Situation, ExtReal]:
        return dict(zip(product(self.states, repeat=self.depth), self._values))

    def negated(self) -> FinitaryVariable:
        return FinitaryVariable(self.states, self.depth, [ext_neg(v) for v in self._values])

    def map(self, fn: Callable[[ExtReal], ExtReal]) -> FinitaryVariable:
        return FinitaryVariable(self.states, self.depth, [fn(v) for v in self._values])

    def extend(self, depth: int) -> FinitaryVariable:
        """Same variable, tabulated at a larger depth."""
        if depth < self.depth:
            raise ContractError("cannot shrink the depth of a variable")
        return FinitaryVariable.from_function(self.states, depth, self.value)

    def tabulate(self, budget: int = DEFAULT_BUDGET) -> FinitaryVariable:
        return self

    def to_json(self) -> dict:
        return {"kind": "finitary", "depth": self.depth,
                "table": {format_situation(t): to_json(v) for t, v in self.table.items()}}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FinitaryVariable):
            return NotImplemented
        return (self.states, self.depth, self._values) == (other.states, other.depth, other._values)

    def __hash__(self) -> int:
        return hash((self.states, self.depth, self._values))

    def __repr__(self) -> str:
        return f"FinitaryVariable(depth={self.depth}, values={list(self._values)})"


class MappedVariable(GlobalVariable):
    """Pointwise image ``fn(f)`` of a variable; shares its key structure."""

    def __init__(self, base: GlobalVariable, fn: Callable[[ExtReal], ExtReal]):
        self.base = base
        self.fn = fn
        self.states = base.states
        self.depth = base.depth

    def value(self, prefix: Situation) -> ExtReal:
        return self.fn(self.base.value(prefix))

    def key(self, t: Situation) -> Hashable:
        return self.base.key(t)

    def constant_on(self, t: Situation) -> ExtReal | None:
        c = self.base.constant_on(t)
        return None if c is None else self.fn(c)


@dataclass(frozen=True)
class _HittingBase(GlobalVariable):
    """Shared machinery: scan labels ``offset+1 .. offset+n`` for the target."""

    states: tuple[str, ...]
    target: frozenset[str]
    n: int
    offset: int = 0
    depth: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "target", frozenset(self.target))
        if not self.target:
            raise ContractError("target must be non-empty")
        unknown = sorted(self.target - set(self.states))
        if unknown:
            raise ContractError(f"target labels {unknown} are not states")
        if self.n < 1:
            raise ContractError("hitting terms start at n = 1")
        if self.offset < 0:
            raise ContractError("offset must be non-negative")
        object.__setattr__(self, "depth", self.offset + self.n)

    def first_hit(self, t: Sequence[str]) -> int | None:
        """1-based index, counted after ``offset``, of the first target label in ``t``."""
        for i, label in enumerate(t[self.offset: self.offset + self.n], start=1):
            if label in self.target:
                return i
        return None

    def key(self, t: Situation) -> Hashable:
        if len(t) <= self.offset:
            return t
        return self.first_hit(t)

    def _value_from_hit(self, hit: int | None) -> ExtReal:
        raise NotImplementedError

    def value(self, prefix: Situation) -> ExtReal:
        prefix = _check_prefix(self, prefix)
        return self._value_from_hit(self.first_hit(prefix))

    def constant_on(self, t: Situation) -> ExtReal | None:
        if len(t) >= self.depth:
            return self.value(t)
        if len(t) > self.offset:
            hit = self.first_hit(t)
            if hit is not None:
                return self._value_from_hit(hit)
        return None


class HitIndicator(_HittingBase):
    """1 if some label among the first n (after ``offset``) lies in the target."""

    def _value_from_hit(self, hit: int | None) -> ExtReal:
        return 0.0 if hit is None else 1.0


class MissIndicator(_HittingBase):
    """Complement of :class:`HitIndicator`."""

    def _value_from_hit(self, hit: int | None) -> ExtReal:
        return 1.0 if hit is None else 0.0


class TruncatedHittingTime(_HittingBase):
    """``min(tau, n + 1)``: the hitting time, or ``n + 1`` if not hit within n steps."""

    def _value_from_hit(self, hit: int | None) -> ExtReal:
        return float(self.n + 1 if hit is None else hit)


def evaluate_finitary(f: GlobalVariable, prefix: Sequence[str]) -> ExtReal:
    return f.value(_check_prefix(f, prefix))


def apply_cut(f: GlobalVariable, c: float, side: str) -> GlobalVariable:
    """Lower cut ``max(f, c)`` or upper cut ``min(f, c)``, same depth."""
    c = ext(c)
    if side == "lower":
        return f.map(lambda v: max(v, c))
    if side == "upper":
        return f.map(lambda v: min(v, c))
    raise ContractError(f"side must be 'lower' or 'upper', got {side!r}")


# -- sequences --------------------------------------------------------------

SEQUENCE_KINDS = ("tables", "hit", "miss", "hitting_time", "lower_cut")


@dataclass(frozen=True)
class VariableSequenceSpec:
    """Recipe for the n-th term of a sequence of variables, n = 1, 2, ...

    ``tables`` takes either a list (term n is ``tables[n-1]``; the last entry
    repeats) or a callable ``n -> GlobalVariable``. ``lower_cut`` uses
    ``max(base, schedule[n-1])``.
    """

    kind: str
    states: tuple[str, ...]
    target: frozenset[str] = frozenset()
    tables: Sequence[GlobalVariable] | Callable[[int], GlobalVariable] | None = None
    base: GlobalVariable | None = None
    schedule: Sequence[float] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "target", frozenset(self.target))
        if self.kind not in SEQUENCE_KINDS:
            raise ContractError(f"unknown sequence kind {self.kind!r}")
        if self.kind in ("hit", "miss", "hitting_time"):
            if not self.target or not self.target <= set(self.states):
                raise ContractError("target must be a non-empty subset of the states")
        if self.kind == "tables" and self.tables is None:
            raise ContractError("a 'tables' sequence needs tables")
        if self.kind == "lower_cut":
            if self.base is None or not self.schedule:
                raise ContractError("a 'lower_cut' sequence needs a base variable and a schedule")
            if any(b >= a for a, b in zip(self.schedule, self.schedule[1:])):
                raise ContractError("cut schedule must be strictly decreasing")

    @property
    def hitting(self) -> bool:
        return self.kind in ("hit", "miss", "hitting_time")

    @property
    def length(self) -> int | None:
        """Number of distinct terms, or None for unbounded sequences."""
        if self.kind == "lower_cut":
            return len(self.schedule)
        if self.kind == "tables" and not callable(self.tables):
            return len(self.tables)  # type: ignore[arg-type]
        return None


def hit_spec(states: Sequence[str], target: Iterable[str]) -> VariableSequenceSpec:
    return VariableSequenceSpec("hit", tuple(states), frozenset(target))


def miss_spec(states: Sequence[str], target: Iterable[str]) -> VariableSequenceSpec:
    return VariableSequenceSpec("miss", tuple(states), frozenset(target))


def hitting_time_spec(states: Sequence[str], target: Iterable[str]) -> VariableSequenceSpec:
    return VariableSequenceSpec("hitting_time", tuple(states), frozenset(target))


def table_spec(states: Sequence[str],
               tables: Sequence[GlobalVariable] | Callable[[int], GlobalVariable]
               ) -> VariableSequenceSpec:
    return VariableSequenceSpec("tables", tuple(states), tables=tables)


def lower_cut_spec(base: GlobalVariable, schedule: Sequence[float]) -> VariableSequenceSpec:
    return VariableSequenceSpec("lower_cut", base.states, base=base,
                                schedule=tuple(float(c) for c in schedule))


def generate_term(spec: VariableSequenceSpec, n: int, offset: int = 0) -> GlobalVariable:
    """Term n (1-based). ``offset`` shifts hitting variables to start after a situation."""
    if n < 1:
        raise ContractError("terms are numbered from 1")
    if spec.kind == "hit":
        return HitIndicator(spec.states, spec.target, n, offset)
    if spec.kind == "miss":
        return MissIndicator(spec.states, spec.target, n, offset)
    if spec.kind == "hitting_time":
        return TruncatedHittingTime(spec.states, spec.target, n, offset)
    if spec.kind == "lower_cut":
        c = spec.schedule[min(n, len(spec.schedule)) - 1]
        return apply_cut(spec.base, c, "lower")  # type: ignore[arg-type]
    tables = spec.tables
    if callable(tables):
        return tables(n)
    return tables[min(n, len(tables)) - 1]  # type: ignore[index]


def pad_to_n_measurable(seq: Sequence[GlobalVariable], c: object,
                        states: Sequence[str] | None = None) -> list[GlobalVariable]:
    """Re-index a sequence of variables so that term k depends on at most k states.

    Term 0 is the constant ``c``; afterwards each input term is emitted as soon
    as its depth allows it, and the previous output is repeated while waiting.
    Every input appears, in order, in the output.
    """
    if states is None:
        if not seq:
            raise ContractError("states are needed to pad an empty sequence")
        states = seq[0].states
    out: list[GlobalVariable] = [FinitaryVariable.constant(states, c)]
    i = 0
    k = 1
    while i < len(seq):
        if seq[i].depth <= k:
            out.append(seq[i])
            i += 1
        else:
            out.append(out[-1])
        k += 1
    return out


# -- JSON -------------------------------------------------------------------

def parse_variable(document: str | Mapping, states: Sequence[str]) -> GlobalVariable | VariableSequenceSpec:
    """Parse a variable document.

    ``finitary`` documents give a table. ``hit``/``miss``/``hitting_time``
    give a sequence spec, or a single term when an integer ``n`` is present.
    """
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, Mapping):
        raise ParseError("variable document must be an object")
    states = tuple(states)
    kind = doc.get("kind")
    if kind == "finitary":
        depth = doc.get("depth")
        if not isinstance(depth, int) or isinstance(depth, bool) or depth < 0:
            raise ParseError("'depth' must be a non-negative integer", "depth")
        raw = doc.get("table")
        if not isinstance(raw, Mapping):
            raise ParseError("'table' must be an object", "table")
        table: dict[Situation, ExtReal] = {}
        for key, v in raw.items():
            s = parse_situation(key)
            if len(s) != depth:
                raise ParseError(f"key has {len(s)} labels, expected {depth}", f"table.{key}")
            bad = [x for x in s if x not in states]
            if bad:
                raise ParseError(f"unknown state label {bad[0]!r}", f"table.{key}")
            try:
                table[s] = ext(v)
            except (TypeError, ValueError) as exc:
                raise ParseError(str(exc), f"table.{key}") from None
        missing = [t for t in product(states, repeat=depth) if t not in table]
        if missing:
            raise ParseError(f"table misses entry {format_situation(missing[0])!r}", "table")
        return FinitaryVariable.from_table(states, depth, table)
    if kind in ("hit", "miss", "hitting_time"):
        target = doc.get("target")
        if not isinstance(target, list) or not target:
            raise ParseError("'target' must be a non-empty list of labels", "target")
        for i, label in enumerate(target):
            if label not in states:
                raise ParseError(f"unknown state label {label!r}", f"target[{i}]")
        spec = VariableSequenceSpec(kind, states, frozenset(target))
        n = doc.get("n")
        if n is None:
            return spec
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ParseError("'n' must be a positive integer", "n")
        return generate_term(spec, n)
    raise ParseError("kind must be one of ['finitary', 'hit', 'miss', 'hitting_time']", "kind")


def spec_to_json(spec: VariableSequenceSpec) -> dict:
    if not spec.hitting:
        raise ContractError(f"sequence kind {spec.kind!r} has no JSON form")
    return {"kind": spec.kind, "target": sorted(spec.target, key=spec.states.index)}
