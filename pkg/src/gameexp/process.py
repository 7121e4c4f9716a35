"""Real-valued processes on the situations of a finite-depth tree."""

from __future__ import annotations

import json
from collections.abc import Callable, Iterator, Mapping, Sequence
from itertools import product

from .errors import BudgetError, ContractError, ParseError
from .extreal import ExtReal, ext, to_json
from .tree import DEFAULT_BUDGET, Situation, count_situations, format_situation, parse_situation


class Process:
    """Values on every situation of length at most ``depth``.

    Situations deeper than ``depth`` take the value of their length-``depth``
    prefix, i.e. the process is constant along each branch past ``depth``.
    """

    def __init__(self, states: Sequence[str], depth: int, values: Mapping[Situation, object]):
        self.states = tuple(states)
        if depth < 0:
            raise ContractError("depth must be non-negative")
        self.depth = depth
        vals: dict[Situation, ExtReal] = {}
        for t in self.situations():
            if t not in values:
                raise ContractError(f"process has no value at {format_situation(t)!r}")
            vals[t] = ext(values[t])
        self._values = vals

    @classmethod
    def from_function(cls, states: Sequence[str], depth: int,
                      fn: Callable[[Situation], object],
                      budget: int = DEFAULT_BUDGET) -> Process:
        needed = count_situations(len(states), depth)
        if needed > budget:
            raise BudgetError(f"building a depth-{depth} process", needed, budget)
        return cls(states, depth, {t: fn(t) for t in _situations(tuple(states), depth)})

    @classmethod
    def constant(cls, states: Sequence[str], c: object, depth: int = 0) -> Process:
        return cls.from_function(states, depth, lambda t: c)

    def situations(self, start: Situation = ()) -> Iterator[Situation]:
        """Situations extending ``start`` up to ``depth``, level by level."""
        yield from _situations(self.states, self.depth, tuple(start))

    def leaves(self, start: Situation = ()) -> Iterator[Situation]:
        start = tuple(start)
        for tail in product(self.states, repeat=max(self.depth - len(start), 0)):
            yield start + tail

    def __call__(self, s: Sequence[str]) -> ExtReal:
        s = tuple(s)
        return self._values[s[: self.depth]]

    def value(self, s: Sequence[str]) -> ExtReal:
        return self(s)

    def children(self, s: Sequence[str]) -> tuple[ExtReal, ...]:
        """The local variable ``x -> M(s x)``."""
        s = tuple(s)
        return tuple(self(s + (x,)) for x in self.states)

    def values(self) -> dict[Situation, ExtReal]:
        return dict(self._values)

    def map(self, fn: Callable[[ExtReal], ExtReal]) -> Process:
        return Process(self.states, self.depth, {t: fn(v) for t, v in self._values.items()})

    def extend(self, depth: int) -> Process:
        if depth < self.depth:
            raise ContractError("cannot shrink the depth of a process")
        return Process.from_function(self.states, depth, self)

    def minimum(self) -> ExtReal:
        return min(self._values.values())

    def maximum(self) -> ExtReal:
        return max(self._values.values())

    def to_json(self) -> dict:
        return {"depth": self.depth,
                "values": {format_situation(t): to_json(v) for t, v in self._values.items()}}

    @classmethod
    def from_json(cls, document: str | Mapping, states: Sequence[str]) -> Process:
        """Parse ``{"depth": D, "values": {"": ..., "a": ..., ...}}``.

        A situation without an entry inherits the value of its parent, so a
        sparse document describes a process that only moves where listed.
        """
        if isinstance(document, str):
            try:
                doc = json.loads(document)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}") from None
        else:
            doc = document
        if not isinstance(doc, Mapping):
            raise ParseError("process document must be an object")
        depth = doc.get("depth")
        if not isinstance(depth, int) or isinstance(depth, bool) or depth < 0:
            raise ParseError("'depth' must be a non-negative integer", "depth")
        raw = doc.get("values")
        if not isinstance(raw, Mapping):
            raise ParseError("'values' must be an object", "values")
        states = tuple(states)
        given: dict[Situation, ExtReal] = {}
        for key, v in raw.items():
            s = parse_situation(key)
            where = f"values.{key}"
            bad = [x for x in s if x not in states]
            if bad:
                raise ParseError(f"unknown state label {bad[0]!r}", where)
            if len(s) > depth:
                raise ParseError(f"situation is deeper than depth {depth}", where)
            try:
                given[s] = ext(v)
            except (TypeError, ValueError) as exc:
                raise ParseError(str(exc), where) from None
        if () not in given:
            raise ParseError("missing value for the initial situation \"\"", "values")
        full: dict[Situation, ExtReal] = {}
        for t in _situations(states, depth):
            full[t] = given[t] if t in given else full[t[:-1]]
        return cls(states, depth, full)

    def __repr__(self) -> str:
        return f"Process(depth={self.depth}, root={self(())})"


def _situations(states: tuple[str, ...], depth: int, start: Situation = ()) -> Iterator[Situation]:
    for k in range(max(depth - len(start), 0) + 1):
        for tail in product(states, repeat=k):
            yield start + tail
