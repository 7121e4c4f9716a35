"""Situations and imprecise probabilities trees.

A situation is a tuple of state labels; the empty tuple is the initial
situation. Situations serialize as comma-joined labels, so labels may not
contain commas.
"""

from __future__ import annotations

import json
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field
from itertools import product

from .errors import BudgetError, ContractError, ParseError
from .localmodel import LocalModel

Situation = tuple[str, ...]

ROOT: Situation = ()

DEFAULT_BUDGET = 10**6

KINDS = ("stationary", "explicit", "iid")


def parse_situation(text: str) -> Situation:
    text = text.strip()
    if not text:
        return ROOT
    return tuple(part.strip() for part in text.split(","))


def format_situation(s: Sequence[str]) -> str:
    return ",".join(s)


@dataclass(frozen=True)
class ImpreciseTree:
    """Assignment of a local model to every situation.

    Resolution order for a situation ``s``: an explicit ``by_situation``
    entry, then (stationary trees) ``root`` at the initial situation or the
    model keyed by the last label of ``s``, then the single ``iid`` model,
    then ``default``.
    """

    states: tuple[str, ...]
    kind: str
    root: LocalModel | None = None
    by_state: Mapping[str, LocalModel] = field(default_factory=dict)
    by_situation: Mapping[Situation, LocalModel] = field(default_factory=dict)
    default: LocalModel | None = None
    model: LocalModel | None = None

    def __post_init__(self) -> None:
        states = tuple(str(s) for s in self.states)
        object.__setattr__(self, "states", states)
        if not states:
            raise ContractError("a tree needs at least one state")
        for s in states:
            if "," in s or not s:
                raise ContractError(f"state label {s!r} is empty or contains a comma")
        if self.kind not in KINDS:
            raise ContractError(f"unknown assignment kind {self.kind!r}")
        if self.kind == "stationary":
            if self.root is None:
                raise ContractError("stationary trees need a root model")
            missing = [s for s in states if s not in self.by_state]
            if missing:
                raise ContractError(f"stationary tree misses models for states {missing}")
        if self.kind == "iid" and self.model is None:
            raise ContractError("iid trees need a model")
        if self.kind == "explicit" and self.default is None:
            raise ContractError("explicit trees need a default model")
        object.__setattr__(self, "by_situation",
                           {tuple(k): v for k, v in self.by_situation.items()})
        for s in self.by_situation:
            self.check_situation(s)
        for m in self.models():
            if m.states != states:
                raise ContractError(f"model states {m.states} differ from tree states {states}")

    def models(self) -> Iterator[LocalModel]:
        if self.root is not None:
            yield self.root
        yield from self.by_state.values()
        yield from self.by_situation.values()
        if self.default is not None:
            yield self.default
        if self.model is not None:
            yield self.model

    def check_situation(self, s: Sequence[str]) -> Situation:
        s = tuple(s)
        for label in s:
            if label not in self.states:
                raise ContractError(f"label {label!r} is not a state of the tree")
        return s

    def model_key(self, s: Situation) -> object:
        """Key such that situations with equal keys have identical subtrees of models."""
        if self.by_situation:
            return s
        if self.kind == "iid":
            return None
        if self.kind == "stationary":
            return s[-1] if s else ROOT
        return s

    @property
    def is_stationary(self) -> bool:
        return self.kind == "stationary" and not self.by_situation

    def to_json(self) -> dict:
        def bare(m: LocalModel) -> dict:
            return {"vertices": [list(p) for p in m.vertices]}

        assignment: dict = {"kind": self.kind}
        if self.root is not None:
            assignment["root"] = bare(self.root)
        if self.by_state:
            assignment["by_state"] = {k: bare(v) for k, v in self.by_state.items()}
        if self.by_situation:
            assignment["by_situation"] = {format_situation(k): bare(v)
                                          for k, v in self.by_situation.items()}
        if self.default is not None:
            assignment["default"] = bare(self.default)
        if self.model is not None:
            assignment["model"] = bare(self.model)
        return {"states": list(self.states), "assignment": assignment}


def resolve_local_model(tree: ImpreciseTree, s: Sequence[str]) -> LocalModel:
    s = tree.check_situation(s)
    hit = tree.by_situation.get(s)
    if hit is not None:
        return hit
    if tree.kind == "stationary":
        return tree.root if not s else tree.by_state[s[-1]]  # type: ignore[return-value]
    if tree.kind == "iid":
        return tree.model  # type: ignore[return-value]
    return tree.default  # type: ignore[return-value]


def iid_tree(model: LocalModel) -> ImpreciseTree:
    return ImpreciseTree(model.states, "iid", model=model)


def stationary_tree(root: LocalModel, by_state: Mapping[str, LocalModel]) -> ImpreciseTree:
    return ImpreciseTree(root.states, "stationary", root=root, by_state=dict(by_state))


def explicit_tree(default: LocalModel,
                  by_situation: Mapping[Situation, LocalModel]) -> ImpreciseTree:
    return ImpreciseTree(default.states, "explicit", default=default,
                         by_situation=dict(by_situation))


def count_situations(n_states: int, depth: int) -> int:
    return sum(n_states**k for k in range(depth + 1))


def enumerate_situations(tree: ImpreciseTree, depth: int,
                         budget: int = DEFAULT_BUDGET, start: Situation = ROOT) -> list[Situation]:
    """All situations extending ``start`` by at most ``depth`` labels, level by level."""
    if depth < 0:
        raise ContractError("depth must be non-negative")
    needed = count_situations(len(tree.states), depth)
    if needed > budget:
        raise BudgetError(f"enumerating situations to depth {depth}", needed, budget)
    out: list[Situation] = []
    for k in range(depth + 1):
        out.extend(start + tail for tail in product(tree.states, repeat=k))
    return out


# -- parsing ----------------------------------------------------------------

def parse_tree(document: str | Mapping) -> ImpreciseTree:
    if isinstance(document, str):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
    else:
        doc = document
    if not isinstance(doc, Mapping):
        raise ParseError("tree document must be an object")
    states = doc.get("states")
    if not isinstance(states, list) or not states or not all(isinstance(s, str) for s in states):
        raise ParseError("'states' must be a non-empty list of strings", "states")
    if len(set(states)) != len(states):
        raise ParseError("duplicate state labels", "states")
    for i, s in enumerate(states):
        if "," in s or not s:
            raise ParseError(f"label {s!r} is empty or contains a comma", f"states[{i}]")
    assignment = doc.get("assignment")
    if not isinstance(assignment, Mapping):
        raise ParseError("'assignment' must be an object", "assignment")
    kind = assignment.get("kind")
    if kind not in KINDS:
        raise ParseError(f"kind must be one of {list(KINDS)}", "assignment.kind")
    known = {"kind", "root", "by_state", "by_situation", "default", "model"}
    extra = sorted(set(assignment) - known)
    if extra:
        raise ParseError(f"unknown keys {extra}", "assignment")

    def model_at(key: str) -> LocalModel | None:
        if key not in assignment:
            return None
        return LocalModel.from_json(assignment[key], states, f"assignment.{key}")

    root = model_at("root")
    default = model_at("default")
    model = model_at("model")
    by_state: dict[str, LocalModel] = {}
    raw = assignment.get("by_state", {})
    if not isinstance(raw, Mapping):
        raise ParseError("'by_state' must be an object", "assignment.by_state")
    for label, sub in raw.items():
        if label not in states:
            raise ParseError(f"unknown state label {label!r}", f"assignment.by_state.{label}")
        by_state[label] = LocalModel.from_json(sub, states, f"assignment.by_state.{label}")
    by_situation: dict[Situation, LocalModel] = {}
    raw = assignment.get("by_situation", {})
    if not isinstance(raw, Mapping):
        raise ParseError("'by_situation' must be an object", "assignment.by_situation")
    for key, sub in raw.items():
        where = f"assignment.by_situation.{key}"
        s = parse_situation(key)
        bad = [x for x in s if x not in states]
        if bad:
            raise ParseError(f"unknown state label {bad[0]!r}", where)
        if s in by_situation:
            raise ParseError("duplicate situation entry", where)
        by_situation[s] = LocalModel.from_json(sub, states, where)

    if kind == "stationary":
        if root is None:
            raise ParseError("stationary assignment needs 'root'", "assignment.root")
        missing = [s for s in states if s not in by_state]
        if missing:
            raise ParseError(f"missing models for states {missing}", "assignment.by_state")
    elif kind == "iid" and model is None:
        raise ParseError("iid assignment needs 'model'", "assignment.model")
    elif kind == "explicit" and default is None:
        raise ParseError("explicit assignment needs 'default'", "assignment.default")
    return ImpreciseTree(tuple(states), kind, root=root, by_state=by_state,
                         by_situation=by_situation, default=default, model=model)
