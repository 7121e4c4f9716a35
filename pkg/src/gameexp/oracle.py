"""Brute-force global expectations by enumerating precise trees.

A :class:`PreciseSelection` picks one vertex of the local model in every
situation above the variable's depth. Each selection is an ordinary
probability tree; the global upper (lower) expectation is the largest
(smallest) expectation over all selections. This is exponential and only
meant as an independent check of the backward recursion.
"""

from __future__ import annotations

import math
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import BudgetError, ContractError
from .extreal import ExtReal, is_finite
from .localmodel import LocalModel
from .tree import DEFAULT_BUDGET, ImpreciseTree, Situation, enumerate_situations, resolve_local_model
from .variables import FinitaryVariable, GlobalVariable

#: selections evaluated per vectorised chunk
CHUNK = 4096


@dataclass(frozen=True)
class PreciseSelection:
    choice: Mapping[Situation, int]

    def pmf(self, tree: ImpreciseTree, s: Situation) -> tuple[float, ...]:
        model = resolve_local_model(tree, s)
        i = self.choice.get(tuple(s), 0)
        if not 0 <= i < len(model.vertices):
            raise ContractError(f"vertex index {i} out of range at {s}")
        return model.vertices[i]


def _inner_situations(tree: ImpreciseTree, start: Situation, levels: int,
                      budget: int = DEFAULT_BUDGET) -> list[Situation]:
    """Situations where a vertex is chosen; ``budget`` only bounds this list."""
    if levels <= 0:
        return []
    return enumerate_situations(tree, levels - 1, budget, start)


def count_selections(tree: ImpreciseTree, depth: int, s: Sequence[str] = ()) -> int:
    s = tuple(s)
    total = 1
    for t in _inner_situations(tree, s, depth - len(s)):
        total *= len(resolve_local_model(tree, t).vertices)
    return total


def iter_selections(tree: ImpreciseTree, depth: int, s: Sequence[str] = (),
                    budget: int = DEFAULT_BUDGET) -> Iterator[PreciseSelection]:
    s = tuple(s)
    inner, counts = _selection_grid(tree, s, depth - len(s), budget)
    for combo in product(*(range(c) for c in counts)):
        yield PreciseSelection(dict(zip(inner, combo)))


def _selection_grid(tree: ImpreciseTree, s: Situation, levels: int,
                    budget: int) -> tuple[list[Situation], list[int]]:
    inner = _inner_situations(tree, s, levels)
    counts = [len(resolve_local_model(tree, t).vertices) for t in inner]
    total = math.prod(counts)
    if total > budget:
        raise BudgetError("enumerating precise selections", total, budget)
    return inner, counts


def _path_probabilities(tree: ImpreciseTree, inner: list[Situation], counts: list[int],
                        levels: int, lo: int, hi: int) -> np.ndarray:
    """Path probabilities for selections ``lo .. hi-1``, shape (hi-lo, |X|**levels).

    Selection ``k`` picks, at ``inner[i]``, the i-th mixed-radix digit of k.
    Built level by level: each situation multiplies the mass of its own
    children only, and the children are laid out in lexicographic order.
    """
    n = len(tree.states)
    idx = np.arange(lo, hi)
    digits: list[np.ndarray] = []
    for c in reversed(counts):
        digits.append(idx % c)
        idx = idx // c
    digits.reverse()
    rows = hi - lo
    probs = np.ones((rows, 1))
    pos = 0
    for level in range(levels):
        width = n**level
        block = np.empty((rows, width, n))
        for j in range(width):
            verts = np.asarray(resolve_local_model(tree, inner[pos + j]).vertices, dtype=float)
            block[:, j, :] = verts[digits[pos + j]]
        pos += width
        probs = (probs[:, :, None] * block).reshape(rows, width * n)
    return probs


def _leaf_values(tree: ImpreciseTree, f: GlobalVariable, s: Situation) -> np.ndarray:
    levels = f.depth - len(s)
    return np.array([f.value(s + tail) for tail in product(tree.states, repeat=levels)])


def _extreme(tree: ImpreciseTree, f: GlobalVariable, s: Sequence[str], budget: int,
             sign: float) -> ExtReal:
    s = tree.check_situation(s)
    if len(s) >= f.depth:
        return f.value(s)
    leaf = _leaf_values(tree, f, s)
    if not all(is_finite(v) for v in leaf):
        raise ContractError("the brute-force oracle needs a finite-valued variable")
    levels = f.depth - len(s)
    inner, counts = _selection_grid(tree, s, levels, budget)
    total = math.prod(counts)
    best = -math.inf
    for lo in range(0, total, CHUNK):
        probs = _path_probabilities(tree, inner, counts, levels, lo, min(lo + CHUNK, total))
        best = max(best, float(np.max(sign * (probs @ leaf))))
    return sign * best


def brute_force_upper_exp(tree: ImpreciseTree, f: GlobalVariable, s: Sequence[str] = (),
                          budget: int = DEFAULT_BUDGET) -> ExtReal:
    return _extreme(tree, f, s, budget, 1.0)


def brute_force_lower_exp(tree: ImpreciseTree, f: GlobalVariable, s: Sequence[str] = (),
                          budget: int = DEFAULT_BUDGET) -> ExtReal:
    return _extreme(tree, f, s, budget, -1.0)


def selection_expectation(tree: ImpreciseTree, selection: PreciseSelection,
                          f: GlobalVariable, s: Sequence[str] = ()) -> ExtReal:
    """Expectation of a finite-valued ``f`` in the precise tree of one selection."""
    s = tuple(s)

    def go(t: Situation) -> float:
        if len(t) >= f.depth:
            return f.value(t)
        p = selection.pmf(tree, t)
        return math.fsum(pi * go(t + (x,)) for pi, x in zip(p, tree.states) if pi > 0)

    return go(s)


def sample_paths(selection: PreciseSelection, tree: ImpreciseTree, depth: int,
                 count: int, seed: int = 0, start: Sequence[str] = ()) -> list[Situation]:
    """``count`` independent paths of ``depth`` further labels, reproducible from ``seed``.

    Situations missing from the selection use vertex 0.
    """
    if depth < 0 or count < 0:
        raise ContractError("depth and count must be non-negative")
    rng = np.random.Generator(np.random.Philox(seed))
    start = tuple(start)
    states = tree.states
    cache: dict[Situation, np.ndarray] = {}
    paths: list[Situation] = []
    u = rng.random((count, depth))
    for row in u:
        t = start
        for r in row:
            cdf = cache.get(t)
            if cdf is None:
                cdf = cache[t] = np.cumsum(selection.pmf(tree, t))
            i = int(np.searchsorted(cdf, r * cdf[-1], side="right"))
            t = t + (states[min(i, len(states) - 1)],)
        paths.append(t)
    return paths


def random_model(rng: np.random.Generator, states: Sequence[str], k: int) -> LocalModel:
    """Local model with ``k`` random vertices; some draws put zero mass on a state."""
    n = len(states)
    verts = rng.dirichlet(np.ones(n), size=k)
    if n > 1 and rng.random() < 0.2:
        verts[:, int(rng.integers(n))] = 0.0
    verts = verts / verts.sum(axis=1, keepdims=True)
    return LocalModel(tuple(states), tuple(tuple(float(v) for v in row) for row in verts))


def random_tree(rng: np.random.Generator, n_states: int, max_vertices: int = 3,
                kind: str = "explicit", depth: int = 4,
                max_selections: int | None = None) -> ImpreciseTree:
    """Random tree with 1..max_vertices vertices per local model.

    ``explicit`` trees get an independent model at every situation shorter
    than ``depth``; ``stationary`` and ``iid`` trees draw one model per state
    or a single model. ``max_selections`` caps the number of precise
    selections of an explicit tree by drawing vertex counts in random
    situation order, each within what the cap still allows.
    """
    states = tuple(str(i) for i in range(n_states))

    def draw(cap: int) -> LocalModel:
        k = int(rng.integers(1, max(1, min(max_vertices, cap)) + 1))
        return random_model(rng, states, k)

    if kind == "iid":
        return ImpreciseTree(states, "iid", model=draw(max_vertices))
    if kind == "stationary":
        return ImpreciseTree(states, "stationary", root=draw(max_vertices),
                             by_state={x: draw(max_vertices) for x in states})
    inner = [tuple(str(i) for i in t) for t in _all_situations(n_states, depth - 1)]
    order = rng.permutation(len(inner))
    remaining = max_selections if max_selections is not None else None
    by_situation: dict[Situation, LocalModel] = {}
    for i in order:
        cap = max_vertices if remaining is None else min(max_vertices, remaining)
        m = draw(cap)
        by_situation[inner[i]] = m
        if remaining is not None:
            remaining //= len(m.vertices)
    return ImpreciseTree(states, "explicit", default=draw(max_vertices), by_situation=by_situation)


def _all_situations(n_states: int, depth: int) -> Iterator[tuple[int, ...]]:
    for k in range(depth + 1):
        yield from product(range(n_states), repeat=k)


def random_finitary(rng: np.random.Generator, states: Sequence[str], depth: int,
                    low: float = -10.0, high: float = 10.0) -> FinitaryVariable:
    n = len(states) ** depth
    return FinitaryVariable(states, depth, [float(v) for v in rng.uniform(low, high, n)])
