"""Global upper and lower expectations of finitary variables.

The value at a situation is computed by backward recursion: at the depth of
the variable it is the variable itself, and one level up it is the local
upper expectation of the next-level values. Situations are merged when both
the remaining tree and the variable's future coincide (see
:meth:`ImpreciseTree.model_key` and :meth:`GlobalVariable.key`), which keeps
long hitting-time horizons linear in the depth.
"""

from __future__ import annotations

from collections.abc import Hashable, Sequence
from dataclasses import dataclass

from .errors import BudgetError
from .extreal import ExtReal, ext_neg
from .localmodel import LocalModel, upper_exp_local
from .process import Process
from .tree import DEFAULT_BUDGET, ImpreciseTree, Situation, count_situations, resolve_local_model
from .variables import FinitaryVariable, GlobalVariable


@dataclass(frozen=True)
class EvalResult:
    value: ExtReal
    visited: int
    memo_depth: int


class _Solution:
    """Values of every merged node reachable from a start situation."""

    def __init__(self, tree: ImpreciseTree, f: GlobalVariable, start: Situation, budget: int):
        self.tree = tree
        self.f = f
        self.start = start
        levels = max(f.depth - len(start), 0)
        if isinstance(f, FinitaryVariable):
            needed = count_situations(len(tree.states), levels)
            if needed > budget:
                raise BudgetError(f"evaluating a depth-{f.depth} table", needed, budget)

        models: dict[object, LocalModel] = {}
        # forward pass: for each level, key -> (representative, constant or None)
        frontier: dict[Hashable, Situation] = {self.key(start): start}
        layers: list[dict[Hashable, Situation]] = [frontier]
        children: list[dict[Hashable, list[Hashable]]] = []
        visited = 1
        for _ in range(levels):
            nxt: dict[Hashable, Situation] = {}
            links: dict[Hashable, list[Hashable]] = {}
            for k, t in frontier.items():
                if f.constant_on(t) is not None:
                    continue
                kids = []
                for x in tree.states:
                    u = t + (x,)
                    ku = self.key(u)
                    if ku not in nxt:
                        nxt[ku] = u
                        visited += 1
                        if visited > budget:
                            raise BudgetError("global recursion nodes", visited, budget)
                    kids.append(ku)
                links[k] = kids
            children.append(links)
            layers.append(nxt)
            frontier = nxt

        # backward pass
        values: list[dict[Hashable, ExtReal]] = [dict() for _ in layers]
        for depth in range(len(layers) - 1, -1, -1):
            links = children[depth] if depth < len(children) else {}
            below = values[depth + 1] if depth + 1 < len(values) else {}
            for k, t in layers[depth].items():
                c = f.constant_on(t)
                if c is not None:
                    values[depth][k] = c
                    continue
                mk = tree.model_key(t)
                model = models.get(mk)
                if model is None:
                    model = models[mk] = resolve_local_model(tree, t)
                values[depth][k] = upper_exp_local(model, [below[ku] for ku in links[k]])
        self.values = values
        self.visited = visited
        self.memo_depth = levels

    def key(self, t: Situation) -> Hashable:
        c = self.f.constant_on(t)
        if c is not None:
            # the future is fixed, no matter what the tree does
            return ("const", c)
        return (self.tree.model_key(t), self.f.key(t))

    def __call__(self, t: Situation) -> ExtReal:
        """Value at a situation extending ``start``."""
        c = self.f.constant_on(t)
        if c is not None:
            return c
        return self.values[len(t) - len(self.start)][self.key(t)]

    @property
    def root(self) -> ExtReal:
        return self(self.start)


def upper_exp_finitary_global(tree: ImpreciseTree, f: GlobalVariable,
                              s: Sequence[str] = (), budget: int = DEFAULT_BUDGET) -> EvalResult:
    s = tree.check_situation(s)
    _check_states(tree, f)
    sol = _Solution(tree, f, s, budget)
    return EvalResult(sol.root, sol.visited, sol.memo_depth)


def lower_exp_finitary_global(tree: ImpreciseTree, f: GlobalVariable,
                              s: Sequence[str] = (), budget: int = DEFAULT_BUDGET) -> EvalResult:
    r = upper_exp_finitary_global(tree, f.negated(), s, budget)
    return EvalResult(ext_neg(r.value), r.visited, r.memo_depth)


def conditional_process(tree: ImpreciseTree, f: GlobalVariable, max_depth: int | None = None,
                        budget: int = DEFAULT_BUDGET) -> Process:
    """The process ``s -> upper expectation of f given s`` on situations up to ``max_depth``."""
    _check_states(tree, f)
    if max_depth is None:
        max_depth = f.depth
    sol = _Solution(tree, f, (), budget)

    def value(t: Situation) -> ExtReal:
        if len(t) >= f.depth:
            return f.value(t)
        return sol(t)

    return Process.from_function(tree.states, max_depth, value, budget)


def _check_states(tree: ImpreciseTree, f: GlobalVariable) -> None:
    if tuple(f.states) != tree.states:
        raise ValueError(f"variable states {f.states} differ from tree states {tree.states}")
