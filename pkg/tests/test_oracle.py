import numpy as np
import pytest

from gameexp.errors import BudgetError, ContractError
from gameexp.globalexp import upper_exp_finitary_global
from gameexp.localmodel import LocalModel, precise_model, upper_exp_local
from gameexp.oracle import (
    PreciseSelection,
    brute_force_lower_exp,
    brute_force_upper_exp,
    count_selections,
    iter_selections,
    random_finitary,
    random_tree,
    sample_paths,
    selection_expectation,
)
from gameexp.tree import ImpreciseTree, explicit_tree, iid_tree
from gameexp.variables import FinitaryVariable

BIN = ("0", "1")


def test_precise_tree_gives_its_expectation():
    t = iid_tree(precise_model(BIN, (0.25, 0.75)))
    f = FinitaryVariable(BIN, 2, [1.0, 2.0, 3.0, 4.0])
    # E = sum_t p(t) f(t)
    expected = 0.25 * 0.25 * 1 + 0.25 * 0.75 * 2 + 0.75 * 0.25 * 3 + 0.75 * 0.75 * 4
    assert brute_force_upper_exp(t, f) == pytest.approx(expected, abs=1e-12)
    assert brute_force_lower_exp(t, f) == pytest.approx(expected, abs=1e-12)


def test_depth_one_is_local():
    m = LocalModel(BIN, ((0.5, 0.5), (0.8, 0.2)))
    f = FinitaryVariable(BIN, 1, [0.0, 10.0])
    assert brute_force_upper_exp(iid_tree(m), f) == pytest.approx(upper_exp_local(m, (0.0, 10.0)))


def test_matches_recursion_on_random_trees():
    rng = np.random.default_rng(11)
    for _ in range(20):
        states = ("0", "1")
        models = {t: LocalModel(states, tuple(map(tuple, rng.dirichlet([1, 1], size=2))))
                  for t in [(), ("0",), ("1",), ("0", "0"), ("0", "1"), ("1", "0"), ("1", "1")]}
        tree = explicit_tree(models[()], models)
        f = random_finitary(rng, states, 3)
        assert brute_force_upper_exp(tree, f) == pytest.approx(
            upper_exp_finitary_global(tree, f).value, abs=1e-9)


def test_against_explicit_selection_loop():
    rng = np.random.default_rng(2)
    tree = random_tree(rng, 2, 2, "explicit", 2)
    f = random_finitary(rng, tree.states, 2)
    values = [selection_expectation(tree, sel, f) for sel in iter_selections(tree, 2)]
    assert brute_force_upper_exp(tree, f) == pytest.approx(max(values), abs=1e-12)
    assert brute_force_lower_exp(tree, f) == pytest.approx(min(values), abs=1e-12)
    assert len(values) == count_selections(tree, 2)


def test_adding_a_vertex_never_decreases():
    rng = np.random.default_rng(3)
    for _ in range(10):
        tree = random_tree(rng, 2, 2, "stationary")
        f = random_finitary(rng, tree.states, 3)
        before = brute_force_upper_exp(tree, f)
        extra = tuple(rng.dirichlet([1, 1]))
        bigger = ImpreciseTree(tree.states, "stationary", root=tree.root,
                               by_state={**tree.by_state, "0": tree.by_state["0"].with_vertex(extra)})
        assert brute_force_upper_exp(bigger, f) >= before - 1e-12


def test_budget_and_finite_values():
    rng = np.random.default_rng(0)
    tree = random_tree(rng, 3, 3, "explicit", 3)
    f = random_finitary(rng, tree.states, 3)
    if count_selections(tree, 3) > 10:
        with pytest.raises(BudgetError) as err:
            brute_force_upper_exp(tree, f, budget=10)
        assert err.value.required == count_selections(tree, 3)
    g = FinitaryVariable(BIN, 1, [0.0, float("inf")])
    with pytest.raises(ContractError):
        brute_force_upper_exp(iid_tree(precise_model(BIN, (0.5, 0.5))), g)


def test_sample_paths_degenerate_and_deterministic():
    t = iid_tree(LocalModel(BIN, ((0.0, 1.0),)))
    paths = sample_paths(PreciseSelection({}), t, 5, 20, seed=1)
    assert set(paths) == {("1",) * 5}
    fair = iid_tree(precise_model(BIN, (0.5, 0.5)))
    a = sample_paths(PreciseSelection({}), fair, 10, 200, seed=42)
    assert a == sample_paths(PreciseSelection({}), fair, 10, 200, seed=42)
    assert a != sample_paths(PreciseSelection({}), fair, 10, 200, seed=43)


def test_sample_paths_frequency():
    fair = iid_tree(precise_model(BIN, (0.5, 0.5)))
    paths = sample_paths(PreciseSelection({}), fair, 10, 10**4, seed=7)
    freq = np.mean([[x == "1" for x in p] for p in paths])
    assert abs(freq - 0.5) < 0.02


def test_selection_index_checked():
    m = LocalModel(BIN, ((0.5, 0.5),))
    with pytest.raises(ContractError):
        PreciseSelection({(): 3}).pmf(iid_tree(m), ())
