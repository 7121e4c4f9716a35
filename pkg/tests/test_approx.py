import pytest

from gameexp.approx import (
    ApproxOptions,
    lower_cut_global_limit,
    lower_expected_hitting_time,
    lower_hitting_probability,
    monotone_limit,
    trace_to_csv,
    upper_expected_hitting_time,
    upper_hitting_probability,
    upper_never_hit_probability,
)
from gameexp.errors import ConsistencyError, ContractError
from gameexp.extreal import INF, NEG_INF
from gameexp.globalexp import upper_exp_finitary_global
from gameexp.localmodel import LocalModel, precise_model, vacuous_model
from gameexp.tree import iid_tree, stationary_tree
from gameexp.variables import FinitaryVariable, generate_term, hit_spec, hitting_time_spec, table_spec

from chain_oracle import fixed_point, hit_values, time_values

BIN = ("0", "1")


def test_fair_chain_hitting_probability(fair_chain):
    r = upper_hitting_probability(fair_chain, ["b"])
    assert r.values[:4] == pytest.approx([0.5, 0.75, 0.875, 0.9375], abs=1e-12)
    for n, v in r.trace:
        assert v == pytest.approx(1 - 0.5**n, abs=1e-12)
    assert r.converged and abs(r.estimate - 1) < 1e-6
    assert r.direction == "up" and r.bracket == (r.trace[-1][1], "lower")


def test_fair_chain_hitting_times(fair_chain):
    for fn in (upper_expected_hitting_time, lower_expected_hitting_time):
        r = fn(fair_chain, ["b"])
        assert r.converged and abs(r.estimate - 2.0) < 1e-6
        for n, v in r.trace:
            assert v == pytest.approx(2 - 0.5**n, abs=1e-12)


def test_whole_state_space_is_hit_at_once(fair_chain):
    r = upper_hitting_probability(fair_chain, ["a", "b"])
    assert r.estimate == 1.0 and r.converged and len(r.trace) == 1
    assert lower_hitting_probability(fair_chain, ["a", "b"]).estimate == 1.0
    assert upper_expected_hitting_time(fair_chain, ["a", "b"]).estimate == 1.0


def test_unreachable_target():
    states = ("a", "b")
    stay = LocalModel(states, ((1.0, 0.0),))
    t = stationary_tree(stay, {"a": stay, "b": stay})
    r = upper_hitting_probability(t, ["b"])
    assert r.estimate == 0.0 and r.converged


def test_vacuous_lower_hitting_is_zero():
    t = iid_tree(vacuous_model(("a", "b", "c")))
    r = lower_hitting_probability(t, ["a", "b"])
    assert r.estimate == 0.0 and r.converged


def test_gb_chain_against_fixed_points(gb_chain):
    # fixed points of h = max/min_p [p(b) + p(g) h]: both equal 1
    up = fixed_point(lambda h: max(0.1 + 0.9 * h, 0.5 + 0.5 * h))
    lo = fixed_point(lambda h: min(0.1 + 0.9 * h, 0.5 + 0.5 * h))
    assert up == pytest.approx(1.0) and lo == pytest.approx(1.0, abs=1e-9)

    r = upper_hitting_probability(gb_chain, ["b"])
    assert r.converged and r.estimate == pytest.approx(up, abs=1e-6)
    for n, v in r.trace:
        assert v == pytest.approx(hit_values(gb_chain, {"b"}, n, max), abs=1e-12)

    r = lower_hitting_probability(gb_chain, ["b"])
    for n, v in r.trace:
        assert v == pytest.approx(hit_values(gb_chain, {"b"}, n, min), abs=1e-12)
    assert r.bracket[0] <= lo + 1e-12  # a lower bound that approaches 1 like 0.9^n
    assert r.trace[-1][1] == pytest.approx(1 - 0.9**63, abs=1e-12)

    # expected time from the root: X_1 = g, then geometric with rate 0.1 or 0.5
    r = upper_expected_hitting_time(gb_chain, ["b"])
    assert not r.converged and not r.divergence_flag and r.bracket[0] <= 11.0
    r = lower_expected_hitting_time(gb_chain, ["b"])
    assert r.converged and r.estimate == pytest.approx(3.0, abs=1e-6)
    for n, v in r.trace:
        assert v == pytest.approx(time_values(gb_chain, {"b"}, n, min), abs=1e-12)


def test_upper_time_slow_convergence_with_larger_horizon(gb_chain):
    r = upper_expected_hitting_time(gb_chain, ["b"], opts=ApproxOptions(max_n=400))
    assert r.converged and r.estimate == pytest.approx(11.0, abs=1e-6)


def test_trap_is_flagged_divergent():
    states = ("a", "t")
    trap = stationary_tree(vacuous_model(states),
                           {"a": vacuous_model(states), "t": LocalModel(states, ((0.0, 1.0),))})
    r = upper_expected_hitting_time(trap, ["a"])
    assert r.divergence_flag and r.estimate == INF and not r.converged
    assert "possibly +infinite" in r.notes
    assert r.values[-1] == 65.0
    assert lower_expected_hitting_time(trap, ["a"]).estimate == 1.0


def test_point_mass_regression(point_mass_tree):
    spec = table_spec(BIN, lambda n: FinitaryVariable(BIN, 1, [0.0, float(n)]))
    r = monotone_limit(point_mass_tree, spec, (), "up")
    assert r.converged and r.estimate == 0.0 and set(r.values) == {0.0}


def test_constant_sequence_converges_at_second_term(point_mass_tree):
    spec = table_spec(BIN, [FinitaryVariable.constant(BIN, 3.0)] * 10)
    r = monotone_limit(point_mass_tree, spec, k_stable=1)
    assert r.converged and r.estimate == 3.0 and len(r.trace) == 2


def test_monotonicity_violation_is_an_error(point_mass_tree):
    spec = table_spec(BIN, lambda n: FinitaryVariable.constant(BIN, -float(n)))
    with pytest.raises(ConsistencyError):
        monotone_limit(point_mass_tree, spec, direction="up")
    with pytest.raises(ContractError):
        monotone_limit(point_mass_tree, spec, direction="sideways")


def test_conditional_hitting_starts_after_situation(fair_chain):
    # at situation (b), the chain sits in b and every later state is b
    assert upper_hitting_probability(fair_chain, ["b"], ("b",)).estimate == 1.0
    # at (a), the next state is b with probability 1/2, as from the root
    r = upper_hitting_probability(fair_chain, ["b"], ("a",))
    assert r.values[0] == pytest.approx(0.5)


def test_conjugacy_at_every_level(gb_chain):
    never = upper_never_hit_probability(gb_chain, ["b"])
    lower = lower_hitting_probability(gb_chain, ["b"])
    for (n1, a), (n2, b) in zip(never.trace, lower.trace):
        assert n1 == n2 and b == 1.0 - a


def test_lower_cut_limit_examples():
    t = iid_tree(precise_model(BIN, (0.5, 0.5)))
    f = FinitaryVariable(BIN, 1, [1.0, 3.0])
    r = lower_cut_global_limit(t, f, (), (0.0, -1.0))
    assert r.values == [2.0, 2.0] and r.estimate == 2.0 and r.converged

    pm = iid_tree(LocalModel(BIN, ((1.0, 0.0),)))
    g = FinitaryVariable(BIN, 1, [4.0, NEG_INF])
    r = lower_cut_global_limit(pm, g, (), (-1.0, -10.0, -100.0))
    assert r.values == [4.0, 4.0, 4.0] and r.estimate == 4.0

    h = FinitaryVariable(BIN, 1, [0.0, NEG_INF])
    r = lower_cut_global_limit(t, h, (), (-1.0, -10.0, -100.0))
    assert r.values == pytest.approx([-0.5, -5.0, -50.0])
    assert r.estimate == NEG_INF and r.divergence_flag and r.converged

    r = lower_cut_global_limit(t, f, (), (5.0, 4.0))
    assert not r.converged
    with pytest.raises(ContractError):
        lower_cut_global_limit(t, f, (), (1.0, 2.0))


def test_builtin_sequences_are_measurable_bounded_gambles(fair_chain):
    for spec in (hit_spec(fair_chain.states, {"b"}), hitting_time_spec(fair_chain.states, {"b"})):
        for n in range(1, 8):
            term = generate_term(spec, n)
            assert term.depth <= n
            vals = list(term.values())
            assert min(vals) >= 0 and all(v < INF for v in vals)
    # pointwise convergence on a finite window: the path that stays in a forever
    spec = hitting_time_spec(fair_chain.states, {"b"})
    stays = ("a",) * 10
    assert [generate_term(spec, n).value(stays) for n in range(1, 10)] == list(range(2, 11))


def test_fatou_on_cyclic_pairs(imprecise_stationary):
    f = FinitaryVariable(BIN, 2, [3.0, -1.0, 0.5, 2.0])
    g = FinitaryVariable(BIN, 2, [-2.0, 4.0, 1.0, 0.0])
    low = FinitaryVariable(BIN, 2, [min(a, b) for a, b in zip(f.values(), g.values())])
    E = lambda v: upper_exp_finitary_global(imprecise_stationary, v).value  # noqa: E731
    assert E(low) <= min(E(f), E(g)) + 1e-9


def test_csv_export(fair_chain, tmp_path):
    r = upper_hitting_probability(fair_chain, ["b"])
    path = tmp_path / "trace.csv"
    text = trace_to_csv(r, path)
    assert path.read_text() == text
    lines = text.splitlines()
    assert lines[0] == "n,value" and lines[1] == "1,0.5"
    assert len(lines) == len(r.trace) + 1
