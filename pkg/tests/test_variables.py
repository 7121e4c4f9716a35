import json
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gameexp.errors import ContractError, ParseError
from gameexp.extreal import INF, NEG_INF
from gameexp.variables import (
    FinitaryVariable,
    HitIndicator,
    MissIndicator,
    TruncatedHittingTime,
    VariableSequenceSpec,
    apply_cut,
    evaluate_finitary,
    generate_term,
    hit_spec,
    hitting_time_spec,
    lower_cut_spec,
    miss_spec,
    pad_to_n_measurable,
    parse_variable,
    table_spec,
)

AB = ("a", "b")
BIN = ("0", "1")


def first_hit(path, target):
    """Brute-force oracle: 1-based index of the first target label, else None."""
    for i, x in enumerate(path, start=1):
        if x in target:
            return i
    return None


def test_evaluate_examples():
    assert evaluate_finitary(FinitaryVariable.constant(BIN, 3), ("1", "0")) == 3
    f = FinitaryVariable.from_function(BIN, 2, lambda t: 5 if t == ("0", "1") else 0)
    assert evaluate_finitary(f, ("0", "1", "0")) == 5
    assert evaluate_finitary(generate_term(hit_spec(AB, "a"), 2), ("b", "a")) == 1
    with pytest.raises(ContractError):
        evaluate_finitary(f, ("0",))


def test_generate_examples():
    h = generate_term(hit_spec(AB, {"a"}), 1)
    assert h.tabulate().table == {("a",): 1.0, ("b",): 0.0}
    assert generate_term(miss_spec(AB, {"a"}), 2).value(("b", "b")) == 1
    assert generate_term(hitting_time_spec(AB, {"a"}), 2).value(("b", "a")) == 2
    assert generate_term(hitting_time_spec(AB, {"a"}), 2).value(("b", "b")) == 3
    with pytest.raises(ContractError):
        generate_term(hit_spec(AB, {"a"}), 0)
    with pytest.raises(ContractError):
        VariableSequenceSpec("bogus", AB)
    with pytest.raises(ContractError):
        hit_spec(AB, {"c"})


@pytest.mark.parametrize("n", range(1, 6))
def test_hitting_terms_against_brute_force(n):
    target = {"a"}
    for path in product(AB, repeat=n + 1):
        hit = first_hit(path[:n], target)
        h = generate_term(hit_spec(AB, target), n).value(path)
        m = generate_term(miss_spec(AB, target), n).value(path)
        tau = generate_term(hitting_time_spec(AB, target), n).value(path)
        assert h == (hit is not None)
        assert h + m == 1
        assert tau == (hit if hit is not None else n + 1)
        assert 1 <= tau <= n + 1
        if n > 1:
            assert h >= generate_term(hit_spec(AB, target), n - 1).value(path)
            assert m <= generate_term(miss_spec(AB, target), n - 1).value(path)
            assert tau >= generate_term(hitting_time_spec(AB, target), n - 1).value(path)


def test_offset_counts_strictly_after_situation():
    h = generate_term(hit_spec(AB, {"a"}), 2, offset=1)
    assert h.depth == 3
    assert h.value(("a", "b", "b")) == 0  # the label inside s does not count
    assert h.value(("b", "b", "a")) == 1
    t = TruncatedHittingTime(AB, {"a"}, 2, offset=1)
    assert t.value(("a", "b", "a")) == 2


def test_keys_and_constancy():
    h = HitIndicator(AB, frozenset({"a"}), 4)
    assert h.key(("a", "b")) == h.key(("a", "a")) == 1
    assert h.key(("b", "a")) == 2
    assert h.key(("b", "b")) is None
    assert h.constant_on(("b", "a")) == 1.0
    assert h.constant_on(("b", "b")) is None
    assert MissIndicator(AB, frozenset({"a"}), 4).constant_on(("a",)) == 0.0
    assert TruncatedHittingTime(AB, frozenset({"a"}), 4).constant_on(("b", "a")) == 2.0
    assert h.negated().constant_on(("a",)) == -1.0


def test_apply_cut_examples():
    f = FinitaryVariable(BIN, 1, [NEG_INF, 2.0])
    assert list(apply_cut(f, 0, "lower").values()) == [0.0, 2.0]
    g = FinitaryVariable(BIN, 1, [5.0, INF])
    assert list(apply_cut(g, 3, "upper").values()) == [3.0, 3.0]
    with pytest.raises(ContractError):
        apply_cut(f, 0, "middle")


values = st.one_of(st.floats(-20, 20), st.just(INF), st.just(NEG_INF))


@given(st.lists(values, min_size=4, max_size=4), st.floats(-10, 10), st.floats(0, 10))
def test_cuts_commute_when_ordered(vals, c1, gap):
    c2 = c1 + gap
    f = FinitaryVariable(BIN, 2, vals)
    a = apply_cut(apply_cut(f, c1, "lower"), c2, "upper")
    b = apply_cut(apply_cut(f, c2, "upper"), c1, "lower")
    assert list(a.values()) == list(b.values())


def test_padding_examples():
    consts = [FinitaryVariable.constant(BIN, c) for c in (1.0, 2.0, 3.0)]
    out = pad_to_n_measurable(consts, 0.0)
    assert [next(iter(v.values())) for v in out] == [0.0, 1.0, 2.0, 3.0]

    g0 = FinitaryVariable.constant(BIN, 1.0)
    g1 = FinitaryVariable.from_function(BIN, 3, lambda t: float(t.count("1")))
    out = pad_to_n_measurable([g0, g1], 0.0)
    assert out[1] is g0 and out[2] is g0 and out[3] is g1
    for k, v in enumerate(out):
        assert v.depth <= k


def test_padding_keeps_monotonicity():
    seq = [FinitaryVariable.from_function(BIN, d, lambda t, d=d: float(d + t.count("1")))
           for d in (2, 2, 3)]
    out = pad_to_n_measurable(seq, -1.0)
    depth = max(v.depth for v in out)
    for prev, nxt in zip(out, out[1:]):
        for path in product(BIN, repeat=depth):
            assert prev.value(path) <= nxt.value(path)
    # input is a subsequence of the output
    it = iter(out)
    assert all(any(x is y for y in it) for x in seq)


@given(st.lists(st.integers(0, 4), min_size=1, max_size=6))
def test_padding_output_is_measurable(depths):
    seq = [FinitaryVariable.constant(BIN, float(i), d) for i, d in enumerate(depths)]
    out = pad_to_n_measurable(seq, 0.0)
    assert all(v.depth <= k for k, v in enumerate(out))
    it = iter(out)
    assert all(any(x is y for y in it) for x in seq)


def test_sequence_kinds():
    f = FinitaryVariable(BIN, 1, [NEG_INF, 1.0])
    spec = lower_cut_spec(f, [-1, -10])
    assert list(generate_term(spec, 2).values()) == [-10.0, 1.0]
    assert spec.length == 2
    tables = table_spec(BIN, [FinitaryVariable.constant(BIN, 1.0)])
    assert next(iter(generate_term(tables, 5).values())) == 1.0
    fn = table_spec(BIN, lambda n: FinitaryVariable.constant(BIN, float(n)))
    assert next(iter(generate_term(fn, 7).values())) == 7.0
    with pytest.raises(ContractError):
        lower_cut_spec(f, [-1, 0])


def test_json():
    f = FinitaryVariable(AB, 2, [1.5, 0, "inf", "-inf"])
    doc = f.to_json()
    assert doc["table"]["a,b"] == 0
    assert parse_variable(json.dumps(doc), AB) == f
    spec = parse_variable({"kind": "hit", "target": ["a"]}, AB)
    assert isinstance(spec, VariableSequenceSpec) and spec.kind == "hit"
    term = parse_variable({"kind": "hitting_time", "target": ["a"], "n": 3}, AB)
    assert term.depth == 3
    with pytest.raises(ParseError) as err:
        parse_variable({"kind": "finitary", "depth": 1, "table": {"a": 1}}, AB)
    assert "misses" in str(err.value)
    with pytest.raises(ParseError):
        parse_variable({"kind": "hit", "target": ["z"]}, AB)
    with pytest.raises(ParseError):
        parse_variable({"kind": "finitary", "depth": 1, "table": {"a": 1, "b": "x"}}, AB)


def test_table_validation():
    with pytest.raises(ContractError):
        FinitaryVariable(BIN, 2, [1, 2, 3])
    with pytest.raises(ContractError):
        FinitaryVariable.from_table(BIN, 1, {("0",): 1})
    f = FinitaryVariable(BIN, 1, [NEG_INF, 1.0])
    assert not f.bounded_below and f.bounded_above
    assert f.extend(3).value(("1", "0", "0")) == 1.0
