import json

import pytest
from hypothesis import given, strategies as st

from qlayout.program import (
    ProgramError,
    dependencies,
    depth_lower_bound,
    load_program,
    longest_chain,
    make_program,
    parse_program,
    program_from_dict,
    repeated_pairs,
)


def test_fixture_round_trip(fixtures):
    p = load_program(fixtures / "a2a5.json")
    assert p.qubit_count == 5 and p.gate_count == 10
    assert len(p.commuting_groups) == 1
    assert program_from_dict(json.loads(json.dumps(p.to_dict()))) == p


def test_commuting_gates_only_need_distinct_times(triangle):
    d = dependencies(triangle)
    assert d.precedence == frozenset() or not d.precedence
    assert set(d.distinct_time) == {(0, 1), (0, 2), (1, 2)}


def test_sequential_gates_get_precedence():
    p = make_program(3, [(0, 1), (1, 2), (0, 2)])
    d = dependencies(p)
    assert set(d.precedence) == {(0, 1), (0, 2), (1, 2)}
    assert not d.distinct_time
    assert longest_chain(d, 3) == 3


def test_disjoint_gates_are_independent():
    d = dependencies(make_program(4, [(0, 1), (2, 3)]))
    assert not d.precedence and not d.distinct_time


def test_lower_bound_counts_gates_per_qubit(a2a5):
    # each qubit is in 4 gates, so at least 4 steps
    assert depth_lower_bound(dependencies(a2a5), a2a5) == 4


def test_single_qubit_gate_rejected():
    with pytest.raises(ProgramError, match="single-qubit"):
        parse_program('{"qubits": 2, "gates": [{"q": [0]}]}')


@pytest.mark.parametrize(
    "text, msg",
    [
        ("not json", "JSON"),
        ('{"gates": []}', "qubits"),
        ('{"qubits": 2, "gates": [{"q": [0, 0]}]}', "distinct"),
        ('{"qubits": 2, "gates": [{"q": [0, 5]}]}', "range"),
        ('{"qubits": 2, "gates": [{"q": [0, 1, 2]}]}', "two operands"),
    ],
)
def test_malformed_programs(text, msg):
    with pytest.raises(ProgramError, match=msg):
        parse_program(text)


def test_groups_must_be_contiguous():
    with pytest.raises(ProgramError):
        make_program(3, [(0, 1), (1, 2), (0, 2)], [[0, 2], [1]])


def test_repeated_pairs():
    assert repeated_pairs(make_program(2, [(0, 1), (1, 0)]))
    assert not repeated_pairs(make_program(3, [(0, 1), (1, 2)]))


def test_reversed_mirrors_order():
    p = make_program(3, [(0, 1), (1, 2), (0, 2)], [[0], [1, 2]])
    r = p.reversed()
    assert r.pairs() == [(0, 2), (1, 2), (0, 1)]
    assert r.commuting_groups == ((0, 1), (2,))
    assert r.reversed() == p


@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(lambda x: x[0] != x[1]), min_size=1, max_size=8))
def test_precedence_respects_source_order(pairs):
    p = make_program(4, pairs)
    d = dependencies(p)
    for a, b in d.precedence:
        assert a < b
        assert set(pairs[a]) & set(pairs[b])
    assert depth_lower_bound(d, p) >= 1
