import pytest

from privext.core import InvariantViolation, PrivextError, StateSpace, complete_graph
from privext.diffpriv import (
    DimensionSpec,
    DivisionPattern,
    DivisionSequence,
    LengthMismatch,
    binary_two_chain,
    construct_k_plus_1_chain,
    differential_graph,
    division_patterns,
    division_two_semichains,
    enumerate_division_sequences,
    expand_sequences_to_chains,
    legacy_rules_discrepancy,
    lift_binary_chain,
    max_level,
)
from privext.semichain import (
    SemiChain,
    enumerate_all_semichains,
    enumerate_two_semichains,
    is_strongly_connected,
    reverse,
    validate_semichain,
    within_level_edges,
)

C = SemiChain.of


def fs(*xs):
    return frozenset(xs)


def test_dimension_spec():
    d = DimensionSpec((2, 3))
    assert d.K == 2
    assert d.tuples()[:4] == [(0, 0), (0, 1), (0, 2), (1, 0)]
    assert d.index((1, 2)) == 5
    assert d.label((1, 2)) == "12"
    assert DimensionSpec((11, 2)).label((10, 1)) == "10,1"
    with pytest.raises(PrivextError):
        DimensionSpec((1, 2))
    with pytest.raises(PrivextError):
        DimensionSpec(())


def test_differential_graph_examples():
    g = differential_graph([2, 2])
    assert g.states.labels == ("00", "01", "10", "11")
    assert g.edges == ((0, 1), (0, 2), (1, 3), (2, 3))
    cube = differential_graph([2, 2, 2])
    assert (cube.n, len(cube.edges)) == (8, 12)
    assert differential_graph([3]).edges == complete_graph(StateSpace.of_size(3)).edges


@pytest.mark.parametrize("dims,level", [([2, 2], 3), ([3, 3, 3], 4), ([2], 2)])
def test_max_level(dims, level):
    assert max_level(dims) == level


def test_construct_k_plus_1_chain_examples():
    assert construct_k_plus_1_chain([2]) == C((0,), (1,))
    assert construct_k_plus_1_chain([2, 2]) == C((0,), (1, 2), (3,))
    # 3x3: the copy with last coordinate 0 keeps ({00},{10,20}); the others move up.
    assert construct_k_plus_1_chain([3, 3]) == C((0,), (1, 2, 3, 6), (4, 5, 7, 8))


@pytest.mark.parametrize("dims", [[2], [3], [2, 2], [3, 2], [2, 3], [3, 3], [2, 2, 2], [4, 3], [2, 2, 2, 2], [3, 2, 2]])
def test_constructed_chain_is_strongly_connected(dims):
    g = differential_graph(dims)
    c = construct_k_plus_1_chain(dims)
    assert c.L == len(dims) + 1
    assert validate_semichain(c, g) and is_strongly_connected(c, g)


def test_binary_two_chain_examples():
    assert binary_two_chain(1) == C((0,), (1,))
    assert binary_two_chain(2) == C((0, 3), (1, 2))
    assert binary_two_chain(3) == C((0, 3, 5, 6), (1, 2, 4, 7))
    with pytest.raises(PrivextError):
        binary_two_chain(0)


@pytest.mark.parametrize("K", [1, 2, 3, 4])
def test_binary_two_chain_has_no_within_level_edges(K):
    g = differential_graph([2] * K)
    assert within_level_edges(binary_two_chain(K), g) == []


@pytest.mark.parametrize("K", [2, 3, 4, 5])
def test_lift_binary_chain(K):
    lifted = lift_binary_chain(binary_two_chain(K - 1), K)
    assert lifted in {binary_two_chain(K), reverse(binary_two_chain(K))}


def test_division_patterns_examples():
    pats = division_patterns(2)
    assert pats == [
        DivisionPattern(fs(0), fs(1)),
        DivisionPattern(fs(1), fs(0)),
        DivisionPattern(fs(0, 1), fs()),
        DivisionPattern(fs(), fs(0, 1)),
    ]
    assert repr(pats[0]) == "({1}, {2})"
    assert repr(pats[3]) == "(∅, {1,2})"
    assert len(division_patterns(3)) == 8
    for n2 in (2, 3, 4):
        assert sum(p.divided for p in division_patterns(n2)) == 2**n2 - 2


def test_division_sequences_two_by_two():
    seqs = enumerate_division_sequences(2, 2)
    assert [(s.codes, s.category) for s in seqs] == [((1, 2), "I")]


def test_division_sequences_three_by_two_frozen():
    seqs = enumerate_division_sequences(3, 2)
    assert [(s.codes, s.category) for s in seqs] == [
        ((1, 3, 4), "III"),
        ((1, 1, 2), "I"),
        ((1, 2, 3), "II"),
        ((1, 2, 4), "II"),
        ((1, 2, 2), "I"),
        ((2, 3, 4), "III"),
    ]


@pytest.mark.parametrize("n1", [2, 3, 4])
@pytest.mark.parametrize("n2", [2, 3])
def test_division_sequences_are_distinct_and_increasing(n1, n2):
    seqs = enumerate_division_sequences(n1, n2)
    codes = [s.codes for s in seqs]
    assert len(codes) == len(set(codes))
    assert all(list(c) == sorted(c) and len(c) == n1 for c in codes)


def test_expand_sequences_examples():
    assert len(expand_sequences_to_chains([DivisionSequence((1, 2))], 2, 2)) == 2
    assert len(expand_sequences_to_chains([DivisionSequence((1, 1, 2))], 3, 2)) == 3
    with pytest.raises(LengthMismatch):
        expand_sequences_to_chains([DivisionSequence((1, 2))], 3, 2)
    with pytest.raises(InvariantViolation):
        expand_sequences_to_chains([DivisionSequence((1, 2)), DivisionSequence((1, 2))], 2, 2)


@pytest.mark.parametrize("n1,n2", [(2, 2), (3, 2), (2, 3), (4, 2), (3, 3), (4, 3)])
def test_division_pipeline_matches_scan(n1, n2):
    truth = enumerate_two_semichains(differential_graph([n1, n2]), "scan")
    assert division_two_semichains(n1, n2) == truth


def test_legacy_rules_report_duplicates_and_side_errors():
    d = legacy_rules_discrepancy(3, 2)
    assert d.duplicates == [(1, 1, 2), (1, 2, 2)]
    assert not d.invalid and not d.missing and not d.clean
    d33 = legacy_rules_discrepancy(3, 3)
    assert (len(d33.duplicates), len(d33.invalid), len(d33.missing)) == (38, 36, 36)


@pytest.mark.parametrize("dims", [[2, 2], [2, 3], [3, 2], [3, 3], [2, 2, 2]])
def test_level_bound(dims):
    chains = enumerate_all_semichains(differential_graph(dims), "scan")
    assert max(c.L for c in chains) == len(dims) + 1
    assert construct_k_plus_1_chain(dims) in chains
