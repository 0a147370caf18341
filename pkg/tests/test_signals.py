from fractions import Fraction as F
import random

import pytest

from privext.core import Budget, InvariantViolation, NotMember, Posterior, Prior, PrivextError, StateSpace, complete_graph, cycle_graph
from privext.diffpriv import differential_graph
from privext.oracle import vertex_enumeration
from privext.signals import (
    InfeasibleDecomposition,
    NotBayesPlausible,
    NotPrivacyPreserving,
    Signal,
    _phase_one,
    bayes_plausible,
    decompose_into_extremes,
    is_frontier,
    is_privacy_preserving,
)

T2 = Budget(F(2))
K2 = complete_graph(StateSpace.of_size(2))
U2 = Prior.uniform(2)


def post(*xs):
    return Posterior(tuple(F(x) for x in xs))


HI, LO = post("2/3", "1/3"), post("1/3", "2/3")
SPLIT = Signal((HI, LO), (F(1, 2), F(1, 2)))


def test_signal_validation():
    with pytest.raises(PrivextError):
        Signal((HI, LO), (F(1), F(0)))
    with pytest.raises(PrivextError):
        Signal((HI, LO), (F(1, 2), F(1, 3)))
    with pytest.raises(PrivextError):
        Signal((HI, HI), (F(1, 2), F(1, 2)))
    with pytest.raises(PrivextError):
        Signal((HI,), (F(1, 2), F(1, 2)))
    assert Signal(((F(1, 2), F(1, 2)),), ("1",)).support == (post("1/2", "1/2"),)


def test_bayes_plausible_examples():
    assert bayes_plausible(Signal.degenerate(U2), U2)
    assert bayes_plausible(SPLIT, U2)
    assert not bayes_plausible(Signal((HI,), (F(1),)), U2)


def test_privacy_preserving_examples():
    assert is_privacy_preserving(Signal.degenerate(U2), K2, U2, T2)
    full = Signal((post(1, 0), post(0, 1)), (F(1, 2), F(1, 2)))
    assert not is_privacy_preserving(full, K2, U2, T2)
    assert is_privacy_preserving(SPLIT, K2, U2, T2)
    with pytest.raises(NotBayesPlausible):
        is_privacy_preserving(Signal((HI,), (F(1),)), K2, U2, T2)


def test_frontier_examples():
    assert is_frontier(SPLIT, K2, U2, T2)
    assert not is_frontier(Signal.degenerate(U2), K2, U2, T2)
    mix = Signal((HI, post("1/2", "1/2"), LO), (F(1, 4), F(1, 2), F(1, 4)))
    assert not is_frontier(mix, K2, U2, T2)
    full = Signal((post(1, 0), post(0, 1)), (F(1, 2), F(1, 2)))
    with pytest.raises(NotPrivacyPreserving):
        is_frontier(full, K2, U2, T2)
    assert is_frontier(Signal.degenerate(U2), K2, U2, Budget(1))


def test_decompose_examples():
    assert decompose_into_extremes(HI, K2, U2, T2) == Signal((HI,), (F(1),))
    s = decompose_into_extremes(post("1/2", "1/2"), K2, U2, T2)
    assert s == Signal((LO, HI), (F(1, 2), F(1, 2)))
    s = decompose_into_extremes(post("3/5", "2/5"), K2, U2, T2)
    assert dict(zip(s.support, s.weights)) == {HI: F(4, 5), LO: F(1, 5)}


def test_decompose_rejects_infeasible():
    with pytest.raises(NotMember):
        decompose_into_extremes(post("3/4", "1/4"), K2, U2, T2)


def test_decompose_degenerate_budget():
    assert decompose_into_extremes(post("1/2", "1/2"), K2, U2, Budget(1)) == Signal.degenerate(U2)


def test_decompose_prior_on_grid_is_frontier():
    g, pr = differential_graph([2, 3]), Prior.uniform(6)
    s = decompose_into_extremes(Posterior(pr.probs), g, pr, T2)
    assert len(s) <= 6
    assert bayes_plausible(s, pr) and is_frontier(s, g, pr, T2)


def test_decompose_random_mixtures_exact():
    g = cycle_graph(StateSpace.of_size(5))
    pr = Prior((F(1, 15), F(2, 15), F(3, 15), F(4, 15), F(5, 15)))
    b = Budget(F(3, 2))
    verts = sorted(vertex_enumeration(g, pr, b))
    rng = random.Random(5)
    for _ in range(25):
        pts = rng.sample(verts, rng.randint(1, 7))
        w = [rng.randint(1, 5) for _ in pts]
        mu = Posterior(tuple(sum(F(wi, sum(w)) * p[i] for wi, p in zip(w, pts)) for i in range(5)))
        s = decompose_into_extremes(mu, g, pr, b, verts)
        assert s.barycenter() == mu.probs and len(s) <= 5
        assert set(s.support) <= set(verts)


def test_phase_one_infeasible_and_exact():
    cols = [(F(1), F(0)), (F(0), F(1))]
    assert _phase_one(cols, (F(1, 3), F(2, 3))) == [F(1, 3), F(2, 3)]
    assert _phase_one([(F(1), F(0))], (F(0), F(1))) is None


def test_infeasible_decomposition_is_an_invariant_violation():
    assert issubclass(InfeasibleDecomposition, InvariantViolation)
    # A vertex list missing one side cannot reach the prior.
    with pytest.raises(InfeasibleDecomposition):
        decompose_into_extremes(post("1/2", "1/2"), K2, U2, T2, vertices=[HI])
