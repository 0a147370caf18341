from fractions import Fraction as F

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from privext.core import (
    Budget,
    Posterior,
    Prior,
    StateSpace,
    build_graph,
    integer_weight_matrix,
    is_extreme,
    is_member,
    posterior_from_tree_weights,
    ratio_quotient,
)
from privext.oracle import exhaustive_semichain_scan, vertex_enumeration
from privext.semichain import (
    SemiChain,
    downward_fold,
    enumerate_all_semichains,
    enumerate_extreme_posteriors,
    enumerate_spanning_trees,
    enumerate_two_semichains,
    is_strongly_connected,
    posterior_from_chain,
    reverse,
    upward_fold,
    validate_semichain,
)
from privext.signals import Signal, bayes_plausible, decompose_into_extremes, is_frontier, is_privacy_preserving

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def graphs(draw, min_n=2, max_n=6):
    n = draw(st.integers(min_n, max_n))
    edges = {(draw(st.integers(0, i - 1)), i) for i in range(1, n)}
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    edges |= set(draw(st.lists(st.sampled_from(pairs), max_size=len(pairs))))
    return build_graph(StateSpace.of_size(n), edges)


@st.composite
def priors(draw, n):
    w = draw(st.lists(st.integers(1, 9), min_size=n, max_size=n))
    return Prior(tuple(F(x, sum(w)) for x in w))


budgets = st.builds(lambda p, q: Budget(1 + F(p, q)), st.integers(1, 5), st.integers(1, 4))


@st.composite
def instances(draw, max_n=6):
    g = draw(graphs(max_n=max_n))
    return g, draw(priors(g.n)), draw(budgets)


@st.composite
def ordered_partitions(draw, n, min_levels=2):
    levels = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    used = sorted(set(levels))
    if len(used) < min_levels:
        levels = list(range(min_levels)) + levels[min_levels:]
        used = sorted(set(levels))
    rank = {lv: k for k, lv in enumerate(used)}
    groups = [[] for _ in used]
    for s, lv in enumerate(levels):
        groups[rank[lv]].append(s)
    return SemiChain(tuple(tuple(grp) for grp in groups))


@SETTINGS
@given(instances())
def test_prior_is_always_member(inst):
    g, pr, b = inst
    assert is_member(Posterior(pr.probs), pr, g, b)


@SETTINGS
@given(graphs(), st.data())
def test_degenerate_budget_membership_is_prior_only(g, data):
    pr = data.draw(priors(g.n))
    w = data.draw(st.lists(st.integers(1, 9), min_size=g.n, max_size=g.n))
    mu = Posterior(tuple(F(x, sum(w)) for x in w))
    assert is_member(mu, pr, g, Budget(1)) == (mu.probs == pr.probs)


@SETTINGS
@given(instances(), st.data())
def test_tree_weights_reproduce_quotients(inst, data):
    g, pr, b = inst
    tree = next(enumerate_spanning_trees(g))
    signs = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(tree.edges), max_size=len(tree.edges)))
    mu = posterior_from_tree_weights(g, [(i, j, w) for (i, j), w in zip(tree.edges, signs)], pr, b)
    for (i, j), w in zip(tree.edges, signs):
        assert ratio_quotient(mu, pr, i, j) == b.t**w
    wm = integer_weight_matrix(mu, pr, b)
    assert wm is not None and wm.is_antisymmetric() and wm.is_path_additive()


@SETTINGS
@given(instances(max_n=5))
def test_extreme_posteriors_have_unit_edge_weights(inst):
    g, pr, b = inst
    for p in enumerate_extreme_posteriors(g, pr, b):
        assert is_member(p.posterior, pr, g, b) and is_extreme(p.posterior, pr, g, b)
        wm = integer_weight_matrix(p.posterior, pr, b)
        assert wm is not None
        assert all(wm[i, j] in (-1, 0, 1) for i, j in g.edges)


@SETTINGS
@given(graphs(min_n=3), st.data())
def test_folds_preserve_strong_connectivity(g, data):
    c = data.draw(ordered_partitions(g.n, min_levels=3))
    assert reverse(reverse(c)) == c
    assert upward_fold(reverse(c)) == reverse(downward_fold(c))
    if validate_semichain(c, g):
        d = downward_fold(c)
        assert validate_semichain(d, g)
        assert is_strongly_connected(c, g) == is_strongly_connected(d, g)


@SETTINGS
@given(graphs())
def test_tree_and_scan_strategies_agree(g):
    assert enumerate_two_semichains(g, "trees") == enumerate_two_semichains(g, "scan")


@SETTINGS
@given(graphs())
def test_closure_equals_exhaustive_scan(g):
    chains = enumerate_all_semichains(g, "scan")
    assert len(chains) == len(set(chains))
    assert set(chains) == exhaustive_semichain_scan(g)
    assert {reverse(c) for c in chains} == set(chains)


@SETTINGS
@given(instances(max_n=5))
def test_chain_posteriors_are_the_oracle_vertices(inst):
    g, pr, b = inst
    images = [posterior_from_chain(c, pr, b) for c in enumerate_all_semichains(g, "scan")]
    assert len(images) == len(set(images))
    assert set(images) == vertex_enumeration(g, pr, b)


@SETTINGS
@given(instances(max_n=5), st.data())
def test_random_mixtures_decompose_exactly(inst, data):
    g, pr, b = inst
    verts = sorted(vertex_enumeration(g, pr, b))
    pts = data.draw(st.lists(st.sampled_from(verts), min_size=1, max_size=g.n + 2, unique=True))
    w = data.draw(st.lists(st.integers(1, 9), min_size=len(pts), max_size=len(pts)))
    mu = Posterior(tuple(sum(F(wi, sum(w)) * p[i] for wi, p in zip(w, pts)) for i in range(g.n)))
    s = decompose_into_extremes(mu, g, pr, b, verts)
    assert s.barycenter() == mu.probs and len(s) <= g.n
    # Read with mu as the prior: the signal is Bayes plausible for it.
    assert bayes_plausible(s, Prior(mu.probs))
    assert all(is_extreme(q, pr, g, b) for q in s.support)


@SETTINGS
@given(instances(max_n=5))
def test_frontier_implies_privacy_preserving(inst):
    g, pr, b = inst
    s = decompose_into_extremes(Posterior(pr.probs), g, pr, b)
    assert is_frontier(s, g, pr, b) and is_privacy_preserving(s, g, pr, b)
    assert isinstance(s, Signal)
