"""Semi-chains: validation, folding/unfolding, and enumeration.

A semi-chain is an ordered partition of the states into levels such that every
graph edge joins equal or adjacent levels. It is strongly connected when the
between-level edges alone connect every state. Strongly connected semi-chains
are in bijection with the extreme posteriors; each one is obtained from a
strongly connected 2-semi-chain by repeatedly splitting level 2 and moving one
part below level 1 (upward unfolding).
"""

from __future__ import annotations

import itertools
import logging
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .core import (
    Budget,
    Graph,
    InvariantViolation,
    Posterior,
    Prior,
    PrivextError,
    is_connected_on,
    posterior_from_potential,
)
from .linalg import det

log = logging.getLogger(__name__)


class StateSetMismatch(PrivextError):
    pass


class InvalidSemiChain(PrivextError):
    pass


class TooFewLevels(PrivextError):
    pass


@dataclass(frozen=True, order=True)
class SemiChain:
    """Ordered partition; ``levels[0]`` is level 1. Canonical: each level a sorted tuple."""

    levels: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        levels = tuple(tuple(sorted(int(s) for s in lvl)) for lvl in self.levels)
        if len(levels) < 2:
            raise InvalidSemiChain("a semi-chain has at least 2 levels")
        if any(not lvl for lvl in levels):
            raise InvalidSemiChain("levels must be nonempty")
        flat = [s for lvl in levels for s in lvl]
        if len(flat) != len(set(flat)):
            raise InvalidSemiChain("levels must be disjoint")
        object.__setattr__(self, "levels", levels)

    @classmethod
    def of(cls, *levels: Iterable[int]) -> "SemiChain":
        return cls(tuple(tuple(lvl) for lvl in levels))

    @property
    def L(self) -> int:
        return len(self.levels)

    @property
    def states(self) -> frozenset[int]:
        return frozenset(s for lvl in self.levels for s in lvl)

    def level_of(self) -> dict[int, int]:
        """State -> 1-based level number."""
        return {s: l + 1 for l, lvl in enumerate(self.levels) for s in lvl}

    def sort_key(self):
        return (self.L, self.levels)

    def __str__(self) -> str:
        return "(" + ", ".join("{" + ",".join(map(str, lvl)) + "}" for lvl in self.levels) + ")"


def _check_cover(c: SemiChain, g: Graph) -> dict[int, int]:
    if c.states != frozenset(range(g.n)):
        raise StateSetMismatch(f"chain covers {sorted(c.states)}, graph has {g.n} states")
    return c.level_of()


def validate_semichain(c: SemiChain, g: Graph) -> bool:
    lv = _check_cover(c, g)
    return all(abs(lv[i] - lv[j]) <= 1 for i, j in g.edges)


def between_level_edges(c: SemiChain, g: Graph) -> list[tuple[int, int]]:
    lv = c.level_of()
    return [(i, j) for i, j in g.edges if lv[i] != lv[j]]


def within_level_edges(c: SemiChain, g: Graph) -> list[tuple[int, int]]:
    lv = c.level_of()
    return [(i, j) for i, j in g.edges if lv[i] == lv[j]]


def is_strongly_connected(c: SemiChain, g: Graph) -> bool:
    if not validate_semichain(c, g):
        raise InvalidSemiChain(f"{c} is not a semi-chain of the graph")
    return is_connected_on(g.n, between_level_edges(c, g))


def posterior_from_chain(c: SemiChain, prior: Prior, b: Budget) -> Posterior:
    """``mu(s) ∝ t**level(s) * prior(s)``."""
    lv = c.level_of()
    if set(lv) != set(range(len(prior))):
        raise StateSetMismatch("chain and prior cover different states")
    return posterior_from_potential([lv[s] for s in range(len(prior))], prior, b)


def reverse(c: SemiChain) -> SemiChain:
    return SemiChain(c.levels[::-1])


def downward_fold(c: SemiChain) -> SemiChain:
    """(L2, L1 ∪ L3, L4, ...)."""
    if c.L < 3:
        raise TooFewLevels("folding needs at least 3 levels")
    lv = c.levels
    return SemiChain((lv[1], lv[0] + lv[2]) + lv[3:])


def upward_fold(c: SemiChain) -> SemiChain:
    """(L1, ..., L_{L-3}, L_{L-2} ∪ L_L, L_{L-1})."""
    if c.L < 3:
        raise TooFewLevels("folding needs at least 3 levels")
    lv = c.levels
    return SemiChain(lv[:-3] + (lv[-3] + lv[-1], lv[-2]))


def _components_within(nodes: Sequence[int], g: Graph) -> list[tuple[int, ...]]:
    pool = set(nodes)
    comps = []
    for s in sorted(pool):
        if s not in pool:
            continue
        comp, stack = [], [s]
        pool.discard(s)
        while stack:
            u = stack.pop()
            comp.append(u)
            for v in g.neighbors(u):
                if v in pool:
                    pool.discard(v)
                    stack.append(v)
        comps.append(tuple(sorted(comp)))
    return comps


def enumerate_upward_unfoldings(c: SemiChain, g: Graph) -> list[SemiChain]:
    """All (L+1)-chains (A, L1, L2 \\ A, L3, ...) with no edge from A to (L2 \\ A) ∪ L3.

    Such an ``A`` is a union of connected components of the subgraph induced
    on level 2 that avoid every neighbour of level 3.
    """
    if not validate_semichain(c, g):
        raise InvalidSemiChain(f"{c} is not a semi-chain of the graph")
    second = c.levels[1]
    third = set(c.levels[2]) if c.L >= 3 else set()
    eligible = [
        comp for comp in _components_within(second, g)
        if not any(v in third for u in comp for v in g.neighbors(u))
    ]
    out = []
    for r in range(1, len(eligible) + 1):
        for pick in itertools.combinations(eligible, r):
            low = tuple(sorted(s for comp in pick for s in comp))
            if len(low) == len(second):
                continue
            rest = tuple(s for s in second if s not in set(low))
            out.append((low, SemiChain((low, c.levels[0], rest) + c.levels[2:])))
    out.sort(key=lambda x: x[0])
    return [chain for _, chain in out]


@dataclass(frozen=True)
class SpanningTree:
    edges: tuple[tuple[int, int], ...]

    def adjacency(self, n: int) -> list[list[int]]:
        adj = [[] for _ in range(n)]
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj


def enumerate_spanning_trees(g: Graph) -> Iterator[SpanningTree]:
    """Each spanning tree exactly once, by include/exclude branching on edges.

    An edge is included only if it joins two different components of the
    partial forest, and excluded only if the edges still available keep the
    graph connected; every leaf of the search is therefore a distinct tree.
    """
    n, edges = g.n, list(g.edges)

    def find(parent, x):
        while parent[x] != x:
            x = parent[x]
        return x

    def rec(k, chosen, parent, excluded):
        if len(chosen) == n - 1:
            yield SpanningTree(tuple(chosen))
            return
        if k == len(edges):
            return
        i, j = edges[k]
        ri, rj = find(parent, i), find(parent, j)
        if ri != rj:
            p2 = list(parent)
            p2[ri] = rj
            yield from rec(k + 1, chosen + [(i, j)], p2, excluded)
        remaining = [e for idx, e in enumerate(edges) if idx != k and idx not in excluded]
        if is_connected_on(n, remaining):
            yield from rec(k + 1, chosen, parent, excluded | {k})

    yield from rec(0, [], list(range(n)), frozenset())


def spanning_tree_count(g: Graph) -> int:
    """Matrix-tree theorem: any cofactor of the Laplacian."""
    n = g.n
    lap = [[Fraction(0)] * n for _ in range(n)]
    for i, j in g.edges:
        lap[i][i] += 1
        lap[j][j] += 1
        lap[i][j] -= 1
        lap[j][i] -= 1
    minor = [row[1:] for row in lap[1:]]
    value = det(minor)
    assert value.denominator == 1
    return int(value)


def two_chains_from_spanning_tree(tree: SpanningTree, n: int | None = None) -> tuple[SemiChain, SemiChain]:
    """The tree's 2-colouring as an ordered 2-partition, and its reverse.

    The side containing the smallest state is placed on level 1.
    """
    if n is None:
        n = len(tree.edges) + 1
    adj = tree.adjacency(n)
    side = [-1] * n
    root = min(s for e in tree.edges for s in e) if tree.edges else 0
    side[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if side[v] < 0:
                side[v] = 1 - side[u]
                queue.append(v)
    if any(s < 0 for s in side):
        raise InvalidSemiChain("tree does not span all states")
    a = tuple(s for s in range(n) if side[s] == 0)
    b_ = tuple(s for s in range(n) if side[s] == 1)
    chain = SemiChain((a, b_))
    return chain, reverse(chain)


def _two_chains_by_trees(g: Graph) -> set[SemiChain]:
    out: set[SemiChain] = set()
    for tree in enumerate_spanning_trees(g):
        out.update(two_chains_from_spanning_tree(tree, g.n))
    return out


def _two_chains_by_scan(g: Graph) -> set[SemiChain]:
    # State n-1 is pinned to level 2 so each unordered bipartition is visited once.
    n = g.n
    out: set[SemiChain] = set()
    for mask in range(1, 2 ** (n - 1)):
        a = tuple(s for s in range(n - 1) if mask >> s & 1)
        b_ = tuple(s for s in range(n) if s not in set(a))
        chain = SemiChain((a, b_))
        if is_connected_on(n, between_level_edges(chain, g)):
            out.add(chain)
            out.add(reverse(chain))
    return out


def enumerate_two_semichains(g: Graph, strategy: str = "trees") -> set[SemiChain]:
    """All strongly connected 2-semi-chains.

    ``strategy`` is ``"trees"`` (bipartitions of spanning trees, deduplicated)
    or ``"scan"`` (every bipartition tested directly).
    """
    if strategy == "trees":
        return _two_chains_by_trees(g)
    if strategy == "scan":
        return _two_chains_by_scan(g)
    raise ValueError(f"unknown strategy {strategy!r}")


def unfolding_closure(g: Graph, seeds: Iterable[SemiChain], max_level: int | None = None) -> list[SemiChain]:
    """Breadth-first closure under upward unfolding, in canonical order per level.

    Raises InvariantViolation if any chain is produced twice: every chain has
    exactly one downward folding, so a repeat means a bug.
    """
    current = sorted(set(seeds))
    seen = set(current)
    result = list(current)
    while current and (max_level is None or current[0].L < max_level):
        nxt = []
        for parent in current:
            for child in enumerate_upward_unfoldings(parent, g):
                if child in seen:
                    raise InvariantViolation(f"unfolding produced {child} twice")
                if downward_fold(child) != parent:
                    raise InvariantViolation(f"{child} does not fold back to {parent}")
                seen.add(child)
                nxt.append(child)
        nxt.sort()
        result.extend(nxt)
        current = nxt
    return result


def enumerate_all_semichains(g: Graph, strategy: str = "trees", max_level: int | None = None) -> list[SemiChain]:
    """Every strongly connected semi-chain, ordered by (L, levels)."""
    return unfolding_closure(g, enumerate_two_semichains(g, strategy), max_level)


@dataclass(frozen=True)
class ExtremePoint:
    chain: SemiChain
    posterior: Posterior


def find_collisions(points: Sequence[ExtremePoint]) -> list[tuple[SemiChain, ...]]:
    by_mu: dict[Posterior, list[SemiChain]] = {}
    for p in points:
        by_mu.setdefault(p.posterior, []).append(p.chain)
    return [tuple(chains) for chains in by_mu.values() if len(chains) > 1]


def enumerate_extreme_posteriors(
    g: Graph,
    prior: Prior,
    b: Budget,
    strategy: str = "trees",
    max_level: int | None = None,
) -> list[ExtremePoint]:
    """(chain, posterior) for every strongly connected semi-chain.

    At ``t = 1`` the feasible set is the single point ``prior``; that point is
    returned alone, paired with no chain, and a warning is logged.
    """
    if len(prior) != g.n:
        raise StateSetMismatch("prior and graph dimensions differ")
    if b.degenerate:
        log.warning("t = 1: the feasible set is {prior}; returning the prior only")
        return [ExtremePoint(None, Posterior(prior.probs))]  # type: ignore[arg-type]
    chains = enumerate_all_semichains(g, strategy, max_level)
    points = [ExtremePoint(c, posterior_from_chain(c, prior, b)) for c in chains]
    for group in find_collisions(points):
        log.warning("distinct chains share one posterior: %s", ", ".join(map(str, group)))
    return points

