"""Brute-force ground truth, independent of the semi-chain machinery.

``vertex_enumeration`` finds the vertices of the feasible polytope from its
inequality description alone: choose J-1 edge inequalities to hold with
equality, add ``sum(mu) = 1``, solve, keep feasible unique solutions.
``exhaustive_semichain_scan`` tries every level assignment of the states.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

from .core import (
    Budget,
    Graph,
    InvariantViolation,
    Posterior,
    Prior,
    PrivextError,
)
from .linalg import solve_unique
from .semichain import (
    SemiChain,
    enumerate_extreme_posteriors,
    find_collisions,
    is_strongly_connected,
    validate_semichain,
)

DEFAULT_VERTEX_CAP = 8
DEFAULT_SCAN_CAP = 9


class InstanceTooLarge(PrivextError):
    pass


@dataclass(frozen=True)
class Inequality:
    """``mu[hi] * prior[lo] <= t * mu[lo] * prior[hi]`` for the edge {lo, hi}.

    ``hi`` is the state whose scaled mass may exceed the other's by at most t.
    """

    hi: int
    lo: int

    def row(self, prior: Prior, t: Fraction, n: int) -> list[Fraction]:
        r = [Fraction(0)] * n
        r[self.hi] += prior[self.lo]
        r[self.lo] -= t * prior[self.hi]
        return r


@dataclass(frozen=True)
class HRep:
    inequalities: tuple[Inequality, ...]
    rows: tuple[tuple[Fraction, ...], ...]
    n: int

    def slack(self, k: int, mu) -> Fraction:
        """Nonnegative iff inequality k holds; zero iff it binds."""
        return -sum(a * x for a, x in zip(self.rows[k], mu))


def h_representation(g: Graph, prior: Prior, b: Budget) -> HRep:
    ineqs = []
    for i, j in g.edges:
        ineqs.append(Inequality(j, i))
        ineqs.append(Inequality(i, j))
    rows = tuple(tuple(q.row(prior, b.t, g.n)) for q in ineqs)
    return HRep(tuple(ineqs), rows, g.n)


def _solve_binding(h: HRep, chosen) -> list[Fraction] | None:
    a = [list(h.rows[k]) for k in chosen] + [[Fraction(1)] * h.n]
    rhs = [Fraction(0)] * len(chosen) + [Fraction(1)]
    return solve_unique(a, rhs)


def _accept(h: HRep, mu) -> bool:
    return mu is not None and all(x > 0 for x in mu) and all(h.slack(k, mu) >= 0 for k in range(len(h.rows)))


def _check_instance(g: Graph, prior: Prior, b: Budget, cap: int) -> None:
    if len(prior) != g.n:
        raise PrivextError("prior and graph dimensions differ")
    if g.n > cap:
        raise InstanceTooLarge(f"{g.n} states exceeds the oracle cap of {cap}")


def _vertices_literal(h: HRep) -> set[Posterior]:
    out = set()
    for chosen in itertools.combinations(range(len(h.rows)), h.n - 1):
        mu = _solve_binding(h, chosen)
        if _accept(h, mu):
            out.add(Posterior(tuple(mu)))
    return out


def _vertices_pruned(h: HRep) -> set[Posterior]:
    """Same vertex set as the literal search, visiting each vertex once.

    Inequalities are scanned in order; a vertex is reported only for its
    greedy basis (each binding inequality taken iff independent of those
    already taken). A branch is cut when a fixed ratio breaks an inequality,
    when a skipped inequality that was independent turns out binding, or when
    the inequalities left cannot join the remaining components. Requires t > 1.

    The chosen rows are kept in eliminated form: every binding row reads
    x[hi] = t * x[lo] for scaled masses x = mu/prior, so each state stores its
    component root and the exponent e with x[v] = t**e * x[root].
    """
    n = h.n
    ineqs = [(q.hi, q.lo) for q in h.inequalities]
    out: set[Posterior] = set()

    def spannable(root: list[int], k: int) -> bool:
        parent = {r: r for r in root}
        count = len(parent)
        if count == 1:
            return True
        for a, b in ineqs[k:]:
            a, b = root[a], root[b]
            while parent[a] != a:
                a = parent[a]
            while parent[b] != b:
                b = parent[b]
            if a != b:
                parent[a] = b
                count -= 1
                if count == 1:
                    return True
        return False

    def rec(k, chosen, root, expo, skipped):
        if len(chosen) == n - 1:
            mu = _solve_binding(h, chosen)
            if not _accept(h, mu):
                return
            point = Posterior(tuple(mu))
            if point in out:
                raise InvariantViolation(f"vertex {point} reached from two greedy bases")
            out.add(point)
            return
        if not spannable(root, k):
            return
        hi, lo = ineqs[k]
        if root[hi] == root[lo]:
            # Dependent row: never part of a greedy basis; it must just hold.
            if expo[hi] - expo[lo] <= 1:
                rec(k + 1, chosen, root, expo, skipped)
            return
        # Bind x[hi] = t * x[lo]: relabel hi's component onto lo's root.
        ra, rb = root[hi], root[lo]
        shift = 1 + expo[lo] - expo[hi]
        new_root, new_expo = list(root), list(expo)
        for v in range(n):
            if root[v] == ra:
                new_root[v] = rb
                new_expo[v] = expo[v] + shift
        ok = True
        for a, b in ineqs:
            if {root[a], root[b]} == {ra, rb} and new_expo[a] - new_expo[b] > 1:
                ok = False
                break
        if ok:
            for j in skipped:
                a, b = ineqs[j]
                if {root[a], root[b]} == {ra, rb} and new_expo[a] - new_expo[b] == 1:
                    ok = False
                    break
        if ok:
            rec(k + 1, chosen + (k,), new_root, new_expo, skipped)
        rec(k + 1, chosen, root, expo, skipped + (k,))

    rec(0, (), list(range(n)), [0] * n, ())
    return out


def vertex_enumeration(
    g: Graph,
    prior: Prior,
    b: Budget,
    cap: int = DEFAULT_VERTEX_CAP,
    method: str = "pruned",
) -> set[Posterior]:
    """All vertices of the feasible set.

    ``method="literal"`` solves every (J-1)-subset of inequalities;
    ``method="pruned"`` walks the same subsets depth-first and skips branches
    that cannot produce a new vertex. Both return identical sets.
    At ``t = 1`` the set is the single point ``prior``.
    """
    _check_instance(g, prior, b, cap)
    if b.degenerate:
        return {Posterior(prior.probs)}
    h = h_representation(g, prior, b)
    if method == "literal":
        return _vertices_literal(h)
    if method == "pruned":
        return _vertices_pruned(h)
    raise ValueError(f"unknown method {method!r}")


def _ordered_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Level vectors (0-based) whose used levels are exactly 0..L-1, L >= 2."""
    for levels in itertools.product(range(n), repeat=n):
        used = set(levels)
        if len(used) >= 2 and used == set(range(len(used))):
            yield levels


def _level_assignments(g: Graph) -> Iterator[tuple[int, ...]]:
    """Level vectors with adjacent states at most one level apart, min level 0."""
    n = g.n
    order = list(range(n))
    earlier = [[v for v in g.neighbors(u) if v < u] for u in order]
    levels = [0] * n

    def rec(u: int):
        if u == n:
            if min(levels) == 0 and max(levels) >= 1:
                yield tuple(levels)
            return
        for lvl in range(n):
            if all(abs(lvl - levels[v]) <= 1 for v in earlier[u]):
                levels[u] = lvl
                yield from rec(u + 1)

    yield from rec(0)


def exhaustive_semichain_scan(g: Graph, cap: int = DEFAULT_SCAN_CAP, pruned: bool = True) -> set[SemiChain]:
    """Every strongly connected semi-chain found by trying level assignments.

    ``pruned=False`` walks all ordered set partitions (feasible to about 7
    states); ``pruned=True`` discards an assignment as soon as an edge spans
    two or more levels. On a connected graph the used levels of a surviving
    assignment are contiguous, so both walks cover the same partitions.
    """
    if g.n > cap:
        raise InstanceTooLarge(f"{g.n} states exceeds the scan cap of {cap}")
    source = _level_assignments(g) if pruned else _ordered_partitions(g.n)
    out = set()
    for levels in source:
        L = max(levels) + 1
        groups = [[] for _ in range(L)]
        for s, lvl in enumerate(levels):
            groups[lvl].append(s)
        if any(not grp for grp in groups):
            continue
        chain = SemiChain(tuple(tuple(grp) for grp in groups))
        if validate_semichain(chain, g) and is_strongly_connected(chain, g):
            out.add(chain)
    return out


@dataclass
class CrossCheckReport:
    oracle_vertices: set[Posterior]
    chain_vertices: set[Posterior]
    missing_from_chains: set[Posterior] = field(default_factory=set)
    extra_in_chains: set[Posterior] = field(default_factory=set)
    chain_collisions: list[tuple[SemiChain, ...]] = field(default_factory=list)
    chain_count: int = 0

    @property
    def match(self) -> bool:
        return not (self.missing_from_chains or self.extra_in_chains or self.chain_collisions)

    def summary(self) -> str:
        if self.match:
            return f"MATCH, {len(self.oracle_vertices)} vertices"
        return (
            f"MISMATCH: {len(self.missing_from_chains)} missing, "
            f"{len(self.extra_in_chains)} extra, {len(self.chain_collisions)} collisions"
        )


def cross_check(
    g: Graph,
    prior: Prior,
    b: Budget,
    cap: int = DEFAULT_VERTEX_CAP,
    strategy: str = "trees",
) -> CrossCheckReport:
    """Compare the oracle's vertices with the semi-chain posteriors exactly."""
    oracle = vertex_enumeration(g, prior, b, cap)
    points = enumerate_extreme_posteriors(g, prior, b, strategy)
    chain_vertices = {p.posterior for p in points}
    collisions = [] if b.degenerate else find_collisions(points)
    return CrossCheckReport(
        oracle_vertices=oracle,
        chain_vertices=chain_vertices,
        missing_from_chains=oracle - chain_vertices,
        extra_in_chains=chain_vertices - oracle,
        chain_collisions=collisions,
        chain_count=len(points),
    )

