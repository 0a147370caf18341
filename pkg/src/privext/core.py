"""Exact numeric foundation: state spaces, privacy graphs, feasibility and
integer weight matrices.

Every probability and the budget ``t = e^eps`` is a :class:`fractions.Fraction`.
Log-ratios are never formed; edge constraints are handled as multiplicative
quotients whose exponents (in base ``t``) are integers at extreme points.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction


class PrivextError(Exception):
    """Base class for user-facing errors."""


class DisconnectedGraph(PrivextError):
    pass


class SelfLoop(PrivextError):
    pass


class IndexOutOfRange(PrivextError):
    pass


class DivideByZero(PrivextError):
    pass


class NotInteriorPosterior(PrivextError):
    pass


class DegenerateBudget(PrivextError):
    pass


class NotSpanningTree(PrivextError):
    pass


class NotMember(PrivextError):
    pass


class DimensionMismatch(PrivextError):
    pass


class InvariantViolation(AssertionError):
    """An internal guarantee was broken; indicates a bug, not bad input."""


_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def as_rational(value) -> Fraction:
    """Parse ints, Fractions and ``"p/q"`` strings. Floats are rejected."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        if not _RATIONAL.match(value.strip()):
            raise ValueError(f"{value!r} is not an integer or 'p/q' rational")
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


@dataclass(frozen=True)
class StateSpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        if len(labels) < 2:
            raise PrivextError("a state space needs at least 2 states")
        if len(set(labels)) != len(labels):
            raise PrivextError("state labels must be distinct")

    @classmethod
    def of_size(cls, n: int, prefix: str = "s") -> "StateSpace":
        return cls(tuple(f"{prefix}{i + 1}" for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class Graph:
    """Undirected connected privacy graph; edges are sorted pairs ``(i, j)``, i < j."""

    states: StateSpace
    edges: tuple[tuple[int, int], ...]
    _neighbors: tuple[frozenset[int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nbrs = [set() for _ in range(self.states.size)]
        for i, j in self.edges:
            nbrs[i].add(j)
            nbrs[j].add(i)
        object.__setattr__(self, "_neighbors", tuple(frozenset(s) for s in nbrs))

    @property
    def n(self) -> int:
        return self.states.size

    def neighbors(self, i: int) -> frozenset[int]:
        return self._neighbors[i]

    def has_edge(self, i: int, j: int) -> bool:
        return j in self._neighbors[i]

    def adjacency(self) -> list[list[int]]:
        a = [[0] * self.n for _ in range(self.n)]
        for i, j in self.edges:
            a[i][j] = a[j][i] = 1
        return a


def _components(n: int, edges: Iterable[tuple[int, int]]) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    count = n
    for i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            count -= 1
    return count


def is_connected_on(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    """True iff ``edges`` connect all ``n`` nodes."""
    return _components(n, edges) == 1


def build_graph(states: StateSpace, edges: Iterable[Sequence[int]]) -> Graph:
    n = states.size
    pairs = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < n and 0 <= j < n):
            raise IndexOutOfRange(f"edge ({i}, {j}) out of range for {n} states")
        if i == j:
            raise SelfLoop(f"self-loop at state {i}")
        pairs.add((min(i, j), max(i, j)))
    ordered = tuple(sorted(pairs))
    if not is_connected_on(n, ordered):
        raise DisconnectedGraph("privacy graph must be connected")
    return Graph(states, ordered)


def complete_graph(states: StateSpace) -> Graph:
    n = states.size
    return build_graph(states, [(i, j) for i in range(n) for j in range(i + 1, n)])


def path_graph(states: StateSpace) -> Graph:
    return build_graph(states, [(i, i + 1) for i in range(states.size - 1)])


def cycle_graph(states: StateSpace) -> Graph:
    n = states.size
    return build_graph(states, [(i, (i + 1) % n) for i in range(n)])


def _check_distribution(probs, n: int | None, interior: bool, what: str) -> tuple[Fraction, ...]:
    values = tuple(as_rational(p) for p in probs)
    if n is not None and len(values) != n:
        raise DimensionMismatch(f"{what} has {len(values)} entries, expected {n}")
    if interior and any(p <= 0 for p in values):
        raise PrivextError(f"{what} must be interior (all entries > 0)")
    if any(p < 0 for p in values):
        raise PrivextError(f"{what} has negative entries")
    if sum(values) != 1:
        raise PrivextError(f"{what} must sum to 1, got {sum(values)}")
    return values


@dataclass(frozen=True)
class Prior:
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", _check_distribution(self.probs, None, True, "prior"))

    @classmethod
    def uniform(cls, n: int) -> "Prior":
        return cls(tuple(Fraction(1, n) for _ in range(n)))

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, i: int) -> Fraction:
        return self.probs[i]


@dataclass(frozen=True)
class Budget:
    """Privacy budget carried as ``t = e^eps`` (exact, ``t >= 1``)."""

    t: Fraction
    approximate: bool = False

    def __post_init__(self):
        t = as_rational(self.t)
        if t < 1:
            raise PrivextError(f"budget t = e^eps must be >= 1, got {t}")
        object.__setattr__(self, "t", t)

    @classmethod
    def from_epsilon(cls, eps: float, max_denominator: int = 10**6) -> "Budget":
        """Best rational approximation of ``e^eps``; flagged as approximate."""
        import math

        if eps < 0:
            raise PrivextError("epsilon must be >= 0")
        t = Fraction(math.exp(eps)).limit_denominator(max_denominator)
        return cls(max(t, Fraction(1)), approximate=eps != 0)

    @property
    def degenerate(self) -> bool:
        return self.t == 1


@dataclass(frozen=True)
class Posterior:
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "probs", _check_distribution(self.probs, None, False, "posterior"))

    def __len__(self) -> int:
        return len(self.probs)

    def __getitem__(self, i: int) -> Fraction:
        return self.probs[i]

    def __iter__(self):
        return iter(self.probs)

    def __lt__(self, other: "Posterior") -> bool:
        return self.probs < other.probs

    @property
    def interior(self) -> bool:
        return all(p > 0 for p in self.probs)


@dataclass(frozen=True)
class WeightMatrix:
    """Integer exponents ``w[i][j]`` with quotient(i, j) = t ** w[i][j]."""

    entries: tuple[tuple[int, ...], ...]

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    @property
    def n(self) -> int:
        return len(self.entries)

    def is_antisymmetric(self) -> bool:
        n = self.n
        return all(self.entries[i][j] == -self.entries[j][i] for i in range(n) for j in range(n))

    def is_path_additive(self) -> bool:
        # Pairwise additivity over all triples implies additivity along any index sequence.
        w, n = self.entries, self.n
        return all(w[i][j] + w[j][k] == w[i][k] for i in range(n) for j in range(n) for k in range(n))

    def potential(self) -> tuple[int, ...]:
        """Integer potential ``c`` with ``w[i][j] = c[j] - c[i]`` and ``min(c) = 0``."""
        c = [self.entries[0][j] for j in range(self.n)]
        m = min(c)
        return tuple(x - m for x in c)


def _check_dims(mu: Posterior, prior: Prior, g: Graph | None = None) -> None:
    if len(mu) != len(prior):
        raise DimensionMismatch("posterior and prior dimensions differ")
    if g is not None and g.n != len(mu):
        raise DimensionMismatch("posterior and graph dimensions differ")


def ratio_quotient(mu: Posterior, prior: Prior, i: int, j: int) -> Fraction:
    """``(mu_j / prior_j) / (mu_i / prior_i)``."""
    _check_dims(mu, prior)
    if mu[i] == 0:
        raise DivideByZero(f"posterior vanishes at state {i}")
    return (mu[j] / prior[j]) / (mu[i] / prior[i])


def edge_violations(mu: Posterior, prior: Prior, g: Graph, b: Budget) -> list[tuple[int, int]]:
    """Edges whose likelihood-ratio bound is violated.

    Uses the cross-multiplied form so that zero entries need no special case.
    """
    _check_dims(mu, prior, g)
    t = b.t
    bad = []
    for i, j in g.edges:
        xi, xj = mu[i] / prior[i], mu[j] / prior[j]
        if xi > t * xj or xj > t * xi:
            bad.append((i, j))
    return bad


def is_member(mu: Posterior, prior: Prior, g: Graph, b: Budget) -> bool:
    # The cross-multiplied bounds also accept mu == 0 at both ends of an edge;
    # on a connected graph that only happens for the zero vector, which is not a distribution.
    return not edge_violations(mu, prior, g, b)


def is_member_float(mu: Sequence[float], prior: Sequence[float], g: Graph, t: float, tol: float = 1e-9) -> bool:
    """Tolerant membership test for decimal inputs."""
    for i, j in g.edges:
        xi, xj = mu[i] / prior[i], mu[j] / prior[j]
        if xi > t * xj + tol or xj > t * xi + tol:
            return False
    return True


def _exact_log(q: Fraction, t: Fraction) -> int | None:
    """Integer ``k`` with ``t**k == q`` or None. Requires ``t > 1`` and ``q > 0``."""
    if q == 1:
        return 0
    k, base = 0, q
    if base > 1:
        while base > 1:
            base /= t
            k += 1
        return k if base == 1 else None
    while base < 1:
        base *= t
        k -= 1
    return k if base == 1 else None


def integer_weight_matrix(mu: Posterior, prior: Prior, b: Budget) -> WeightMatrix | None:
    if b.degenerate:
        raise DegenerateBudget("integer weights need t > 1")
    _check_dims(mu, prior)
    if not mu.interior:
        raise NotInteriorPosterior("weights are defined only for interior posteriors")
    n = len(mu)
    # Exponents relative to state 0 determine every pair by path-additivity.
    c = []
    for j in range(n):
        k = _exact_log(ratio_quotient(mu, prior, 0, j), b.t)
        if k is None:
            return None
        c.append(k)
    entries = tuple(tuple(c[j] - c[i] for j in range(n)) for i in range(n))
    return WeightMatrix(entries)


def _root_potential(n: int, tree_edges, root: int = 0) -> list[int]:
    adj = [[] for _ in range(n)]
    for i, j, w in tree_edges:
        adj[i].append((j, w))
        adj[j].append((i, -w))
    c: list[int | None] = [None] * n
    c[root] = 0
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v, w in adj[u]:
            if c[v] is None:
                c[v] = c[u] + w
                queue.append(v)
    return c  # type: ignore[return-value]


def posterior_from_potential(c: Sequence[int], prior: Prior, b: Budget) -> Posterior:
    """``mu(s) ∝ t**c[s] * prior(s)`` normalised."""
    if len(c) != len(prior):
        raise DimensionMismatch("potential and prior dimensions differ")
    lo = min(c)
    mass = [b.t ** (k - lo) * p for k, p in zip(c, prior.probs)]
    total = sum(mass)
    return Posterior(tuple(m / total for m in mass))


def posterior_from_tree_weights(g: Graph, tree_edges, prior: Prior, b: Budget) -> Posterior:
    """Unique posterior whose quotient across each oriented tree edge is ``t**w``.

    ``tree_edges`` holds ``(i, j, w)`` with ``w`` in {-1, +1}. The result need not
    be feasible: non-tree edges may accumulate ``|w| > 1``.
    """
    n = g.n
    tree_edges = [(int(i), int(j), int(w)) for i, j, w in tree_edges]
    if len(tree_edges) != n - 1:
        raise NotSpanningTree(f"a spanning tree on {n} states has {n - 1} edges, got {len(tree_edges)}")
    for i, j, w in tree_edges:
        if not (0 <= i < n and 0 <= j < n) or not g.has_edge(i, j):
            raise NotSpanningTree(f"({i}, {j}) is not an edge of the graph")
        if w not in (-1, 1):
            raise NotSpanningTree(f"tree weights must be +-1, got {w}")
    if not is_connected_on(n, [(i, j) for i, j, _ in tree_edges]):
        raise NotSpanningTree("tree edges do not span the graph")
    return posterior_from_potential(_root_potential(n, tree_edges), prior, b)


def binding_edges(mu: Posterior, prior: Prior, g: Graph, b: Budget) -> list[tuple[int, int]]:
    """Edges whose quotient equals ``t`` or ``1/t``."""
    t = b.t
    out = []
    for i, j in g.edges:
        xi, xj = mu[i] / prior[i], mu[j] / prior[j]
        if xj == t * xi or xi == t * xj:
            out.append((i, j))
    return out


def is_extreme(mu: Posterior, prior: Prior, g: Graph, b: Budget) -> bool:
    if b.degenerate:
        raise DegenerateBudget("extremeness test needs t > 1")
    if not is_member(mu, prior, g, b):
        raise NotMember("posterior is not in the feasible set")
    return is_connected_on(g.n, binding_edges(mu, prior, g, b))


def is_extreme_float(mu: Sequence[float], prior: Sequence[float], g: Graph, t: float, tol: float = 1e-9) -> bool:
    if not is_member_float(mu, prior, g, t, tol):
        raise NotMember("posterior is not in the feasible set")
    tight = []
    for i, j in g.edges:
        xi, xj = mu[i] / prior[i], mu[j] / prior[j]
        if abs(xj - t * xi) <= tol or abs(xi - t * xj) <= tol:
            tight.append((i, j))
    return is_connected_on(g.n, tight)
