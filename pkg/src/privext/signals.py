"""Finite-support signals: Bayes plausibility, privacy preservation, frontier
membership, and decomposition of a feasible posterior into extreme ones."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .core import (
    Budget,
    DimensionMismatch,
    Graph,
    InvariantViolation,
    NotMember,
    Posterior,
    Prior,
    PrivextError,
    as_rational,
    edge_violations,
    is_extreme,
    is_member,
)
from .linalg import nullspace
from .semichain import enumerate_extreme_posteriors


class NotBayesPlausible(PrivextError):
    pass


class NotPrivacyPreserving(PrivextError):
    pass


class InfeasibleDecomposition(InvariantViolation):
    pass


@dataclass(frozen=True)
class Signal:
    support: tuple[Posterior, ...]
    weights: tuple[Fraction, ...]

    def __post_init__(self):
        support = tuple(p if isinstance(p, Posterior) else Posterior(tuple(p)) for p in self.support)
        weights = tuple(as_rational(w) for w in self.weights)
        if len(support) != len(weights):
            raise PrivextError("support and weights differ in length")
        if not support:
            raise PrivextError("a signal needs at least one posterior")
        if any(w <= 0 for w in weights):
            raise PrivextError("signal weights must be positive")
        if sum(weights) != 1:
            raise PrivextError(f"signal weights must sum to 1, got {sum(weights)}")
        if len(set(support)) != len(support):
            raise PrivextError("support posteriors must be distinct")
        if len({len(p) for p in support}) != 1:
            raise DimensionMismatch("support posteriors differ in dimension")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def degenerate(cls, mu: Posterior | Prior) -> "Signal":
        return cls((Posterior(tuple(mu.probs)),), (Fraction(1),))

    def barycenter(self) -> tuple[Fraction, ...]:
        n = len(self.support[0])
        return tuple(sum(w * p[i] for w, p in zip(self.weights, self.support)) for i in range(n))

    def __len__(self) -> int:
        return len(self.support)


def bayes_plausible(s: Signal, prior: Prior) -> bool:
    if len(s.support[0]) != len(prior):
        raise DimensionMismatch("signal and prior dimensions differ")
    return s.barycenter() == prior.probs


def is_privacy_preserving(s: Signal, g: Graph, prior: Prior, b: Budget) -> bool:
    if not bayes_plausible(s, prior):
        raise NotBayesPlausible("posteriors do not average to the prior")
    return all(is_member(p, prior, g, b) for p in s.support)


def is_frontier(s: Signal, g: Graph, prior: Prior, b: Budget) -> bool:
    """Every support posterior is a vertex of the feasible set.

    At ``t = 1`` the feasible set is the single point ``prior``, which is
    then its own vertex.
    """
    if not is_privacy_preserving(s, g, prior, b):
        raise NotPrivacyPreserving("some support posterior violates the privacy constraints")
    if b.degenerate:
        return all(p.probs == prior.probs for p in s.support)
    return all(is_extreme(p, prior, g, b) for p in s.support)


def _integer_system(columns: Sequence[Sequence[Fraction]], target: Sequence[Fraction]):
    """Integer rows of ``[columns | target]`` plus the per-column scale factors.

    Column k is multiplied by the lcm of its own denominators, then every row by
    the lcm of the target's; a solution ``lam'`` of the integer system gives
    ``lam[k] = lam'[k] * scale[k]``.
    """
    columns = [[Fraction(x) for x in col] for col in columns]
    target = [Fraction(x) for x in target]
    scales = [math.lcm(*(x.denominator for x in col)) for col in columns]
    d = math.lcm(*(x.denominator for x in target))
    ints = [[x.numerator * (sc // x.denominator) * d for x in col] for col, sc in zip(columns, scales)]
    rows = [[col[i] for col in ints] + [target[i].numerator * (d // target[i].denominator)] for i in range(len(target))]
    return rows, scales


def _phase_one(columns: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> list[Fraction] | None:
    """Nonnegative ``lam`` with ``sum_k lam[k] * columns[k] == target``, or None.

    Simplex on the auxiliary problem: one artificial variable per row, minimise
    their sum. The tableau is kept fraction-free (integer entries over a common
    denominator ``d``, updated by exact division). Entering columns follow the
    most negative reduced cost, except right after a degenerate pivot, where
    Bland's smallest-index rule is used; a cycle would consist of degenerate
    pivots only and so of Bland pivots only, which cannot cycle.
    ``target`` must be >= 0.
    """
    m, n = len(target), len(columns)
    width = n + m
    tab = []
    rows, scales = _integer_system(columns, target)
    for i, row in enumerate(rows):
        tab.append(row[:n] + [int(i == r) for r in range(m)] + [row[n]])
    basis = [n + i for i in range(m)]
    cost = [-sum(tab[i][k] for i in range(m)) for k in range(n)] + [0] * m
    cost.append(-sum(tab[i][width] for i in range(m)))
    d = 1
    degenerate = False
    while True:
        if degenerate:
            enter = next((k for k in range(width) if cost[k] < 0), None)
        else:
            enter = min(range(width), key=cost.__getitem__)
            if cost[enter] >= 0:
                enter = None
        if enter is None:
            break
        leave = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                if leave is None:
                    leave = i
                    continue
                # Compare rhs_i / a with rhs_leave / a_leave; ties go to the smaller basic index.
                lhs = tab[i][width] * tab[leave][enter]
                rhs = tab[leave][width] * a
                if lhs < rhs or (lhs == rhs and basis[i] < basis[leave]):
                    leave = i
        if leave is None:
            raise InvariantViolation("auxiliary problem is unbounded")
        prow = tab[leave]
        p = prow[enter]
        degenerate = prow[width] == 0
        support = [j for j, x in enumerate(prow) if x]
        for row in tab + [cost]:
            if row is prow:
                continue
            f = row[enter]
            if f:
                for j in range(width + 1):
                    row[j] = row[j] * p
                for j in support:
                    row[j] -= f * prow[j]
                for j in range(width + 1):
                    row[j] //= d
            else:
                for j in range(width + 1):
                    row[j] = row[j] * p // d
        d = p
        basis[leave] = enter
    if cost[width] != 0:
        return None
    lam = [Fraction(0)] * n
    for i, var in enumerate(basis):
        if var < n:
            lam[var] = Fraction(tab[i][width] * scales[var], d)
    return lam


def _caratheodory(points: Sequence[Posterior], weights: list[Fraction]) -> tuple[list[Posterior], list[Fraction]]:
    """Drop support points until the remaining ones are affinely independent."""
    pts, lam = list(points), list(weights)
    while True:
        a = [[p[i] for p in pts] for i in range(len(pts[0]))]
        kernel = nullspace(a, len(pts))
        if not kernel:
            return pts, lam
        d = kernel[0]
        # Columns sum to 1, so d sums to 0 and has a positive entry.
        step = min(lam[k] / d[k] for k in range(len(pts)) if d[k] > 0)
        lam = [x - step * dk for x, dk in zip(lam, d)]
        keep = [k for k in range(len(pts)) if lam[k] != 0]
        if any(x < 0 for x in lam):
            raise InvariantViolation("Caratheodory step left a negative weight")
        pts, lam = [pts[k] for k in keep], [lam[k] for k in keep]


def decompose_into_extremes(
    mu: Posterior,
    g: Graph,
    prior: Prior,
    b: Budget,
    vertices: Sequence[Posterior] | None = None,
) -> Signal:
    """A signal on extreme posteriors whose barycenter is exactly ``mu``.

    ``vertices`` may pass a precomputed vertex list to share across calls.
    The support has at most J points.
    """
    if len(mu) != g.n or len(prior) != g.n:
        raise DimensionMismatch("posterior, prior and graph dimensions differ")
    bad = edge_violations(mu, prior, g, b)
    if bad:
        raise NotMember(f"posterior violates the ratio bound on edges {bad}")
    if b.degenerate:
        return Signal.degenerate(mu)
    if vertices is None:
        vertices = sorted({p.posterior for p in enumerate_extreme_posteriors(g, prior, b)})
    exact = [v for v in vertices if v.probs == mu.probs]
    if exact:
        return Signal.degenerate(mu)
    lam = _phase_one([v.probs for v in vertices], mu.probs)
    if lam is None:
        raise InfeasibleDecomposition("feasible posterior is not a convex combination of the vertices")
    used = [k for k, x in enumerate(lam) if x > 0]
    pts, weights = _caratheodory([vertices[k] for k in used], [lam[k] for k in used])
    order = sorted(range(len(pts)), key=lambda k: pts[k])
    s = Signal(tuple(pts[k] for k in order), tuple(weights[k] for k in order))
    if s.barycenter() != mu.probs:
        raise InfeasibleDecomposition("decomposition does not reproduce the posterior")
    return s
