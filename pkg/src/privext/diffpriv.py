"""Differential-privacy graphs on product state spaces.

States are tuples over ``range(size_k)`` in row-major order, labelled by
concatenated coordinates (``"01"``) or comma-joined when some size exceeds 10.
Two states are neighbours iff they differ in exactly one coordinate.

For the two-dimensional grid X × Y this module also generates every strongly
connected 2-semi-chain without duplicates: each column ``[x]`` follows a
division pattern (the part of Y on level 1, the part on level 2); it suffices
to enumerate nondecreasing sequences of pattern codes and then distribute the
patterns over the columns in every distinct order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from .core import Graph, InvariantViolation, PrivextError, StateSpace, build_graph
from .semichain import SemiChain, reverse


class LengthMismatch(PrivextError):
    pass


@dataclass(frozen=True)
class DimensionSpec:
    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if not sizes:
            raise PrivextError("need at least one dimension")
        if any(s < 2 for s in sizes):
            raise PrivextError("every dimension needs at least 2 values")
        object.__setattr__(self, "sizes", sizes)

    @property
    def K(self) -> int:
        return len(self.sizes)

    def tuples(self) -> list[tuple[int, ...]]:
        return list(itertools.product(*(range(s) for s in self.sizes)))

    def index(self, state: Sequence[int]) -> int:
        idx = 0
        for v, s in zip(state, self.sizes):
            idx = idx * s + v
        return idx

    def label(self, state: Sequence[int]) -> str:
        sep = "," if max(self.sizes) > 10 else ""
        return sep.join(str(v) for v in state)


def differential_graph(dims: DimensionSpec | Sequence[int]) -> Graph:
    if not isinstance(dims, DimensionSpec):
        dims = DimensionSpec(tuple(dims))
    states = dims.tuples()
    edges = [
        (a, b)
        for a in range(len(states))
        for b in range(a + 1, len(states))
        if sum(x != y for x, y in zip(states[a], states[b])) == 1
    ]
    return build_graph(StateSpace(tuple(dims.label(s) for s in states)), edges)


def max_level(dims: DimensionSpec | Sequence[int]) -> int:
    """Largest L for which a strongly connected L-semi-chain exists: K + 1."""
    if not isinstance(dims, DimensionSpec):
        dims = DimensionSpec(tuple(dims))
    return dims.K + 1


def construct_k_plus_1_chain(dims: DimensionSpec | Sequence[int]) -> SemiChain:
    """Strongly connected (K+1)-chain built one coordinate at a time.

    Base: ``({0}, rest)`` on the first coordinate. Each new coordinate copies
    the previous chain once per value; the copy at value 0 keeps its levels,
    every other copy moves up one level.
    """
    if not isinstance(dims, DimensionSpec):
        dims = DimensionSpec(tuple(dims))
    # level[tuple] is 1-based
    level = {(0,): 1}
    level.update({(v,): 2 for v in range(1, dims.sizes[0])})
    for size in dims.sizes[1:]:
        level = {
            prefix + (v,): lvl + (0 if v == 0 else 1)
            for prefix, lvl in level.items()
            for v in range(size)
        }
    top = dims.K + 1
    levels = [[] for _ in range(top)]
    for state, lvl in level.items():
        levels[lvl - 1].append(dims.index(state))
    return SemiChain(tuple(tuple(lv) for lv in levels))


def binary_two_chain(K: int) -> SemiChain:
    """Parity bipartition of {0,1}^K: even coordinate sum on level 1."""
    if K < 1:
        raise PrivextError("K must be >= 1")
    dims = DimensionSpec((2,) * K)
    even = [dims.index(s) for s in dims.tuples() if sum(s) % 2 == 0]
    odd = [dims.index(s) for s in dims.tuples() if sum(s) % 2 == 1]
    return SemiChain((tuple(even), tuple(odd)))


def lift_binary_chain(c: SemiChain, K: int) -> SemiChain:
    """Extend a 2-chain (A, B) on {0,1}^(K-1) to ((A,0) ∪ (B,1), (B,0) ∪ (A,1)) on {0,1}^K."""
    a, b = c.levels
    first = [2 * s for s in a] + [2 * s + 1 for s in b]
    second = [2 * s for s in b] + [2 * s + 1 for s in a]
    return SemiChain((tuple(first), tuple(second)))


@dataclass(frozen=True)
class DivisionPattern:
    """Split of the column values Y = {0..n2-1}: ``first`` on level 1, ``second`` on level 2."""

    first: frozenset[int]
    second: frozenset[int]

    def side(self, l: int) -> frozenset[int]:
        return self.first if l == 1 else self.second

    @property
    def divided(self) -> bool:
        return bool(self.first) and bool(self.second)

    def __repr__(self) -> str:
        def fmt(s):
            return "{" + ",".join(str(y + 1) for y in sorted(s)) + "}" if s else "∅"
        return f"({fmt(self.first)}, {fmt(self.second)})"


def division_patterns(n2: int) -> list[DivisionPattern]:
    """The 2**n2 patterns in code order: divided ones first, then (Y, ∅), (∅, Y).

    Divided patterns are ordered by the bitmask of their first part, value y
    contributing bit y.
    """
    if n2 < 2:
        raise PrivextError("n2 must be >= 2")
    full = frozenset(range(n2))
    divided = []
    for mask in range(1, 2**n2 - 1):
        first = frozenset(y for y in range(n2) if mask >> y & 1)
        divided.append(DivisionPattern(first, full - first))
    return divided + [DivisionPattern(full, frozenset()), DivisionPattern(frozenset(), full)]


@dataclass(frozen=True)
class DivisionSequence:
    """Pattern codes (1-based, nondecreasing) for the n1 columns."""

    codes: tuple[int, ...]
    category: str = ""

    def patterns(self, table: Sequence[DivisionPattern]) -> list[DivisionPattern]:
        return [table[c - 1] for c in self.codes]


def enumerate_division_sequences(n1: int, n2: int, legacy: bool = False) -> list[DivisionSequence]:
    """All increasing strongly connected division sequences for an n1 × n2 grid.

    With ``legacy=False`` (default) the three emission rules are:

    * I: all n1 columns divided, at least two distinct patterns;
    * II: z < n1 divided columns, the rest undivided on level l, emitted when
      the divided columns put every value of Y on the *other* level;
    * III: z <= n1 - 2 divided columns followed by n' copies of (Y, ∅) and
      n1 - z - n' copies of (∅, Y), with n', n1 - z - n' >= 1.

    ``legacy=True`` applies the uncorrected rules: Category II coverage is
    tested on level l itself, and the rule also fires at z = n1, re-emitting
    Category I sequences. Kept to report what those rules get wrong.
    """
    if n1 < 2 or n2 < 2:
        raise PrivextError("n1 and n2 must be >= 2")
    table = division_patterns(n2)
    n_div = 2**n2 - 2
    full = frozenset(range(n2))
    out: list[DivisionSequence] = []

    def enumerate_from(z: int, lo: int, prefix: tuple[int, ...]) -> None:
        for tz in range(lo, n_div + 1):
            codes = prefix + (tz,)
            pats = [table[c - 1] for c in codes]
            if z == n1 and len(set(codes)) >= 2:
                out.append(DivisionSequence(codes, "I"))
            if legacy or z < n1:
                for l in (1, 2):
                    covered_side = l if legacy else 3 - l
                    covered = frozenset().union(*(p.side(covered_side) for p in pats))
                    if full <= covered:
                        fill = n_div + l  # (Y, ∅) for l = 1, (∅, Y) for l = 2
                        out.append(DivisionSequence(codes + (fill,) * (n1 - z), "II"))
            if z <= n1 - 2:
                for n_up in range(1, n1 - z):
                    tail = (n_div + 1,) * n_up + (n_div + 2,) * (n1 - n_up - z)
                    out.append(DivisionSequence(codes + tail, "III"))
            if z < n1:
                enumerate_from(z + 1, tz, codes)

    enumerate_from(1, 1, ())
    return out


def grid_index(x: int, y: int, n2: int) -> int:
    return x * n2 + y


def _multiset_permutations(items: Sequence[int]) -> Iterator[tuple[int, ...]]:
    # Lexicographic successor over a sorted multiset; yields each arrangement once.
    a = sorted(items)
    n = len(a)
    while True:
        yield tuple(a)
        i = n - 2
        while i >= 0 and a[i] >= a[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while a[j] <= a[i]:
            j -= 1
        a[i], a[j] = a[j], a[i]
        a[i + 1:] = reversed(a[i + 1:])


def sequence_to_chain(codes: Sequence[int], table: Sequence[DivisionPattern], n2: int) -> SemiChain:
    """Column x follows ``table[codes[x]-1]``; level 1 gets (x, y) for y in the first part."""
    low, high = [], []
    for x, code in enumerate(codes):
        pat = table[code - 1]
        low.extend(grid_index(x, y, n2) for y in pat.first)
        high.extend(grid_index(x, y, n2) for y in pat.second)
    return SemiChain((tuple(low), tuple(high)))


def expand_sequences_to_chains(seqs: Sequence[DivisionSequence], n1: int, n2: int) -> set[SemiChain]:
    """Every column assignment of every sequence, as 2-semi-chains on the grid.

    Distinct nondecreasing sequences are distinct multisets, so their chains
    never coincide; a coincidence raises.
    """
    table = division_patterns(n2)
    out: set[SemiChain] = set()
    for seq in seqs:
        if len(seq.codes) != n1:
            raise LengthMismatch(f"sequence {seq.codes} has length {len(seq.codes)}, expected {n1}")
        for arrangement in _multiset_permutations(seq.codes):
            chain = sequence_to_chain(arrangement, table, n2)
            if chain in out:
                raise InvariantViolation(f"chain {chain} produced by two sequences")
            out.add(chain)
    return out


def division_two_semichains(n1: int, n2: int, legacy: bool = False) -> set[SemiChain]:
    """2-semi-chains of the n1 × n2 differential graph via division sequences.

    Emitted chains are closed under reversal before returning, since the
    sequence orientation convention fixes level 1 = first pattern part.
    """
    chains = expand_sequences_to_chains(enumerate_division_sequences(n1, n2, legacy), n1, n2)
    return chains | {reverse(c) for c in chains}


@dataclass
class DivisionDiscrepancy:
    n1: int
    n2: int
    duplicates: list[tuple[int, ...]]
    invalid: list[SemiChain]
    missing: list[SemiChain]

    @property
    def clean(self) -> bool:
        return not (self.duplicates or self.invalid or self.missing)


def legacy_rules_discrepancy(n1: int, n2: int) -> DivisionDiscrepancy:
    """Compare the uncorrected rules with the exhaustive 2-chain set."""
    from .semichain import enumerate_two_semichains

    seqs = enumerate_division_sequences(n1, n2, legacy=True)
    counts: dict[tuple[int, ...], int] = {}
    for s in seqs:
        counts[s.codes] = counts.get(s.codes, 0) + 1
    dups = sorted(c for c, k in counts.items() if k > 1)
    table = division_patterns(n2)
    emitted = set()
    for codes in counts:
        for arrangement in _multiset_permutations(codes):
            emitted.add(sequence_to_chain(arrangement, table, n2))
    emitted |= {reverse(c) for c in emitted}
    truth = enumerate_two_semichains(differential_graph([n1, n2]), "scan")
    return DivisionDiscrepancy(n1, n2, dups, sorted(emitted - truth), sorted(truth - emitted))
