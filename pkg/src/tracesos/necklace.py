"""Cyclic word enumeration behind the trace-power coefficient.

The coefficient of t^r in trace((A+tB)^m) expands into one monomial per
labeled m-cycle: m vertex letters in {a, b} with exactly r b's, and m edge
labels in [n].  Vertex t contributes the variable of its letter's matrix
on the unordered pair of its two incident edge labels (edges[t] sits
between vertices t and t+1 mod m).

Two independent constructions of the same polynomial are provided: direct
enumeration of the cycles, and symbolic powering of the n-by-n matrix
A + B with the b-degree sliced to r.  They are compared term-for-term in
the test suite; neither is derived from the other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .poly import (
    Coeff,
    Monomial,
    Polynomial,
    mono_from_vars,
    mono_kind_degree,
    mono_mul,
    var,
)

DEFAULT_BUDGET = 10**8


class BudgetExceeded(RuntimeError):
    """Planned enumeration work exceeds the configured budget."""

    def __init__(self, planned: int, budget: int):
        super().__init__(f"enumeration needs {planned} visits, budget is {budget}")
        self.planned = planned
        self.budget = budget


@dataclass(frozen=True)
class TraceProblem:
    """Parameters (m, r, n) of one trace-power coefficient."""

    m: int
    r: int
    n: int
    diagonal_a: bool = False

    def __post_init__(self):
        if self.m <= 0 or self.m % 2 != 0:
            raise ValueError(f"m must be a positive even integer, got {self.m}")
        if self.r % 2 != 0 or not 0 <= self.r <= self.m:
            raise ValueError(f"r must be even with 0 <= r <= m, got {self.r}")
        if self.n < 1:
            raise ValueError(f"n must be positive, got {self.n}")

    def necklace_count(self) -> int:
        return comb(self.m, self.r) * self.n**self.m


@dataclass(frozen=True)
class Necklace:
    """An m-cycle with vertex letters and edge labels."""

    letters: Tuple[str, ...]
    edges: Tuple[int, ...]

    def __post_init__(self):
        if len(self.letters) != len(self.edges):
            raise ValueError("letters and edges must have equal length")
        if any(s not in ("a", "b") for s in self.letters):
            raise ValueError("letters must be 'a' or 'b'")

    def rotate(self, k: int = 1) -> "Necklace":
        m = len(self.letters)
        k %= m
        return Necklace(self.letters[k:] + self.letters[:k],
                        self.edges[k:] + self.edges[:k])


def necklace_monomial(k: Necklace, diagonal_a: bool = False) -> Optional[Monomial]:
    """The monomial of one cycle, or None when a diagonal-A entry vanishes."""
    m = len(k.letters)
    edges = k.edges
    vs = []
    for t in range(m):
        lo, hi = edges[t - 1], edges[t]
        if diagonal_a and k.letters[t] == "a" and lo != hi:
            return None
        vs.append(var(k.letters[t], lo, hi))
    return mono_from_vars(vs)


def letter_patterns(m: int, r: int) -> List[Tuple[str, ...]]:
    """All letter arrangements with exactly r b's, lexicographic (a < b)."""
    patterns = set()
    for positions in itertools.combinations(range(m), r):
        word = ["a"] * m
        for p in positions:
            word[p] = "b"
        patterns.add(tuple(word))
    return sorted(patterns)


def _edge_components(letters: Sequence[str]) -> List[List[int]]:
    """Group edge positions forced equal when A is diagonal.

    Each a-vertex t welds edges t-1 and t together.  Components are listed
    by their smallest member, members in increasing order.
    """
    m = len(letters)
    parent = list(range(m))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for t, s in enumerate(letters):
        if s == "a":
            ra, rb = find((t - 1) % m), find(t)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    groups: Dict[int, List[int]] = {}
    for t in range(m):
        groups.setdefault(find(t), []).append(t)
    return [groups[root] for root in sorted(groups)]


def planned_visits(p: TraceProblem, skip_zero: bool = False) -> int:
    """Number of necklaces an enumeration will yield."""
    if skip_zero and p.diagonal_a:
        return sum(p.n ** len(_edge_components(pat))
                   for pat in letter_patterns(p.m, p.r))
    return p.necklace_count()


def enumerate_necklaces(
    p: TraceProblem,
    skip_zero: bool = False,
    budget: Optional[int] = None,
    patterns: Optional[Sequence[Tuple[str, ...]]] = None,
) -> Iterator[Necklace]:
    """Yield each (m, r, n)-necklace exactly once, in deterministic order.

    With ``skip_zero`` and a diagonal A, necklaces whose monomial vanishes
    are not generated at all; otherwise every one of C(m,r)*n^m cycles is
    yielded, zero-monomial ones included.
    """
    if budget is not None:
        planned = planned_visits(p, skip_zero=skip_zero and p.diagonal_a)
        if planned > budget:
            raise BudgetExceeded(planned, budget)
    if patterns is None:
        patterns = letter_patterns(p.m, p.r)
    labels = range(1, p.n + 1)
    if skip_zero and p.diagonal_a:
        for pat in patterns:
            comps = _edge_components(pat)
            for values in itertools.product(labels, repeat=len(comps)):
                edges = [0] * p.m
                for group, val in zip(comps, values):
                    for t in group:
                        edges[t] = val
                yield Necklace(pat, tuple(edges))
    else:
        for pat in patterns:
            for edges in itertools.product(labels, repeat=p.m):
                yield Necklace(pat, edges)


def trace_coeff_necklace(
    p: TraceProblem,
    budget: Optional[int] = None,
    workers: int = 1,
) -> Polynomial:
    """Coefficient polynomial by direct necklace enumeration."""
    if budget is not None:
        planned = planned_visits(p, skip_zero=p.diagonal_a)
        if planned > budget:
            raise BudgetExceeded(planned, budget)
    patterns = letter_patterns(p.m, p.r)
    if workers <= 1:
        return Polynomial.from_raw(_pattern_sum(p, patterns))
    chunks = [patterns[i::workers] for i in range(workers)]
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=workers) as pool:
        partials = list(pool.map(lambda ch: _pattern_sum(p, ch), chunks))
    total: Dict[Monomial, Coeff] = {}
    for part in partials:
        for m, c in part.items():
            total[m] = total.get(m, 0) + c
    return Polynomial.from_raw(total)


def _pattern_sum(p: TraceProblem, patterns) -> Dict[Monomial, Coeff]:
    acc: Dict[Monomial, Coeff] = {}
    for k in enumerate_necklaces(p, skip_zero=p.diagonal_a, patterns=patterns):
        mono = necklace_monomial(k, diagonal_a=p.diagonal_a)
        if mono is None:
            continue
        acc[mono] = acc.get(mono, 0) + 1
    return acc


def _symbolic_matrix(n: int, kind: str, diagonal: bool) -> List[List[Dict]]:
    rows = []
    for i in range(1, n + 1):
        row = []
        for j in range(1, n + 1):
            if diagonal and i != j:
                row.append({})
            else:
                row.append({((var(kind, i, j), 1),): 1})
        rows.append(row)
    return rows


def _entry_mul(p1: Dict, p2: Dict, cap_b: Optional[int],
               out: Dict[Monomial, Coeff], scale: int = 1) -> None:
    for m1, c1 in p1.items():
        for m2, c2 in p2.items():
            m = mono_mul(m1, m2)
            if cap_b is not None and mono_kind_degree(m, "b") > cap_b:
                continue
            out[m] = out.get(m, 0) + scale * c1 * c2


def _mat_mul(a, b, cap_b: Optional[int]):
    n = len(a)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            entry: Dict[Monomial, Coeff] = {}
            for k in range(n):
                if a[i][k] and b[k][j]:
                    _entry_mul(a[i][k], b[k][j], cap_b, entry)
            row.append({m: c for m, c in entry.items() if c != 0})
        out.append(row)
    return out


def _mat_power(mat, e: int, cap_b: Optional[int]):
    result = None
    base = mat
    while e:
        if e & 1:
            result = base if result is None else _mat_mul(result, base, cap_b)
        e >>= 1
        if e:
            base = _mat_mul(base, base, cap_b)
    return result


def trace_coeff_matrix(p: TraceProblem, budget: Optional[int] = None) -> Polynomial:
    """Coefficient polynomial via symbolic matrix powering.

    Computes H = (A+B)^(m/2) entrywise with terms pruned once their
    b-degree passes r, takes trace(H*H), and keeps the b-degree-r slice.
    Independent of the necklace route.
    """
    if budget is not None and p.necklace_count() > budget:
        raise BudgetExceeded(p.necklace_count(), budget)
    n, r = p.n, p.r
    a_mat = _symbolic_matrix(n, "a", p.diagonal_a)
    b_mat = _symbolic_matrix(n, "b", False)
    m_sum = []
    for i in range(n):
        row = []
        for j in range(n):
            entry = dict(a_mat[i][j])
            for mono, c in b_mat[i][j].items():
                entry[mono] = entry.get(mono, 0) + c
            row.append(entry)
        m_sum.append(row)
    half = _mat_power(m_sum, p.m // 2, cap_b=r)
    acc: Dict[Monomial, Coeff] = {}
    for i in range(n):
        for k in range(n):
            if half[i][k] and half[k][i]:
                _entry_mul(half[i][k], half[k][i], r, acc)
    sliced = {m: c for m, c in acc.items() if mono_kind_degree(m, "b") == r}
    return Polynomial.from_raw(sliced)


def expand_square_formula(m: int, n: int) -> Polynomial:
    """The explicit square expansion of the r = 0 coefficient.

    sum_{i,j} (sum over all a-walks of length m/2 from i to j)^2, fully
    expanded.  Must equal the r = 0 coefficient polynomial.
    """
    if m <= 0 or m % 2 != 0:
        raise ValueError(f"m must be a positive even integer, got {m}")
    half = m // 2
    acc: Dict[Monomial, Coeff] = {}
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            walks = []
            for mids in itertools.product(range(1, n + 1), repeat=half - 1):
                seq = (i, *mids, j)
                walks.append(mono_from_vars(
                    var("a", seq[t], seq[t + 1]) for t in range(half)))
            for w1 in walks:
                for w2 in walks:
                    key = mono_mul(w1, w2)
                    acc[key] = acc.get(key, 0) + 1
    return Polynomial.from_raw(acc)


def word_trace(word: Iterable[str], n: int, diagonal_a: bool = False) -> Polynomial:
    """Trace of the symbolic product of one word in the letters A, B."""
    letters = [w.lower() for w in word]
    if any(w not in ("a", "b") for w in letters):
        raise ValueError("word letters must be 'A' or 'B'")
    mats = [_symbolic_matrix(n, w, diagonal_a and w == "a") for w in letters]
    prod = mats[0]
    for mat in mats[1:]:
        prod = _mat_mul(prod, mat, cap_b=None)
    acc: Dict[Monomial, Coeff] = {}
    for i in range(n):
        for mono, c in prod[i][i].items():
            acc[mono] = acc.get(mono, 0) + c
    return Polynomial.from_raw(acc)


def sum_word_traces(m: int, r: int, n: int, diagonal_a: bool = False) -> Polynomial:
    """Trace of the sum of all words with r B's and m-r A's."""
    total = Polynomial.zero()
    for pat in letter_patterns(m, r):
        total = total + word_trace(pat, n, diagonal_a=diagonal_a)
    return total
