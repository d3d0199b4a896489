"""Non-adaptive sorting by adjacency elimination.

One batch of queries is fixed up front: three fans, each consisting of every
k-query containing a fixed reference set of size rho = ts - 1.  From the
answers, candidate neighbor pairs are eliminated by the replacement rule: if
a query answered x and the same query with x swapped for y did not answer y,
then x and y cannot be adjacent.  The surviving graph on the elements that
ever appear in an outcome is the adjacency path of the recoverable middle,
which rebuilds the order up to reflection; one consistency sweep against the
recorded answers then pins the direction and the extreme segments.

Plan generation and elimination are pure functions of their inputs; fans may
be processed in any order (elimination is monotone), and the result is the
same.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb
from typing import Iterable, Mapping, Sequence

from .core import (
    RESOLVED,
    REFLECTION_AMBIGUOUS,
    InconsistentAnswersError,
    Oracle,
    PreconditionError,
    ScaleError,
    ScaleSpec,
    SortResult,
)


@dataclass(frozen=True)
class Fan:
    """All k-queries containing one fixed reference set."""

    reference: frozenset[int]
    free_sets: tuple[frozenset[int], ...]

    def queries(self) -> list[frozenset[int]]:
        return [self.reference | free for free in self.free_sets]


@dataclass(frozen=True)
class QueryPlan:
    """A batch of fans; every query belongs to exactly one fan."""

    n: int
    spec: ScaleSpec
    rho: int
    fans: tuple[Fan, ...]

    @property
    def reference_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(fan.reference for fan in self.fans)

    @property
    def size(self) -> int:
        return sum(len(fan.free_sets) for fan in self.fans)

    def queries(self) -> list[frozenset[int]]:
        out: list[frozenset[int]] = []
        for fan in self.fans:
            out.extend(fan.queries())
        return out


def _reference_size(spec: ScaleSpec) -> int:
    """rho = ts - 1, read against the cheaper side for singleton instruments.

    A singleton scale with t > (k+1)/2 is the mirrored small-side scale, so
    its reference size follows the mirrored position; the elimination rule
    itself never depends on rho, only completeness does.
    """
    if spec.s == 1:
        t = spec.outputs[0]
        return min(t, spec.k + 1 - t) - 1
    return spec.outputs[-1] - 1


def plan_size_formula(n: int, spec: ScaleSpec) -> int:
    """Exact query count of the adjacency plan: 3*C(n-rho, k-rho), or C(n,k) if rho=0."""
    rho = _reference_size(spec)
    if rho == 0:
        return comb(n, spec.k)
    return 3 * comb(n - rho, spec.k - rho)


def build_adjacency_plan(n: int, spec: ScaleSpec) -> QueryPlan:
    """Three disjoint lowest-label reference sets of size rho, each with its full fan.

    With rho = 0 (a plain minimum or maximum scale) the plan degenerates to
    all C(n, k) queries under a single empty reference set.
    """
    k = spec.k
    rho = _reference_size(spec)
    if rho == 0:
        free = tuple(frozenset(c) for c in itertools.combinations(range(n), k))
        return QueryPlan(n, spec, 0, (Fan(frozenset(), free),))
    if n < 3 * rho + (k - rho) + 1:
        raise PreconditionError(
            f"n={n} too small for three disjoint reference sets of size {rho}")
    fans = []
    for i in range(3):
        ref = frozenset(range(i * rho, (i + 1) * rho))
        rest = [e for e in range(n) if e not in ref]
        free = tuple(frozenset(c) for c in itertools.combinations(rest, k - rho))
        fans.append(Fan(ref, free))
    return QueryPlan(n, spec, rho, tuple(fans))


def answer_plan(oracle: Oracle, plan: QueryPlan) -> dict[frozenset[int], frozenset[int]]:
    """Submit every plan query to the oracle; returns the answer map."""
    results: dict[frozenset[int], frozenset[int]] = {}
    for fan in plan.fans:
        for free in fan.free_sets:
            q = fan.reference | free
            results[q] = oracle.query(sorted(q))
    return results


class AdjacencyMap:
    """Candidate-neighbor sets over a support; symmetric by construction."""

    def __init__(self, support: Iterable[int]):
        self.support = frozenset(support)
        self.neighbors: dict[int, set[int]] = {
            e: set(self.support) - {e} for e in self.support}

    def remove_edge(self, a: int, b: int) -> None:
        if a in self.support and b in self.support and a != b:
            self.neighbors[a].discard(b)
            self.neighbors[b].discard(a)

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.neighbors.get(a, ())

    def edges(self) -> set[frozenset[int]]:
        return {frozenset((a, b)) for a in self.support for b in self.neighbors[a]}

    def is_path(self) -> bool:
        m = len(self.support)
        if m == 0:
            return False
        if m == 1:
            return True
        degs = sorted(len(self.neighbors[e]) for e in self.support)
        if degs != [1, 1] + [2] * (m - 2):
            return False
        return len(self.walk()) == m

    def walk(self) -> list[int]:
        """Path sequence starting from the lowest-labeled endpoint."""
        if len(self.support) == 1:
            return list(self.support)
        ends = sorted(e for e in self.support if len(self.neighbors[e]) == 1)
        if not ends:
            return []
        seq = [ends[0]]
        prev = None
        while True:
            nxt = [e for e in self.neighbors[seq[-1]] if e != prev]
            if not nxt:
                break
            if len(nxt) > 1:
                return []
            prev = seq[-1]
            seq.append(nxt[0])
        return seq


def eliminate_nonadjacent(plan: QueryPlan,
                          results: Mapping[frozenset[int], frozenset[int]]) -> AdjacencyMap:
    """Apply the replacement rule over every sibling pair of every fan.

    Siblings are queries of one fan whose free parts differ in a single
    element u -> v; if u was answered and v was not answered in the sibling,
    the edge {u, v} is deleted.  A truly adjacent pair can never be deleted:
    whenever u holds an output position with v absent, v holds the same
    position in the sibling.
    """
    support: set[int] = set()
    for fan in plan.fans:
        for free in fan.free_sets:
            q = fan.reference | free
            if q not in results:
                raise InconsistentAnswersError(f"missing answer for plan query {sorted(q)}")
            support.update(results[q])
    adj = AdjacencyMap(support)
    for fan in plan.fans:
        buckets: dict[frozenset[int], list[int]] = {}
        for free in fan.free_sets:
            for u in free:
                buckets.setdefault(free - {u}, []).append(u)
        for core, swaps in buckets.items():
            if len(swaps) < 2:
                continue
            base = fan.reference | core
            outs = {u: results[base | {u}] for u in swaps}
            for u in swaps:
                if u not in outs[u]:
                    continue
                for v in swaps:
                    if v != u and v not in outs[v]:
                        adj.remove_edge(u, v)
    return adj


def _match_under(query: frozenset[int], observed: frozenset[int],
                 middle_pos: Mapping[int, int],
                 s_set: frozenset[int], l_set: frozenset[int],
                 outputs: Sequence[int]) -> bool:
    """Can the observed outcome arise from this (order, segment) hypothesis?

    Segment members are mutually unordered, so an output position landing in
    a segment zone only requires *some* segment member of the query there.
    """
    qs = query & s_set
    ql = query & l_set
    qm = sorted((e for e in query if e in middle_pos), key=middle_pos.__getitem__)
    exact: set[int] = set()
    need_s = need_l = 0
    for t in outputs:
        if t <= len(qs):
            need_s += 1
        elif t <= len(qs) + len(qm):
            exact.add(qm[t - len(qs) - 1])
        else:
            need_l += 1
    obs_s = observed & s_set
    obs_l = observed & l_set
    obs_m = observed - s_set - l_set
    return (obs_m == exact and len(obs_s) == need_s and obs_s <= query
            and len(obs_l) == need_l and obs_l <= query)


def rebuild_order(adj: AdjacencyMap,
                  transcript: Sequence[tuple[Sequence[int], Sequence[int]]],
                  spec: ScaleSpec) -> SortResult:
    """Walk the adjacency path, then pin direction and segments against the answers.

    Every (orientation, segment split) hypothesis is checked against the full
    transcript; exactly one must survive for an asymmetric instrument, and
    exactly the two reflected readings for a symmetric one.
    """
    if not adj.is_path():
        raise InconsistentAnswersError(
            "surviving adjacency graph is not a path; plan insufficient or n too small")
    seq = adj.walk()
    universe: set[int] = set()
    for q, _ in transcript:
        universe.update(q)
    outside = sorted(universe - adj.support)
    if len(outside) != spec.s_size + spec.l_size:
        raise InconsistentAnswersError(
            f"{len(outside)} elements never answered; expected {spec.s_size + spec.l_size}")
    entries = [(frozenset(q), frozenset(o)) for q, o in dict.fromkeys(
        (tuple(q), tuple(o)) for q, o in transcript)]

    consistent: list[tuple[tuple[int, ...], frozenset[int], frozenset[int]]] = []
    for middle in (tuple(seq), tuple(reversed(seq))):
        pos = {e: i for i, e in enumerate(middle)}
        for s_pick in itertools.combinations(outside, spec.s_size):
            s_set = frozenset(s_pick)
            l_set = frozenset(outside) - s_set
            if all(_match_under(q, o, pos, s_set, l_set, spec.outputs)
                   for q, o in entries):
                consistent.append((middle, s_set, l_set))
    if not consistent:
        raise InconsistentAnswersError("no ordering hypothesis matches the recorded answers")
    if len(consistent) == 1:
        middle, s_set, l_set = consistent[0]
        return SortResult(middle, s_set, l_set, RESOLVED, 0)
    if len(consistent) == 2 and spec.is_symmetric:
        a, b = consistent
        if a[0] == tuple(reversed(b[0])) and a[1] == b[2] and a[2] == b[1]:
            middle, s_set, l_set = a if a[0] <= b[0] else b
            return SortResult(middle, s_set, l_set, REFLECTION_AMBIGUOUS, 0)
    raise InconsistentAnswersError(
        f"{len(consistent)} orderings match the answers; ambiguity beyond reflection")


def adjacency_sort(oracle: Oracle) -> SortResult:
    """Full offline pipeline: plan, answer, eliminate, rebuild."""
    plan = build_adjacency_plan(oracle.n, oracle.spec)
    start = oracle.query_count
    results = answer_plan(oracle, plan)
    used = oracle.query_count - start
    adj = eliminate_nonadjacent(plan, results)
    entries = [(tuple(sorted(q)), tuple(sorted(o))) for q, o in results.items()]
    res = rebuild_order(adj, entries, oracle.spec)
    return SortResult(res.middle, res.s_set, res.l_set, res.orientation, used)


def solve_from_results(plan: QueryPlan,
                       results: Mapping[frozenset[int], frozenset[int]]) -> SortResult:
    """Reconstruct the order from externally supplied answers to a plan."""
    adj = eliminate_nonadjacent(plan, results)
    entries = [(tuple(sorted(q)), tuple(sorted(o))) for q, o in results.items()]
    res = rebuild_order(adj, entries, plan.spec)
    return SortResult(res.middle, res.s_set, res.l_set, res.orientation, plan.size)
