"""Non-adaptive sorting by deduction from a reference superset.

The plan fixes the k+t-2 lowest-labeled elements as a superset, requests all
queries inside it (the closure) and, for every (t-1)-subset of it, every
query containing that subset.  The closure pins down the superset's middle
t-1 elements, which become an internally ordered reference chain; the answer
to any other query is then deduced by substituting a reference element for
each query member in turn and classifying the response multiplicities.  An
online pass replayed against the deduction engine recovers the full order
without further physical queries.

Deduction candidates are enumerated over every admissible configuration
(substitute position zone, reference members below the target, target inside
the reference); a query resolves when exactly one candidate survives across
substitutes.  The one genuinely ambiguous signature (k = 2t, substitute
above everything) is settled by a multiplicity count over a k+1 pool, which
is sound there because the ambiguity itself certifies that every pool
member outranks both candidates.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Mapping

from .core import (
    MirroredOracle,
    PreconditionError,
    InconsistentAnswersError,
    ScaleError,
    ScaleSpec,
    SortResult,
    UnsupportedScaleError,
    mirror_result,
)
from . import online


class DeductionError(ScaleError):
    """No admissible reading of the probe answers identifies the target."""


def offline_lower_bound(n: int, k: int, t: int) -> int:
    """Least possible size of any one-shot plan: ceil(C(n, k-t+1) / C(k, k-t+1)).

    t is normalized to min(t, k+1-t) first; a plan missing some
    (k-t+1)-set could not split the orderings that hide it at the top.
    """
    if not 1 <= t <= k <= n:
        raise PreconditionError(f"need 1 <= t <= k <= n, got t={t} k={k} n={n}")
    tt = min(t, k + 1 - t)
    num = comb(n, k - tt + 1)
    den = comb(k, k - tt + 1)
    return -(-num // den)


def find_ordered_pair(results: Mapping[frozenset[int], frozenset[int]],
                      spec: ScaleSpec) -> tuple[int, int]:
    """From the k+1 answers over a (k+1)-set, name two elements with known order.

    Only the t-th and (t+1)-th of the pool can be answered; they occur
    k+1-t and t times respectively, which tells them apart whenever the
    instrument is asymmetric.  Returns (smaller, larger).
    """
    if spec.s != 1:
        raise UnsupportedScaleError("ordered-pair extraction needs a singleton instrument")
    k, t = spec.k, spec.outputs[0]
    if len(results) != k + 1:
        raise PreconditionError(f"expected {k + 1} answers, got {len(results)}")
    counts: Counter[int] = Counter()
    for out in results.values():
        if len(out) != 1:
            raise InconsistentAnswersError("non-singleton answer in pair extraction")
        counts[next(iter(out))] += 1
    if len(counts) != 2:
        raise InconsistentAnswersError(
            f"expected exactly two distinct answers, got {len(counts)}")
    (va, ca), (vb, cb) = counts.items()
    if ca == cb:
        raise UnsupportedScaleError(
            "equal answer multiplicities; a symmetric instrument cannot order the pair")
    if sorted((ca, cb)) != sorted((k + 1 - t, t)):
        raise InconsistentAnswersError(
            f"answer multiplicities {sorted((ca, cb))} do not match ({k + 1 - t}, {t})")
    return (va, vb) if ca == k + 1 - t else (vb, va)


@dataclass
class KnowledgeBase:
    """Physically answered queries plus the deduction context.

    chain is the internally ordered reference sequence; below/above hold
    elements known smaller/larger than every chain member; free_pool holds
    reference-superset members with no established relations (still usable
    as substitutes, since substitution needs their fans, not their rank).
    """

    spec: ScaleSpec
    known: dict[frozenset[int], frozenset[int]]
    chain: tuple[int, ...]
    below: tuple[int, ...] = ()
    above: tuple[int, ...] = ()
    free_pool: tuple[int, ...] = ()
    deduced: dict[frozenset[int], frozenset[int]] = field(default_factory=dict)

    def lookup(self, q: frozenset[int]) -> frozenset[int] | None:
        hit = self.known.get(q)
        if hit is None:
            hit = self.deduced.get(q)
        return hit

    def substitute_pool(self) -> tuple[int, ...]:
        return self.chain + self.above + self.below + self.free_pool

    def relation(self, a: int, b: int) -> int | None:
        """-1 if a < b is established, 1 if a > b, None otherwise."""
        fa, fb = self._family(a), self._family(b)
        if fa is None or fb is None:
            return None
        ra, rb = _FAMILY_RANK[fa[0]], _FAMILY_RANK[fb[0]]
        if ra != rb:
            return -1 if ra < rb else 1
        if fa[0] == "chain":
            return -1 if fa[1] < fb[1] else 1
        return None  # same unordered family

    def _family(self, e: int) -> tuple[str, int] | None:
        if e in self.chain:
            return ("chain", self.chain.index(e))
        if e in self.below:
            return ("below", 0)
        if e in self.above:
            return ("above", 0)
        return None


_FAMILY_RANK = {"below": 0, "chain": 1, "above": 2}


def _interpret_absent(counts: Counter[int], k: int, t: int, m: int,
                      beta: int) -> tuple[set[int], set[int]]:
    """Candidate targets when the substitute itself was never answered.

    Enumerates every admissible (zone, references-below-target, target in
    references) configuration; the true configuration is always among them,
    so the target is always in the returned set when it is nonempty.
    """
    if len(counts) != 2:
        return set(), set()
    items = list(counts.items())
    pairings = ((items[0], items[1]), (items[1], items[0]))
    n_p = k - m
    cands: set[int] = set()
    zones: set[int] = set()
    for c_lo in range(0, m + 1):
        for delta in (0, 1):
            if c_lo + delta > m:
                continue
            # Substitute below the whole window: every reference member known
            # below it is also below the target.
            if c_lo >= beta:
                bt = t - 1 - c_lo
                if bt >= 1:
                    for (x, cx), (_, cy) in pairings:
                        if cx == bt and cy == n_p - bt:
                            cands.add(x)
                            zones.add(1)
            # Substitute above the whole window: reference members known
            # above it cannot sit at or below the target.
            if c_lo + delta <= beta:
                bt = (k - t) - (m - c_lo - delta)
                if bt >= 1:
                    for (x, cx), (_, cy) in pairings:
                        if cx == bt and cy == n_p - bt:
                            cands.add(x)
                            zones.add(4)
    return cands, zones


def _pair_order_tiebreak(kb: KnowledgeBase, cands: set[int],
                         pool: list[int], pool_above: bool) -> int | None:
    """Settle a two-candidate tie once every pool member clears both.

    In a stuck state the candidates are the target and one neighbor, and
    the zone certifies the pool sits entirely above (or entirely below)
    both.  A recorded query holding both candidates, enough pool members on
    the certified side, and arbitrary fillers can answer inside the pair
    only at the candidate adjacent to the fillers' side: the other one has
    too many query members beyond it.  The answered candidate is therefore
    the neighbor and the remaining one is the target.  Some filler choice
    must work, because the answered neighbor is itself an answerable
    element with enough elements on the needed side.
    """
    spec = kb.spec
    k, t = spec.k, spec.outputs[0]
    pool_take = k - t if pool_above else t - 1
    filler_take = t - 2 if pool_above else k - t - 1
    if len(pool) < pool_take:
        return None
    chosen_pool = sorted(pool)[:pool_take]
    universe: set[int] = set()
    for q in kb.known:
        universe |= q
    fillers = sorted(universe - cands - set(chosen_pool))
    base = sorted(cands) + chosen_pool
    for combo in itertools.combinations(fillers, filler_take):
        out = kb.lookup(frozenset(base + list(combo)))
        if out is None or len(out) != 1:
            continue
        answered = next(iter(out))
        if answered in cands:
            return next(iter(cands - {answered}))
    return None


def _deduce(kb: KnowledgeBase, q: frozenset[int], busy: set[frozenset[int]]) -> frozenset[int]:
    spec = kb.spec
    k, t = spec.k, spec.outputs[0]
    accum: set[int] | None = None
    sided_subs = {1: [], 4: []}
    zone_mix: set[int] = set()
    busy = busy | {q}
    for w in kb.substitute_pool():
        if w in q:
            continue
        prefix = [p for p in q if kb.relation(p, w) is not None]
        beta = sum(1 for p in prefix if kb.relation(p, w) == -1)
        m = len(prefix)
        victims = sorted(e for e in q if e not in prefix)
        responses: Counter[int] = Counter()
        failed = False
        for e in victims:
            probe = (q - {e}) | {w}
            out = kb.lookup(probe)
            if out is None:
                if probe in busy:
                    failed = True
                    break
                try:
                    out = _deduce(kb, probe, busy)
                except DeductionError:
                    failed = True
                    break
                kb.deduced[probe] = out
            if len(out) != 1:
                raise InconsistentAnswersError("deduction requires singleton answers")
            responses[next(iter(out))] += 1
        if failed:
            continue
        if w in responses:
            others = [v for v in responses if v != w]
            if len(others) == 1:
                return frozenset(others)
            if len(others) > 1:
                raise InconsistentAnswersError(
                    "substitute answered alongside two other values")
            continue  # every probe answered the substitute: no information
        cands, zones = _interpret_absent(responses, k, t, m, beta)
        if len(cands) == 1:
            return frozenset(cands)
        if cands:
            zone_mix |= zones
            if len(zones) == 1:
                sided_subs[next(iter(zones))].append(w)
            accum = set(cands) if accum is None else accum & cands
            if accum and len(accum) == 1:
                return frozenset(accum)
    if accum and len(accum) == 2 and len(zone_mix) == 1:
        # Every run certified the same zone, so the substitutes all clear
        # both candidates on one known side; a direct pair query settles it.
        zone = next(iter(zone_mix))
        settled = _pair_order_tiebreak(kb, accum, sided_subs[zone], zone == 4)
        if settled is not None:
            return frozenset((settled,))
    raise DeductionError(f"cannot deduce the answer for query {sorted(q)}")


def deduce_query(kb: KnowledgeBase, q: Iterable[int]) -> frozenset[int]:
    """Answer an arbitrary query from recorded answers alone (memoized)."""
    spec = kb.spec
    if spec.s != 1:
        raise UnsupportedScaleError("deduction is implemented for singleton instruments")
    if spec.outputs[0] < 2:
        raise UnsupportedScaleError("a minimum instrument leaves nothing to deduce from")
    qs = frozenset(q)
    if len(qs) != spec.k:
        raise PreconditionError(f"query must contain {spec.k} distinct elements")
    hit = kb.lookup(qs)
    if hit is not None:
        return hit
    out = _deduce(kb, qs, set())
    kb.deduced[qs] = out
    return out


@dataclass(frozen=True)
class RecursivePlan:
    """Superset closure plus one fan per (t-1)-subset of the superset."""

    n: int
    spec: ScaleSpec
    superset: tuple[int, ...]

    @property
    def closure_queries(self) -> list[tuple[int, ...]]:
        return list(itertools.combinations(self.superset, self.spec.k))

    def fan_references(self) -> list[tuple[int, ...]]:
        t = self.spec.outputs[0]
        return list(itertools.combinations(self.superset, t - 1))

    def iter_fan_queries(self):
        """Yields (reference, query) pairs; overlapping fans repeat queries."""
        k, t, n = self.spec.k, self.spec.outputs[0], self.n
        for ref in self.fan_references():
            rest = [e for e in range(n) if e not in ref]
            for free in itertools.combinations(rest, k - t + 1):
                yield ref, ref + free

    @property
    def physical_size(self) -> int:
        k, t, n = self.spec.k, self.spec.outputs[0], self.n
        return comb(k + t - 2, k) + comb(k + t - 2, t - 1) * comb(n - t + 1, k - t + 1)


def plan_size_formula(n: int, k: int, t: int) -> int:
    return comb(k + t - 2, k) + comb(k + t - 2, t - 1) * comb(n - t + 1, k - t + 1)


def build_recursive_plan(n: int, k: int, t: int) -> RecursivePlan:
    if not 2 <= t <= (k + 1) / 2:
        raise PreconditionError(f"plan needs 2 <= t <= (k+1)/2, got t={t} k={k}")
    if n <= 2 * k:
        raise PreconditionError(f"plan needs n > 2k, got n={n} k={k}")
    spec = ScaleSpec(k, (t,))
    return RecursivePlan(n, spec, tuple(range(k + t - 2)))


def order_superset(closure_results: Mapping[frozenset[int], frozenset[int]],
                   superset: Iterable[int], spec: ScaleSpec
                   ) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...], tuple[int, ...]]:
    """Order the superset's middle from the closure answers.

    Enumerates every ordering of the superset consistent with the recorded
    closure answers and keeps what they agree on: the middle sequence (the
    chain; canonical reading for a symmetric instrument), plus the sets
    known below and above it.  Members that stay unplaced (possible only
    when the chain has length one) are returned as the free pool.
    """
    members = sorted(superset)
    mlen = len(members)
    if mlen > 9:
        raise PreconditionError("superset too large to order exhaustively")
    # Within the superset the answerable window is ranks [t, 2t-2]: t-1 at
    # the bottom and k-t at the top stay unplaced.
    s_size = spec.s_size
    l_size = spec.l_size
    per_middle: dict[tuple[int, ...], tuple[set[int], set[int]]] = {}
    entries = [(set(q), out) for q, out in closure_results.items()]
    for perm in itertools.permutations(members):
        ok = True
        index = {e: i for i, e in enumerate(perm)}
        for qset, out in entries:
            ordered = sorted(qset, key=index.__getitem__)
            if frozenset(ordered[t - 1] for t in spec.outputs) != out:
                ok = False
                break
        if not ok:
            continue
        mid = perm[s_size:mlen - l_size]
        lo, hi = set(perm[:s_size]), set(perm[mlen - l_size:])
        if mid in per_middle:
            per_middle[mid][0].intersection_update(lo)
            per_middle[mid][1].intersection_update(hi)
        else:
            per_middle[mid] = (lo, hi)
    if not per_middle:
        raise InconsistentAnswersError("no superset ordering matches the closure answers")
    chain = min(per_middle)
    below, above = per_middle[chain]
    free = tuple(e for e in members if e not in chain and e not in below and e not in above)
    return chain, tuple(sorted(below)), tuple(sorted(above)), free


class ReplayOracle:
    """Oracle-shaped adapter that answers from a knowledge base.

    Used to rerun the adaptive algorithm after a one-shot plan: lookups and
    deductions replace physical queries, so nothing here counts toward the
    plan size.
    """

    def __init__(self, spec: ScaleSpec, n: int, kb: KnowledgeBase):
        self._spec = spec
        self._n = n
        self._kb = kb
        self._count = 0
        self._transcript: list[tuple[tuple[int, ...], tuple[int, ...]]] = []

    @property
    def spec(self) -> ScaleSpec:
        return self._spec

    @property
    def n(self) -> int:
        return self._n

    @property
    def query_count(self) -> int:
        return self._count

    @property
    def transcript(self):
        return list(self._transcript)

    def query(self, elements: Iterable[int]) -> frozenset[int]:
        qs = frozenset(elements)
        if len(qs) != self._spec.k:
            raise PreconditionError(f"query must contain {self._spec.k} distinct elements")
        out = self._kb.lookup(qs)
        if out is None:
            out = deduce_query(self._kb, qs)
        self._transcript.append((tuple(sorted(qs)), tuple(sorted(out))))
        self._count += 1
        return out


def recursive_sort(oracle, t2_shortcut: bool = False) -> SortResult:
    """One-shot plan, deduction, and an adaptive replay over the answers.

    queries_used counts physical plan entries (overlapping fans resubmit
    their shared queries).  With t2_shortcut and t = 2, a single fixed
    element's fan replaces the generic plan; this smaller plan cannot settle
    the k = 2t tie and is therefore optional.
    """
    spec = oracle.spec
    if spec.s != 1:
        raise UnsupportedScaleError("recursive_sort requires a singleton instrument")
    k, t = spec.k, spec.outputs[0]
    if t > (k + 1) / 2:
        return mirror_result(recursive_sort(MirroredOracle(oracle), t2_shortcut))
    n = oracle.n
    if n <= 2 * k:
        raise PreconditionError(f"recursive_sort needs n > 2k, got n={n} k={k}")

    if t == 1:
        known: dict[frozenset[int], frozenset[int]] = {}
        for combo in itertools.combinations(range(n), k):
            known[frozenset(combo)] = oracle.query(combo)
        kb = KnowledgeBase(spec, known, chain=())
        used = comb(n, k)
    elif t2_shortcut and t == 2:
        known = {}
        for free in itertools.combinations(range(1, n), k - 1):
            q = (0,) + free
            known[frozenset(q)] = oracle.query(q)
        kb = KnowledgeBase(spec, known, chain=(0,))
        used = comb(n - 1, k - 1)
    else:
        plan = build_recursive_plan(n, k, t)
        closure_results: dict[frozenset[int], frozenset[int]] = {}
        for q in plan.closure_queries:
            closure_results[frozenset(q)] = oracle.query(q)
        known = dict(closure_results)
        for _, q in plan.iter_fan_queries():
            known[frozenset(q)] = oracle.query(q)
        chain, below, above, free = order_superset(closure_results, plan.superset, spec)
        kb = KnowledgeBase(spec, known, chain, below, above, free)
        used = plan.physical_size

    replay = ReplayOracle(spec, n, kb)
    res = online.singleton_sort(replay)
    return SortResult(res.middle, res.s_set, res.l_set, res.orientation, used)
