"""Adaptive sorting strategies.

Singleton instruments run three stages: eliminate everything that ever gets
answered (what remains is S union L), split that remainder into S and L with
one fixed reference query per candidate, then repeatedly extract minima of
the rest through a k'-ary block hierarchy whose queries always pre-fill the
bottom of the instrument with S.  Multi-output instruments run the analogous
stages, then grow a prefix S' of the first ts - 1 elements by re-running the
stages on the shrinking set, reduce to a (k', 1) instrument by always
including S', and finish the leftover prefix elements with a max-extraction
instrument padded by known-large elements.

All choices the method leaves open ("pick a k-set", "pick an arbitrary
set") resolve to lowest-label selection, so transcripts are reproducible.
Each trial is strictly sequential; every query depends on earlier answers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import (
    MirroredOracle,
    PreconditionError,
    RESOLVED,
    REFLECTION_AMBIGUOUS,
    InconsistentAnswersError,
    ScaleError,
    ScaleSpec,
    SortResult,
    UnsupportedScaleError,
    mirror_result,
)
from . import offline_adjacency

A_IS_SMALL = "a_is_small"
B_IS_SMALL = "b_is_small"
UNKNOWN = "unknown"


@dataclass
class CandidateState:
    """Pool of elements still possibly extreme, plus the elimination order."""

    candidates: set[int]
    eliminated: list[int]


@dataclass
class EliminationStats:
    initial_queries: int = 0
    refinement_queries: int = 0


def _eliminate(oracle, universe: list[int], stats: EliminationStats | None = None) -> CandidateState:
    """Identify S union L within `universe` by discarding everything answered.

    The initial loop queries the k lowest-labeled surviving candidates
    (topped up with already-discarded low-label elements when fewer than k
    remain) until k - s candidates survive.  For non-consecutive output
    positions the survivors may still contain impostors; each refinement
    round takes the 2a-1 lowest-labeled discarded elements (a = k minus the
    survivor count) and runs every a-subset of them alongside the survivors,
    discarding any survivor that gets answered.
    """
    spec = oracle.spec
    k, s = spec.k, spec.s
    candidates = set(universe)
    eliminated: list[int] = []
    initial_target = k - s
    final_target = k - 1 - (spec.outputs[-1] - spec.outputs[0])
    if len(candidates) <= k:
        raise PreconditionError("universe too small to identify the extreme segments")

    q0 = oracle.query_count
    while len(candidates) > initial_target:
        cand_sorted = sorted(candidates)
        if len(cand_sorted) >= k:
            q = cand_sorted[:k]
        else:
            fillers = sorted(set(universe) - candidates)[:k - len(cand_sorted)]
            if len(cand_sorted) + len(fillers) < k:
                raise PreconditionError("not enough discarded elements to fill a query")
            q = cand_sorted + fillers
        out = oracle.query(q)
        newly = sorted(out & candidates)
        if not newly:
            break
        candidates -= set(newly)
        eliminated.extend(newly)
    if stats is not None:
        stats.initial_queries = oracle.query_count - q0

    q1 = oracle.query_count
    while len(candidates) > final_target:
        a = k - len(candidates)
        donors = sorted(set(universe) - candidates)
        if len(donors) < 2 * a - 1:
            raise PreconditionError(
                f"need {2 * a - 1} discarded elements for refinement, have {len(donors)}")
        donors = donors[:2 * a - 1]
        base = sorted(candidates)
        hit: set[int] = set()
        for combo in itertools.combinations(donors, a):
            out = oracle.query(base + list(combo))
            hit |= out & candidates
        if not hit:
            raise InconsistentAnswersError(
                "refinement made no progress; extreme-segment identification failed")
        candidates -= hit
        eliminated.extend(sorted(hit))
    if stats is not None:
        stats.refinement_queries = oracle.query_count - q1
    return CandidateState(candidates, eliminated)


def eliminate_candidates(oracle) -> CandidateState:
    """Stage one on the full universe: candidates end up exactly S union L."""
    return _eliminate(oracle, list(range(oracle.n)))


@dataclass(frozen=True)
class PartitionResult:
    group_a: frozenset[int]
    group_b: frozenset[int]
    labeling: str  # A_IS_SMALL, B_IS_SMALL, or UNKNOWN


def _partition(oracle, universe: list[int], candidates: set[int]) -> PartitionResult:
    """Split S union L into its two segments.

    Each candidate is queried with one fixed reference set of k-1 discarded
    elements; candidates from the same segment produce identical outcomes.
    When the segment sizes differ, the group whose size matches t1 - 1 is
    the small one; equal sizes leave the labeling unknown.
    """
    spec = oracle.spec
    k = spec.k
    reference = sorted(set(universe) - candidates)[:k - 1]
    if len(reference) < k - 1:
        raise PreconditionError("fewer than k-1 discarded elements available as reference")
    groups: dict[frozenset[int], set[int]] = {}
    for c in sorted(candidates):
        out = oracle.query([c] + reference)
        groups.setdefault(out, set()).add(c)
    if len(groups) > 2:
        raise InconsistentAnswersError(
            "more than two outcome shapes while splitting the extreme segments")
    parts = sorted((frozenset(g) for g in groups.values()), key=min)
    while len(parts) < 2:
        parts.append(frozenset())
    a, b = parts[0], parts[1]
    if spec.s_size != spec.l_size:
        if sorted((len(a), len(b))) != sorted((spec.s_size, spec.l_size)):
            raise InconsistentAnswersError("segment group sizes do not match the instrument")
        labeling = A_IS_SMALL if len(a) == spec.s_size else B_IS_SMALL
    else:
        labeling = UNKNOWN
    return PartitionResult(a, b, labeling)


def partition_sl(oracle, candidates: set[int]) -> PartitionResult:
    return _partition(oracle, list(range(oracle.n)), candidates)


class LevelGrid:
    """k'-ary block hierarchy over a fixed item list with cached block minima.

    Level 1 chunks the items into blocks of at most `branching`; each higher
    level chunks the blocks below it, up to a single top block at depth d.
    Blocks holding a single live value resolve without a query.  After the
    overall minimum is removed, only the blocks along its chain are
    re-evaluated; all other cached minima stay valid.
    """

    def __init__(self, items: list[int], branching: int, find_min):
        if branching < 1:
            raise ScaleError("branching must be positive")
        self.branching = branching
        self.find_min = find_min
        self.blocks: list[list[int]] = [list(items[i:i + branching])
                                        for i in range(0, len(items), branching)]
        sizes = [len(self.blocks)]
        while sizes[-1] > 1:
            sizes.append(-(-sizes[-1] // branching))
        self.depth = len(sizes)
        self.loc = {e: i for i, b in enumerate(self.blocks) for e in b}
        first: list[int | None] = [self._block_min(b) for b in self.blocks]
        self.mins: list[list[int | None]] = [first]
        for size in sizes[1:]:
            row: list[int | None] = []
            for g in range(size):
                children = self.mins[-1][g * branching:(g + 1) * branching]
                row.append(self._group_min(children))
            self.mins.append(row)

    def _block_min(self, block: list[int]) -> int | None:
        if not block:
            return None
        if len(block) == 1:
            return block[0]
        return self.find_min(block)

    def _group_min(self, children: list[int | None]) -> int | None:
        live = [c for c in children if c is not None]
        if not live:
            return None
        if len(live) == 1:
            return live[0]
        return self.find_min(live)

    def top(self) -> int | None:
        return self.mins[-1][0]

    def extract(self) -> int:
        """Remove and return the current overall minimum, re-querying only its chain."""
        value = self.top()
        if value is None:
            raise ScaleError("grid exhausted")
        idx = self.loc[value]
        self.blocks[idx].remove(value)
        self.mins[0][idx] = self._block_min(self.blocks[idx])
        for level in range(1, self.depth):
            idx //= self.branching
            children = self.mins[level - 1][idx * self.branching:(idx + 1) * self.branching]
            self.mins[level][idx] = self._group_min(children)
        return value


def _ordered_by_extraction(items: list[int], branching: int, find_min) -> list[int]:
    if not items:
        return []
    if len(items) == 1:
        return list(items)
    grid = LevelGrid(items, branching, find_min)
    return [grid.extract() for _ in range(len(items))]


def _min_finder(oracle, prefix: list[int], pad_pool: list[int], branching: int):
    """Query closure returning the minimum of a block of at most `branching` elements.

    Each query is prefix + block + pads; the prefix occupies the bottom of
    the instrument and the pads are known larger than any block element, so
    exactly one answered element lies outside the prefix: the block minimum.
    """
    fill = list(prefix)
    fill_set = frozenset(fill)
    pads = sorted(pad_pool)

    def find_min(block: list[int]) -> int:
        need = branching - len(block)
        if need > len(pads):
            raise PreconditionError("pad pool exhausted while sizing a query")
        out = oracle.query(fill + list(block) + pads[:need])
        extra = out - fill_set
        if len(extra) != 1:
            raise InconsistentAnswersError("reduced instrument did not isolate one element")
        return next(iter(extra))

    return find_min


def tournament_sort(oracle, s_set: set[int], l_set: set[int], middle: set[int]) -> SortResult:
    """Order `middle` by repeated minimum extraction (stage three).

    Requires a singleton instrument and correct (or, for a symmetric
    instrument, consistently swapped) s_set/l_set.  Query total is at most
    2 * d * n' where d is the grid depth.
    """
    spec = oracle.spec
    if spec.s != 1:
        raise UnsupportedScaleError("tournament stage runs on singleton instruments")
    start = oracle.query_count
    find_min = _min_finder(oracle, sorted(s_set), sorted(l_set), spec.k_prime)
    ordered = _ordered_by_extraction(sorted(middle), spec.k_prime, find_min)
    return SortResult(tuple(ordered), frozenset(s_set), frozenset(l_set),
                      RESOLVED, oracle.query_count - start)


def _small_pool_sort(oracle) -> SortResult:
    """Exhaustive fallback for n < 2k - 2, where no k-1 reference set exists.

    Every possible query is evaluated and the order is reconstructed from
    the complete answer table by adjacency elimination.
    """
    n, spec = oracle.n, oracle.spec
    start = oracle.query_count
    plan = offline_adjacency.QueryPlan(
        n, spec, 0,
        (offline_adjacency.Fan(
            frozenset(),
            tuple(frozenset(c) for c in itertools.combinations(range(n), spec.k))),))
    results = offline_adjacency.answer_plan(oracle, plan)
    used = oracle.query_count - start
    adj = offline_adjacency.eliminate_nonadjacent(plan, results)
    entries = [(tuple(sorted(q)), tuple(sorted(o))) for q, o in results.items()]
    res = offline_adjacency.rebuild_order(adj, entries, spec)
    return SortResult(res.middle, res.s_set, res.l_set, res.orientation, used)


def singleton_sort(oracle) -> SortResult:
    """Full adaptive pipeline for a (k, t) instrument."""
    spec = oracle.spec
    if spec.s != 1:
        raise UnsupportedScaleError("singleton_sort requires a single output position")
    t, k = spec.outputs[0], spec.k
    if t - 1 > k - t:
        return mirror_result(singleton_sort(MirroredOracle(oracle)))
    n = oracle.n
    start = oracle.query_count
    if n < 2 * k - 2:
        return _small_pool_sort(oracle)
    state = _eliminate(oracle, list(range(n)))
    part = _partition(oracle, list(range(n)), state.candidates)
    if part.labeling == B_IS_SMALL:
        s_set, l_set = part.group_b, part.group_a
    else:
        s_set, l_set = part.group_a, part.group_b
    ambiguous = part.labeling == UNKNOWN
    middle = set(range(n)) - state.candidates
    res = tournament_sort(oracle, set(s_set), set(l_set), middle)
    orientation = REFLECTION_AMBIGUOUS if ambiguous else RESOLVED
    return SortResult(res.middle, frozenset(s_set), frozenset(l_set),
                      orientation, oracle.query_count - start)


@dataclass
class MultiSortStats:
    """Per-stage query counts of the first pass plus pipeline shape."""

    initial_elimination: int = 0
    refinement: int = 0
    partition: int = 0
    rounds: int = 1
    extra: int = 0


def multi_elimination_bound(n: int, spec: ScaleSpec) -> int:
    """Query allowance of the initial elimination loop: ceil((n - (k - s)) / s)."""
    return -(-(n - (spec.k - spec.s)) // spec.s)


def _staged_multi_sort(oracle, stats: MultiSortStats) -> SortResult:
    spec = oracle.spec
    n, k = oracle.n, spec.k
    t1, ts = spec.outputs[0], spec.outputs[-1]
    s_size = spec.s_size
    universe = list(range(n))
    start = oracle.query_count

    estats = EliminationStats()
    state = _eliminate(oracle, universe, estats)
    stats.initial_elimination = estats.initial_queries
    stats.refinement = estats.refinement_queries
    p0 = oracle.query_count
    part = _partition(oracle, universe, state.candidates)
    stats.partition = oracle.query_count - p0

    assumed = part.labeling == UNKNOWN
    if part.labeling == B_IS_SMALL:
        s_first, l_set = part.group_b, part.group_a
    else:
        s_first, l_set = part.group_a, part.group_b

    # Build S', the first ts - 1 elements, peeling one small segment per
    # round; the final round re-inserts previously removed elements when
    # fewer than s_size fresh ones are needed.
    sprime: set[int] = set(s_first)
    need = ts - 1
    while len(sprime) < need:
        stats.rounds += 1
        remaining = need - len(sprime)
        reinserted: set[int] = set()
        if remaining < s_size:
            reinserted = set(sorted(sprime)[:s_size - remaining])
        working = sorted(set(universe) - (sprime - reinserted))
        st = _eliminate(oracle, working)
        pr = _partition(oracle, working, st.candidates)
        if not assumed:
            layer = pr.group_a if len(pr.group_a) == s_size else pr.group_b
        else:
            if pr.group_a == l_set:
                layer = pr.group_b
            elif pr.group_b == l_set:
                layer = pr.group_a
            else:
                raise InconsistentAnswersError(
                    "large segment did not reappear while peeling prefix layers")
        if len(layer) != s_size or (reinserted and not reinserted <= layer):
            raise InconsistentAnswersError("prefix round produced an unexpected layer")
        sprime |= layer

    # Reduce to a (k', 1) instrument: every query includes S'; pads from L.
    middle_rest = sorted(set(universe) - sprime - l_set)
    find_min = _min_finder(oracle, sorted(sprime), sorted(l_set), spec.k_prime)
    ordered_rest = _ordered_by_extraction(middle_rest, spec.k_prime, find_min)

    # Sort S' minus S with a max-extraction instrument: k - t1 known-large
    # pads on top, known-small pads from S when a batch runs short.
    remnant = sorted(sprime - set(s_first))
    extra_from_mid = (k - t1) - len(l_set)
    if extra_from_mid > len(ordered_rest):
        raise PreconditionError("not enough sorted elements to pad the max instrument")
    pads_large = sorted(l_set) + ordered_rest[len(ordered_rest) - extra_from_mid:]
    pads_large_set = set(pads_large)
    small_pool = sorted(s_first)
    remnant_desc: list[int] = []
    remaining_set = set(remnant)
    while remaining_set:
        if len(remaining_set) == 1:
            remnant_desc.append(remaining_set.pop())
            break
        items = sorted(remaining_set)
        champ: int | None = None
        i = 0
        while i < len(items) or champ is None:
            take = t1 - (1 if champ is not None else 0)
            group = ([champ] if champ is not None else []) + items[i:i + take]
            i += take
            if len(group) == 1:
                champ = group[0]
                continue
            pads_small = small_pool[:t1 - len(group)]
            out = oracle.query(group + pads_small + pads_large)
            top = out - pads_large_set
            if len(top) != 1:
                raise InconsistentAnswersError("max instrument did not isolate one element")
            champ = next(iter(top))
        remnant_desc.append(champ)
        remaining_set.remove(champ)
    middle_full = list(reversed(remnant_desc)) + ordered_rest

    s_set = frozenset(s_first)
    l_out = frozenset(l_set)
    orientation = RESOLVED
    if assumed:
        if spec.is_symmetric:
            orientation = REFLECTION_AMBIGUOUS
        else:
            # One check query over known middle elements pins the direction.
            if len(middle_full) < k:
                raise PreconditionError("middle too small for the direction check")
            probe = middle_full[:k]
            predicted = frozenset(probe[t - 1] for t in spec.outputs)
            actual = oracle.query(probe)
            if actual != predicted:
                reversed_pred = frozenset(probe[k - t] for t in spec.outputs)
                if actual != reversed_pred:
                    raise InconsistentAnswersError("direction check matched neither reading")
                middle_full.reverse()
                s_set, l_out = l_out, s_set
    return SortResult(tuple(middle_full), s_set, l_out, orientation,
                      oracle.query_count - start)


def _prefix_run_sort(oracle, stats: MultiSortStats) -> SortResult:
    """Pipeline for instruments reporting exactly positions 1..j (j < k).

    The j globally smallest elements all appear in every outcome of a query
    containing any of them, so no permutation among them is observable; they
    are identified as a set by keep-elimination and returned in label order,
    which is the most the answers determine.  The rest is sorted through the
    reduced instrument with j - 1 of the block members as the fixed prefix.
    """
    spec = oracle.spec
    n, k = oracle.n, spec.k
    j = spec.outputs[-1]
    universe = list(range(n))
    start = oracle.query_count

    estats = EliminationStats()
    state = _eliminate(oracle, universe, estats)
    stats.initial_elimination = estats.initial_queries
    stats.refinement = estats.refinement_queries
    p0 = oracle.query_count
    part = _partition(oracle, universe, state.candidates)
    stats.partition = oracle.query_count - p0
    if part.labeling == A_IS_SMALL:
        l_set = set(part.group_b)
    elif part.labeling == B_IS_SMALL:
        l_set = set(part.group_a)
    else:
        raise InconsistentAnswersError("prefix instrument must label its segments by size")

    # Keep-elimination: survivors of "am I always among the answers?" are
    # exactly the j smallest elements of the working set.
    working = set(universe) - l_set
    block = set(working)
    x0 = oracle.query_count
    while len(block) > j:
        cand_sorted = sorted(block)
        q = cand_sorted[:k]
        if len(q) < k:
            q = q + sorted(set(universe) - block)[:k - len(q)]
        out = oracle.query(q)
        block -= (set(q) & block) - out
    stats.extra = oracle.query_count - x0

    prefix = sorted(block)[:j - 1]
    rest = sorted(working - block)
    find_min = _min_finder(oracle, prefix, sorted(l_set), spec.k_prime)
    ordered_rest = _ordered_by_extraction(rest, spec.k_prime, find_min)
    middle = tuple(sorted(block)) + tuple(ordered_rest)
    return SortResult(middle, frozenset(), frozenset(l_set), RESOLVED,
                      oracle.query_count - start)


def multi_sort_with_stats(oracle) -> tuple[SortResult, MultiSortStats]:
    spec = oracle.spec
    if spec.s < 2:
        raise UnsupportedScaleError("multi_sort requires at least two output positions")
    if oracle.n <= 2 * spec.k:
        raise PreconditionError(
            f"multi-output sorting needs n > 2k (n={oracle.n}, k={spec.k}); below that "
            "an indistinguishable middle segment can exist")
    t1, ts, k = spec.outputs[0], spec.outputs[-1], spec.k
    stats = MultiSortStats()
    if t1 == 1:
        if spec.outputs == tuple(range(1, ts + 1)) and ts < k:
            return _prefix_run_sort(oracle, stats), stats
        raise UnsupportedScaleError(
            "instruments reporting position 1 are supported only for a"
            " consecutive prefix of positions")
    if ts == k:
        mirrored = MirroredOracle(oracle)
        mspec = mirrored.spec
        if mspec.outputs == tuple(range(1, mspec.outputs[-1] + 1)) and mspec.outputs[-1] < k:
            res = mirror_result(_prefix_run_sort(mirrored, stats))
            # The unorderable top block comes back reversed; restore the
            # label-order presentation used on the prefix side.
            j = mspec.outputs[-1]
            middle = res.middle[:-j] + tuple(sorted(res.middle[-j:]))
            return SortResult(middle, res.s_set, res.l_set, res.orientation,
                              res.queries_used), stats
        raise UnsupportedScaleError(
            "instruments reporting position k are supported only for a"
            " consecutive suffix of positions")
    return _staged_multi_sort(oracle, stats), stats


def multi_sort(oracle) -> SortResult:
    """Full adaptive pipeline for a (k, t1, ..., ts) instrument with s >= 2."""
    result, _ = multi_sort_with_stats(oracle)
    return result


def sort_online(oracle) -> SortResult:
    """Dispatch to the singleton or multi-output pipeline."""
    return singleton_sort(oracle) if oracle.spec.s == 1 else multi_sort(oracle)


def smallest_asymmetric_index(spec: ScaleSpec) -> int:
    """Least p where exactly one of positions p and k+1-p is reported."""
    outs = set(spec.outputs)
    for p in range(1, spec.k + 1):
        if (p in outs) != (spec.k + 1 - p in outs):
            return p
    raise UnsupportedScaleError("instrument is symmetric; no asymmetric index exists")


@dataclass(frozen=True)
class LayeredSegments:
    """Nested extreme-segment pairs peeled from the working set.

    pairs[i] holds (small_i, large_i): the extreme segments of what remained
    after peeling pairs 0..i-1.  p is the least asymmetric position index of
    the instrument.
    """

    pairs: tuple[tuple[frozenset[int], frozenset[int]], ...]
    p: int


def resolve_sl_layered(oracle, pairs_needed: int) -> LayeredSegments:
    """Identify which extreme segment is which by peeling nested layers.

    Useful for asymmetric multi-output instruments whose two segments have
    the same size (so the split stage cannot label them).  Nested pairs are
    peeled; layers at and beyond the least asymmetric index p are labeled by
    probes whose composition places the tested element at two candidate
    positions of which exactly one is reported; shallower layers are then
    classified against the labeled ones.  Returns at least `pairs_needed`
    labeled pairs.
    """
    spec = oracle.spec
    if spec.s < 2:
        raise UnsupportedScaleError("layer labeling applies to multi-output instruments")
    if spec.is_symmetric:
        raise UnsupportedScaleError("layer labeling is undefined for symmetric instruments")
    p = smallest_asymmetric_index(spec)
    n, k = oracle.n, spec.k
    t1, ts = spec.outputs[0], spec.outputs[-1]
    if t1 == 1 or ts == k:
        raise UnsupportedScaleError("layer labeling needs nonempty segments on both sides")
    outs = set(spec.outputs)
    depth = max(pairs_needed, p + ts - 2)
    pair_size = spec.s_size + spec.l_size

    working = set(range(n))
    raw_pairs: list[tuple[frozenset[int], frozenset[int]]] = []
    for _ in range(depth):
        if len(working) <= 2 * k + pair_size:
            raise PreconditionError("n too small to peel the required number of layers")
        st = _eliminate(oracle, sorted(working))
        pr = _partition(oracle, sorted(working), st.candidates)
        raw_pairs.append((pr.group_a, pr.group_b))
        working -= set(pr.group_a) | set(pr.group_b)
    balancers = sorted(working)

    # Label layers from index p-1 on (0-based).  A probe holds, for each
    # shallower pair, either both sides (unlabeled: one lands at the bottom
    # and one at the top whichever way around they are) or the small anchor
    # only; the tested element then sits at position u + kappa + 1 if small
    # and k - u if large, and the composition is chosen so that exactly one
    # of those positions is reported.
    small_of: dict[int, frozenset[int]] = {}
    for idx in range(p - 1, depth):
        ga, gb = raw_pairs[idx]
        unlabeled = [raw_pairs[i] for i in range(idx) if i not in small_of]
        anchors = [min(small_of[i]) for i in sorted(small_of) if i < idx]
        c = min(ga)
        found = None
        for u in range(len(unlabeled), -1, -1):
            for kappa in range(len(anchors), -1, -1):
                f = k - (2 * u + kappa + 1)
                if f < 1 or f > len(balancers):
                    continue
                pos_low = u + kappa + 1
                pos_high = k - u
                if (pos_low in outs) != (pos_high in outs):
                    found = (u, kappa, f, pos_low)
                    break
            if found:
                break
        if found is None:
            raise UnsupportedScaleError(
                f"no probe composition separates the readings of layer {idx + 1}")
        u, kappa, f, pos_low = found
        query = ([min(pr_[0]) for pr_ in unlabeled[:u]]
                 + [min(pr_[1]) for pr_ in unlabeled[:u]]
                 + anchors[:kappa] + [c] + balancers[:f])
        out = oracle.query(query)
        small_of[idx] = ga if (c in out) == (pos_low in outs) else gb

    # Shallower layers sit at symmetric positions, so membership of the
    # tested element cannot decide; instead ts - 1 labeled small anchors
    # from deeper layers shift by one slot between the two readings and the
    # anchor membership pattern decides.
    for idx in range(p - 1):
        ga, gb = raw_pairs[idx]
        deeper = [i for i in sorted(small_of) if i > idx]
        kappa = ts - 1
        if len(deeper) < kappa:
            raise UnsupportedScaleError(f"not enough labeled layers to classify layer {idx + 1}")
        anchors = [min(small_of[i]) for i in deeper[:kappa]]
        f = k - 1 - kappa
        if f < 0 or f > len(balancers):
            raise UnsupportedScaleError(f"cannot size the probe for layer {idx + 1}")
        c = min(ga)
        out = oracle.query([c] + anchors + balancers[:f])
        low_hits = frozenset(anchors[t - 2] for t in outs if 2 <= t <= kappa + 1)
        high_hits = frozenset(anchors[t - 1] for t in outs if t <= kappa)
        known = {c} | set(anchors)
        observed_known = frozenset(out & known)
        if observed_known == low_hits and len(out - known) == len(outs) - len(low_hits):
            small_of[idx] = ga
        elif observed_known == high_hits and len(out - known) == len(outs) - len(high_hits):
            small_of[idx] = gb
        else:
            raise InconsistentAnswersError(f"probe pattern for layer {idx + 1} matches no reading")

    pairs = []
    for idx in range(depth):
        ga, gb = raw_pairs[idx]
        small = small_of[idx]
        pairs.append((small, gb if small == ga else ga))
    return LayeredSegments(tuple(pairs), p)
