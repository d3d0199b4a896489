"""Scale instruments, hidden orders, the simulated oracle, and result equivalence.

A *scale* takes k distinct elements and reports, as an unordered set, the
elements sitting at fixed rank positions t1 < ... < ts within the queried
set.  Elements are opaque integer labels 0..n-1; the hidden order assigns
each label a rank in 1..n (1 = smallest).  Because the bottom t1-1 and top
k-ts elements of the whole set can never appear in any outcome, their
internal order is not recoverable; we call these the small segment (S) and
the large segment (L).  A symmetric instrument (output positions invariant
under i -> k+1-i) additionally cannot tell an ordering from its reflection.

The Oracle is single-writer: each evaluation mutates the query counter and
transcript, so one oracle must not be shared by concurrent queriers.
Value types (ScaleSpec, HiddenOrder, SortResult) are immutable.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

RESOLVED = "resolved"
REFLECTION_AMBIGUOUS = "reflection_ambiguous"


class ScaleError(ValueError):
    """Base class for all domain errors."""


class QuerySizeError(ScaleError):
    """Query does not contain exactly k elements."""


class DuplicateElementError(ScaleError):
    """Query contains a repeated element id."""


class UnknownElementError(ScaleError):
    """Query references an id outside [0, n)."""


class PartitionError(ScaleError):
    """A result does not partition the element universe as required."""


class UnsupportedScaleError(ScaleError):
    """The requested operation is not defined for this instrument shape."""


class PreconditionError(ScaleError):
    """Structural precondition violated (n too small, pool exhausted, ...)."""


class InconsistentAnswersError(ScaleError):
    """Recorded answers contradict every admissible interpretation."""


@dataclass(frozen=True)
class ScaleSpec:
    """A (k, t1, ..., ts) instrument: arity k, output rank positions `outputs`."""

    k: int
    outputs: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "outputs", tuple(self.outputs))
        if self.k < 2:
            raise ScaleError("arity k must be at least 2")
        if not self.outputs:
            raise ScaleError("at least one output position required")
        if list(self.outputs) != sorted(set(self.outputs)):
            raise ScaleError("output positions must be strictly increasing")
        if self.outputs[0] < 1 or self.outputs[-1] > self.k:
            raise ScaleError("output positions must lie in [1, k]")

    @property
    def s(self) -> int:
        return len(self.outputs)

    @property
    def s_size(self) -> int:
        """Size of the small segment S: t1 - 1."""
        return self.outputs[0] - 1

    @property
    def l_size(self) -> int:
        """Size of the large segment L: k - ts."""
        return self.k - self.outputs[-1]

    @property
    def is_symmetric(self) -> bool:
        return set(self.outputs) == {self.k + 1 - t for t in self.outputs}

    @property
    def k_prime(self) -> int:
        """Reduced arity once the first ts - 1 slots are pre-filled: k - (ts - 1)."""
        return self.k - (self.outputs[-1] - 1)

    def mirrored(self) -> "ScaleSpec":
        """The same physical instrument read against the reversed order."""
        return ScaleSpec(self.k, tuple(sorted(self.k + 1 - t for t in self.outputs)))

    @classmethod
    def parse(cls, text: str) -> "ScaleSpec":
        """Parse the text form "k:t1,t2,..." (e.g. "7:2,6")."""
        try:
            head, _, tail = text.partition(":")
            k = int(head)
            outputs = tuple(int(p) for p in tail.split(","))
        except (TypeError, ValueError) as exc:
            raise ScaleError(f"cannot parse scale spec {text!r}") from exc
        return cls(k, outputs)

    @property
    def text(self) -> str:
        return f"{self.k}:{','.join(str(t) for t in self.outputs)}"

    def __str__(self) -> str:
        return self.text


class ScaleProperties(NamedTuple):
    s_size: int
    l_size: int
    is_symmetric: bool
    k_prime: int


def scale_properties(spec: ScaleSpec) -> ScaleProperties:
    """Segment sizes, symmetry, and reduced arity of an instrument."""
    return ScaleProperties(spec.s_size, spec.l_size, spec.is_symmetric, spec.k_prime)


@dataclass(frozen=True)
class HiddenOrder:
    """A fixed but unknown total order: ranks[eid] = rank of element eid, 1-based."""

    ranks: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "ranks", tuple(self.ranks))
        n = len(self.ranks)
        if sorted(self.ranks) != list(range(1, n + 1)):
            raise ScaleError("ranks must be a bijection onto 1..n")

    @property
    def n(self) -> int:
        return len(self.ranks)

    @property
    def by_rank(self) -> tuple[int, ...]:
        """Element ids sorted from smallest to largest."""
        return tuple(sorted(range(self.n), key=self.ranks.__getitem__))

    def rank_of(self, eid: int) -> int:
        return self.ranks[eid]

    def reversed_(self) -> "HiddenOrder":
        n = self.n
        return HiddenOrder(tuple(n + 1 - r for r in self.ranks))

    @classmethod
    def identity(cls, n: int) -> "HiddenOrder":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_seed(cls, n: int, seed: int) -> "HiddenOrder":
        """Deterministic order: Mersenne Twister seeded with `seed`, Fisher-Yates shuffle."""
        ranks = list(range(1, n + 1))
        random.Random(seed).shuffle(ranks)
        return cls(tuple(ranks))

    def to_list(self) -> list[int]:
        return list(self.ranks)


def outcome_of(ranks: Sequence[int], outputs: Sequence[int], query: Iterable[int]) -> frozenset[int]:
    """Outcome of one query under an explicit rank array. Pure; no validation."""
    ordered = sorted(query, key=ranks.__getitem__)
    return frozenset(ordered[t - 1] for t in outputs)


class Oracle:
    """Simulated instrument over a hidden order.

    Every evaluation is recorded: query_count always equals the transcript
    length, so query accounting cannot be bypassed by callers that only see
    outcomes.  Repeating a query returns the same value but is counted again.
    """

    def __init__(self, order: HiddenOrder, spec: ScaleSpec):
        n = order.n
        # Evaluation only needs a proper universe; the multi-output sorting
        # pipeline additionally requires n > 2k and checks that itself (with
        # n <= 2k a multi-output instrument can leave an indistinguishable
        # middle segment, but its individual queries are still well defined).
        if n < spec.k + 1:
            raise PreconditionError(f"need n >= k+1 (n={n}, k={spec.k})")
        self._order = order
        self._spec = spec
        self._count = 0
        self._transcript: list[tuple[tuple[int, ...], tuple[int, ...]]] = []

    @classmethod
    def from_seed(cls, n: int, spec: ScaleSpec, seed: int) -> "Oracle":
        return cls(HiddenOrder.from_seed(n, seed), spec)

    @property
    def spec(self) -> ScaleSpec:
        return self._spec

    @property
    def n(self) -> int:
        return self._order.n

    @property
    def order(self) -> HiddenOrder:
        return self._order

    @property
    def query_count(self) -> int:
        return self._count

    @property
    def transcript(self) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
        """Recorded (query, outcome) pairs as sorted id tuples."""
        return list(self._transcript)

    def query(self, elements: Iterable[int]) -> frozenset[int]:
        ids = tuple(elements)
        spec = self._spec
        if len(ids) != spec.k:
            raise QuerySizeError(f"query must contain exactly {spec.k} elements, got {len(ids)}")
        qset = frozenset(ids)
        if len(qset) != spec.k:
            raise DuplicateElementError("query contains duplicate element ids")
        ranks = self._order.ranks
        n = len(ranks)
        for e in ids:
            if not 0 <= e < n:
                raise UnknownElementError(f"element id {e} outside [0, {n})")
        ordered = sorted(ids, key=ranks.__getitem__)
        out = frozenset(ordered[t - 1] for t in spec.outputs)
        self._transcript.append((tuple(sorted(ids)), tuple(sorted(out))))
        self._count += 1
        return out

    def transcript_json(self) -> str:
        return transcript_to_json(self._transcript, self.n, self._spec)


def evaluate_query(oracle: Oracle, query: Iterable[int]) -> frozenset[int]:
    """Evaluate one query through the oracle (records and counts it)."""
    return oracle.query(query)


class MirroredOracle:
    """View of an oracle under the mirrored spec.

    The physical outcome of any query is identical for the (k, {t_i}) scale on
    an order and the (k, {k+1-t_i}) scale on the reversed order, so this view
    only swaps the instrument description; evaluation, counting, and the
    transcript are shared with the wrapped oracle.
    """

    def __init__(self, inner):
        self._inner = inner
        self._spec = inner.spec.mirrored()

    @property
    def spec(self) -> ScaleSpec:
        return self._spec

    @property
    def n(self) -> int:
        return self._inner.n

    @property
    def query_count(self) -> int:
        return self._inner.query_count

    @property
    def transcript(self):
        return self._inner.transcript

    def query(self, elements: Iterable[int]) -> frozenset[int]:
        return self._inner.query(elements)


@dataclass(frozen=True)
class SortResult:
    """Recovered ordering: middle sequence plus unordered extreme segments.

    middle lists X minus (S union L) from smallest to largest; s_set and
    l_set are the unordered small/large segments; orientation records
    whether the direction was pinned down or is known only up to global
    reflection (possible only for symmetric instruments, in which case a
    reflected reading also swaps s_set with l_set).
    """

    middle: tuple[int, ...]
    s_set: frozenset[int]
    l_set: frozenset[int]
    orientation: str
    queries_used: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "middle", tuple(self.middle))
        object.__setattr__(self, "s_set", frozenset(self.s_set))
        object.__setattr__(self, "l_set", frozenset(self.l_set))
        if self.orientation not in (RESOLVED, REFLECTION_AMBIGUOUS):
            raise ScaleError(f"unknown orientation {self.orientation!r}")

    def reflected(self) -> "SortResult":
        return SortResult(tuple(reversed(self.middle)), self.l_set, self.s_set,
                          self.orientation, self.queries_used)


def mirror_result(result: SortResult) -> SortResult:
    """Translate a result computed against the mirrored spec back to the original."""
    return SortResult(tuple(reversed(result.middle)), result.l_set, result.s_set,
                      result.orientation, result.queries_used)


def true_partition(truth: HiddenOrder, spec: ScaleSpec) -> tuple[frozenset[int], tuple[int, ...], frozenset[int]]:
    """(S, middle ascending, L) of the hidden order under this instrument."""
    by_rank = truth.by_rank
    n = truth.n
    s_true = frozenset(by_rank[:spec.s_size])
    l_true = frozenset(by_rank[n - spec.l_size:]) if spec.l_size else frozenset()
    mid_true = by_rank[spec.s_size:n - spec.l_size]
    return s_true, mid_true, l_true


def equivalent_up_to_ambiguity(result: SortResult, truth: HiddenOrder, spec: ScaleSpec) -> bool:
    """Does `result` carry exactly the recoverable part of `truth`?

    True iff s_set/l_set are the true extreme segments and middle matches the
    true order of the rest exactly; a reflection_ambiguous result for a
    symmetric instrument may instead match the reflected reading (middle
    reversed, s_set and l_set swapped).
    """
    n = truth.n
    claimed = set(result.middle) | result.s_set | result.l_set
    if len(result.middle) + len(result.s_set) + len(result.l_set) != n or claimed != set(range(n)):
        raise PartitionError("result does not partition the element universe")
    s_true, mid_true, l_true = true_partition(truth, spec)
    if result.s_set == s_true and result.l_set == l_true and result.middle == mid_true:
        return True
    if result.orientation == REFLECTION_AMBIGUOUS and spec.is_symmetric:
        if (result.s_set == l_true and result.l_set == s_true
                and tuple(reversed(result.middle)) == mid_true):
            return True
    return False


def transcript_to_json(entries: Sequence[tuple[Sequence[int], Sequence[int]]],
                       n: int, spec: ScaleSpec) -> str:
    doc = {
        "n": n,
        "spec": spec.text,
        "entries": [{"query": list(q), "outcome": list(o)} for q, o in entries],
    }
    return json.dumps(doc, sort_keys=True)


def transcript_from_json(text: str) -> tuple[list[tuple[tuple[int, ...], tuple[int, ...]]], int, ScaleSpec]:
    doc = json.loads(text)
    spec = ScaleSpec.parse(doc["spec"])
    entries = [(tuple(sorted(e["query"])), tuple(sorted(e["outcome"]))) for e in doc["entries"]]
    return entries, int(doc["n"]), spec
