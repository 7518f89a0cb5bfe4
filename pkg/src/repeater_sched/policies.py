"""Scheduling of purification and swapping on a two-link repeater.

Node names are ``"s"`` (source), ``"r"`` (repeater) and ``"d"`` (destination).
An s-r pair occupies memory ``i`` of s and memory ``i`` of r; an r-d pair
occupies memory ``M + i`` of r and memory ``i`` of d. End-to-end pairs hold
one memory at s and one at d.

Pair ids of operation outputs record their ancestry: ``p(a,b)`` is the
purification of ``a`` and ``b`` and ``s(a,b)`` the swap of ``a`` with ``b``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .matching import Matching, WeightedGraph, max_weight_matching
from .quantum import (
    UtilityKind,
    aggregate_utility,
    check_fidelity,
    g_value,
    inner_sum,
    purify_fidelity,
    purify_success_prob,
    swap_fidelity,
)


class Span(str, enum.Enum):
    SR = "SR"
    RD = "RD"
    E2E = "E2E"


# (left node, right node) holding each span's qubits
SPAN_NODES = {Span.SR: ("s", "r"), Span.RD: ("r", "d"), Span.E2E: ("s", "d")}


class Policy(str, enum.Enum):
    PTS = "PtS"
    STP = "StP"
    SWAP_ONLY = "SwapOnly"


@dataclass(frozen=True)
class EntPair:
    id: str
    span: Span
    left_slot: int
    right_slot: int
    fidelity: float
    birth_slot: int = 0
    purified: bool = False

    def memories(self) -> tuple[tuple[str, int], tuple[str, int]]:
        ln, rn = SPAN_NODES[Span(self.span)]
        return (ln, self.left_slot), (rn, self.right_slot)


@dataclass(frozen=True)
class NetworkSnapshot:
    sr_pairs: tuple[EntPair, ...] = ()
    rd_pairs: tuple[EntPair, ...] = ()
    current_slot: int = 0

    def __post_init__(self):
        object.__setattr__(self, "sr_pairs", tuple(self.sr_pairs))
        object.__setattr__(self, "rd_pairs", tuple(self.rd_pairs))
        seen: set[tuple[str, int]] = set()
        ids: set[str] = set()
        for span, pairs in ((Span.SR, self.sr_pairs), (Span.RD, self.rd_pairs)):
            for p in pairs:
                if p.span != span:
                    raise ValueError(f"pair {p.id} has span {p.span}, expected {span}")
                check_fidelity(p.fidelity, f"fidelity of {p.id}")
                if p.id in ids:
                    raise ValueError(f"duplicate pair id {p.id}")
                ids.add(p.id)
                for mem in p.memories():
                    if mem in seen:
                        raise ValueError(f"memory {mem} holds two pairs")
                    seen.add(mem)


@dataclass(frozen=True)
class SuccessModel:
    swap_success_p: float = 1.0
    purification_stochastic: bool = True

    def __post_init__(self):
        if not 0.0 <= self.swap_success_p <= 1.0:
            raise ValueError(f"swap_success_p must lie in [0, 1], got {self.swap_success_p}")


@dataclass(frozen=True)
class PurificationRecord:
    first: str
    second: str
    success: bool
    output: str | None


@dataclass(frozen=True)
class SwapRecord:
    sr: str
    rd: str
    success: bool


@dataclass
class ScheduleOutcome:
    e2e_pairs: list[EntPair] = field(default_factory=list)
    purifications: list[PurificationRecord] = field(default_factory=list)
    swaps: list[SwapRecord] = field(default_factory=list)
    freed_slots: list[tuple[str, int]] = field(default_factory=list)
    # link-level pairs still held after the schedule (unmatched or purified and not swapped)
    remaining: list[EntPair] = field(default_factory=list)
    swap_matching_weight: float = 0.0

    def fidelities(self) -> list[float]:
        return [p.fidelity for p in self.e2e_pairs]

    def utility(self, kind: UtilityKind | str):
        return aggregate_utility(kind, self.fidelities())

    def inner_sum(self, kind: UtilityKind | str) -> float:
        return inner_sum(kind, self.fidelities())


# --- graph construction ----------------------------------------------------


@dataclass(frozen=True)
class PurifyGraph:
    """Purification instance: node ``i`` is ``pairs[i]`` and node ``n + i`` its
    replica, whose single edge means "leave pair i alone"."""

    graph: WeightedGraph
    pairs: tuple[EntPair, ...]

    def decode(self, m: Matching) -> tuple[list[tuple[int, int]], list[int]]:
        """Split a matching into merges ``(i, j)`` and untouched pair indices."""
        n = len(self.pairs)
        merges = []
        merged: set[int] = set()
        for u, v in m.matched_edges:
            if u < n and v < n:
                merges.append((u, v))
                merged.update((u, v))
        kept = [i for i in range(n) if i not in merged]
        return merges, kept


def build_purify_graph(pairs: Sequence[EntPair], kind: UtilityKind | str) -> PurifyGraph:
    pairs = tuple(pairs)
    if len({p.span for p in pairs}) > 1:
        raise ValueError("purification pairs must share one span")
    n = len(pairs)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if pairs[i].purified or pairs[j].purified:
                continue
            w = g_value(kind, purify_fidelity(pairs[i].fidelity, pairs[j].fidelity))
            edges.append((i, j, w))
    for i, p in enumerate(pairs):
        edges.append((i, n + i, g_value(kind, p.fidelity)))
    return PurifyGraph(WeightedGraph(2 * n, tuple(edges)), pairs)


@dataclass(frozen=True)
class SwapGraph:
    """Complete bipartite swap instance: nodes ``0..a-1`` are s-r units and
    ``a..a+b-1`` are r-d units."""

    graph: WeightedGraph
    sr_ids: tuple[str, ...]
    rd_ids: tuple[str, ...]

    @property
    def left(self) -> range:
        return range(len(self.sr_ids))


def build_swap_graph(
    sr: Sequence[tuple[str, float]],
    rd: Sequence[tuple[str, float]],
    kind: UtilityKind | str,
) -> SwapGraph:
    a = len(sr)
    edges = []
    for i, (_, fi) in enumerate(sr):
        for j, (_, fj) in enumerate(rd):
            edges.append((i, a + j, g_value(kind, swap_fidelity(fi, fj))))
    return SwapGraph(
        WeightedGraph(a + len(rd), tuple(edges)),
        tuple(u for u, _ in sr),
        tuple(u for u, _ in rd),
    )


# --- stages ------------------------------------------------------------------


def _merge_gain(pg: PurifyGraph, i: int, j: int) -> float:
    w = pg.graph.weight_map()
    n = len(pg.pairs)
    return w[(i, j)] - w[(i, n + i)] - w[(j, n + j)]


def purify_stage(
    pairs: Sequence[EntPair],
    kind: UtilityKind | str,
    success: SuccessModel,
    rng: np.random.Generator,
    max_merges: int | None = None,
    outcome: ScheduleOutcome | None = None,
) -> list[EntPair]:
    """Choose and apply purifications on one set of same-span pairs.

    Returns the pairs that exist afterwards. With ``max_merges`` set, only the
    merges with the largest gain over leaving both pairs alone are applied.
    """
    outcome = outcome if outcome is not None else ScheduleOutcome()
    if not pairs:
        return []
    pg = build_purify_graph(pairs, kind)
    merges, kept = pg.decode(max_weight_matching(pg.graph))
    merges = sorted(merges)
    if max_merges is not None and len(merges) > max_merges:
        ranked = sorted(merges, key=lambda e: (-_merge_gain(pg, *e), e))
        merges = sorted(ranked[:max_merges])
        kept = sorted(set(kept) | {i for e in ranked[max_merges:] for i in e})

    out = [pg.pairs[i] for i in kept]
    for i, j in merges:
        a, b = pg.pairs[i], pg.pairs[j]
        if success.purification_stochastic:
            ok = bool(rng.random() < purify_success_prob(a.fidelity, b.fidelity))
        else:
            ok = True
        if not ok:
            outcome.purifications.append(PurificationRecord(a.id, b.id, False, None))
            outcome.freed_slots.extend(a.memories() + b.memories())
            continue
        # merged pair stays in the lower-indexed memories
        keep, drop = (a, b) if (a.left_slot, a.right_slot) <= (b.left_slot, b.right_slot) else (b, a)
        merged = EntPair(
            id=f"p({a.id},{b.id})",
            span=a.span,
            left_slot=keep.left_slot,
            right_slot=keep.right_slot,
            fidelity=purify_fidelity(a.fidelity, b.fidelity),
            birth_slot=min(a.birth_slot, b.birth_slot),
            purified=True,
        )
        outcome.purifications.append(PurificationRecord(a.id, b.id, True, merged.id))
        outcome.freed_slots.extend(drop.memories())
        out.append(merged)
    return out


def swap_stage(
    sr: Sequence[EntPair],
    rd: Sequence[EntPair],
    kind: UtilityKind | str,
    success: SuccessModel,
    rng: np.random.Generator,
    outcome: ScheduleOutcome,
) -> list[EntPair]:
    """Choose and apply swaps; unmatched link pairs go to ``outcome.remaining``.

    Returns the end-to-end pairs produced.
    """
    sg = build_swap_graph([(p.id, p.fidelity) for p in sr], [(p.id, p.fidelity) for p in rd], kind)
    m = max_weight_matching(sg.graph, left=sg.left)
    outcome.swap_matching_weight = m.total_weight
    a = len(sr)
    matched: set[int] = set()
    e2e = []
    for u, v in m.matched_edges:
        i, j = (u, v - a) if u < a else (v, u - a)
        matched.update((u, v))
        x, y = sr[i], rd[j]
        ok = bool(rng.random() < success.swap_success_p)
        outcome.swaps.append(SwapRecord(x.id, y.id, ok))
        # the repeater's two memories are released by the measurement either way
        outcome.freed_slots.extend([("r", x.right_slot), ("r", y.left_slot)])
        if not ok:
            outcome.freed_slots.extend([("s", x.left_slot), ("d", y.right_slot)])
            continue
        e2e.append(
            EntPair(
                id=f"s({x.id},{y.id})",
                span=Span.E2E,
                left_slot=x.left_slot,
                right_slot=y.right_slot,
                fidelity=swap_fidelity(x.fidelity, y.fidelity),
                birth_slot=min(x.birth_slot, y.birth_slot),
            )
        )
    outcome.remaining.extend(p for k, p in enumerate(sr) if k not in matched)
    outcome.remaining.extend(p for k, p in enumerate(rd) if k + a not in matched)
    return e2e


def run_policy(
    policy: Policy | str,
    snapshot: NetworkSnapshot,
    kind: UtilityKind | str,
    success: SuccessModel,
    rng: np.random.Generator,
    max_purifications: int | None = None,
) -> ScheduleOutcome:
    """Apply one scheduling policy to a snapshot.

    ``max_purifications`` caps the merges applied in each purification stage
    (per link for PtS, over end-to-end pairs for StP).

    Random draws happen in a fixed order (purifications sorted by node index,
    then swaps sorted by edge), so a seeded generator gives a reproducible
    outcome.
    """
    policy = Policy(policy)
    kind = UtilityKind(kind)
    out = ScheduleOutcome()
    sr, rd = list(snapshot.sr_pairs), list(snapshot.rd_pairs)

    if policy is Policy.PTS:
        sr = purify_stage(sr, kind, success, rng, max_purifications, out)
        rd = purify_stage(rd, kind, success, rng, max_purifications, out)
        out.e2e_pairs = swap_stage(sr, rd, kind, success, rng, out)
    elif policy is Policy.STP:
        e2e = swap_stage(sr, rd, kind, success, rng, out)
        out.e2e_pairs = purify_stage(e2e, kind, success, rng, max_purifications, out)
    else:
        out.e2e_pairs = swap_stage(sr, rd, kind, success, rng, out)
    return out
