"""Slotted simulation of the two-link repeater with multi-memory nodes.

One call to :func:`advance_slot` performs, for the current slot ``t``:

1. drop pairs already below the discard threshold, then snapshot the live
   link pairs with fidelities decayed to ``t``;
2. run the scheduling policy (at most ``max_purifications`` merges per
   purification stage);
3. deliver every end-to-end pair produced and free its memories;
4. move to slot ``t + 1``, decay, and discard pairs below the threshold;
5. attempt generation on every free aligned memory pair.

A pair's fidelity is stored together with the slot at which it was last set
(generation or an operation). Decay is measured from that slot; the birth
slot (oldest constituent link pair) is carried as metadata only.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .experiment import ConfigError
from .policies import EntPair, NetworkSnapshot, Policy, ScheduleOutcome, Span, SuccessModel, run_policy
from .quantum import DecayParams, UtilityKind, aggregate_utility, decay_fidelity, is_degenerate


@dataclass(frozen=True)
class SimParams:
    memories: int = 3
    gen_success_sr: float = 0.5
    gen_success_rd: float = 0.5
    success: SuccessModel = field(default_factory=SuccessModel)
    initial_fidelity: float = 0.95
    decay: DecayParams = field(default_factory=DecayParams)
    discard_threshold: float = 0.5
    max_purifications: int = 3
    horizon_slots: int = 1000
    utility_kind: str = "A"

    def __post_init__(self):
        if self.memories < 1:
            raise ConfigError(f"memories must be >= 1, got {self.memories}")
        for name in ("gen_success_sr", "gen_success_rd"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {p}")
        if not 0.25 < self.initial_fidelity <= 1.0:
            raise ConfigError(f"initial_fidelity must lie in (1/4, 1], got {self.initial_fidelity}")
        if not 0.25 < self.discard_threshold <= 1.0:
            raise ConfigError(f"discard_threshold must lie in (1/4, 1], got {self.discard_threshold}")
        if self.max_purifications < 0:
            raise ConfigError("max_purifications must be >= 0")
        if self.horizon_slots < 0:
            raise ConfigError("horizon_slots must be >= 0")
        try:
            object.__setattr__(self, "utility_kind", UtilityKind(self.utility_kind).value)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> "SimParams":
        if not isinstance(doc, dict):
            raise ConfigError("simulation config must be a JSON object")
        unknown = set(doc) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        doc = dict(doc)
        try:
            if "success" in doc:
                doc["success"] = SuccessModel(**doc["success"])
            if "decay" in doc:
                doc["decay"] = DecayParams(**doc["decay"])
            return cls(**doc)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class LivePair:
    """A stored link pair; ``pair.fidelity`` is its value at ``anchor_slot``."""

    pair: EntPair
    anchor_slot: int

    def fidelity_at(self, slot: int, decay: DecayParams) -> float:
        return decay_fidelity(self.pair.fidelity, slot - self.anchor_slot, decay)


@dataclass
class SimState:
    slot: int = 0
    live: list[LivePair] = field(default_factory=list)

    def occupancy(self) -> dict[str, set[int]]:
        occ: dict[str, set[int]] = {"s": set(), "r": set(), "d": set()}
        for lp in self.live:
            for node, mem in lp.pair.memories():
                occ[node].add(mem)
        return occ

    def snapshot(self, params: SimParams) -> NetworkSnapshot:
        sr, rd = [], []
        for lp in self.live:
            p = EntPair(
                lp.pair.id, lp.pair.span, lp.pair.left_slot, lp.pair.right_slot,
                lp.fidelity_at(self.slot, params.decay), lp.pair.birth_slot, lp.pair.purified,
            )
            (sr if p.span == Span.SR else rd).append(p)
        key = lambda p: p.left_slot
        return NetworkSnapshot(tuple(sorted(sr, key=key)), tuple(sorted(rd, key=key)), self.slot)


@dataclass
class SlotReport:
    slot: int
    generated_sr: int
    generated_rd: int
    discarded: int
    delivered: list[EntPair]
    slot_utility: float | None  # None when degenerate

    @property
    def delivered_e2e(self) -> list[float]:
        return [p.fidelity for p in self.delivered]

    def to_dict(self) -> dict:
        return {
            "slot": self.slot,
            "generated_sr": self.generated_sr,
            "generated_rd": self.generated_rd,
            "discarded": self.discarded,
            "delivered_e2e": self.delivered_e2e,
            "delivered_ids": [p.id for p in self.delivered],
            "delivered_birth_slots": [p.birth_slot for p in self.delivered],
            "slot_utility": self.slot_utility,
        }


def attempt_generation(state: SimState, params: SimParams, rng: np.random.Generator) -> tuple[int, int]:
    """Try to create a link pair on every free aligned memory pair of each link.

    Returns the number of new s-r and r-d pairs.
    """
    occ = state.occupancy()
    m = params.memories
    counts = []
    for span, p in ((Span.SR, params.gen_success_sr), (Span.RD, params.gen_success_rd)):
        made = 0
        for i in range(m):
            if span == Span.SR:
                free = i not in occ["s"] and i not in occ["r"]
                left, right, tag = i, i, "sr"
            else:
                free = m + i not in occ["r"] and i not in occ["d"]
                left, right, tag = m + i, i, "rd"
            if not free or not rng.random() < p:
                continue
            pair = EntPair(f"{tag}{i}@{state.slot}", span, left, right, params.initial_fidelity, state.slot)
            state.live.append(LivePair(pair, state.slot))
            made += 1
        counts.append(made)
    return counts[0], counts[1]


def _discard_below(state: SimState, params: SimParams) -> int:
    keep = [lp for lp in state.live if lp.fidelity_at(state.slot, params.decay) >= params.discard_threshold]
    dropped = len(state.live) - len(keep)
    state.live = keep
    return dropped


def init_state(params: SimParams, rng: np.random.Generator) -> SimState:
    state = SimState()
    attempt_generation(state, params, rng)
    return state


def advance_slot(
    state: SimState, params: SimParams, policy: Policy | str, rng: np.random.Generator
) -> tuple[SimState, SlotReport, ScheduleOutcome]:
    """Run one slot in place; returns the state, the slot's report and the
    raw policy outcome."""
    t = state.slot
    discarded = _discard_below(state, params)
    snap = state.snapshot(params)
    out = run_policy(policy, snap, params.utility_kind, params.success, rng, params.max_purifications)

    # E2E pairs are consumed on production; low-fidelity ones count as discarded
    delivered = [p for p in out.e2e_pairs if p.fidelity >= params.discard_threshold]
    discarded += len(out.e2e_pairs) - len(delivered)
    util = aggregate_utility(params.utility_kind, [p.fidelity for p in delivered])

    # snapshot copies carry their fidelity at t; decay is memoryless, so
    # re-anchoring untouched pairs at t changes nothing
    state.live = [LivePair(p, t) for p in out.remaining]
    state.slot = t + 1
    discarded += _discard_below(state, params)
    gen_sr, gen_rd = attempt_generation(state, params, rng)
    report = SlotReport(t, gen_sr, gen_rd, discarded, delivered, None if is_degenerate(util) else util)
    return state, report, out


@dataclass
class SimulationResult:
    reports: list[SlotReport]
    mean_slot_utility: float | None
    delivery_rate: float
    total_delivered: int
    degenerate_slots: int

    def summary(self) -> dict:
        return {
            "slots": len(self.reports),
            "mean_slot_utility": self.mean_slot_utility,
            "delivery_rate": self.delivery_rate,
            "total_delivered": self.total_delivered,
            "degenerate_slots": self.degenerate_slots,
        }

    def to_dict(self) -> dict:
        return {"reports": [r.to_dict() for r in self.reports], "summary": self.summary()}


def summarize(reports: list[SlotReport]) -> SimulationResult:
    utils = [r.slot_utility for r in reports if r.slot_utility is not None]
    total = sum(len(r.delivered) for r in reports)
    return SimulationResult(
        reports=reports,
        mean_slot_utility=math.fsum(utils) / len(utils) if utils else None,
        delivery_rate=total / len(reports) if reports else 0.0,
        total_delivered=total,
        degenerate_slots=len(reports) - len(utils),
    )


def run_simulation(params: SimParams, policy: Policy | str, seed: int) -> SimulationResult:
    rng = np.random.default_rng(seed)
    state = init_state(params, rng)
    reports = []
    for _ in range(params.horizon_slots):
        state, report, _ = advance_slot(state, params, policy, rng)
        reports.append(report)
    return summarize(reports)
