"""Werner-pair bookkeeping: decay, swapping, purification and utilities.

All functions are pure and operate on plain floats.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable

WERNER_FLOOR = 0.25


class DegenerateInputError(ValueError):
    """Raised when a formula is evaluated at a point where it is undefined."""


class _Degenerate:
    """Singleton marking an undefined utility (log of a non-positive sum)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "DEGENERATE"

    def __bool__(self) -> bool:
        return False

    def __reduce__(self):
        return (_Degenerate, ())


DEGENERATE = _Degenerate()


def is_degenerate(value) -> bool:
    return value is DEGENERATE


class UtilityKind(str, enum.Enum):
    """Per-pair utility of fidelity: ``A`` is the fidelity itself, ``B`` the
    (clamped) distillable rate."""

    A = "A"
    B = "B"


@dataclass(frozen=True)
class DecayParams:
    slot_duration: float = 0.02
    decoherence_tau: float = 1.0

    def __post_init__(self):
        if not self.slot_duration > 0:
            raise ValueError(f"slot_duration must be > 0, got {self.slot_duration}")
        if not self.decoherence_tau > 0:
            raise ValueError(f"decoherence_tau must be > 0, got {self.decoherence_tau}")


def check_fidelity(f: float, name: str = "fidelity") -> float:
    f = float(f)
    if not 0.0 <= f <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {f}")
    return f


def decay_fidelity(f0: float, elapsed_slots: int, params: DecayParams) -> float:
    """Fidelity of a Werner pair after ``elapsed_slots`` of storage.

    Relaxes exponentially towards 1/4 with rate ``slot_duration / decoherence_tau``.
    """
    if elapsed_slots < 0:
        raise ValueError("elapsed_slots must be non-negative")
    if elapsed_slots == 0:
        return f0
    rate = params.slot_duration / params.decoherence_tau
    return WERNER_FLOOR + (f0 - WERNER_FLOOR) * math.exp(-rate * elapsed_slots)


def swap_fidelity(f1: float, f2: float) -> float:
    return f1 * f2 + (1.0 - f1) * (1.0 - f2)


def purify_success_prob(f1: float, f2: float) -> float:
    return f1 * f2 + (1.0 - f1) * (1.0 - f2)


def purify_fidelity(f1: float, f2: float) -> float:
    """Output fidelity of 2-to-1 purification, conditioned on success."""
    num = f1 * f2
    den = num + (1.0 - f1) * (1.0 - f2)
    if den == 0.0:
        raise DegenerateInputError(f"purification undefined for inputs ({f1}, {f2})")
    return num / den


def _xlog2(x: float, y: float) -> float:
    # x * log2(y) with 0 * log 0 = 0
    return 0.0 if x == 0.0 else x * math.log2(y)


def distillation_rate(f: float) -> float:
    """Hashing-bound yield of perfect Bell pairs per Werner pair of fidelity ``f``.

    Negative below roughly 0.8107; equals -1 at ``f = 1/4`` and 1 at ``f = 1``.
    """
    return 1.0 + _xlog2(f, f) + _xlog2(1.0 - f, (1.0 - f) / 3.0)


def g_value(kind: UtilityKind | str, f: float) -> float:
    kind = UtilityKind(kind)
    if kind is UtilityKind.A:
        return f
    return max(distillation_rate(f), 0.0)


def inner_sum(kind: UtilityKind | str, fidelities: Iterable[float]) -> float:
    # fsum is correctly rounded, hence independent of input order
    return math.fsum(g_value(kind, f) for f in fidelities)


def aggregate_utility(kind: UtilityKind | str, fidelities: Iterable[float]):
    """Natural log of the summed per-pair utility, or ``DEGENERATE`` if the
    sum is not positive (including the empty case)."""
    s = inner_sum(kind, fidelities)
    if s <= 0.0:
        return DEGENERATE
    return math.log(s)
