"""Monte Carlo comparison of scheduling policies on random single-shot snapshots.

Each trial draws one snapshot and evaluates every (policy, utility kind) on it
(common random numbers). Seeds are derived with :class:`numpy.random.SeedSequence`:

* trial seed      = ``SeedSequence([master_seed, trial_index])``, first 64-bit word
* snapshot stream = ``default_rng([trial_seed, 0])``
* outcome stream  = ``default_rng([trial_seed, 1, policy_index, kind_index])``

where the indices are positions in :data:`POLICY_ORDER` and :data:`KIND_ORDER`.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .policies import EntPair, NetworkSnapshot, Policy, Span, SuccessModel, run_policy
from .quantum import UtilityKind, is_degenerate

POLICY_ORDER = (Policy.PTS, Policy.STP, Policy.SWAP_ONLY)
KIND_ORDER = (UtilityKind.A, UtilityKind.B)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    trials: int = 500
    lles_per_link: int = 3
    fidelity_low: float = 0.8
    fidelity_high: float = 1.0
    policies: tuple[str, ...] = ("PtS", "StP", "SwapOnly")
    utility_kinds: tuple[str, ...] = ("A", "B")
    success: SuccessModel = field(default_factory=SuccessModel)
    master_seed: int = 0
    keep_trials: bool = True

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if self.lles_per_link < 0:
            raise ConfigError(f"lles_per_link must be >= 0, got {self.lles_per_link}")
        if not 0.0 <= self.fidelity_low <= self.fidelity_high <= 1.0:
            raise ConfigError("need 0 <= fidelity_low <= fidelity_high <= 1")
        try:
            pols = tuple(Policy(p).value for p in self.policies)
            kinds = tuple(UtilityKind(k).value for k in self.utility_kinds)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not pols or not kinds:
            raise ConfigError("need at least one policy and one utility kind")
        # canonical order and no duplicates
        object.__setattr__(self, "policies", tuple(p.value for p in POLICY_ORDER if p.value in pols))
        object.__setattr__(self, "utility_kinds", tuple(k.value for k in KIND_ORDER if k.value in kinds))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["policies"] = list(self.policies)
        d["utility_kinds"] = list(self.utility_kinds)
        return d

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("experiment config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        doc = dict(doc)
        try:
            if "success" in doc:
                doc["success"] = SuccessModel(**doc["success"])
            for key in ("policies", "utility_kinds"):
                if key in doc:
                    doc[key] = tuple(doc[key])
            return cls(**doc)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def trial_seed(master_seed: int, trial_index: int) -> int:
    return int(np.random.SeedSequence([master_seed, trial_index]).generate_state(1, np.uint64)[0])


def draw_snapshot(rng: np.random.Generator, config: ExperimentConfig) -> NetworkSnapshot:
    m = config.lles_per_link
    f_sr = rng.uniform(config.fidelity_low, config.fidelity_high, size=m)
    f_rd = rng.uniform(config.fidelity_low, config.fidelity_high, size=m)
    sr = [EntPair(f"sr{i}", Span.SR, i, i, float(f_sr[i])) for i in range(m)]
    rd = [EntPair(f"rd{i}", Span.RD, m + i, i, float(f_rd[i])) for i in range(m)]
    return NetworkSnapshot(tuple(sr), tuple(rd), 0)


@dataclass(frozen=True)
class TrialResult:
    utility: object  # float or DEGENERATE
    inner_sum: float
    swap_matching_weight: float
    e2e_count: int


def run_trial(seed: int, config: ExperimentConfig) -> dict[tuple[str, str], TrialResult]:
    snap = draw_snapshot(np.random.default_rng([seed, 0]), config)
    out = {}
    for pi, pol in enumerate(POLICY_ORDER):
        if pol.value not in config.policies:
            continue
        for ki, kind in enumerate(KIND_ORDER):
            if kind.value not in config.utility_kinds:
                continue
            rng = np.random.default_rng([seed, 1, pi, ki])
            res = run_policy(pol, snap, kind, config.success, rng)
            out[(pol.value, kind.value)] = TrialResult(
                res.utility(kind), res.inner_sum(kind), res.swap_matching_weight, len(res.e2e_pairs)
            )
    return out


def relative_gap(a: float, b: float) -> float:
    """Signed relative improvement of ``a`` over ``b``: ``(a - b) / |b|``."""
    if b == 0:
        raise ZeroDivisionError("relative gap undefined for a zero baseline")
    return (a - b) / abs(b)


@dataclass
class PolicyStats:
    policy: str
    utility_kind: str
    mean_utility: float | None
    std_utility: float | None
    counted: int
    degenerate: int
    mean_inner_sum: float
    std_inner_sum: float | None
    values: list[float | None] | None = None

    @property
    def stderr_inner_sum(self) -> float | None:
        n = self.counted + self.degenerate
        return None if self.std_inner_sum is None else self.std_inner_sum / math.sqrt(n)


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    stats: list[PolicyStats]
    gaps: list[dict]

    def get(self, policy: str, kind: str) -> PolicyStats:
        for s in self.stats:
            if s.policy == Policy(policy).value and s.utility_kind == UtilityKind(kind).value:
                return s
        raise KeyError((policy, kind))

    def gap(self, a: str, b: str, kind: str) -> float | None:
        for g in self.gaps:
            if (g["a"], g["b"], g["utility_kind"]) == (Policy(a).value, Policy(b).value, UtilityKind(kind).value):
                return g["gap"]
        raise KeyError((a, b, kind))

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "results": [asdict(s) if s.values is not None else {k: v for k, v in asdict(s).items() if k != "values"}
                        for s in self.stats],
            "gaps": self.gaps,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["policy", "utility", "trial", "value"])
        for s in self.stats:
            for t, v in enumerate(s.values or []):
                w.writerow([s.policy, s.utility_kind, t, "" if v is None else repr(v)])
        return buf.getvalue()


def _std(xs: list[float]) -> float | None:
    return statistics.stdev(xs) if len(xs) >= 2 else None


def _run_indexed(args: tuple[int, ExperimentConfig]) -> dict[tuple[str, str], TrialResult]:
    t, config = args
    return run_trial(trial_seed(config.master_seed, t), config)


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ExperimentReport:
    """Run all trials and aggregate them.

    With ``workers > 1`` trials are spread over a process pool; results are
    collected in trial order, so the report matches a sequential run exactly.
    """
    jobs = [(t, config) for t in range(config.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_indexed, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_run_indexed(j) for j in jobs]

    per: dict[tuple[str, str], list[TrialResult]] = {}
    for trial in results:
        for key, res in trial.items():
            per.setdefault(key, []).append(res)

    stats = []
    for pol in config.policies:
        for kind in config.utility_kinds:
            rows = per[(pol, kind)]
            vals = [None if is_degenerate(r.utility) else r.utility for r in rows]
            good = [v for v in vals if v is not None]
            sums = [r.inner_sum for r in rows]
            stats.append(
                PolicyStats(
                    policy=pol,
                    utility_kind=kind,
                    mean_utility=math.fsum(good) / len(good) if good else None,
                    std_utility=_std(good),
                    counted=len(good),
                    degenerate=len(vals) - len(good),
                    mean_inner_sum=math.fsum(sums) / len(sums),
                    std_inner_sum=_std(sums),
                    values=vals if config.keep_trials else None,
                )
            )

    gaps = []
    by_key = {(s.policy, s.utility_kind): s for s in stats}
    for kind in config.utility_kinds:
        for a in config.policies:
            for b in config.policies:
                if a == b:
                    continue
                ma, mb = by_key[(a, kind)].mean_utility, by_key[(b, kind)].mean_utility
                gap = None if ma is None or mb is None or mb == 0 else relative_gap(ma, mb)
                gaps.append({"utility_kind": kind, "a": a, "b": b, "gap": gap})
    return ExperimentReport(config, stats, gaps)
