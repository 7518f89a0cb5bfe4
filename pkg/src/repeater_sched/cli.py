"""Command-line front end.

Exit codes: 0 success, 1 validation or usage error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .experiment import ConfigError, ExperimentConfig, run_experiment
from .linksim import SimParams, run_simulation
from .matching import GraphFormatError, WeightedGraph, brute_force_matching, max_weight_matching
from .policies import Policy, SuccessModel
from .quantum import (
    DecayParams,
    DegenerateInputError,
    decay_fidelity,
    distillation_rate,
    purify_fidelity,
    purify_success_prob,
    swap_fidelity,
)

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _read_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_IO) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}", EXIT_INVALID) from exc


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def _success_overrides(args, base: SuccessModel) -> SuccessModel:
    kw = {}
    if args.p_swap is not None:
        kw["swap_success_p"] = args.p_swap
    if args.purification is not None:
        kw["purification_stochastic"] = args.purification == "stochastic"
    return replace(base, **kw) if kw else base


def _csv_list(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


# --- experiment --------------------------------------------------------------


def experiment_config(args) -> ExperimentConfig:
    doc = _read_json(args.config) if args.config else {}
    cfg = ExperimentConfig.from_dict(doc)
    kw = {}
    for flag, key, conv in (
        ("trials", "trials", None),
        ("lles_per_link", "lles_per_link", None),
        ("fidelity_low", "fidelity_low", None),
        ("fidelity_high", "fidelity_high", None),
        ("policies", "policies", _csv_list),
        ("utility_kinds", "utility_kinds", _csv_list),
        ("seed", "master_seed", None),
    ):
        val = getattr(args, flag)
        if val is not None:
            kw[key] = conv(val) if conv else val
    if args.no_trials:
        kw["keep_trials"] = False
    kw["success"] = _success_overrides(args, cfg.success)
    return replace(cfg, **kw)


def cmd_experiment(args) -> int:
    cfg = experiment_config(args)
    if args.dump_config:
        _write(args.output, json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    report = run_experiment(cfg, workers=args.workers)
    _write(args.output, report.to_json())
    if args.csv:
        _write(args.csv, report.to_csv())
    return EXIT_OK


# --- simulate ----------------------------------------------------------------


def simulate_config(args) -> tuple[SimParams, str, int]:
    doc = _read_json(args.config) if args.config else {}
    if not isinstance(doc, dict):
        raise ConfigError("simulation config must be a JSON object")
    doc = dict(doc)
    policy = doc.pop("policy", Policy.PTS.value)
    seed = doc.pop("seed", 0)
    params = SimParams.from_dict(doc)
    kw = {}
    for flag, key in (
        ("slots", "horizon_slots"),
        ("memories", "memories"),
        ("p_sr", "gen_success_sr"),
        ("p_rd", "gen_success_rd"),
        ("f0", "initial_fidelity"),
        ("f_min", "discard_threshold"),
        ("max_purifications", "max_purifications"),
        ("utility_kind", "utility_kind"),
    ):
        val = getattr(args, flag)
        if val is not None:
            kw[key] = val
    if args.delta is not None or args.tau is not None:
        kw["decay"] = DecayParams(
            args.delta if args.delta is not None else params.decay.slot_duration,
            args.tau if args.tau is not None else params.decay.decoherence_tau,
        )
    kw["success"] = _success_overrides(args, params.success)
    params = replace(params, **kw)
    if args.policy is not None:
        policy = args.policy
    if args.seed is not None:
        seed = args.seed
    try:
        policy = Policy(policy).value
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"seed must be a non-negative integer, got {seed!r}")
    return params, policy, seed


def cmd_simulate(args) -> int:
    params, policy, seed = simulate_config(args)
    if args.dump_config:
        doc = params.to_dict() | {"policy": policy, "seed": seed}
        _write(args.output, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    result = run_simulation(params, policy, seed)
    doc = {"params": params.to_dict(), "policy": policy, "seed": seed} | result.to_dict()
    _write(args.output, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


# --- match -------------------------------------------------------------------


def cmd_match(args) -> int:
    doc = _read_json(args.graph)
    g = WeightedGraph.from_dict(doc)
    m = brute_force_matching(g) if args.brute_force else max_weight_matching(g)
    _write(args.output, json.dumps(m.to_dict(), indent=2) + "\n")
    return EXIT_OK


# --- eval --------------------------------------------------------------------

_EVAL_ARITY = {"decay": 4, "swap": 2, "purify": 2, "purify-prob": 2, "distill": 1}


def cmd_eval(args) -> int:
    op, vals = args.op, args.values
    if len(vals) != _EVAL_ARITY[op]:
        raise CliError(f"eval {op} takes {_EVAL_ARITY[op]} numbers, got {len(vals)}", EXIT_INVALID)
    if op == "decay":
        f0, elapsed, delta, tau = vals
        if elapsed < 0 or elapsed != int(elapsed):
            raise CliError("elapsed slots must be a non-negative integer", EXIT_INVALID)
        value = decay_fidelity(f0, int(elapsed), DecayParams(delta, tau))
    elif op == "swap":
        value = swap_fidelity(*vals)
    elif op == "purify":
        value = purify_fidelity(*vals)
    elif op == "purify-prob":
        value = purify_success_prob(*vals)
    else:
        value = distillation_rate(vals[0])
    print(f"{value:.15g}")
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def _probability(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"probability must lie in [0, 1], got {text}")
    return v


def _add_success_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--p-swap", type=_probability, help="swap success probability")
    p.add_argument("--purification", choices=("stochastic", "deterministic"),
                   help="sample purification success or always succeed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="repeater-sched",
        description="Purification and swapping schedules on a two-link quantum repeater.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("experiment", help="Monte Carlo policy comparison on random snapshots")
    ex.add_argument("--config", help="JSON experiment config")
    ex.add_argument("-o", "--output", help="report path (default: stdout)")
    ex.add_argument("--csv", help="also write per-trial values as CSV")
    ex.add_argument("--seed", type=int, help="master seed")
    ex.add_argument("--trials", type=int)
    ex.add_argument("--lles-per-link", type=int)
    ex.add_argument("--fidelity-low", type=float)
    ex.add_argument("--fidelity-high", type=float)
    ex.add_argument("--policies", help="comma list of PtS,StP,SwapOnly")
    ex.add_argument("--utility-kinds", help="comma list of A,B")
    ex.add_argument("--no-trials", action="store_true", help="omit per-trial values from the report")
    ex.add_argument("--workers", type=int, default=1, help="worker processes for trials")
    ex.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    _add_success_flags(ex)
    ex.set_defaults(func=cmd_experiment)

    sim = sub.add_parser("simulate", help="slotted dynamic simulation")
    sim.add_argument("--config", help="JSON simulation config (SimParams fields plus policy, seed)")
    sim.add_argument("-o", "--output", help="report path (default: stdout)")
    sim.add_argument("--seed", type=int)
    sim.add_argument("--policy", choices=[p.value for p in Policy])
    sim.add_argument("--slots", type=int, help="horizon in slots")
    sim.add_argument("--memories", type=int, help="memories per end node")
    sim.add_argument("--p-sr", type=_probability, help="s-r generation success probability")
    sim.add_argument("--p-rd", type=_probability, help="r-d generation success probability")
    sim.add_argument("--f0", type=float, help="fidelity of fresh link pairs")
    sim.add_argument("--f-min", type=float, help="discard threshold")
    sim.add_argument("--delta", type=float, help="slot duration (s)")
    sim.add_argument("--tau", type=float, help="decoherence time constant (s)")
    sim.add_argument("--max-purifications", type=int, help="merges per purification stage per slot")
    sim.add_argument("--utility-kind", choices=("A", "B"))
    sim.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    _add_success_flags(sim)
    sim.set_defaults(func=cmd_simulate)

    ma = sub.add_parser("match", help="max-weight matching of a JSON graph")
    ma.add_argument("graph", help='JSON file: {"nodes": n, "edges": [[u, v, w], ...]}')
    ma.add_argument("-o", "--output")
    ma.add_argument("--brute-force", action="store_true", help="use the exhaustive solver")
    ma.set_defaults(func=cmd_match)

    ev = sub.add_parser("eval", help="evaluate a fidelity formula")
    ev.add_argument("op", choices=sorted(_EVAL_ARITY))
    ev.add_argument("values", type=float, nargs="+",
                    help="decay: F0 SLOTS DELTA TAU; swap/purify/purify-prob: F1 F2; distill: F")
    ev.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; usage is a validation failure here
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (ConfigError, GraphFormatError, DegenerateInputError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
