"""
Command-line front end.

    latticewalk simulate       --config FILE [--steps N] [--out DIR]
    latticewalk detect         --config FILE [--seed N] [--steps N] [--out DIR]
    latticewalk analyze        FILE [FILE] [--phase-model STATE] [--entropy MODE]
    latticewalk analyze        --entropy-series [--steps N] [--out DIR]
    latticewalk timeline-check --config FILE [--steps N]

Exit codes: 0 success, 2 configuration/input error, 3 timing overlap
refusal, 4 numeric invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analysis, hardware, tables
from .coins import named_coin
from .config import ConfigError, RunConfig, load_config
from .oracle import dense_evolve
from .walk import (
    NormalizationError,
    evolve,
    new_localized_state,
    position_distribution,
    trajectory,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_OVERLAP = 3
EXIT_NUMERIC = 4

SERIES_COINS = ("hadamard", "controlled_xz", "controlled_hadamard_23", "controlled_hadamard_24")


class Refusal(Exception):
    """Physics constraint violated before any work was done."""


def _num(x: float) -> float:
    """Round to 12 significant digits so reports are stable text."""
    return float(f"{x:.12g}")


def _dump(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _summary(dist, state=None) -> dict:
    out = {
        "norm": _num(dist.total()),
        "support_size": len(dist.support()),
        "diagonal_confinement": _num(analysis.diagonal_confinement(dist)),
        "factorization_residual": _num(analysis.factorization_residual(dist)),
    }
    if state is not None:
        out["entropy_exact"] = _num(analysis.von_neumann_entropy(state).value)
    return out


def run_simulate(cfg: RunConfig, out: Path) -> dict:
    """Write one table per step (0..steps) and a summary record; return the summary."""
    out.mkdir(parents=True, exist_ok=True)
    states = trajectory(cfg.initial_state(), cfg.schedule, cfg.steps, cfg.mode)
    per_step = []
    for s in states:
        n = s.step_count
        dist = position_distribution(s)
        if "positions" in cfg.outputs:
            tables.write_positions(out / f"step_{n:02d}_positions.tsv", dist)
        if "coins" in cfg.outputs:
            tables.write_coin_resolved(out / f"step_{n:02d}_coins.tsv", dist)
        if "states" in cfg.outputs:
            tables.write_state(out / f"step_{n:02d}_state.tsv", s.amplitudes)
        per_step.append({"step": n, **_summary(dist, s)})
    summary = {"coin": cfg.coin, "steps": cfg.steps, "mode": cfg.mode, "per_step": per_step}
    if "summary" in cfg.outputs:
        _dump(out / "summary.json", summary)
    return summary


def run_timeline_check(cfg: RunConfig) -> hardware.OverlapReport:
    return hardware.check_no_overlap(cfg.timing, max(cfg.steps, 1))


def run_detect(cfg: RunConfig, out: Path, threads: Optional[int] = None) -> dict:
    """Sample detector clicks, reconstruct every step and compare with the ideal walk."""
    if cfg.trials < 1:
        raise ConfigError(f"{cfg.source}: [detect] trials must be at least 1 for detect")
    report = hardware.check_no_overlap(cfg.timing, max(cfg.steps, 1))
    if not report.ok:
        raise Refusal(f"timing overlap within {cfg.steps} steps: {report.describe()}")
    out.mkdir(parents=True, exist_ok=True)
    run = hardware.run_detection(cfg.schedule, cfg.loss, cfg.timing, cfg.steps, cfg.trials,
                                 cfg.seed, cfg.initial_state(), threads)
    hardware.write_records(out / "records.tsv", run.records)
    ideal_states = trajectory(cfg.initial_state(), cfg.schedule, cfg.steps, cfg.mode)
    per_step = []
    for n in range(1, cfg.steps + 1):
        events = int(np.sum(run.records["step"] == n))
        entry = {"step": n, "events": events, "walking": int(run.walking[n - 1])}
        if events:
            rec = hardware.reconstruct_distribution(run.records, cfg.timing, n, cfg.calibration)
            tables.write_coin_resolved(out / f"step_{n:02d}_reconstructed.tsv", rec.distribution)
            ideal = position_distribution(ideal_states[n])
            entry["similarity"] = _num(analysis.similarity(ideal, rec.distribution))
            entry["unassigned"] = rec.unassigned
        per_step.append(entry)
    summary = {
        "coin": cfg.coin,
        "trials": cfg.trials,
        "seed": cfg.seed,
        "entered": run.entered,
        "total_events": int(run.records.size),
        "per_step": per_step,
    }
    _dump(out / "detect_report.json", summary)
    return summary


def entropy_series(steps: int, coins: Sequence[str] = SERIES_COINS) -> list[dict]:
    """Exact entropy after 1..steps for each coin, from |0,0,-1,-1>."""
    rows = [{"step": n} for n in range(1, steps + 1)]
    for name in coins:
        states = trajectory(new_localized_state(0, 0, -1, -1), named_coin(name), steps)
        for n in range(1, steps + 1):
            rows[n - 1][name] = _num(analysis.von_neumann_entropy(states[n]).value)
    return rows


def run_analyze(
    inputs: Sequence[Path],
    phase_model: Optional[Path] = None,
    entropy: str = "auto",
) -> dict:
    """Metrics for one input, plus similarity when two are given."""
    if not inputs:
        raise ConfigError("analyze needs at least one input file")
    if len(inputs) > 2:
        raise ConfigError("analyze takes one or two input files")
    loaded = [tables.read_table(p) for p in inputs]
    dists = []
    for kind, obj in loaded:
        if kind == "state":
            probs = {k: abs(a) ** 2 for k, a in obj.items()}
            dists.append(analysis.Distribution.from_coin_resolved(probs))
        else:
            dists.append(obj)
    for p, d in zip(inputs, dists):
        if not d.is_normalized():
            raise ConfigError(f"{p}: probabilities sum to {d.total():.12g}, not 1")
    kind, obj = loaded[0]
    dist = dists[0]
    report: dict = {"input": str(inputs[0]), "kind": kind}
    report.update(_summary(dist))
    report["marginal_x1"] = {str(k): _num(v) for k, v in analysis.marginal(dist, 1).items()}
    report["marginal_x2"] = {str(k): _num(v) for k, v in analysis.marginal(dist, 2).items()}
    if len(dists) == 2:
        report["similarity"] = _num(analysis.similarity(dists[0], dists[1]))

    if entropy == "auto":
        entropy = "exact" if kind == "state" else ("lower_bound" if phase_model else "none")
    if entropy == "exact":
        if kind != "state":
            raise ConfigError(
                f"{inputs[0]}: exact entropy needs amplitudes; for probability tables "
                "use --entropy lower_bound with --phase-model STATE_FILE")
        e = analysis.entropy_from_amplitudes(obj)
        report["entropy"] = {"kind": "exact", "value": _num(e.value),
                             "max": _num(e.max_value)}
    elif entropy == "lower_bound":
        if phase_model is None:
            raise ConfigError("lower-bound entropy needs --phase-model STATE_FILE")
        if dist.coin_weights is None:
            raise ConfigError(f"{inputs[0]}: lower bound needs coin-resolved probabilities")
        pkind, pobj = tables.read_table(phase_model)
        if pkind != "state":
            raise ConfigError(f"{phase_model}: phase model must be a state table")
        phases = {k: float(np.angle(a)) for k, a in pobj.items()}
        e = analysis.entropy_lower_bound(dist.coin_weights, phases)
        report["entropy"] = {"kind": "lower_bound", "value": _num(e.value),
                             "max": _num(e.max_value),
                             "phases": [_num(p) for p in e.phases]}
    return report


def _oracle_debug(cfg: RunConfig) -> dict:
    n = min(cfg.steps, 8)
    dense = dense_evolve(cfg.initial, cfg.schedule, n)
    sparse = evolve(cfg.initial_state(), cfg.schedule, n)
    ref = dense.amplitudes()
    got = sparse.amplitudes
    keys = set(ref) | set(got)
    dev = max(abs(ref.get(k, 0) - got.get(k, 0)) for k in keys)
    return {"steps": n, "max_amplitude_difference": dev}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latticewalk", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="{simulate,detect,analyze,timeline-check}")

    def common(p, config_required=True):
        p.add_argument("--config", type=Path, required=config_required, help="run configuration")
        p.add_argument("--steps", type=int, help="override [walk] steps")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")

    p = sub.add_parser("simulate", help="ideal walk, per-step tables")
    common(p)
    p = sub.add_parser("detect", help="Monte-Carlo detection and reconstruction")
    common(p)
    p.add_argument("--seed", type=int, help="override [detect] seed")
    p = sub.add_parser("analyze", help="metrics for distribution/state files")
    common(p, config_required=False)
    p.add_argument("inputs", nargs="*", type=Path)
    p.add_argument("--phase-model", type=Path, help="state table supplying in-sector phases")
    p.add_argument("--entropy", choices=("auto", "exact", "lower_bound", "none"), default="auto")
    p.add_argument("--entropy-series", action="store_true",
                   help="entropy vs step for the four separable/controlled coins")
    p = sub.add_parser("timeline-check", help="check time-bin overlaps up to --steps")
    common(p)
    p = sub.add_parser("oracle")
    common(p)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = None
        if args.config is not None:
            overrides = {"steps": args.steps, "seed": getattr(args, "seed", None)}
            cfg = load_config(args.config, overrides)
        if args.command == "simulate":
            result = run_simulate(cfg, args.out)
        elif args.command == "detect":
            result = run_detect(cfg, args.out)
        elif args.command == "timeline-check":
            rep = run_timeline_check(cfg)
            print(json.dumps({"ok": rep.ok, "detail": rep.describe(),
                              "first_collision": rep.first_collision}, sort_keys=True))
            return EXIT_OK if rep.ok else EXIT_OVERLAP
        elif args.command == "oracle":
            result = _oracle_debug(cfg)
        elif args.entropy_series:
            steps = args.steps if args.steps is not None else (cfg.steps if cfg else 12)
            result = entropy_series(steps)
            args.out.mkdir(parents=True, exist_ok=True)
            lines = ["# step " + " ".join(SERIES_COINS)]
            lines += [f"{r['step']} " + " ".join(f"{r[c]:.12g}" for c in SERIES_COINS)
                      for r in result]
            (args.out / "entropy_series.tsv").write_text("\n".join(lines) + "\n")
        else:
            result = run_analyze(args.inputs, args.phase_model, args.entropy)
            args.out.mkdir(parents=True, exist_ok=True)
            _dump(args.out / "analysis.json", result)
    except (ConfigError, tables.TableFormatError) as exc:
        print(f"latticewalk: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Refusal as exc:
        print(f"latticewalk: refused: {exc}", file=sys.stderr)
        return EXIT_OVERLAP
    except (NormalizationError, ArithmeticError) as exc:
        print(f"latticewalk: numeric invariant violated: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(result, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
