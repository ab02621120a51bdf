"""Experiment runner.

Subcommands:
  solve     analytic metrics for one config (CSV)
  sweep     one swept axis, bundled presets fig3..fig7 (CSV + PNG figure)
  simulate  discrete-event run for one config (JSON estimate)
  compare   analytic vs simulation side by side (CSV, exit 2 on non-coverage)

Exit codes: 0 success, 1 parse/validation error, 2 non-coverage in compare.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import configio
from .configio import ConfigError, SweepSpec, fmt
from .ctmc import build_generator, solve_stationary
from .metrics import PerformanceReport, performance_report
from .model import Mechanism, SystemConfig
from .sim import SimBudgetError, SimConfig, SimEstimate, run as sim_run

DEFAULT_EVENTS = 1_000_000
DEFAULT_SEED = 20240801


def _solve_report(config: SystemConfig) -> PerformanceReport:
    return performance_report(solve_stationary(build_generator(config)), config)


def _report_row(mechanism: Mechanism, axis_name: str, axis_value, rep: PerformanceReport) -> str:
    cells = [
        mechanism.value,
        axis_name,
        fmt(axis_value),
        fmt(rep.loss_rt),
        fmt(rep.loss_nrt),
        fmt(rep.mean_rt),
        fmt(rep.mean_nrt),
        fmt(rep.delay_rt),
        fmt(rep.delay_nrt),
        fmt(rep.delay_nrt_sojourn),
        fmt(rep.effective_lambda_nrt),
    ]
    return ",".join(cells)


def _estimate_row(mechanism: Mechanism, axis_name: str, axis_value, est: SimEstimate) -> str:
    cells = [
        mechanism.value,
        axis_name,
        fmt(axis_value),
        fmt(est.loss_rt.value),
        fmt(est.loss_nrt.value),
        fmt(est.mean_rt.value),
        fmt(est.mean_nrt.value),
        fmt(est.delay_rt.value),
        fmt(est.delay_nrt.value),
        fmt(est.delay_nrt_sojourn.value),
        fmt(est.effective_lambda_nrt.value),
    ]
    return ",".join(cells)


def _write_text(path: str, text: str) -> None:
    Path(path).write_text(text)


def _mechanisms_from_args(args) -> tuple[Mechanism, ...] | None:
    if args.mechanism is None:
        return None
    return configio.parse_mechanism_set(args.mechanism)


def _require_config(args) -> str:
    if args.config is None:
        raise ConfigError(f"{args.command} requires --config")
    return args.config


def cmd_solve(args) -> int:
    parsed = configio.parse_config_file(_require_config(args))
    configs = parsed.configs(_mechanisms_from_args(args))
    lines = [configio.CSV_HEADER]
    for config in configs:
        rep = _solve_report(config)
        lines.append(_report_row(config.mechanism, "none", 0.0, rep))
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _point_seed(base_seed: int, point_index: int, mechanism: Mechanism) -> int:
    return base_seed + 2 * point_index + (0 if mechanism is Mechanism.SIMPLE else 1)


def _sweep_rows(spec: SweepSpec, simulate: bool, seed: int, events: int, batches: int) -> list[str]:
    lines = [configio.CSV_HEADER]
    for i, value in enumerate(spec.values):
        for mech in spec.mechanisms:
            config = spec.config_at(value, mech)
            if simulate:
                est = sim_run(
                    SimConfig(
                        system=config,
                        horizon_events=events,
                        seed=_point_seed(seed, i, mech),
                        batches=batches,
                    )
                )
                lines.append(_estimate_row(mech, spec.axis, value, est))
            else:
                lines.append(_report_row(mech, spec.axis, value, _solve_report(config)))
    return lines


def _render_sweep_plot(csv_lines: list[str], spec: SweepSpec, out_csv: str) -> str:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    header = csv_lines[0].split(",")
    metric_col = header.index(
        "delay_nrt_sojourn_variant" if spec.plot_metric == "delay_nrt_sojourn" else spec.plot_metric
    )
    series: dict[str, tuple[list[float], list[float]]] = {}
    for line in csv_lines[1:]:
        cells = line.split(",")
        xs, ys = series.setdefault(cells[0], ([], []))
        xs.append(float(cells[2]))
        ys.append(float(cells[metric_col]))

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    markers = {"simple": "o", "combined": "s"}
    for name, (xs, ys) in series.items():
        ax.plot(xs, ys, marker=markers.get(name, "x"), label=name)
    ax.set_xlabel(spec.axis)
    ax.set_ylabel(spec.plot_metric)
    ax.grid(True, alpha=0.4)
    ax.legend()
    fig.tight_layout()
    png_path = str(Path(out_csv).with_suffix(".png"))
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return png_path


def cmd_sweep(args) -> int:
    if args.preset is not None:
        spec = configio.load_preset(args.preset)
    elif args.config is not None:
        spec = configio.parse_sweep_file(args.config)
    else:
        raise ConfigError("sweep requires --config or --preset")

    override = _mechanisms_from_args(args)
    if override is not None:
        spec = SweepSpec(
            base=spec.base,
            axis=spec.axis,
            values=spec.values,
            mechanisms=override,
            mode=spec.mode,
            plot_metric=spec.plot_metric,
        )

    outputs = []
    if spec.mode in ("analytic", "both"):
        lines = _sweep_rows(spec, False, args.seed, args.events, args.batches)
        _write_text(args.out, "\n".join(lines) + "\n")
        outputs.append((args.out, lines))
    if spec.mode in ("simulate", "both"):
        sim_out = args.out if spec.mode == "simulate" else _sibling(args.out, ".sim")
        lines = _sweep_rows(spec, True, args.seed, args.events, args.batches)
        _write_text(sim_out, "\n".join(lines) + "\n")
        outputs.append((sim_out, lines))

    if not args.no_plot:
        _render_sweep_plot(outputs[0][1], spec, outputs[0][0])
    return 0


def _sibling(path: str, tag: str) -> str:
    p = Path(path)
    return str(p.with_name(p.stem + tag + p.suffix))


def _single_mechanism_config(args) -> SystemConfig:
    parsed = configio.parse_config_file(_require_config(args))
    configs = parsed.configs(_mechanisms_from_args(args))
    if len(configs) != 1:
        raise ConfigError("this command needs exactly one mechanism (use --mechanism s|c or set it in the config)")
    return configs[0]


def _estimate_payload(config: SystemConfig, est: SimEstimate, seed: int, events: int) -> dict:
    metrics = {
        name: {"value": est.metric(name).value, "half_width": est.metric(name).half_width}
        for name in configio.METRIC_NAMES
    }
    counts = {
        name: getattr(est, name)
        for name in (
            "offered_rt",
            "blocked_rt",
            "pushed_out_rt",
            "accepted_rt",
            "served_rt",
            "offered_nrt",
            "blocked_nrt",
            "pushed_out_nrt",
            "accepted_nrt",
            "served_nrt",
        )
    }
    return {
        "config": configio.canonical_config_text(config),
        "seed": seed,
        "events": events,
        "fingerprint": configio.run_fingerprint(config, seed, events),
        "metrics": metrics,
        "counts": counts,
        "elapsed_time": est.elapsed_time,
        "warmup_events": est.warmup_events,
        "batches": est.batches,
    }


def cmd_simulate(args) -> int:
    config = _single_mechanism_config(args)
    est = sim_run(
        SimConfig(system=config, horizon_events=args.events, seed=args.seed, batches=args.batches)
    )
    payload = _estimate_payload(config, est, args.seed, args.events)
    _write_text(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_compare(args) -> int:
    config = _single_mechanism_config(args)
    rep = _solve_report(config)

    if args.sim is not None:
        payload = json.loads(Path(args.sim).read_text())
        expected = configio.run_fingerprint(config, args.seed, args.events)
        if payload.get("fingerprint") != expected:
            raise ConfigError(
                "refusing to compare: simulation file was produced for a different config, seed, or budget"
            )
        sim_metrics = {name: (m["value"], m["half_width"]) for name, m in payload["metrics"].items()}
    else:
        est = sim_run(
            SimConfig(system=config, horizon_events=args.events, seed=args.seed, batches=args.batches)
        )
        sim_metrics = {
            name: (est.metric(name).value, est.metric(name).half_width) for name in configio.METRIC_NAMES
        }

    analytic = {
        "loss_rt": rep.loss_rt,
        "loss_nrt": rep.loss_nrt,
        "mean_rt": rep.mean_rt,
        "mean_nrt": rep.mean_nrt,
        "delay_rt": rep.delay_rt,
        "delay_nrt": rep.delay_nrt,
        "delay_nrt_sojourn": rep.delay_nrt_sojourn,
        "effective_lambda_nrt": rep.effective_lambda_nrt,
    }
    lines = ["metric,analytic,simulated,ci_half_width,covered"]
    all_covered = True
    for name in configio.METRIC_NAMES:
        value, half = sim_metrics[name]
        covered = abs(analytic[name] - value) <= half
        all_covered &= covered
        lines.append(
            f"{name},{fmt(analytic[name])},{fmt(value)},{fmt(half)},{'yes' if covered else 'no'}"
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    return 0 if all_covered else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tspq",
        description="Finite-buffer time-space priority queues: exact analysis and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--out", required=True, help="output file path")
        p.add_argument("--mechanism", choices=("s", "c", "both"), default=None)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="64-bit RNG seed")
        p.add_argument("--events", type=int, default=DEFAULT_EVENTS, help="simulation event budget")
        p.add_argument("--batches", type=int, default=20, help="batch-means segments")

    p_solve = sub.add_parser("solve", help="analytic metrics for one config")
    add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="sweep one axis (file or bundled preset)")
    add_common(p_sweep)
    p_sweep.add_argument("--preset", choices=configio.PRESET_NAMES, default=None)
    p_sweep.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    p_sweep.set_defaults(func=cmd_sweep)

    p_simulate = sub.add_parser("simulate", help="discrete-event estimate for one config")
    add_common(p_simulate)
    p_simulate.set_defaults(func=cmd_simulate)

    p_compare = sub.add_parser("compare", help="analytic vs simulation for one config")
    add_common(p_compare)
    p_compare.add_argument("--sim", default=None, help="reuse a simulate JSON file (fingerprint-checked)")
    p_compare.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SimBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
