"""Command-line front end: run, sweep, budget and schedule subcommands.

Every option can also come from a ``--config`` file of ``key = value`` lines;
flags given on the command line win over the file, which wins over defaults.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Any

from cavity_ghz import config
from cavity_ghz.analysis import BudgetReport, decoherence_budget
from cavity_ghz.atomscheme import run_atom_ghz
from cavity_ghz.export import write_rows
from cavity_ghz.logger_setup import create_output_dir, setup_logging
from cavity_ghz.propagate import DEPHASING_MODEL, NumericalFailureError
from cavity_ghz.protocol import (
    ProtocolRun,
    SimulationMode,
    build_schedule,
    preparation_segment,
    run_protocol,
)
from cavity_ghz.runconfig import (
    PRESETS,
    ConfigError,
    RunConfig,
    build_params,
    dump_config,
    integrator_config,
    load_config_file,
    merge_config,
    parse_number_list,
)
from cavity_ghz.statespace import SystemDims
from cavity_ghz.sweep import SWEEP_COLUMNS, SweepResult, check_cutoff_convergence, gate_cutoffs, sweep_b

logger = logging.getLogger(__name__)

SEGMENT_COLUMNS = ("label", "step", "t_end", "fidelity", "trace_drift", "steps", "dt", "flagged")


# ---------------------------------------------------------------------------
# Report formatting
# ---------------------------------------------------------------------------

def format_run_summary(cfg: RunConfig, run: ProtocolRun, converged: bool | None = None) -> str:
    lines = [
        "=" * 60,
        f"GHZ protocol: preset={cfg.preset} n={cfg.n} mode={cfg.mode.value}",
        "=" * 60,
        f"  Fidelity            : {run.fidelity:.8f}",
        f"  tau                 : {run.tau:.6e} s",
        f"  Preparation pulse   : {run.prep_time:.6e} s",
        f"  Max trace drift     : {run.max_trace_drift:.3e}",
        f"  Tolerance flags     : {'yes' if run.flagged else 'none'}",
    ]
    if cfg.mode is SimulationMode.LINDBLAD:
        lines.append(f"  Dephasing model     : {DEPHASING_MODEL}")
    if converged is not None:
        lines.append(f"  Cutoff converged    : {'yes' if converged else 'NO'}")
    lines.append("  Segments:")
    for r in run.records:
        fid = f"F={r.fidelity:.8f}" if r.fidelity is not None else ""
        lines.append(f"    {r.label:<22} t_end={r.t_end:.6e} s  steps={r.steps:<6d} drift={r.trace_drift:.2e}  {fid}")
    lines.append("=" * 60)
    return "\n".join(lines)


def format_sweep_summary(result: SweepResult) -> str:
    lines = ["=" * 60, f"Sweep ({result.preset}): {len(result.rows)} row(s)", "=" * 60]
    for row in result.rows:
        if row.error:
            lines.append(f"  n={row.n} b={row.b:g} ratio={row.g_cross_ratio:g}  ERROR {row.error}")
            continue
        marks = []
        if row.flagged:
            marks.append("flagged")
        if row.converged is False:
            marks.append("unconverged")
        lines.append(f"  n={row.n} b={row.b:g} ratio={row.g_cross_ratio:g}  F={row.fidelity:.6f} {' '.join(marks)}".rstrip())
    lines.append("=" * 60)
    return "\n".join(lines)


def _seconds(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:.4e} s"


def format_budget(report: BudgetReport) -> str:
    lines = [
        "=" * 60,
        f"Decoherence budget for n={report.n}",
        "=" * 60,
        f"  tau                 : {_seconds(report.tau)}",
        f"  T_cav               : {_seconds(report.cavity_lifetime)}",
        f"  tau / T_cav         : {report.tau_over_cavity_lifetime:.4e}",
        f"  Dephasing model     : {DEPHASING_MODEL}",
        "  Quality factors (q_from_kappa):",
    ]
    lines += [f"    cavity {i}: Q = {q:.4e}" for i, q in enumerate(report.quality_factors, start=1)]
    lines.append("  Coupler lifetimes:")
    lines += [f"    {name:<10}: {_seconds(value)}" for name, value in report.coherence_times.items()]
    lines.append("  tau * rate:")
    lines += [f"    {name:<13}: {value:.4e}" for name, value in report.rate_products.items()]
    lines.append("  Idle-cavity crosstalk p_j:")
    lines += [f"    step {row.step} idle cavity {row.idle_cavity}: {row.probability:.4e}" for row in report.crosstalk]
    lines.append("=" * 60)
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _output_path(cfg: RunConfig, output_dir: Path, stem: str) -> Path:
    return cfg.output if cfg.output is not None else output_dir / f"{stem}.{cfg.output_format}"


def cmd_run(cfg: RunConfig, output_dir: Path) -> int:
    integrator = integrator_config(cfg)
    params = build_params(cfg)
    dims = SystemDims(cfg.n, cfg.effective_fock_cutoff)
    converged = None
    try:
        if cfg.check_cutoff:
            check = check_cutoff_convergence(cfg.n, params, cfg.mode, integrator, gate_cutoffs(dims.fock_cutoff))
            run, converged = check.runs[dims.fock_cutoff], check.converged
        elif cfg.preset == "rydberg_atom":
            run = run_atom_ghz(cfg.n, cfg.mode, integrator, params.t_d, fock_cutoff=dims.fock_cutoff).run
        else:
            run = run_protocol(cfg.n, params, dims, cfg.mode, integrator)
    except NumericalFailureError as e:
        logger.error("Numerical failure: %s", e)
        return config.EXIT_NUMERICAL_FAILURE

    print(format_run_summary(cfg, run, converged))
    write_rows((r.to_dict() for r in run.records), SEGMENT_COLUMNS, _output_path(cfg, output_dir, "segments"), cfg.output_format)
    if run.flagged or converged is False:
        return config.EXIT_UNCONVERGED
    return config.EXIT_OK


def cmd_sweep(cfg: RunConfig, output_dir: Path) -> int:
    if cfg.preset != "phase_qutrit":
        raise ConfigError("sweep runs over the phase_qutrit preset only")
    result = sweep_b(
        cfg.n_values or (cfg.n,),
        cfg.b_values or (cfg.b,),
        cfg.g_cross_ratios or (cfg.g_cross_ratio,),
        cfg.mode,
        integrator_config(cfg),
        fock_cutoff=cfg.effective_fock_cutoff,
        check_cutoff=cfg.check_cutoff,
        jobs=cfg.jobs,
        t_d=config.PHASE_QUTRIT_T_D_S if cfg.t_d is None else cfg.t_d,
    )
    print(format_sweep_summary(result))
    write_rows((row.to_dict() for row in result.rows), SWEEP_COLUMNS, _output_path(cfg, output_dir, "sweep"), cfg.output_format)
    if result.failed:
        return config.EXIT_NUMERICAL_FAILURE
    if result.flagged:
        return config.EXIT_UNCONVERGED
    return config.EXIT_OK


def cmd_budget(cfg: RunConfig, output_dir: Path) -> int:
    print(format_budget(decoherence_budget(build_params(cfg), cfg.n)))
    return config.EXIT_OK


def cmd_schedule(cfg: RunConfig, output_dir: Path) -> int:
    params = build_params(cfg)
    schedule = build_schedule(cfg.n, params, **cfg.mode.error_terms)
    rows = []
    start = 0.0
    if cfg.mode is not SimulationMode.IDEAL_RESONANT:
        prep = preparation_segment(params)
        rows.append((prep.label, 0.0, prep.duration, prep.spec.kind.value))
        start = prep.duration
    rows += schedule.table(start)
    print(f"{'label':<24}{'start [s]':>16}{'duration [s]':>16}  kind")
    for label, seg_start, duration, kind in rows:
        print(f"{label:<24}{seg_start:>16.6e}{duration:>16.6e}  {kind}")
    print(f"total (tau, excluding preparation): {schedule.total_duration:.6e} s")
    return config.EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep": cmd_sweep,
    "budget": cmd_budget,
    "schedule": cmd_schedule,
}


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------

def _int_list(text: str) -> tuple[int, ...]:
    try:
        return parse_number_list(text, int)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return parse_number_list(text, float)
    except ConfigError as e:
        raise argparse.ArgumentTypeError(str(e)) from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="key = value config file")
    common.add_argument("--preset", choices=PRESETS, default=None, help="parameter preset (default: phase_qutrit)")
    common.add_argument("--n", type=int, default=None, help="number of cavities (default: 2)")
    common.add_argument("--b", type=float, default=None, help="b = Delta / g' for phase_qutrit (default: 50)")
    common.add_argument("--mode", choices=[m.value for m in SimulationMode], default=None, help="simulation mode (default: lindblad)")
    common.add_argument("--fock-cutoff", dest="fock_cutoff", type=int, default=None, help="Fock levels per cavity")
    common.add_argument("--g-cross-ratio", dest="g_cross_ratio", type=float, default=None, help="g_kl / g (default: 0.01)")
    common.add_argument("--t-d", dest="t_d", type=float, default=None, help="dead time per retune, seconds")
    common.add_argument("--dt-factor", dest="dt_factor", type=float, default=None, help="RK4 steps per fastest period")
    common.add_argument("--trace-tolerance", dest="trace_tolerance", type=float, default=None)
    common.add_argument("--hermiticity-tolerance", dest="hermiticity_tolerance", type=float, default=None)
    common.add_argument("--min-steps-per-segment", dest="min_steps_per_segment", type=int, default=None)
    common.add_argument("--output", type=Path, default=None, help="result file (default: inside the log directory)")
    common.add_argument("--output-format", dest="output_format", choices=config.OUTPUT_FORMATS, default=None)
    common.add_argument("--check-cutoff", dest="check_cutoff", action=argparse.BooleanOptionalAction, default=None,
                        help="repeat at the next Fock cutoff and flag disagreement (default: on)")
    common.add_argument("--log-dir", dest="log_dir", type=Path, default=None,
                        help="directory for run.log (default: timestamped dir under ./output)")
    common.add_argument("--dump-config", dest="dump_config", action="store_true",
                        help="print the effective configuration and exit")
    common.add_argument("--verbose", action="store_true", help="log DEBUG messages to the console")

    parser = argparse.ArgumentParser(
        prog="cavity-ghz",
        description="Simulate GHZ-state generation across cavities coupled to one three-level coupler",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="simulate one protocol run")
    sweep = sub.add_parser("sweep", parents=[common], help="fidelity versus b for the phase_qutrit preset")
    sweep.add_argument("--n-values", dest="n_values", type=_int_list, default=None, help="e.g. 2,3,4 or 2:4:1")
    sweep.add_argument("--b-values", dest="b_values", type=_float_list, default=None, help="e.g. 40:100:5")
    sweep.add_argument("--g-cross-ratios", dest="g_cross_ratios", type=_float_list, default=None)
    sweep.add_argument("--jobs", type=int, default=None, help="worker processes (default: 1)")
    sub.add_parser("budget", parents=[common], help="closed-form timing and decoherence budget")
    sub.add_parser("schedule", parents=[common], help="print the segment table")
    return parser


_NON_CONFIG_ARGS = {"command", "config", "log_dir", "dump_config", "verbose"}


def main(argv: list[str] | None = None) -> int:
    """CLI entry point; returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    cli_values: dict[str, Any] = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG_ARGS}

    try:
        file_values = load_config_file(args.config) if args.config else {}
        cfg = merge_config(file_values, cli_values)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return config.EXIT_USAGE

    if args.dump_config:
        print(dump_config(cfg), end="")
        return config.EXIT_OK

    if args.log_dir:
        output_dir = args.log_dir
        output_dir.mkdir(parents=True, exist_ok=True)
    else:
        output_dir = create_output_dir()
    log = setup_logging(output_dir, verbose=args.verbose)
    log.info("Command %s, log directory %s", args.command, output_dir)
    log.debug("Effective configuration:\n%s", dump_config(cfg))

    try:
        return COMMANDS[args.command](cfg, output_dir)
    except ValueError as e:
        log.error("configuration error: %s", e)
        print(f"configuration error: {e}", file=sys.stderr)
        return config.EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
