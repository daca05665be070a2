"""Fidelity-versus-b sweeps over the phase-qutrit preset and the Fock-cutoff convergence gate."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from functools import partial
from multiprocessing import Pool

from cavity_ghz import config
from cavity_ghz.analysis import fidelity, ghz_target
from cavity_ghz.model import PhysicalParams, preset_phase_qutrit
from cavity_ghz.propagate import IntegratorConfig
from cavity_ghz.protocol import ProtocolRun, SimulationMode, run_protocol
from cavity_ghz.statespace import SystemDims

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = (
    "n",
    "b",
    "g_cross_ratio",
    "fidelity",
    "tau_seconds",
    "dt_used",
    "trace_drift",
    "converged",
    "flagged",
    "error",
)


@dataclass(frozen=True)
class SweepRow:
    n: int
    b: float
    g_cross_ratio: float
    fidelity: float | None
    tau_seconds: float | None
    dt_used: float | None
    trace_drift: float | None
    converged: bool | None = None
    flagged: bool = False
    error: str | None = None

    @property
    def sort_key(self) -> tuple[int, float, float]:
        return (self.n, self.b, self.g_cross_ratio)

    def to_dict(self) -> dict[str, object]:
        return {name: getattr(self, name) for name in SWEEP_COLUMNS}


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]
    preset: str = "phase_qutrit"

    @property
    def failed(self) -> bool:
        return any(row.error is not None for row in self.rows)

    @property
    def flagged(self) -> bool:
        """True when any row failed, breached a tolerance, or missed the cutoff gate."""
        return any(row.error is not None or row.flagged or row.converged is False for row in self.rows)


@dataclass(frozen=True)
class CutoffCheck:
    runs: dict[int, ProtocolRun]
    fidelities: dict[int, float]
    tolerance: float

    @property
    def spread(self) -> float:
        values = list(self.fidelities.values())
        return max(values) - min(values)

    @property
    def converged(self) -> bool:
        return self.spread <= self.tolerance


def gate_cutoffs(fock_cutoff: int) -> tuple[int, int]:
    """Cutoffs compared by the convergence gate: the run's own and the next one up."""
    if fock_cutoff < 2:
        raise ValueError(f"fock_cutoff must be >= 2, got {fock_cutoff}")
    return (fock_cutoff, fock_cutoff + 1)


def check_cutoff_convergence(
    n: int,
    params: PhysicalParams,
    mode: SimulationMode,
    cfg: IntegratorConfig,
    cutoffs: Sequence[int] | None = None,
    tolerance: float = config.CONVERGENCE_TOLERANCE,
) -> CutoffCheck:
    """Run the protocol at each Fock cutoff and compare the final GHZ fidelities.

    Without explicit ``cutoffs`` the default cutoff is compared with the next
    one up. Two-photon states are reached only through the off-resonant g', g~
    and g~' couplings, so a cutoff of 2 drops their dispersive shifts entirely.
    """
    cutoffs = gate_cutoffs(config.DEFAULT_FOCK_CUTOFF) if cutoffs is None else tuple(cutoffs)
    if len(set(cutoffs)) < 2:
        raise ValueError(f"need at least two distinct cutoffs, got {tuple(cutoffs)}")
    runs: dict[int, ProtocolRun] = {}
    fidelities: dict[int, float] = {}
    for cutoff in sorted(set(cutoffs)):
        dims = SystemDims(n, cutoff)
        runs[cutoff] = run_protocol(n, params, dims, mode, cfg)
        fidelities[cutoff] = fidelity(runs[cutoff].final_state, ghz_target(n, dims))
    check = CutoffCheck(runs, fidelities, tolerance)
    if not check.converged:
        logger.warning("Fock cutoff not converged for n=%d: spread %.3e > %.1e", n, check.spread, tolerance)
    return check


def _sweep_row(
    point: tuple[int, float, float],
    mode: SimulationMode,
    cfg: IntegratorConfig,
    fock_cutoff: int,
    check_cutoff: bool,
    t_d: float,
) -> SweepRow:
    n, b, ratio = point
    try:
        params = preset_phase_qutrit(n, b, ratio, t_d=t_d)
        converged = None
        if check_cutoff:
            check = check_cutoff_convergence(n, params, mode, cfg, gate_cutoffs(fock_cutoff))
            converged = check.converged
            run = check.runs[fock_cutoff]
            logger.debug("Cutoff check n=%d b=%g: %s", n, b, check.fidelities)
        else:
            run = run_protocol(n, params, SystemDims(n, fock_cutoff), mode, cfg)
        value = fidelity(run.final_state, ghz_target(n, SystemDims(n, fock_cutoff)))
        logger.info("Sweep point n=%d b=%g ratio=%g: fidelity %.6f", n, b, ratio, value)
        return SweepRow(
            n=n,
            b=b,
            g_cross_ratio=ratio,
            fidelity=value,
            tau_seconds=run.tau,
            dt_used=run.min_dt,
            trace_drift=run.max_trace_drift,
            converged=converged,
            flagged=run.flagged,
        )
    except Exception as e:
        logger.error("Failed: sweep point n=%d b=%g ratio=%g: %s", n, b, ratio, e, exc_info=True)
        return SweepRow(n, b, ratio, None, None, None, None, error=f"{type(e).__name__}: {e}")


def sweep_b(
    n_values: Sequence[int],
    b_values: Sequence[float],
    g_cross_ratio: float | Sequence[float],
    mode: SimulationMode,
    cfg: IntegratorConfig,
    fock_cutoff: int = config.DEFAULT_FOCK_CUTOFF,
    check_cutoff: bool = True,
    jobs: int = config.DEFAULT_JOBS,
    t_d: float = config.PHASE_QUTRIT_T_D_S,
) -> SweepResult:
    """Phase-qutrit fidelity for every (n, b, g_cross_ratio) combination.

    A failing point is logged and kept as a row with its ``error`` set; the
    other points still run. Rows come back sorted by (n, b, ratio) whatever
    the worker count. With ``check_cutoff`` each point is also run at
    ``fock_cutoff + 1`` and its ``converged`` column filled in.
    """
    ratios = [g_cross_ratio] if isinstance(g_cross_ratio, (int, float)) else list(g_cross_ratio)
    if not n_values or not b_values or not ratios:
        raise ValueError("n_values, b_values and g_cross_ratio must be nonempty")
    if any(b <= 0 for b in b_values):
        raise ValueError("every b must be positive")
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    if t_d < 0:
        raise ValueError(f"t_d must be nonnegative, got {t_d}")

    points = sorted({(int(n), float(b), float(r)) for n in n_values for b in b_values for r in ratios})
    worker = partial(
        _sweep_row, mode=SimulationMode(mode), cfg=cfg, fock_cutoff=fock_cutoff, check_cutoff=check_cutoff, t_d=t_d,
    )
    logger.info("Sweeping %d points with %d job(s), t_d=%.3e s", len(points), jobs, t_d)
    if jobs == 1:
        rows = [worker(p) for p in points]
    else:
        with Pool(processes=jobs) as pool:
            rows = pool.map(worker, points)
    return SweepResult(tuple(sorted(rows, key=lambda r: r.sort_key)))
