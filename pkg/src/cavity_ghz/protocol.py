"""Segment schedule of the n-step GHZ protocol, its analytic oracle, and full runs.

Step i <= n-2 loads cavity i and flips the coupler back with a 1<->2 pulse of
phase pi. Step n-1 follows its resonant segment with a 0<->2 pulse (phase
-pi/2) and a 1<->2 pulse (phase pi/2). Step n only loads cavity n. Every
resonant segment is framed by two retune segments of length t_d.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from cavity_ghz.analysis import GHZ_AMPLITUDE, fidelity
from cavity_ghz.config import DEFAULT_FOCK_CUTOFF
from cavity_ghz.hamiltonian import HamiltonianSpec
from cavity_ghz.model import PhysicalParams, total_time_terms
from cavity_ghz.propagate import IntegratorConfig, SegmentResult, evolve_lindblad, evolve_pure
from cavity_ghz.statespace import QuantumState, SystemDims, basis_index, pure_state, pure_to_density, vacuum_state

logger = logging.getLogger(__name__)

# Symbolic state: (coupler level, cavity occupations) -> amplitude
SymbolicState = dict[tuple[int, tuple[int, ...]], complex]


class SimulationMode(enum.Enum):
    IDEAL_RESONANT = "ideal"
    PURE_COHERENT_ERRORS = "pure"
    LINDBLAD = "lindblad"

    @property
    def error_terms(self) -> dict[str, bool]:
        enabled = self is not SimulationMode.IDEAL_RESONANT
        return {"include_offresonant": enabled, "include_crosstalk": enabled}


@dataclass(frozen=True)
class Segment:
    spec: HamiltonianSpec
    duration: float
    label: str
    step: int

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError(f"segment {self.label} has negative duration {self.duration}")


@dataclass(frozen=True)
class Schedule:
    segments: tuple[Segment, ...]
    n: int
    params: PhysicalParams

    @property
    def total_duration(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    def table(self, t_start: float = 0.0) -> list[tuple[str, float, float, str]]:
        """(label, start, duration, Hamiltonian kind) per segment."""
        rows = []
        t = t_start
        for s in self.segments:
            rows.append((s.label, t, s.duration, s.spec.kind.value))
            t += s.duration
        return rows


def build_schedule(
    n: int,
    params: PhysicalParams,
    include_offresonant: bool = True,
    include_crosstalk: bool = True,
) -> Schedule:
    """Emit the retune / resonant / retune / pulse pattern for steps 1..n."""
    if n < 2:
        raise ValueError(f"the protocol needs n >= 2 cavities, got {n}")
    # Validates couplings and pulse rates the same way the timing formula does.
    total_time_terms(params, n)
    flags = {"include_offresonant": include_offresonant, "include_crosstalk": include_crosstalk}
    t_pulse21 = math.pi / (2.0 * params.Omega_21)
    t_pulse20 = math.pi / (2.0 * params.Omega_20)

    segments: list[Segment] = []
    for i in range(1, n + 1):
        prefix = f"step{i}"
        segments += [
            Segment(HamiltonianSpec.idle(**flags), params.t_d, f"{prefix}:retune", i),
            Segment(HamiltonianSpec.resonant(i, **flags), math.pi / (2.0 * params.g[i - 1]), f"{prefix}:resonant(c{i})", i),
            Segment(HamiltonianSpec.idle(**flags), params.t_d, f"{prefix}:retune", i),
        ]
        if i <= n - 2:
            segments.append(Segment(HamiltonianSpec.pulse21(math.pi, **flags), t_pulse21, f"{prefix}:pulse21", i))
        elif i == n - 1:
            segments.append(Segment(HamiltonianSpec.pulse20(-math.pi / 2, **flags), t_pulse20, f"{prefix}:pulse20", i))
            segments.append(Segment(HamiltonianSpec.pulse21(math.pi / 2, **flags), t_pulse21, f"{prefix}:pulse21", i))
    return Schedule(tuple(segments), n, params)


def preparation_time(params: PhysicalParams) -> float:
    """Length of the 0<->2 pulse that prepares (|0> + |2>)/sqrt(2) from |0>."""
    if params.Omega_20 <= 0:
        raise ValueError("Omega_20 must be positive")
    return math.pi / (4.0 * params.Omega_20)


def preparation_segment(params: PhysicalParams, include_crosstalk: bool = True) -> Segment:
    spec = HamiltonianSpec.pulse20(-math.pi / 2, include_crosstalk=include_crosstalk)
    return Segment(spec, preparation_time(params), "prep:pulse20", 0)


# ---------------------------------------------------------------------------
# Oracle
# ---------------------------------------------------------------------------

def _symbolic_after_step(n: int, k: int) -> SymbolicState:
    if not 0 <= k <= n:
        raise ValueError(f"step index must be in 0..{n}, got {k}")
    empty = (0,) * n
    if k == 0:
        return {(0, empty): GHZ_AMPLITUDE, (2, empty): GHZ_AMPLITUDE}
    loaded = (1,) * k + (0,) * (n - k)
    if k <= n - 2:
        return {(0, empty): GHZ_AMPLITUDE, (2, loaded): GHZ_AMPLITUDE}
    if k == n - 1:
        return {(1, empty): GHZ_AMPLITUDE, (2, loaded): 1j * GHZ_AMPLITUDE}
    return {(1, empty): GHZ_AMPLITUDE, (1, loaded): GHZ_AMPLITUDE}


def symbolic_to_state(symbolic: Mapping[tuple[int, tuple[int, ...]], complex], dims: SystemDims) -> QuantumState:
    vector = np.zeros(dims.dimension, dtype=complex)
    for (level, occupations), amplitude in symbolic.items():
        vector[basis_index(dims, level, occupations)] += amplitude
    return pure_state(dims, vector)


def ideal_state_after_step(n: int, k: int, dims: SystemDims | None = None) -> QuantumState:
    """Analytic state after step k (k = 0 is the prepared superposition)."""
    if n < 2:
        raise ValueError(f"the protocol needs n >= 2 cavities, got {n}")
    dims = dims or SystemDims(n, DEFAULT_FOCK_CUTOFF)
    if dims.n_cavities != n:
        raise ValueError(f"dims has {dims.n_cavities} cavities, expected {n}")
    return symbolic_to_state(_symbolic_after_step(n, k), dims)


def _resonant_swap(state: SymbolicState, cavity: int) -> SymbolicState:
    out: SymbolicState = {}
    for (level, occ), amp in state.items():
        m = occ[cavity - 1]
        if level == 2 and m == 0:
            key = (1, occ[: cavity - 1] + (1,) + occ[cavity:])
        elif level == 1 and m == 1:
            key = (2, occ[: cavity - 1] + (0,) + occ[cavity:])
        elif level == 0 or (level == 1 and m == 0):
            out[(level, occ)] = out.get((level, occ), 0) + amp
            continue
        else:
            raise ValueError(f"component |{level}>{occ} leaves the single-excitation manifold")
        out[key] = out.get(key, 0) + (-1j) * amp
    return out


def _pulse(state: SymbolicState, rules: Mapping[int, tuple[int, complex]]) -> SymbolicState:
    out: SymbolicState = {}
    for (level, occ), amp in state.items():
        new_level, factor = rules.get(level, (level, 1))
        key = (new_level, occ)
        out[key] = out.get(key, 0) + factor * amp
    return out


_PULSE21_PI = {1: (2, 1j), 2: (1, 1j)}
_PULSE20_MINUS_HALF_PI = {0: (2, 1), 2: (0, -1)}
_PULSE21_HALF_PI = {1: (2, -1), 2: (1, 1)}


def apply_step_rules(state: SymbolicState, n: int, k: int) -> SymbolicState:
    """Apply the ideal unitaries of step k (1-based) to a symbolic state."""
    if not 1 <= k <= n:
        raise ValueError(f"step index must be in 1..{n}, got {k}")
    state = _resonant_swap(state, k)
    if k <= n - 2:
        state = _pulse(state, _PULSE21_PI)
    elif k == n - 1:
        state = _pulse(_pulse(state, _PULSE20_MINUS_HALF_PI), _PULSE21_HALF_PI)
    return {key: amp for key, amp in state.items() if amp != 0}


# ---------------------------------------------------------------------------
# Runs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentRecord:
    label: str
    step: int
    t_end: float
    fidelity: float | None
    trace_drift: float
    steps: int
    dt: float
    flagged: bool

    def to_dict(self) -> dict[str, object]:
        return {
            "label": self.label,
            "step": self.step,
            "t_end": self.t_end,
            "fidelity": self.fidelity,
            "trace_drift": self.trace_drift,
            "steps": self.steps,
            "dt": self.dt,
            "flagged": self.flagged,
        }


@dataclass(frozen=True)
class ProtocolRun:
    final_state: QuantumState
    records: tuple[SegmentRecord, ...]
    tau: float
    prep_time: float
    flagged: bool
    boundary_states: dict[int, QuantumState] = field(default_factory=dict)

    @property
    def fidelity(self) -> float:
        return self.records[-1].fidelity

    @property
    def max_trace_drift(self) -> float:
        return max(r.trace_drift for r in self.records)

    @property
    def min_dt(self) -> float:
        return min((r.dt for r in self.records if r.steps), default=0.0)


def run_protocol(
    n: int,
    params: PhysicalParams,
    dims: SystemDims,
    mode: SimulationMode,
    cfg: IntegratorConfig,
    keep_boundary_states: bool = False,
) -> ProtocolRun:
    """Simulate the full protocol and record the oracle fidelity at every step boundary.

    Ideal mode starts from the prepared superposition at t = 0. The other
    modes start from |0> with empty cavities and prepend the preparation
    pulse, so the schedule begins at the end of that pulse.
    """
    mode = SimulationMode(mode)
    if dims.n_cavities != n or params.n_cavities != n:
        raise ValueError(f"dims and params must describe {n} cavities")
    schedule = build_schedule(n, params, **mode.error_terms)
    evolve = evolve_lindblad if mode is SimulationMode.LINDBLAD else evolve_pure

    segments = list(schedule.segments)
    if mode is SimulationMode.IDEAL_RESONANT:
        state = ideal_state_after_step(n, 0, dims)
        prep_time = 0.0
    else:
        state = vacuum_state(dims)
        if mode is SimulationMode.LINDBLAD:
            state = pure_to_density(state)
        prep = preparation_segment(params)
        prep_time = prep.duration
        segments.insert(0, prep)

    logger.info("Running %s protocol: n=%d, fock_cutoff=%d, %d segments", mode.value, n, dims.fock_cutoff, len(segments))
    records: list[SegmentRecord] = []
    boundary: dict[int, QuantumState] = {}
    if keep_boundary_states and mode is SimulationMode.IDEAL_RESONANT:
        boundary[0] = state

    t = 0.0
    for index, segment in enumerate(segments):
        result: SegmentResult = evolve(state, segment.spec, params, t, segment.duration, cfg, label=segment.label)
        state = result.final_state
        t += segment.duration
        last_of_step = index == len(segments) - 1 or segments[index + 1].step != segment.step
        step_fidelity = None
        if last_of_step:
            step_fidelity = fidelity(state, ideal_state_after_step(n, segment.step, dims))
            if keep_boundary_states:
                boundary[segment.step] = state
            logger.debug("Step %d boundary at t=%.4e s: oracle fidelity %.8f", segment.step, t, step_fidelity)
        records.append(SegmentRecord(
            label=segment.label,
            step=segment.step,
            t_end=t,
            fidelity=step_fidelity,
            trace_drift=result.max_trace_drift,
            steps=result.steps_taken,
            dt=result.dt,
            flagged=result.flagged,
        ))

    run = ProtocolRun(
        final_state=state,
        records=tuple(records),
        tau=schedule.total_duration,
        prep_time=prep_time,
        flagged=any(r.flagged for r in records),
        boundary_states=boundary,
    )
    logger.info("Protocol finished: fidelity=%.6f, tau=%.4e s", run.fidelity, run.tau)
    return run
