"""Fixed-step RK4 propagation of pure states and Lindblad density matrices.

Both engines take the Hamiltonian as a list of rotating terms. Pure states
apply each term as a row-sparse gather; density matrices rebuild a sparse
H(t) once per RK4 stage and use a single sparse-dense product for the commutator.
"""

from __future__ import annotations

import enum
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse

from cavity_ghz import config
from cavity_ghz.hamiltonian import HamiltonianSpec, RotatingTerm, hamiltonian_terms, max_frequency_scale
from cavity_ghz.model import TWO_PI, PhysicalParams
from cavity_ghz.statespace import (
    DephasingPair,
    QuantumState,
    StateKind,
    SystemDims,
    annihilation_local,
    coupler_local,
    dephasing_local,
    embed_diagonal,
    embed_monomial,
)

logger = logging.getLogger(__name__)

# Each pair uses gamma * (Sz rho Sz - 1/2 {Sz^2, rho}); summed over the three pairs
# every coherence between coupler levels decays at 3 * gamma_phi when the rates are equal.
DEPHASING_MODEL = "trace-preserving, |0>-|2> coherence decays at 3*gamma_phi (not 4*gamma_phi)"


class IntegrationMethod(enum.Enum):
    RK4_FIXED = "rk4"


class NumericalFailureError(RuntimeError):
    """Raised when the integrated state stops being finite."""

    def __init__(self, step_index: int, label: str = "") -> None:
        self.step_index = step_index
        self.label = label
        where = f" in segment '{label}'" if label else ""
        super().__init__(f"non-finite state at step {step_index}{where}")


@dataclass(frozen=True)
class IntegratorConfig:
    """Step-size and tolerance settings shared by both engines.

    ``dt_factor`` is the number of steps per period of the fastest frequency
    in a segment; ``min_steps_per_segment`` is a floor on the step count so
    slow segments still resolve their rotation accurately.
    """

    dt_factor: float = config.DEFAULT_DT_FACTOR
    method: IntegrationMethod = IntegrationMethod.RK4_FIXED
    trace_tolerance: float = config.DEFAULT_TRACE_TOLERANCE
    hermiticity_tolerance: float = config.DEFAULT_HERMITICITY_TOLERANCE
    min_steps_per_segment: int = config.DEFAULT_MIN_STEPS_PER_SEGMENT

    def __post_init__(self) -> None:
        if self.dt_factor < config.MIN_DT_FACTOR:
            raise ValueError(f"dt_factor must be >= {config.MIN_DT_FACTOR}, got {self.dt_factor}")
        if self.trace_tolerance <= 0 or self.hermiticity_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.min_steps_per_segment < 1:
            raise ValueError(f"min_steps_per_segment must be >= 1, got {self.min_steps_per_segment}")
        object.__setattr__(self, "method", IntegrationMethod(self.method))

    def step_count(self, duration: float, scale: float) -> int:
        if duration == 0 or scale == 0:
            return 0
        natural = math.ceil(duration * self.dt_factor * scale / TWO_PI)
        return max(self.min_steps_per_segment, natural)


@dataclass(frozen=True)
class SegmentResult:
    final_state: QuantumState
    steps_taken: int
    dt: float
    max_trace_drift: float
    max_hermiticity_defect: float
    min_eigenvalue: float | None = None
    flagged: bool = False


def _check_inputs(state: QuantumState, params: PhysicalParams, duration: float, t_start: float) -> None:
    if duration < 0:
        raise ValueError(f"duration must be nonnegative, got {duration}")
    if t_start < 0:
        raise ValueError(f"t_start must be nonnegative, got {t_start}")
    if params.n_cavities != state.dims.n_cavities:
        raise ValueError(f"params describe {params.n_cavities} cavities but the state has {state.dims.n_cavities}")


def _rk4(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_start: float,
    dt: float,
    n_steps: int,
    label: str,
    on_step: Callable[[np.ndarray], None],
) -> np.ndarray:
    y = y0.copy()
    for k in range(n_steps):
        t = t_start + k * dt
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = rhs(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise NumericalFailureError(k, label)
        on_step(y)
    return y


# ---------------------------------------------------------------------------
# Pure states
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _GatherTerm:
    term: RotatingTerm
    source: np.ndarray
    weight: np.ndarray
    source_adj: np.ndarray
    weight_adj: np.ndarray


def _gather_terms(terms: list[RotatingTerm], dims: SystemDims) -> list[_GatherTerm]:
    gathered = []
    for term in terms:
        src, w = embed_monomial(dims, term.local_factors(dims))
        src_adj, w_adj = embed_monomial(dims, term.local_factors(dims, adjoint=True))
        gathered.append(_GatherTerm(term, src, w, src_adj, w_adj))
    return gathered


def evolve_pure(
    psi0: QuantumState,
    spec: HamiltonianSpec,
    params: PhysicalParams,
    t_start: float,
    duration: float,
    cfg: IntegratorConfig,
    label: str = "",
) -> SegmentResult:
    """Integrate i dpsi/dt = H(t) psi over one segment without renormalizing."""
    if not psi0.is_pure:
        raise ValueError("evolve_pure needs a pure state vector")
    _check_inputs(psi0, params, duration, t_start)

    n_steps = cfg.step_count(duration, max_frequency_scale(spec, params))
    if n_steps == 0:
        drift = abs(float(np.vdot(psi0.data, psi0.data).real) - 1.0)
        return SegmentResult(psi0, 0, 0.0, drift, 0.0, flagged=drift > cfg.trace_tolerance)

    dt = duration / n_steps
    gathered = _gather_terms(hamiltonian_terms(spec, params), psi0.dims)

    def rhs(t: float, psi: np.ndarray) -> np.ndarray:
        h_psi = np.zeros_like(psi)
        for g in gathered:
            c = g.term.coefficient(t)
            h_psi += c * g.weight * psi[g.source]
            h_psi += c.conjugate() * g.weight_adj * psi[g.source_adj]
        return -1j * h_psi

    max_drift = abs(float(np.vdot(psi0.data, psi0.data).real) - 1.0)

    def track(psi: np.ndarray) -> None:
        nonlocal max_drift
        max_drift = max(max_drift, abs(float(np.vdot(psi, psi).real) - 1.0))

    psi = _rk4(rhs, psi0.data, t_start, dt, n_steps, label, track)
    flagged = max_drift > cfg.trace_tolerance
    logger.debug("Segment %s: %d pure steps, dt=%.3e s, norm drift=%.2e", label or spec.describe(), n_steps, dt, max_drift)
    if flagged:
        logger.warning("Segment %s: norm drift %.2e exceeds %.1e", label or spec.describe(), max_drift, cfg.trace_tolerance)
    return SegmentResult(
        final_state=QuantumState(psi0.dims, StateKind.PURE_VECTOR, psi),
        steps_taken=n_steps,
        dt=dt,
        max_trace_drift=max_drift,
        max_hermiticity_defect=0.0,
        flagged=flagged,
    )


# ---------------------------------------------------------------------------
# Density matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _JumpChannel:
    rate: float
    source: np.ndarray
    weight: np.ndarray  # rate * outer(w, conj(w))


@dataclass(frozen=True)
class LindbladKernel:
    """Precomputed pieces of the master-equation right-hand side for one segment.

    ``mask`` collects every term that acts elementwise on rho: the
    anticommutator with the summed jump number operators and the dephasing
    terms ``gamma * (Sz rho Sz - 1/2 {Sz^2, rho})``, which equal
    ``gamma * (Sz rho Sz - rho)`` on the two levels each Sz acts on.
    """

    dims: SystemDims
    groups: tuple[tuple[float, scipy.sparse.csr_matrix], ...]  # (detuning, summed amplitude * X)
    jumps: tuple[_JumpChannel, ...]
    mask: np.ndarray

    def hamiltonian(self, t: float) -> scipy.sparse.csr_matrix:
        d = self.dims.dimension
        x = scipy.sparse.csr_matrix((d, d), dtype=complex)
        for detuning, block in self.groups:
            x = x + (block if detuning == 0.0 else np.exp(1j * detuning * t) * block)
        return (x + x.conj().T).tocsr()

    def rhs(self, t: float, rho: np.ndarray) -> np.ndarray:
        y = -1j * (self.hamiltonian(t) @ rho)
        out = y + y.conj().T + self.mask * rho
        for channel in self.jumps:
            out += channel.weight * rho[np.ix_(channel.source, channel.source)]
        return out


def _collapse_channels(params: PhysicalParams, dims: SystemDims) -> list[tuple[float, dict[int, np.ndarray]]]:
    rates = params.rates
    channels = [
        (kappa, {i: annihilation_local(dims.fock_cutoff)})
        for i, kappa in enumerate(rates.kappa, start=1)
    ]
    channels += [
        (rates.gamma_21, {0: coupler_local(1, 2)}),
        (rates.gamma_20, {0: coupler_local(0, 2)}),
        (rates.gamma_10, {0: coupler_local(0, 1)}),
    ]
    return [(rate, factors) for rate, factors in channels if rate > 0]


def build_lindblad_kernel(spec: HamiltonianSpec, params: PhysicalParams, dims: SystemDims) -> LindbladKernel:
    d = dims.dimension
    rows = np.arange(d)
    by_detuning: dict[float, scipy.sparse.csr_matrix] = {}
    for term in hamiltonian_terms(spec, params):
        src, w = embed_monomial(dims, term.local_factors(dims))
        block = scipy.sparse.csr_matrix((term.amplitude * w, (rows, src)), shape=(d, d))
        block.eliminate_zeros()
        previous = by_detuning.get(term.detuning)
        by_detuning[term.detuning] = block if previous is None else (previous + block).tocsr()

    jumps = []
    number_sum = np.zeros(d)
    for rate, factors in _collapse_channels(params, dims):
        src, w = embed_monomial(dims, factors)
        jumps.append(_JumpChannel(rate, src, rate * np.outer(w, w.conj())))
        number_sum += rate * np.bincount(src, weights=np.abs(w) ** 2, minlength=d)

    mask = -0.5 * (number_sum[:, None] + number_sum[None, :])
    dephasing = {
        DephasingPair.Z21: params.rates.gamma_phi_21,
        DephasingPair.Z20: params.rates.gamma_phi_20,
        DephasingPair.Z10: params.rates.gamma_phi_10,
    }
    for pair, gamma in dephasing.items():
        if gamma > 0:
            z = embed_diagonal(dims, {0: dephasing_local(pair)})
            mask -= 0.5 * gamma * (z[:, None] - z[None, :]) ** 2

    return LindbladKernel(dims, tuple(sorted(by_detuning.items())), tuple(jumps), mask)


def lindblad_scale(spec: HamiltonianSpec, params: PhysicalParams) -> float:
    """Step-size scale: fastest Hamiltonian frequency or 2 pi times the fastest decoherence rate."""
    return max(max_frequency_scale(spec, params), TWO_PI * params.rates.max_rate)


def lowest_eigenvalue(rho: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of *rho*."""
    hermitian = 0.5 * (rho + rho.conj().T)
    return float(scipy.linalg.eigvalsh(hermitian)[0])


def evolve_lindblad(
    rho0: QuantumState,
    spec: HamiltonianSpec,
    params: PhysicalParams,
    t_start: float,
    duration: float,
    cfg: IntegratorConfig,
    label: str = "",
) -> SegmentResult:
    """Integrate the master equation over one segment; checks positivity at the end."""
    if rho0.kind is not StateKind.DENSITY_MATRIX:
        raise ValueError("evolve_lindblad needs a density matrix")
    _check_inputs(rho0, params, duration, t_start)
    name = label or spec.describe()

    def defects(rho: np.ndarray) -> tuple[float, float]:
        return abs(float(np.trace(rho).real) - 1.0), float(np.max(np.abs(rho - rho.conj().T)))

    max_drift, max_defect = defects(rho0.data)
    n_steps = cfg.step_count(duration, lindblad_scale(spec, params))
    if n_steps == 0:
        rho, dt = rho0.data, 0.0
    else:
        dt = duration / n_steps
        kernel = build_lindblad_kernel(spec, params, rho0.dims)

        def track(rho: np.ndarray) -> None:
            nonlocal max_drift, max_defect
            drift, defect = defects(rho)
            max_drift = max(max_drift, drift)
            max_defect = max(max_defect, defect)

        rho = _rk4(kernel.rhs, rho0.data, t_start, dt, n_steps, label, track)

    lowest = lowest_eigenvalue(rho)
    flagged = (
        max_drift > cfg.trace_tolerance
        or max_defect > cfg.hermiticity_tolerance
        or lowest < -config.POSITIVITY_TOLERANCE
    )
    logger.debug(
        "Segment %s: %d Lindblad steps, dt=%.3e s, trace drift=%.2e, hermiticity=%.2e, min eig=%.2e",
        name, n_steps, dt, max_drift, max_defect, lowest,
    )
    if flagged:
        logger.warning(
            "Segment %s flagged: trace drift %.2e, hermiticity defect %.2e, min eigenvalue %.2e",
            name, max_drift, max_defect, lowest,
        )
    final = rho0 if n_steps == 0 else QuantumState(rho0.dims, StateKind.DENSITY_MATRIX, rho)
    return SegmentResult(
        final_state=final,
        steps_taken=n_steps,
        dt=dt,
        max_trace_drift=max_drift,
        max_hermiticity_defect=max_defect,
        min_eigenvalue=lowest,
        flagged=flagged,
    )
