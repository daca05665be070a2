"""Fidelity, GHZ target, static decoherence budget and the crosstalk oracle."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from cavity_ghz.model import (
    TWO_PI,
    PhysicalParams,
    cavity_lifetime,
    coherence_times,
    crosstalk_probability,
    detunings,
    q_from_kappa,
    total_time,
)
from cavity_ghz.propagate import lowest_eigenvalue
from cavity_ghz.statespace import QuantumState, SystemDims, basis_index, pure_state

logger = logging.getLogger(__name__)

GHZ_AMPLITUDE = 1.0 / math.sqrt(2.0)


def fidelity(state: QuantumState, target: QuantumState) -> float:
    """Overlap of *state* with the pure *target*: <psi|rho|psi> or |<psi|phi>|^2."""
    if not target.is_pure:
        raise ValueError("the fidelity target must be a pure state")
    if state.dims != target.dims:
        raise ValueError(f"dimension mismatch: {state.dims} vs {target.dims}")
    psi = target.data
    if state.is_pure:
        return float(abs(np.vdot(psi, state.data)) ** 2)
    return float(np.vdot(psi, state.data @ psi).real)


def ghz_target(n: int, dims: SystemDims) -> QuantumState:
    """|1> on the coupler times (|0...0> + |1...1>)/sqrt(2) on the cavities."""
    if dims.n_cavities != n:
        raise ValueError(f"dims has {dims.n_cavities} cavities, expected {n}")
    vector = np.zeros(dims.dimension, dtype=complex)
    vector[basis_index(dims, 1, [0] * n)] = GHZ_AMPLITUDE
    vector[basis_index(dims, 1, [1] * n)] = GHZ_AMPLITUDE
    return pure_state(dims, vector)


def min_eigenvalue(state: QuantumState) -> float:
    """Smallest eigenvalue of the density matrix; a pure vector's projector gives 0."""
    if state.is_pure:
        return 0.0
    return lowest_eigenvalue(state.data)


# ---------------------------------------------------------------------------
# Crosstalk
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CrosstalkRow:
    step: int
    idle_cavity: int
    probability: float


def crosstalk_table(params: PhysicalParams, n: int) -> list[CrosstalkRow]:
    """Idle-cavity excitation probability for every (active step, idle cavity) pair."""
    if n < 2 or n > params.n_cavities:
        raise ValueError(f"n must be in 2..{params.n_cavities}, got {n}")
    det = detunings(params)
    rows = []
    for step in range(1, n + 1):
        for j in range(1, n + 1):
            if j == step:
                continue
            p = crosstalk_probability(params.g_tilde[j - 1], det.Delta_j[j - 1], params.g[step - 1])
            rows.append(CrosstalkRow(step, j, p))
    return rows


def simulate_crosstalk_probability(g_tilde_j: float, Delta_j: float, g_i: float) -> float:
    """Integrate the two-level idle-cavity exchange over pi/(2 g_i) and return the transferred population.

    The state starts in |2>|0>_j and couples to |1>|1>_j through
    ``g_tilde_j * (exp(i Delta_j t) sigma+ + h.c.)``.
    """
    if g_i <= 0:
        raise ValueError(f"g_i must be positive, got {g_i}")
    duration = math.pi / (2.0 * g_i)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        phase = np.exp(1j * Delta_j * t)
        upper, lower = y
        return np.array([-1j * g_tilde_j * phase * lower, -1j * g_tilde_j * np.conj(phase) * upper])

    solution = solve_ivp(
        rhs,
        (0.0, duration),
        np.array([1.0 + 0j, 0.0 + 0j]),
        method="DOP853",
        rtol=1e-10,
        atol=1e-12,
    )
    if not solution.success:
        raise RuntimeError(f"two-level integration failed: {solution.message}")
    return float(abs(solution.y[1, -1]) ** 2)


# ---------------------------------------------------------------------------
# Static budget
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BudgetReport:
    """Closed-form feasibility numbers for one parameter set and cavity count."""

    n: int
    tau: float
    cavity_lifetime: float
    quality_factors: tuple[float, ...]
    crosstalk: tuple[CrosstalkRow, ...]
    rate_products: dict[str, float] = field(default_factory=dict)
    coherence_times: dict[str, float] = field(default_factory=dict)

    @property
    def tau_over_cavity_lifetime(self) -> float:
        if math.isinf(self.cavity_lifetime):
            return 0.0
        return self.tau / self.cavity_lifetime

    @property
    def max_crosstalk(self) -> float:
        return max((row.probability for row in self.crosstalk), default=0.0)


def decoherence_budget(params: PhysicalParams, n: int) -> BudgetReport:
    """tau, cavity lifetime, idle-cavity crosstalk and tau * rate for every channel.

    Quality factors use the active cavity frequency and one photon per cavity;
    a cavity with zero decay has an infinite lifetime and ``Q = inf``.
    """
    tau = total_time(params, n)
    kappas = params.rates.kappa[:n]
    omegas = params.omega_c_active[:n]
    quality = tuple(math.inf if k == 0 else q_from_kappa(1.0 / k, w) for k, w in zip(kappas, omegas))

    if all(math.isfinite(q) for q in quality):
        lifetime = cavity_lifetime(list(quality), [w / TWO_PI for w in omegas], [1.0] * n)
    else:
        lifetime = min(math.inf if k == 0 else 1.0 / k for k in kappas) / n

    rates = params.rates.named_rates()
    products = {name: tau * rate for name, rate in rates if not name.startswith("kappa_")}
    products.update({f"kappa_{i}": tau * k for i, k in enumerate(kappas, start=1)})

    report = BudgetReport(
        n=n,
        tau=tau,
        cavity_lifetime=lifetime,
        quality_factors=quality,
        crosstalk=tuple(crosstalk_table(params, n)),
        rate_products=products,
        coherence_times=coherence_times(params),
    )
    logger.debug("Budget n=%d: tau=%.4e s, T_cav=%.4e s, max p_j=%.3e", n, tau, lifetime, report.max_crosstalk)
    return report
