"""Interaction-picture Hamiltonians of the resonant, 1<->2 pulse, 0<->2 pulse and idle segments.

Every Hamiltonian is a sum of rotating terms ``c * exp(i w t) * X + h.c.``
where X is a product of single-factor operators. The dense matrix is only
formed by :func:`build_h`; the propagator works on the term list directly.
hbar = 1, all coefficients in rad/s, and ``t`` is the global protocol clock.
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from cavity_ghz.model import PhysicalParams, detunings
from cavity_ghz.statespace import CompositeOperator, LocalOperator, SystemDims, embed, local_matrix

logger = logging.getLogger(__name__)


class HamiltonianKind(enum.Enum):
    RESONANT_CAVITY = "resonant"
    PULSE_21 = "pulse21"
    PULSE_20 = "pulse20"
    IDLE_ALL = "idle"


@dataclass(frozen=True)
class HamiltonianSpec:
    """Which segment Hamiltonian to build and which error terms it carries.

    ``include_offresonant`` switches the active cavity's 0<->1 coupling and the
    pulse's 0<->1 drive; ``include_crosstalk`` switches every idle-cavity and
    inter-cavity term (the epsilon of the 0<->2 pulse Hamiltonian).
    """

    kind: HamiltonianKind
    active_index: int | None = None
    phase: float = 0.0
    include_offresonant: bool = True
    include_crosstalk: bool = True

    def __post_init__(self) -> None:
        if self.kind is HamiltonianKind.RESONANT_CAVITY:
            if self.active_index is None or self.active_index < 1:
                raise ValueError("a resonant segment needs a 1-based active_index")
        elif self.active_index is not None:
            raise ValueError(f"{self.kind.value} segments have no active cavity")

    @classmethod
    def resonant(cls, active_index: int, **flags: bool) -> HamiltonianSpec:
        return cls(HamiltonianKind.RESONANT_CAVITY, active_index=active_index, **flags)

    @classmethod
    def pulse21(cls, phase: float, **flags: bool) -> HamiltonianSpec:
        return cls(HamiltonianKind.PULSE_21, phase=phase, **flags)

    @classmethod
    def pulse20(cls, phase: float, **flags: bool) -> HamiltonianSpec:
        return cls(HamiltonianKind.PULSE_20, phase=phase, **flags)

    @classmethod
    def idle(cls, **flags: bool) -> HamiltonianSpec:
        return cls(HamiltonianKind.IDLE_ALL, **flags)

    def describe(self) -> str:
        if self.kind is HamiltonianKind.RESONANT_CAVITY:
            return f"resonant(c{self.active_index})"
        if self.kind is HamiltonianKind.IDLE_ALL:
            return "idle"
        return f"{self.kind.value}(phi={self.phase:+.4f})"


@dataclass(frozen=True)
class RotatingTerm:
    """``amplitude * exp(i * detuning * t) * X + h.c.`` with X = product of local factors.

    ``factors`` pairs a tensor axis (0 = coupler, i = cavity i) with the
    operator acting there.
    """

    amplitude: complex
    detuning: float
    factors: tuple[tuple[int, LocalOperator], ...]

    def coefficient(self, t: float) -> complex:
        if self.detuning == 0.0:
            return self.amplitude
        return self.amplitude * cmath.exp(1j * self.detuning * t)

    def local_factors(self, dims: SystemDims, adjoint: bool = False) -> dict[int, np.ndarray]:
        mats = {axis: local_matrix(op, dims.fock_cutoff) for axis, op in self.factors}
        if adjoint:
            mats = {axis: m.conj().T for axis, m in mats.items()}
        return mats


_QUARTER_TURNS = (1.0 + 0j, -1j, -1.0 + 0j, 1j)


def pulse_phase_factor(phase: float) -> complex:
    """exp(-i phase), exact when phase is a multiple of pi/2."""
    quarter = phase / (0.5 * math.pi)
    nearest = round(quarter)
    if abs(quarter - nearest) < 1e-12:
        return _QUARTER_TURNS[nearest % 4]
    return cmath.exp(-1j * phase)


def _check_spec(spec: HamiltonianSpec, params: PhysicalParams) -> None:
    n = params.n_cavities
    if spec.kind is HamiltonianKind.RESONANT_CAVITY and spec.active_index > n:
        raise ValueError(f"active_index {spec.active_index} exceeds {n} cavities")


def _idle_terms(params: PhysicalParams, active_index: int | None) -> list[RotatingTerm]:
    det = detunings(params, active_index)
    terms: list[RotatingTerm] = []
    for j in range(1, params.n_cavities + 1):
        if j == active_index:
            continue
        terms.append(RotatingTerm(
            params.g_tilde[j - 1], det.Delta_j[j - 1],
            ((0, LocalOperator.S12_PLUS), (j, LocalOperator.ANNIHILATE)),
        ))
        terms.append(RotatingTerm(
            params.g_tilde_prime[j - 1], det.Delta_j_prime[j - 1],
            ((0, LocalOperator.S01_PLUS), (j, LocalOperator.ANNIHILATE)),
        ))
    # Ordered pairs, both (k, l) and (l, k) contribute.
    for k in range(1, params.n_cavities + 1):
        for l in range(1, params.n_cavities + 1):
            if k == l:
                continue
            terms.append(RotatingTerm(
                params.g_cross[k - 1][l - 1], det.Delta_kl[k - 1][l - 1],
                ((k, LocalOperator.ANNIHILATE), (l, LocalOperator.CREATE)),
            ))
    return terms


def hamiltonian_terms(spec: HamiltonianSpec, params: PhysicalParams) -> list[RotatingTerm]:
    """Rotating terms of the segment Hamiltonian; zero-amplitude terms are dropped."""
    _check_spec(spec, params)
    terms: list[RotatingTerm] = []

    if spec.kind is HamiltonianKind.RESONANT_CAVITY:
        i = spec.active_index
        terms.append(RotatingTerm(
            params.g[i - 1], 0.0, ((0, LocalOperator.S12_PLUS), (i, LocalOperator.ANNIHILATE)),
        ))
        if spec.include_offresonant:
            terms.append(RotatingTerm(
                params.g_prime[i - 1], detunings(params, i).Delta[i - 1],
                ((0, LocalOperator.S01_PLUS), (i, LocalOperator.ANNIHILATE)),
            ))
        if spec.include_crosstalk:
            terms += _idle_terms(params, i)

    elif spec.kind is HamiltonianKind.PULSE_21:
        phase = pulse_phase_factor(spec.phase)
        terms.append(RotatingTerm(params.Omega_21 * phase, 0.0, ((0, LocalOperator.S12_PLUS),)))
        if spec.include_offresonant:
            terms.append(RotatingTerm(
                params.Omega_10 * phase, params.Delta_mu_w, ((0, LocalOperator.S01_PLUS),),
            ))
        if spec.include_crosstalk:
            terms += _idle_terms(params, None)

    elif spec.kind is HamiltonianKind.PULSE_20:
        phase = pulse_phase_factor(spec.phase)
        terms.append(RotatingTerm(params.Omega_20 * phase, 0.0, ((0, LocalOperator.S02_PLUS),)))
        if spec.include_crosstalk:
            terms += _idle_terms(params, None)

    elif spec.include_crosstalk:
        terms += _idle_terms(params, None)

    kept = [term for term in terms if term.amplitude != 0]
    logger.debug("Hamiltonian %s: %d rotating term(s), %d zero-amplitude dropped", spec.describe(), len(kept), len(terms) - len(kept))
    return kept


def build_h(spec: HamiltonianSpec, params: PhysicalParams, dims: SystemDims, t: float) -> CompositeOperator:
    """Dense Hermitian Hamiltonian of *spec* at global time *t*."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    if params.n_cavities != dims.n_cavities:
        raise ValueError(f"params describe {params.n_cavities} cavities but dims has {dims.n_cavities}")
    h = np.zeros((dims.dimension, dims.dimension), dtype=complex)
    for term in hamiltonian_terms(spec, params):
        x = term.coefficient(t) * embed(dims, term.local_factors(dims))
        h += x + x.conj().T
    return CompositeOperator(dims, h)


def max_frequency_scale(spec: HamiltonianSpec, params: PhysicalParams) -> float:
    """Largest coupling, Rabi rate or |detuning| among the terms present in *spec*."""
    scale = 0.0
    for term in hamiltonian_terms(spec, params):
        scale = max(scale, abs(term.amplitude), abs(term.detuning))
    return scale
