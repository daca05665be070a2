"""Physical parameters, hardware presets, and closed-form timing/crosstalk formulas.

All angular frequencies are stored in rad/s and all rates in 1/s. Presets and
config files quote frequencies in Hz; use :func:`rad_per_s` to convert.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

from cavity_ghz import config

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
_SUM_RULE_RTOL = 1e-9


def rad_per_s(hz: float) -> float:
    return TWO_PI * hz


def hz(omega: float) -> float:
    return omega / TWO_PI


@dataclass(frozen=True)
class DecoherenceRates:
    kappa: tuple[float, ...]
    gamma_phi_21: float = 0.0
    gamma_phi_20: float = 0.0
    gamma_phi_10: float = 0.0
    gamma_21: float = 0.0
    gamma_20: float = 0.0
    gamma_10: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kappa", tuple(float(k) for k in self.kappa))
        for name, value in self.named_rates():
            if value < 0:
                raise ValueError(f"decoherence rate {name} must be nonnegative, got {value}")

    @classmethod
    def none(cls, n: int) -> DecoherenceRates:
        return cls(kappa=(0.0,) * n)

    def named_rates(self) -> list[tuple[str, float]]:
        """(name, rate) pairs, one per cavity decay plus the six coupler channels."""
        rates = [(f"kappa_{i + 1}", k) for i, k in enumerate(self.kappa)]
        rates += [(f.name, getattr(self, f.name)) for f in dataclasses.fields(self) if f.name != "kappa"]
        return rates

    @property
    def max_rate(self) -> float:
        return max((value for _, value in self.named_rates()), default=0.0)


@dataclass(frozen=True)
class PhysicalParams:
    """Frequencies (rad/s), couplings (rad/s), Rabi rates, dead time and rates of one run."""

    omega_10: float
    omega_21: float
    omega_20: float
    omega_c_active: tuple[float, ...]
    omega_c_idle: tuple[float, ...]
    g: tuple[float, ...]
    g_prime: tuple[float, ...]
    g_tilde: tuple[float, ...]
    g_tilde_prime: tuple[float, ...]
    g_cross: tuple[tuple[float, ...], ...]
    Omega_21: float
    Omega_20: float
    Omega_10: float
    Delta_mu_w: float
    t_d: float
    rates: DecoherenceRates

    def __post_init__(self) -> None:
        for name in ("omega_c_active", "omega_c_idle", "g", "g_prime", "g_tilde", "g_tilde_prime"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        object.__setattr__(self, "g_cross", tuple(tuple(float(v) for v in row) for row in self.g_cross))
        validate_params(self)

    @property
    def n_cavities(self) -> int:
        return len(self.g)

    def replace(self, **changes) -> PhysicalParams:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Detunings:
    """Detunings of one segment; ``Delta_kl[k][l] = w_l - w_k`` (0-based)."""

    Delta: tuple[float, ...]
    Delta_j: tuple[float, ...]
    Delta_j_prime: tuple[float, ...]
    Delta_kl: tuple[tuple[float, ...], ...]


def validate_params(params: PhysicalParams) -> None:
    """Raise ValueError unless *params* satisfies the PhysicalParams invariants."""
    n = len(params.g)
    for name in ("omega_c_active", "omega_c_idle", "g_prime", "g_tilde", "g_tilde_prime"):
        if len(getattr(params, name)) != n:
            raise ValueError(f"{name} has {len(getattr(params, name))} entries, expected {n}")
    if len(params.rates.kappa) != n:
        raise ValueError(f"rates.kappa has {len(params.rates.kappa)} entries, expected {n}")
    if len(params.g_cross) != n or any(len(row) != n for row in params.g_cross):
        raise ValueError(f"g_cross must be a {n} x {n} matrix")

    scalars = ("omega_10", "omega_21", "omega_20", "Omega_21", "Omega_20", "Omega_10", "Delta_mu_w", "t_d")
    for name in scalars:
        if getattr(params, name) < 0:
            raise ValueError(f"{name} must be nonnegative, got {getattr(params, name)}")
    for name in ("omega_c_active", "omega_c_idle", "g", "g_prime", "g_tilde", "g_tilde_prime"):
        if any(v < 0 for v in getattr(params, name)):
            raise ValueError(f"{name} entries must be nonnegative")

    for k in range(n):
        if params.g_cross[k][k] != 0.0:
            raise ValueError("g_cross must have a zero diagonal")
        for l in range(n):
            if params.g_cross[k][l] < 0 or params.g_cross[k][l] != params.g_cross[l][k]:
                raise ValueError("g_cross must be symmetric and nonnegative")

    expected = params.omega_10 + params.omega_21
    if not math.isclose(params.omega_20, expected, rel_tol=_SUM_RULE_RTOL):
        raise ValueError(f"omega_20={params.omega_20} differs from omega_10 + omega_21 = {expected}")


def _uniform_cross(n: int, value: float) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(0.0 if k == l else value for l in range(n)) for k in range(n))


def detunings(params: PhysicalParams, active_index: int | None = None) -> Detunings:
    """Detunings with cavity *active_index* (1-based) tuned in, or all idle when None."""
    n = params.n_cavities
    current = list(params.omega_c_idle)
    if active_index is not None:
        if not 1 <= active_index <= n:
            raise ValueError(f"active_index must be in 1..{n}, got {active_index}")
        current[active_index - 1] = params.omega_c_active[active_index - 1]
    return Detunings(
        Delta=tuple(params.omega_10 - w for w in params.omega_c_active),
        Delta_j=tuple(params.omega_21 - w for w in params.omega_c_idle),
        Delta_j_prime=tuple(params.omega_10 - w for w in params.omega_c_idle),
        Delta_kl=tuple(tuple(current[l] - current[k] for l in range(n)) for k in range(n)),
    )


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

def preset_phase_qutrit(
    n: int,
    b: float,
    g_cross_ratio: float = 0.0,
    t_d: float = config.PHASE_QUTRIT_T_D_S,
) -> PhysicalParams:
    """Phase-qutrit coupler with n coplanar resonators.

    ``b = Delta / g'`` is swept with the 500 MHz active detuning held fixed,
    so a larger ``b`` means weaker couplings and a slower protocol.
    """
    if not 1 <= n <= config.PHASE_QUTRIT_MAX_CAVITIES:
        raise ValueError(f"phase-qutrit preset supports 1..{config.PHASE_QUTRIT_MAX_CAVITIES} cavities, got {n}")
    if b <= 0:
        raise ValueError(f"b must be positive, got {b}")
    if g_cross_ratio < 0:
        raise ValueError(f"g_cross_ratio must be nonnegative, got {g_cross_ratio}")

    omega_10 = rad_per_s(config.PHASE_QUTRIT_F10_HZ)
    omega_21 = rad_per_s(config.PHASE_QUTRIT_F21_HZ)
    omega_active = rad_per_s(config.PHASE_QUTRIT_ACTIVE_HZ)
    omega_idle = rad_per_s(config.PHASE_QUTRIT_IDLE_HZ)

    delta = omega_10 - omega_active
    g_prime = delta / b
    g = math.sqrt(2.0) * g_prime
    g_tilde = g * math.sqrt(omega_idle / omega_active)
    g_tilde_prime = g_tilde / math.sqrt(2.0)
    omega_rabi_10 = rad_per_s(config.PHASE_QUTRIT_RABI_10_HZ)

    rates = DecoherenceRates(
        kappa=(1.0 / config.PHASE_QUTRIT_KAPPA_INV_S,) * n,
        gamma_phi_21=1.0 / config.PHASE_QUTRIT_T_DEPHASE_S,
        gamma_phi_20=1.0 / config.PHASE_QUTRIT_T_DEPHASE_S,
        gamma_phi_10=1.0 / config.PHASE_QUTRIT_T_DEPHASE_S,
        gamma_21=1.0 / config.PHASE_QUTRIT_T_RELAX_21_S,
        gamma_20=1.0 / config.PHASE_QUTRIT_T_RELAX_20_S,
        gamma_10=1.0 / config.PHASE_QUTRIT_T_RELAX_10_S,
    )
    params = PhysicalParams(
        omega_10=omega_10,
        omega_21=omega_21,
        omega_20=omega_10 + omega_21,
        omega_c_active=(omega_active,) * n,
        omega_c_idle=(omega_idle,) * n,
        g=(g,) * n,
        g_prime=(g_prime,) * n,
        g_tilde=(g_tilde,) * n,
        g_tilde_prime=(g_tilde_prime,) * n,
        g_cross=_uniform_cross(n, g_cross_ratio * g),
        Omega_21=math.sqrt(2.0) * omega_rabi_10,
        Omega_20=rad_per_s(config.PHASE_QUTRIT_RABI_20_HZ),
        Omega_10=omega_rabi_10,
        Delta_mu_w=rad_per_s(config.PHASE_QUTRIT_DELTA_MW_HZ),
        t_d=t_d,
        rates=rates,
    )
    logger.debug("Phase-qutrit preset n=%d b=%g: g/2pi=%.4g Hz, g'/2pi=%.4g Hz", n, b, hz(g), hz(g_prime))
    return params


def preset_rydberg_atom(
    n: int,
    t_d: float = config.RYDBERG_T_D_S,
    quality_factor: float = config.RYDBERG_QUALITY_FACTOR,
) -> PhysicalParams:
    """Rydberg atom carried through n identical cavities resonant with its 1<->2 line.

    The atom leaves each cavity, so idle couplings and inter-cavity coupling
    vanish. The quoted relaxation time feeds ``gamma_21``, the quoted
    dephasing time feeds ``gamma_phi_21``; the other coupler channels are zero.
    """
    if not 1 <= n <= config.RYDBERG_MAX_CAVITIES:
        raise ValueError(f"Rydberg preset supports 1..{config.RYDBERG_MAX_CAVITIES} cavities, got {n}")

    omega_21 = rad_per_s(config.RYDBERG_F21_HZ)
    omega_10 = rad_per_s(config.RYDBERG_F10_HZ)
    g = rad_per_s(config.RYDBERG_G_HZ)
    zeros = (0.0,) * n
    rates = DecoherenceRates(
        kappa=(kappa_from_q(quality_factor, omega_21),) * n,
        gamma_phi_21=1.0 / config.RYDBERG_T_DEPHASE_S,
        gamma_21=1.0 / config.RYDBERG_T_RELAX_S,
    )
    return PhysicalParams(
        omega_10=omega_10,
        omega_21=omega_21,
        omega_20=omega_10 + omega_21,
        omega_c_active=(omega_21,) * n,
        omega_c_idle=(omega_21,) * n,
        g=(g,) * n,
        g_prime=zeros,
        g_tilde=zeros,
        g_tilde_prime=zeros,
        g_cross=_uniform_cross(n, 0.0),
        Omega_21=config.RYDBERG_RABI_OVER_G * g,
        Omega_20=config.RYDBERG_RABI_OVER_G * g,
        Omega_10=0.0,
        Delta_mu_w=omega_10 - omega_21,
        t_d=t_d,
        rates=rates,
    )


# ---------------------------------------------------------------------------
# Closed-form budgets
# ---------------------------------------------------------------------------

def total_time_terms(params: PhysicalParams, n: int) -> list[float]:
    """Every duration that makes up the protocol time, one entry per segment.

    :func:`total_time` and the schedule builder sum the same multiset with
    ``math.fsum`` so both produce the identical float.
    """
    if n < 2:
        raise ValueError(f"the protocol needs n >= 2 cavities, got {n}")
    if n > params.n_cavities:
        raise ValueError(f"params describe {params.n_cavities} cavities, asked for {n}")
    if any(g_i <= 0 for g_i in params.g[:n]):
        raise ValueError("every resonant coupling g_i must be positive")
    if params.Omega_21 <= 0 or params.Omega_20 <= 0:
        raise ValueError("pulse Rabi frequencies Omega_21 and Omega_20 must be positive")
    terms = [math.pi / (2.0 * g_i) for g_i in params.g[:n]]
    terms += [math.pi / (2.0 * params.Omega_21)] * (n - 1)
    terms.append(math.pi / (2.0 * params.Omega_20))
    terms += [params.t_d] * (2 * n)
    return terms


def total_time(params: PhysicalParams, n: int) -> float:
    """Total operation time tau of the n-step protocol, in seconds."""
    return math.fsum(total_time_terms(params, n))


def cavity_lifetime(Q: Sequence[float], nu_c: Sequence[float], n_bar: Sequence[float]) -> float:
    """Shortest single-cavity photon lifetime divided by the number of cavities.

    Args:
        Q: Loaded quality factor per cavity.
        nu_c: Cavity frequency per cavity, in Hz.
        n_bar: Average photon number per cavity.

    Returns:
        ``min_i (Q_i / 2 pi nu_i) / n_bar_i`` divided by ``len(Q)``.
    """
    if not (len(Q) == len(nu_c) == len(n_bar)) or not Q:
        raise ValueError("Q, nu_c and n_bar must be nonempty lists of equal length")
    if any(v <= 0 for v in nu_c) or any(v <= 0 for v in n_bar):
        raise ValueError("cavity frequencies and photon numbers must be positive")
    if any(q <= 0 for q in Q):
        raise ValueError("quality factors must be positive")
    lifetimes = [(q / (TWO_PI * nu)) / nb for q, nu, nb in zip(Q, nu_c, n_bar)]
    return min(lifetimes) / len(lifetimes)


def crosstalk_probability(g_tilde_j: float, Delta_j: float, g_i: float) -> float:
    """Probability of loading an idle cavity during one resonant step of length pi/(2 g_i)."""
    if g_i <= 0:
        raise ValueError(f"g_i must be positive, got {g_i}")
    generalized = 4.0 * g_tilde_j**2 + Delta_j**2
    if generalized == 0:
        return 0.0
    oscillation = 0.5 * (1.0 - math.cos(math.pi * math.sqrt(generalized) / (2.0 * g_i)))
    amplitude = 1.0 - Delta_j**2 / generalized
    return min(1.0, max(0.0, oscillation * amplitude))


def estimate_g_cross(g: float, C_c: float, C_q: float, n: int) -> float:
    """Inter-cavity coupling through the shared coupler: g * C_c / (n C_c + C_q)."""
    if C_c <= 0 or C_q <= 0:
        raise ValueError("capacitances must be positive")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    c_sigma = n * C_c + C_q
    return g * C_c / c_sigma


def q_from_kappa(kappa_inv: float, omega_c: float) -> float:
    if kappa_inv <= 0 or omega_c <= 0:
        raise ValueError("kappa_inv and omega_c must be positive")
    return omega_c * kappa_inv


def kappa_from_q(Q: float, omega_c: float) -> float:
    if Q <= 0 or omega_c <= 0:
        raise ValueError("Q and omega_c must be positive")
    return omega_c / Q


def coherence_times(params: PhysicalParams) -> dict[str, float]:
    """Energy-relaxation and dephasing times of coupler levels |2> and |1>.

    Level |2> relaxes through both 2->1 and 2->0. Zero rates map to ``inf``.
    """
    r = params.rates

    def _inverse(rate: float) -> float:
        return math.inf if rate == 0 else 1.0 / rate

    return {
        "T1_level2": _inverse(r.gamma_21 + r.gamma_20),
        "T2_level2": _inverse(r.gamma_phi_21 + r.gamma_phi_20),
        "T1_level1": _inverse(r.gamma_10),
        "T2_level1": _inverse(r.gamma_phi_10),
    }
