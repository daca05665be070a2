"""Unit tests for model.py — parameters, presets and closed-form budgets."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cavity_ghz.analysis import simulate_crosstalk_probability
from cavity_ghz.model import (
    TWO_PI,
    DecoherenceRates,
    cavity_lifetime,
    coherence_times,
    crosstalk_probability,
    detunings,
    estimate_g_cross,
    hz,
    kappa_from_q,
    preset_phase_qutrit,
    preset_rydberg_atom,
    q_from_kappa,
    rad_per_s,
    total_time,
    total_time_terms,
)


# ---------------------------------------------------------------------------
# DecoherenceRates / PhysicalParams
# ---------------------------------------------------------------------------

class TestDecoherenceRates:
    def test_none_is_all_zero(self) -> None:
        rates = DecoherenceRates.none(3)
        assert rates.kappa == (0.0, 0.0, 0.0)
        assert rates.max_rate == 0.0

    def test_named_rates_cover_every_channel(self) -> None:
        names = [name for name, _ in DecoherenceRates.none(2).named_rates()]
        assert names[:2] == ["kappa_1", "kappa_2"]
        assert len(names) == 8

    def test_negative_rate_rejected(self) -> None:
        with pytest.raises(ValueError, match="gamma_21"):
            DecoherenceRates(kappa=(0.0,), gamma_21=-1.0)

    def test_negative_kappa_rejected(self) -> None:
        with pytest.raises(ValueError, match="kappa_2"):
            DecoherenceRates(kappa=(0.0, -1.0))


class TestPhysicalParams:
    def test_sum_rule_enforced(self) -> None:
        params = preset_phase_qutrit(2, 50)
        with pytest.raises(ValueError, match="omega_20"):
            params.replace(omega_20=params.omega_20 * 1.01)

    def test_g_cross_must_be_symmetric(self) -> None:
        params = preset_phase_qutrit(2, 50)
        with pytest.raises(ValueError, match="symmetric"):
            params.replace(g_cross=((0.0, 1.0), (2.0, 0.0)))

    def test_g_cross_zero_diagonal(self) -> None:
        params = preset_phase_qutrit(2, 50)
        with pytest.raises(ValueError, match="diagonal"):
            params.replace(g_cross=((1.0, 0.0), (0.0, 0.0)))

    def test_length_mismatch_rejected(self) -> None:
        params = preset_phase_qutrit(2, 50)
        with pytest.raises(ValueError, match="g_prime"):
            params.replace(g_prime=(1.0,))

    def test_negative_t_d_rejected(self) -> None:
        with pytest.raises(ValueError, match="t_d"):
            preset_phase_qutrit(2, 50).replace(t_d=-1e-9)

    def test_n_cavities(self) -> None:
        assert preset_phase_qutrit(4, 50).n_cavities == 4


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------

class TestPresetPhaseQutrit:
    def test_coupling_ratios(self) -> None:
        p = preset_phase_qutrit(3, 50)
        delta = rad_per_s(0.5e9)
        assert p.g_prime[0] == pytest.approx(delta / 50)
        assert p.g[0] == pytest.approx(math.sqrt(2) * p.g_prime[0])
        assert p.g_tilde[0] == pytest.approx(p.g[0] * math.sqrt(5.6 / 6.3))
        assert p.g_tilde_prime[0] == pytest.approx(p.g_tilde[0] / math.sqrt(2))

    def test_pulse_rates(self) -> None:
        p = preset_phase_qutrit(2, 50)
        assert hz(p.Omega_10) == pytest.approx(50e6)
        assert p.Omega_21 == pytest.approx(math.sqrt(2) * p.Omega_10)
        assert hz(p.Omega_20) == pytest.approx(200e6)
        assert hz(p.Delta_mu_w) == pytest.approx(500e6)

    def test_rates(self) -> None:
        r = preset_phase_qutrit(2, 50).rates
        assert r.kappa == pytest.approx((5e4, 5e4))
        assert r.gamma_phi_21 == pytest.approx(2e5)
        assert r.gamma_21 == pytest.approx(4e4)
        assert r.gamma_20 == pytest.approx(5e3)
        assert r.gamma_10 == pytest.approx(2e4)

    def test_g_cross_ratio(self) -> None:
        p = preset_phase_qutrit(3, 50, g_cross_ratio=0.01)
        assert p.g_cross[0][1] == pytest.approx(0.01 * p.g[0])
        assert p.g_cross[1][1] == 0.0

    def test_larger_b_is_slower(self) -> None:
        assert total_time(preset_phase_qutrit(3, 80), 3) > total_time(preset_phase_qutrit(3, 40), 3)

    @pytest.mark.parametrize("n", [0, 7])
    def test_cavity_range(self, n: int) -> None:
        with pytest.raises(ValueError, match="cavities"):
            preset_phase_qutrit(n, 50)

    def test_b_positive(self) -> None:
        with pytest.raises(ValueError, match="b must be positive"):
            preset_phase_qutrit(2, 0)


class TestPresetRydbergAtom:
    def test_idle_and_cross_couplings_vanish(self) -> None:
        p = preset_rydberg_atom(4)
        assert p.g_tilde == (0.0,) * 4
        assert p.g_tilde_prime == (0.0,) * 4
        assert all(v == 0.0 for row in p.g_cross for v in row)

    def test_rabi_is_ten_g(self) -> None:
        p = preset_rydberg_atom(3)
        assert p.Omega_21 == pytest.approx(10 * p.g[0])
        assert p.Omega_20 == pytest.approx(10 * p.g[0])

    def test_tau_for_ten_cavities(self) -> None:
        # 50 us resonant + 4.5 us + 0.5 us of pulses + 20 us dead time
        assert total_time(preset_rydberg_atom(10), 10) == pytest.approx(75e-6, rel=1e-12)

    def test_kappa_from_quality_factor(self) -> None:
        p = preset_rydberg_atom(2)
        assert p.rates.kappa[0] == pytest.approx(rad_per_s(51.1e9) / 1e10)

    def test_too_many_cavities(self) -> None:
        with pytest.raises(ValueError, match="cavities"):
            preset_rydberg_atom(13)


# ---------------------------------------------------------------------------
# Detunings
# ---------------------------------------------------------------------------

class TestDetunings:
    def test_all_idle_has_no_inter_cavity_detuning(self) -> None:
        det = detunings(preset_phase_qutrit(3, 50))
        assert all(v == 0.0 for row in det.Delta_kl for v in row)

    def test_active_cavity_detuned_from_idle(self) -> None:
        det = detunings(preset_phase_qutrit(3, 50), active_index=2)
        assert det.Delta_kl[0][1] == pytest.approx(rad_per_s(0.7e9))
        assert det.Delta_kl[1][0] == pytest.approx(-rad_per_s(0.7e9))
        assert det.Delta_kl[0][2] == 0.0

    def test_static_detunings(self) -> None:
        det = detunings(preset_phase_qutrit(2, 50))
        assert det.Delta[0] == pytest.approx(rad_per_s(0.5e9))
        assert det.Delta_j[0] == pytest.approx(rad_per_s(0.7e9))
        assert det.Delta_j_prime[0] == pytest.approx(rad_per_s(1.2e9))

    def test_active_index_range(self) -> None:
        with pytest.raises(ValueError, match="active_index"):
            detunings(preset_phase_qutrit(2, 50), active_index=3)


# ---------------------------------------------------------------------------
# Timing
# ---------------------------------------------------------------------------

class TestTotalTime:
    def test_formula(self) -> None:
        p = preset_phase_qutrit(3, 60)
        expected = (
            3 * math.pi / (2 * p.g[0])
            + 2 * math.pi / (2 * p.Omega_21)
            + math.pi / (2 * p.Omega_20)
            + 6 * p.t_d
        )
        assert total_time(p, 3) == pytest.approx(expected, rel=1e-12)

    def test_term_count(self) -> None:
        assert len(total_time_terms(preset_phase_qutrit(4, 50), 4)) == 4 + 3 + 1 + 8

    def test_zero_dead_time(self) -> None:
        p = preset_phase_qutrit(2, 50, t_d=0.0)
        assert total_time(p, 2) == pytest.approx(total_time(preset_phase_qutrit(2, 50), 2) - 4e-9)

    def test_needs_two_cavities(self) -> None:
        with pytest.raises(ValueError, match="n >= 2"):
            total_time(preset_phase_qutrit(2, 50), 1)

    def test_n_above_params(self) -> None:
        with pytest.raises(ValueError, match="asked for 3"):
            total_time(preset_phase_qutrit(2, 50), 3)

    def test_zero_coupling_rejected(self) -> None:
        p = preset_phase_qutrit(2, 50)
        with pytest.raises(ValueError, match="g_i"):
            total_time(p.replace(g=(0.0, p.g[1])), 2)


# ---------------------------------------------------------------------------
# Closed-form budget helpers
# ---------------------------------------------------------------------------

class TestCavityLifetime:
    def test_min_over_cavities_divided_by_n(self) -> None:
        result = cavity_lifetime([1e6, 2e6], [1e9, 1e9], [1.0, 1.0])
        assert result == pytest.approx(1e6 / (TWO_PI * 1e9) / 2)

    def test_photon_number_shortens(self) -> None:
        assert cavity_lifetime([1e6], [1e9], [2.0]) == pytest.approx(cavity_lifetime([1e6], [1e9], [1.0]) / 2)

    def test_rydberg_value(self) -> None:
        assert cavity_lifetime([1e10] * 10, [51.1e9] * 10, [1.0] * 10) == pytest.approx(3.1146e-3, rel=1e-3)

    def test_length_mismatch(self) -> None:
        with pytest.raises(ValueError, match="equal length"):
            cavity_lifetime([1e6], [1e9, 1e9], [1.0])

    def test_empty(self) -> None:
        with pytest.raises(ValueError):
            cavity_lifetime([], [], [])


class TestCrosstalkProbability:
    def test_phase_qutrit_b85_below_bound(self) -> None:
        p = preset_phase_qutrit(3, 85)
        det = detunings(p)
        prob = crosstalk_probability(p.g_tilde[1], det.Delta_j[1], p.g[0])
        assert 0.0 < prob < 5e-4

    def test_phase_qutrit_b85_golden_value(self) -> None:
        # g~ = 4 g'/3 against a 700 MHz idle detuning.
        p = preset_phase_qutrit(3, 85)
        det = detunings(p)
        assert crosstalk_probability(p.g_tilde[1], det.Delta_j[1], p.g[0]) == pytest.approx(8.568e-6, rel=2e-3)

    def test_zero_coupling(self) -> None:
        assert crosstalk_probability(0.0, 1e9, 1e7) == 0.0

    def test_resonant_full_transfer(self) -> None:
        # g_tilde = g_i, Delta = 0: a pi/(2 g) exchange moves all population.
        assert crosstalk_probability(1.0, 0.0, 1.0) == pytest.approx(1.0)

    def test_g_i_positive(self) -> None:
        with pytest.raises(ValueError, match="g_i"):
            crosstalk_probability(1.0, 1.0, 0.0)

    @settings(max_examples=15, deadline=None)
    @given(
        g_tilde=st.floats(min_value=0.05, max_value=2.0),
        delta=st.floats(min_value=0.0, max_value=10.0),
        g_i=st.floats(min_value=0.2, max_value=2.0),
    )
    def test_matches_two_level_integration(self, g_tilde: float, delta: float, g_i: float) -> None:
        closed = crosstalk_probability(g_tilde, delta, g_i)
        assert closed == pytest.approx(simulate_crosstalk_probability(g_tilde, delta, g_i), abs=1e-7)

    @settings(max_examples=30, deadline=None)
    @given(
        g_tilde=st.floats(min_value=0.0, max_value=1e8),
        delta=st.floats(min_value=0.0, max_value=1e10),
        g_i=st.floats(min_value=1e5, max_value=1e8),
    )
    def test_is_a_probability(self, g_tilde: float, delta: float, g_i: float) -> None:
        assert 0.0 <= crosstalk_probability(g_tilde, delta, g_i) <= 1.0


class TestConversions:
    def test_q_from_kappa(self) -> None:
        assert q_from_kappa(20e-6, rad_per_s(6.3e9)) == pytest.approx(7.917e5, rel=1e-3)

    def test_kappa_from_q_inverse(self) -> None:
        omega = rad_per_s(6.3e9)
        assert 1.0 / kappa_from_q(q_from_kappa(20e-6, omega), omega) == pytest.approx(20e-6)

    def test_q_from_kappa_positive(self) -> None:
        with pytest.raises(ValueError):
            q_from_kappa(0.0, 1.0)

    def test_estimate_g_cross(self) -> None:
        assert estimate_g_cross(1.0, 1.0, 8.0, 2) == pytest.approx(0.1)

    def test_estimate_g_cross_rejects_zero_capacitance(self) -> None:
        with pytest.raises(ValueError, match="capacitances"):
            estimate_g_cross(1.0, 0.0, 1.0, 2)


class TestCoherenceTimes:
    def test_phase_qutrit(self) -> None:
        times = coherence_times(preset_phase_qutrit(2, 50))
        assert times["T1_level2"] == pytest.approx(1 / (1 / 25e-6 + 1 / 200e-6))
        assert times["T2_level2"] == pytest.approx(2.5e-6)
        assert times["T1_level1"] == pytest.approx(50e-6)
        assert times["T2_level1"] == pytest.approx(5e-6)

    def test_zero_rate_is_infinite(self) -> None:
        times = coherence_times(preset_rydberg_atom(2))
        assert times["T1_level2"] == pytest.approx(3e-2)
        assert math.isinf(times["T1_level1"])
