"""Unit tests for sweep.py — fidelity-versus-b sweeps and the Fock-cutoff gate."""

import pytest

from cavity_ghz.model import preset_phase_qutrit, total_time
from cavity_ghz.propagate import IntegratorConfig
from cavity_ghz.protocol import SimulationMode
from cavity_ghz.sweep import (
    SWEEP_COLUMNS,
    CutoffCheck,
    SweepResult,
    SweepRow,
    check_cutoff_convergence,
    gate_cutoffs,
    sweep_b,
)

_IDEAL = SimulationMode.IDEAL_RESONANT


def _row(**overrides) -> SweepRow:
    values = dict(n=2, b=50.0, g_cross_ratio=0.0, fidelity=0.99, tau_seconds=1e-8, dt_used=1e-11, trace_drift=1e-12)
    values.update(overrides)
    return SweepRow(**values)


# ---------------------------------------------------------------------------
# SweepRow / SweepResult / CutoffCheck
# ---------------------------------------------------------------------------

class TestSweepRow:
    def test_to_dict_columns(self) -> None:
        assert tuple(_row().to_dict()) == SWEEP_COLUMNS

    def test_sort_key(self) -> None:
        assert _row(n=3, b=40.0, g_cross_ratio=0.01).sort_key == (3, 40.0, 0.01)


class TestSweepResult:
    def test_clean(self) -> None:
        result = SweepResult((_row(), _row(b=60.0)))
        assert not result.failed
        assert not result.flagged

    def test_error_row(self) -> None:
        result = SweepResult((_row(), _row(fidelity=None, error="ValueError: boom")))
        assert result.failed
        assert result.flagged

    def test_unconverged_row_flags(self) -> None:
        result = SweepResult((_row(converged=False),))
        assert not result.failed
        assert result.flagged

    def test_tolerance_row_flags(self) -> None:
        assert SweepResult((_row(flagged=True),)).flagged


class TestCutoffCheck:
    def test_spread(self) -> None:
        check = CutoffCheck({}, {2: 0.90, 3: 0.91}, 5e-3)
        assert check.spread == pytest.approx(0.01)
        assert not check.converged

    def test_converged(self) -> None:
        assert CutoffCheck({}, {2: 0.9, 3: 0.902}, 5e-3).converged


# ---------------------------------------------------------------------------
# check_cutoff_convergence
# ---------------------------------------------------------------------------

class TestCheckCutoffConvergence:
    def test_ideal_converges(self) -> None:
        params = preset_phase_qutrit(2, 50)
        check = check_cutoff_convergence(2, params, _IDEAL, IntegratorConfig())
        assert sorted(check.runs) == [3, 4]
        assert check.converged
        assert all(f > 1 - 1e-6 for f in check.fidelities.values())

    def test_needs_two_cutoffs(self) -> None:
        with pytest.raises(ValueError, match="two distinct cutoffs"):
            check_cutoff_convergence(2, preset_phase_qutrit(2, 50), _IDEAL, IntegratorConfig(), cutoffs=(3, 3))

    def test_explicit_cutoffs(self) -> None:
        check = check_cutoff_convergence(2, preset_phase_qutrit(2, 50), _IDEAL, IntegratorConfig(), cutoffs=(2, 3))
        assert sorted(check.fidelities) == [2, 3]


class TestGateCutoffs:
    @pytest.mark.parametrize("cutoff", [2, 3, 5])
    def test_next_cutoff_up(self, cutoff: int) -> None:
        assert gate_cutoffs(cutoff) == (cutoff, cutoff + 1)

    def test_rejects_single_level(self) -> None:
        with pytest.raises(ValueError, match="fock_cutoff"):
            gate_cutoffs(1)


# ---------------------------------------------------------------------------
# sweep_b
# ---------------------------------------------------------------------------

class TestSweepB:
    def test_rows_sorted_and_complete(self) -> None:
        result = sweep_b([3, 2], [60.0, 40.0], 0.0, _IDEAL, IntegratorConfig(), fock_cutoff=2)
        assert [(r.n, r.b) for r in result.rows] == [(2, 40.0), (2, 60.0), (3, 40.0), (3, 60.0)]
        assert all(r.fidelity > 1 - 1e-6 for r in result.rows)
        assert not result.failed

    def test_tau_column(self) -> None:
        result = sweep_b([2], [50.0], 0.01, _IDEAL, IntegratorConfig(), fock_cutoff=2, check_cutoff=False)
        assert result.rows[0].tau_seconds == total_time(preset_phase_qutrit(2, 50.0, 0.01), 2)
        assert result.rows[0].dt_used > 0
        assert result.rows[0].converged is None

    def test_gate_on_by_default(self) -> None:
        result = sweep_b([2], [50.0], 0.0, _IDEAL, IntegratorConfig(), fock_cutoff=2)
        assert result.rows[0].converged is True

    def test_dead_time_reaches_preset(self) -> None:
        kwargs = {"fock_cutoff": 2, "check_cutoff": False}
        slow = sweep_b([2], [50.0], 0.0, _IDEAL, IntegratorConfig(), t_d=5e-9, **kwargs).rows[0]
        fast = sweep_b([2], [50.0], 0.0, _IDEAL, IntegratorConfig(), **kwargs).rows[0]
        assert slow.tau_seconds == total_time(preset_phase_qutrit(2, 50.0, t_d=5e-9), 2)
        assert slow.tau_seconds - fast.tau_seconds == pytest.approx(4 * (5e-9 - 1e-9), rel=1e-9)

    def test_ratio_sequence(self) -> None:
        result = sweep_b([2], [50.0], [0.01, 0.0], _IDEAL, IntegratorConfig(), fock_cutoff=2)
        assert [r.g_cross_ratio for r in result.rows] == [0.0, 0.01]

    def test_deterministic(self) -> None:
        args = ([2], [40.0, 70.0], 0.01, SimulationMode.PURE_COHERENT_ERRORS, IntegratorConfig())
        assert sweep_b(*args, fock_cutoff=2).rows == sweep_b(*args, fock_cutoff=2).rows

    def test_worker_pool_matches_serial(self) -> None:
        args = ([2, 3], [45.0, 55.0], 0.0, _IDEAL, IntegratorConfig())
        assert sweep_b(*args, fock_cutoff=2, jobs=2).rows == sweep_b(*args, fock_cutoff=2, jobs=1).rows

    def test_failure_recorded_per_row(self) -> None:
        result = sweep_b([2, 7], [50.0], 0.0, _IDEAL, IntegratorConfig(), fock_cutoff=2)
        good, bad = result.rows
        assert good.error is None and good.fidelity > 0.99
        assert bad.n == 7
        assert bad.fidelity is None
        assert bad.error.startswith("ValueError")
        assert result.failed

    def test_cutoff_gate_marks_rows(self) -> None:
        result = sweep_b([2], [50.0], 0.0, _IDEAL, IntegratorConfig(), fock_cutoff=3, check_cutoff=True)
        assert result.rows[0].converged is True

    @pytest.mark.parametrize("kwargs, message", [
        ({"n_values": []}, "nonempty"),
        ({"b_values": [0.0]}, "positive"),
        ({"jobs": 0}, "jobs"),
        ({"t_d": -1e-9}, "t_d"),
    ])
    def test_invalid_arguments(self, kwargs: dict, message: str) -> None:
        args = {"n_values": [2], "b_values": [50.0], "g_cross_ratio": 0.0, "mode": _IDEAL, "cfg": IntegratorConfig()}
        args.update(kwargs)
        with pytest.raises(ValueError, match=message):
            sweep_b(**args)


@pytest.mark.slow
class TestLindbladSweep:
    def test_interior_maximum_in_b(self) -> None:
        b_values = [float(b) for b in range(10, 101, 10)]
        result = sweep_b([2], b_values, 0.01, SimulationMode.LINDBLAD, IntegratorConfig(), check_cutoff=False)
        fidelities = [r.fidelity for r in result.rows]
        best = fidelities.index(max(fidelities))
        assert 0 < best < len(fidelities) - 1

    def test_inter_cavity_coupling_costs_fidelity(self) -> None:
        result = sweep_b([2], [50.0], [0.0, 0.05], SimulationMode.LINDBLAD, IntegratorConfig(), check_cutoff=False)
        uncoupled, coupled = result.rows
        assert uncoupled.fidelity > coupled.fidelity

    def test_cutoff_gate_with_decoherence(self) -> None:
        result = sweep_b([2], [50.0], 0.0, SimulationMode.LINDBLAD, IntegratorConfig(), check_cutoff=True)
        row = result.rows[0]
        assert 0.0 <= row.fidelity <= 1.0 + 1e-6
        assert row.converged is True

    def test_fidelity_non_increasing_in_ratio(self) -> None:
        result = sweep_b([3], [60.0], [0.001, 0.01, 0.1], SimulationMode.LINDBLAD, IntegratorConfig(), check_cutoff=False)
        fidelities = [r.fidelity for r in result.rows]
        assert [r.g_cross_ratio for r in result.rows] == [0.001, 0.01, 0.1]
        assert fidelities[0] >= fidelities[1] >= fidelities[2]
