"""Configuration constants for the cavity GHZ simulator."""

from pathlib import Path

DEFAULT_OUTPUT_BASE_DIR = Path("output")

# Hilbert space
DEFAULT_FOCK_CUTOFF = 3
NORMALIZATION_TOLERANCE = 1e-9

# Integrator
DEFAULT_DT_FACTOR = 40  # steps per shortest period
MIN_DT_FACTOR = 10
DEFAULT_MIN_STEPS_PER_SEGMENT = 64
DEFAULT_TRACE_TOLERANCE = 1e-7
DEFAULT_HERMITICITY_TOLERANCE = 1e-9
POSITIVITY_TOLERANCE = 1e-6

# Analysis
CONVERGENCE_TOLERANCE = 5e-3  # fidelity change when the Fock cutoff is raised by one
FIDELITY_CEILING = 1.0 + 1e-6

# Phase-qutrit preset (frequencies in Hz, times in seconds)
PHASE_QUTRIT_MAX_CAVITIES = 6
PHASE_QUTRIT_F10_HZ = 6.8e9
PHASE_QUTRIT_F21_HZ = 6.3e9
PHASE_QUTRIT_ACTIVE_HZ = 6.3e9
PHASE_QUTRIT_IDLE_HZ = 5.6e9
PHASE_QUTRIT_RABI_10_HZ = 50e6
PHASE_QUTRIT_RABI_20_HZ = 200e6
PHASE_QUTRIT_DELTA_MW_HZ = 500e6
PHASE_QUTRIT_T_DEPHASE_S = 5e-6  # all three dephasing paths
PHASE_QUTRIT_T_RELAX_21_S = 25e-6
PHASE_QUTRIT_T_RELAX_20_S = 200e-6
PHASE_QUTRIT_T_RELAX_10_S = 50e-6
PHASE_QUTRIT_KAPPA_INV_S = 20e-6
PHASE_QUTRIT_T_D_S = 1e-9

# Rydberg-atom preset
RYDBERG_MAX_CAVITIES = 12
RYDBERG_LINDBLAD_MAX_CAVITIES = 5
RYDBERG_F21_HZ = 51.1e9
# Level |0> is taken one circular level below |1>; only the drive detuning uses it.
RYDBERG_F10_HZ = 54.3e9
RYDBERG_G_HZ = 50e3
RYDBERG_RABI_OVER_G = 10.0
RYDBERG_T_RELAX_S = 3e-2
RYDBERG_T_DEPHASE_S = 1e-3
RYDBERG_QUALITY_FACTOR = 1e10
RYDBERG_T_D_S = 1e-6
RYDBERG_FOCK_CUTOFF = 2

# Output
OUTPUT_FORMATS: tuple[str, ...] = ("csv", "jsonl")
DEFAULT_OUTPUT_FORMAT = "csv"
DEFAULT_JOBS = 1

# CLI exit codes
EXIT_OK = 0
EXIT_NUMERICAL_FAILURE = 1
EXIT_USAGE = 2
EXIT_UNCONVERGED = 3
