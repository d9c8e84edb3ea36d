"""Pulse-level simulator of two inductively coupled rf-SQUID flux qubits.

Single-qubit gates decompose into two conditional two-qubit gates driven
by resonant microwave tones; together with a one-tone CNOT this gives a
universal gate set under fixed always-on coupling.  The package covers
the full pipeline: potential surface and wells, Fourier-grid eigensolve,
computational-state labeling, driven time evolution, gate calibration,
and Bell-state creation, plus a batch CLI with CSV outputs.
"""

from .device import (DeviceParams, DerivedConstants, Well, derive_constants,
                     find_wells, default_device, potential_1d, potential_2d)
from .drive import (DriveSchedule, PulseSpec, ReducedHamiltonian,
                    drive_coefficients, reduced_hamiltonian)
from .errors import (CalibrationError, ConfigurationError,
                     DegenerateLandscapeError, IntegratorInstabilityError,
                     LabelingError, LeakageWarning, NumericalError,
                     ParameterError, SquidGatesError)
from .gates import (CalibrationResult, ConditionalGatePair, GateResult,
                    GateSchedule, SingleQubitGate, calibrate_pi_pulse,
                    decompose_single_qubit, extract_rotation_angle,
                    hadamard_gate, identity_gate, not_gate,
                    nearest_bell_fidelity, rotation_amplitudes, rotation_gate,
                    run_gate, schedule_bell, schedule_cnot, schedule_not,
                    schedule_rotation)
from .propagator import (IntegratorConfig, StateVector, TrajectoryRecord,
                         available_backends, default_backend, fidelity,
                         propagate, step_split_operator)
from .spectral import (ComputationalBasis, EigenSolution, Grid1D,
                       TransitionTable, fgh_hamiltonian_1d, grid_for_qubit,
                       label_computational_states, solve_coupled, solve_1d,
                       transition_table, write_spectrum_csv,
                       write_transitions_csv)

__version__ = "0.1.0"
