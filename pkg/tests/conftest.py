"""Shared fixtures: the working-point system is solved and calibrated once."""

import math

import numpy as np
import pytest

from squidgates import device as dev
from squidgates import gates as gt
from squidgates import spectral as sp
from squidgates.propagator import IntegratorConfig

X_C10 = 5e-5
X_T0 = 5e-5

#: coarse sampling keeps multi-million-step trajectories small in memory
GATE_CFG = IntegratorConfig(dtau=0.05, record_stride=2000)


@pytest.fixture(scope="session")
def device_params():
    return dev.default_device()


@pytest.fixture(scope="session")
def consts(device_params):
    return dev.derive_constants(device_params)


@pytest.fixture(scope="session")
def solution(device_params, consts):
    return sp.solve_coupled(device_params, consts)


@pytest.fixture(scope="session")
def wells(device_params, consts):
    return dev.find_wells(device_params, consts)


@pytest.fixture(scope="session")
def basis(solution, wells):
    return sp.label_computational_states(solution, wells)


@pytest.fixture(scope="session")
def table(solution, basis):
    return sp.transition_table(solution, basis)


@pytest.fixture(scope="session")
def system(device_params, consts, solution, basis, table):
    """Tuple form used by the selfcheck helpers."""
    return (device_params, consts, solution, basis, table)


@pytest.fixture(scope="session")
def rotation_cal(table):
    return gt.calibrate_pi_pulse(table, "C", gt.CONTROL_TRANSITIONS[0], X_C10)


@pytest.fixture(scope="session")
def cnot_cal(table):
    return gt.calibrate_pi_pulse(table, "T", gt.TARGET_TRANSITION, X_T0)


@pytest.fixture(scope="session")
def rot_amps(table):
    return gt.rotation_amplitudes(table, X_C10)


@pytest.fixture(scope="session")
def pi_rotation_result(basis, table, rot_amps, rotation_cal):
    sched = gt.schedule_rotation(math.pi, basis, table, rot_amps,
                                 rotation_cal.omega_rabi)
    return gt.run_gate(sched, table, cfg=GATE_CFG)


@pytest.fixture(scope="session")
def half_pi_rotation_result(basis, table, rot_amps, rotation_cal):
    sched = gt.schedule_rotation(math.pi / 2.0, basis, table, rot_amps,
                                 rotation_cal.omega_rabi)
    return gt.run_gate(sched, table, cfg=GATE_CFG, inits=("00",))


@pytest.fixture(scope="session")
def cnot_result(basis, table, cnot_cal):
    sched = gt.schedule_cnot(basis, table, X_T0, cnot_cal.omega_rabi)
    return gt.run_gate(sched, table, cfg=GATE_CFG)


@pytest.fixture(scope="session")
def bell_schedules(basis, table, rot_amps, rotation_cal, cnot_cal):
    return {init: gt.schedule_bell(init, basis, table, rot_amps,
                                   rotation_cal.omega_rabi, X_T0,
                                   cnot_cal.omega_rabi)
            for init in sp.LABELS}


@pytest.fixture(scope="session")
def bell_results(bell_schedules, table):
    return {init: gt.run_gate(sched, table, cfg=GATE_CFG, inits=(init,))
            for init, sched in bell_schedules.items()}


@pytest.fixture(scope="session")
def selfcheck_results(system):
    from squidgates import selfcheck as sc
    return [sc.check_harmonic_limit(), sc.check_separability(),
            sc.check_rk4_agreement(system), sc.check_norm_drift(system),
            sc.check_convergence_order(system)]
