import math

import numpy as np
import pytest

from squidgates import drive as dr
from squidgates.errors import ConfigurationError
from squidgates.propagator import IntegratorConfig, StateVector, propagate


def test_coefficients_vanish_without_drive(device_params, consts):
    assert dr.drive_coefficients(0.0, 0.0, device_params, consts) == (0.0, 0.0, 0.0)


def test_coefficients_uncoupled(consts):
    from squidgates.device import DeviceParams
    p = DeviceParams(L=100e-12, C=40e-15, beta_L=1.2, kappa=0.0,
                     xe1=0.499, xe2=0.4998)
    d1, d2, d12 = dr.drive_coefficients(3e-5, 0.0, p, consts)
    assert d1 == pytest.approx(3e-5 / consts.eta, rel=1e-15)
    assert d2 == 0.0
    d1, d2, _ = dr.drive_coefficients(0.0, 2e-5, p, consts)
    assert d1 == 0.0 and d2 == pytest.approx(2e-5 / consts.eta, rel=1e-15)


def test_cross_talk_ratio(device_params, consts):
    # a control-line flux contributes to d2 with weight kappa/2 exactly
    d1, d2, _ = dr.drive_coefficients(5e-5, 0.0, device_params, consts)
    assert d2 / d1 == pytest.approx(device_params.kappa / 2.0, rel=1e-13)
    assert d2 / d1 == pytest.approx(2.5e-4, rel=1e-12)


def test_pulse_validation():
    with pytest.raises(ConfigurationError):
        dr.PulseSpec(line="X", amplitude=1e-5, omega=0.2, width=10.0)
    with pytest.raises(ConfigurationError):
        dr.PulseSpec(line="C", amplitude=-1e-5, omega=0.2, width=10.0)
    with pytest.raises(ConfigurationError):
        dr.PulseSpec(line="C", amplitude=1e-5, omega=0.2, width=0.0)
    with pytest.raises(ConfigurationError):
        dr.PulseSpec(line="C", amplitude=1e-5, omega=-0.2, width=5.0)
    with pytest.raises(ConfigurationError):
        dr.PulseSpec(line="C", amplitude=1e-5, omega=0.2, width=5.0,
                     envelope="triangle")


def test_schedule_duration_validation():
    pulse = dr.PulseSpec(line="C", amplitude=1e-5, omega=0.2, width=10.0,
                         t_start=5.0)
    assert dr.DriveSchedule(pulses=[pulse]).duration == 15.0
    with pytest.raises(ConfigurationError):
        dr.DriveSchedule(pulses=[pulse], duration=10.0)


def test_rectangular_envelope_window():
    pulse = dr.PulseSpec(line="C", amplitude=2e-5, omega=0.25, width=10.0,
                         t_start=3.0)
    assert pulse.envelope_at(2.999) == 0.0
    assert pulse.envelope_at(3.0) == 1.0
    assert pulse.envelope_at(12.999) == 1.0
    assert pulse.envelope_at(13.0) == 0.0
    tau = 7.0
    assert pulse.field_at(tau) == pytest.approx(
        2e-5 * math.cos(0.25 * tau), rel=1e-15)


def test_cosine_ramp_envelope():
    pulse = dr.PulseSpec(line="C", amplitude=1e-5, omega=0.25, width=100.0,
                         envelope="cosine-ramped", ramp_fraction=0.2)
    assert pulse.envelope_at(0.0) == 0.0
    assert pulse.envelope_at(10.0) == pytest.approx(0.5, abs=1e-12)
    assert pulse.envelope_at(20.0) == pytest.approx(1.0, abs=1e-12)
    assert pulse.envelope_at(50.0) == 1.0
    assert pulse.envelope_at(90.0) == pytest.approx(0.5, abs=1e-12)
    # ramps are continuous: no jump at the ramp boundary
    eps = 1e-9
    assert pulse.envelope_at(20.0 - eps) == pytest.approx(
        pulse.envelope_at(20.0 + eps), abs=1e-7)


def test_overlapping_pulses_sum():
    p1 = dr.PulseSpec(line="C", amplitude=1e-5, omega=0.2, width=50.0)
    p2 = dr.PulseSpec(line="C", amplitude=2e-5, omega=0.3, width=50.0)
    sched = dr.DriveSchedule(pulses=[p1, p2])
    tau = 11.0
    expected = 1e-5 * math.cos(0.2 * tau) + 2e-5 * math.cos(0.3 * tau)
    assert sched.x_c(tau) == pytest.approx(expected, rel=1e-15)
    assert sched.x_t(tau) == 0.0


@pytest.fixture()
def driven_ham(solution, table):
    om = abs(table.spacing("00", "10"))
    pulses = [dr.PulseSpec(line="C", amplitude=5e-5, omega=om, width=500.0),
              dr.PulseSpec(line="T", amplitude=3e-5, omega=0.9 * om, width=500.0)]
    return dr.reduced_hamiltonian(solution, table, dr.DriveSchedule(pulses=pulses))


def test_hermitian_at_random_times(driven_ham):
    rng = np.random.default_rng(3)
    for tau in rng.uniform(0.0, 500.0, size=100):
        h = driven_ham.matrix(float(tau))
        assert np.max(np.abs(h - h.T.conj())) < 1e-13


def test_zero_amplitude_is_diagonal(solution, table):
    pulses = [dr.PulseSpec(line="C", amplitude=0.0, omega=0.2, width=100.0)]
    ham = dr.reduced_hamiltonian(solution, table, dr.DriveSchedule(pulses=pulses))
    for tau in (0.0, 17.3, 99.9):
        assert np.array_equal(ham.matrix(tau), np.diag(ham.energies))


def test_drive_linearity(solution, table):
    om = abs(table.spacing("00", "10"))

    def ham_with(scale):
        pulses = [dr.PulseSpec(line="C", amplitude=scale * 5e-5, omega=om,
                               width=300.0),
                  dr.PulseSpec(line="T", amplitude=scale * 2e-5, omega=0.7 * om,
                               width=300.0)]
        return dr.reduced_hamiltonian(solution, table,
                                      dr.DriveSchedule(pulses=pulses))

    h1 = ham_with(1.0)
    h2 = ham_with(2.0)
    for tau in (0.0, 41.7, 123.4):
        w1 = h1.drive_part(tau)
        w2 = h2.drive_part(tau)
        assert np.array_equal(w2, 2.0 * w1)


def test_single_pulse_block_value(solution, table, basis, consts):
    # hand-assembled 2x2 sub-block at one instant
    om = abs(table.spacing("00", "10"))
    pulse = dr.PulseSpec(line="C", amplitude=5e-5, omega=om, width=100.0)
    ham = dr.reduced_hamiltonian(solution, table,
                                 dr.DriveSchedule(pulses=[pulse]))
    tau = 2.0 * math.pi / om       # carrier at a maximum
    i, j = basis.index("00"), basis.index("10")
    h = ham.matrix(tau)
    x_c = 5e-5 * math.cos(om * tau)
    d1 = x_c / consts.eta
    d2 = 0.5 * table.params.kappa * x_c / consts.eta
    expected = d1 * table.D1[i, j] + d2 * table.D2[i, j]
    assert h[i, j] == pytest.approx(expected, rel=1e-12)


def test_identity_term_only_changes_global_phase(solution, table, basis):
    om = abs(table.spacing("00", "10"))
    pulses = [dr.PulseSpec(line="C", amplitude=5e-5, omega=om, width=400.0)]
    sched = dr.DriveSchedule(pulses=pulses)
    c0 = StateVector.basis_state(solution.n_states, basis.index("00"))
    cfg = IntegratorConfig(dtau=0.05, record_stride=100)
    out = {}
    for flag in (False, True):
        ham = dr.reduced_hamiltonian(solution, table, sched, include_d12=flag)
        out[flag] = propagate(c0, ham, cfg)
    assert np.max(np.abs(out[True].populations - out[False].populations)) < 1e-12
    # amplitudes differ by a pure phase
    ratio = out[True].amps[-1] / out[False].amps[-1]
    big = np.abs(out[False].amps[-1]) > 1e-6
    assert np.max(np.abs(np.abs(ratio[big]) - 1.0)) < 1e-9
    assert np.std(np.angle(ratio[big])) < 1e-9
