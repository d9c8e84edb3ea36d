import math

import numpy as np
import pytest
from scipy.linalg import expm

from squidgates import drive as dr
from squidgates import propagator as pr
from squidgates.errors import ConfigurationError, IntegratorInstabilityError


def _working_point_two_tone(table, width, x_c10=5e-5):
    from squidgates.selfcheck import _two_tone_schedule
    return _two_tone_schedule(table, width, x_c10)


def _ham(table, sched, include_d12=False):
    return dr.ReducedHamiltonian(energies=table.energies.copy(), D1=table.D1,
                                 D2=table.D2, schedule=sched,
                                 params=table.params, constants=table.constants,
                                 include_d12=include_d12)


def _toy_ham(energies, d1, sched, table):
    return dr.ReducedHamiltonian(energies=np.asarray(energies, float),
                                 D1=np.asarray(d1, float),
                                 D2=np.zeros_like(np.asarray(d1, float)),
                                 schedule=sched, params=table.params,
                                 constants=table.constants)


def test_free_evolution_phases_exact(table):
    ham = _ham(table, dr.DriveSchedule(pulses=[]))
    n = len(table.energies)
    rng = np.random.default_rng(5)
    c = rng.normal(size=n) + 1j * rng.normal(size=n)
    c /= np.linalg.norm(c)
    state = pr.StateVector(c=c)
    stepped = pr.step_split_operator(state, ham, 0.05)
    exact = c * np.exp(-1j * table.energies * 0.05)
    assert np.max(np.abs(stepped.c - exact)) < 1e-15


def test_free_populations_constant(table, basis):
    ham = _ham(table, dr.DriveSchedule(pulses=[]))
    c0 = pr.StateVector.basis_state(len(table.energies), basis.index("01"))
    traj = pr.propagate(c0, ham, pr.IntegratorConfig(dtau=0.05, record_stride=200),
                        duration=5000.0)
    assert np.max(np.abs(traj.populations - traj.populations[0])) < 1e-12


def test_single_step_matches_expm_when_diagonal_vanishes(table):
    # with E = 0 the Strang step reduces to the exact drive exponential
    rng = np.random.default_rng(9)
    w = rng.normal(size=(6, 6))
    w = 0.5 * (w + w.T)
    pulse = dr.PulseSpec(line="C", amplitude=1e-4, omega=0.21, width=10.0)
    sched = dr.DriveSchedule(pulses=[pulse])
    ham = _toy_ham(np.zeros(6), w, sched, table)
    c = rng.normal(size=6) + 1j * rng.normal(size=6)
    c /= np.linalg.norm(c)
    dtau = 0.04
    stepped = pr.step_split_operator(pr.StateVector(c=c), ham, dtau)
    exact = expm(-1j * dtau * ham.drive_part(0.5 * dtau)) @ c
    assert np.max(np.abs(stepped.c - exact)) < 1e-13


def test_halving_dtau_changes_endpoint_below_1e8(table, basis):
    # full two-tone drive; commensurate window
    ham = _ham(table, _working_point_two_tone(table, width=100.0))
    c0 = pr.StateVector.basis_state(len(table.energies), basis.index("00"))

    def endpoint(dtau):
        cfg = pr.IntegratorConfig(dtau=dtau, record_stride=10**9)
        return pr.propagate(c0, ham, cfg, duration=25.0).amps[-1]

    assert np.linalg.norm(endpoint(0.01) - endpoint(0.005)) < 1e-8


def test_two_level_rabi_matches_rwa(table, basis, consts):
    # restrict to the |00>, |10> pair and drive it resonantly
    i, j = basis.index("00"), basis.index("10")
    idx = np.array([i, j])
    energies = table.energies[idx]
    d1 = table.D1[np.ix_(idx, idx)]
    amp = 5e-5
    omega_rabi = amp * abs(d1[0, 1]) / consts.eta
    pulse = dr.PulseSpec(line="C", amplitude=amp,
                         omega=float(energies[1] - energies[0]),
                         width=1.05 * math.pi / omega_rabi)
    ham = _toy_ham(energies, d1, dr.DriveSchedule(pulses=[pulse]), table)
    c0 = pr.StateVector.basis_state(2, 0)
    n_steps = int(round(ham.schedule.duration / 0.05))
    traj = pr.propagate(c0, ham, pr.IntegratorConfig(
        dtau=0.05, record_stride=max(1, n_steps // 2048)))
    expected = np.sin(omega_rabi * traj.taus / 2.0) ** 2
    assert np.max(np.abs(traj.populations[:, 1] - expected)) < 5e-3


def test_fidelity_values():
    a = pr.StateVector(c=np.array([1.0, 0.0], complex))
    b = pr.StateVector(c=np.array([0.0, 1.0], complex))
    h = pr.StateVector(c=np.array([1.0, 1.0], complex) / math.sqrt(2.0))
    assert pr.fidelity(a, a) == pytest.approx(1.0)
    assert pr.fidelity(a, b) == 0.0
    assert pr.fidelity(h, a) == pytest.approx(0.5, rel=1e-12)


def test_record_layout(table, basis):
    ham = _ham(table, _working_point_two_tone(table, width=10.0))
    c0 = pr.StateVector.basis_state(len(table.energies), basis.index("00"))
    traj = pr.propagate(c0, ham, pr.IntegratorConfig(dtau=0.05, record_stride=30))
    n_total = 200
    assert traj.taus[0] == 0.0
    assert traj.taus[-1] == pytest.approx(n_total * 0.05)
    # initial sample, every 30th step, and the tail step
    assert len(traj.taus) == 1 + n_total // 30 + 1
    assert np.all(np.diff(traj.taus) > 0)


def test_trajectory_csv(tmp_path, table, basis):
    ham = _ham(table, _working_point_two_tone(table, width=10.0))
    c0 = pr.StateVector.basis_state(len(table.energies), basis.index("00"))
    traj = pr.propagate(c0, ham, pr.IntegratorConfig(dtau=0.05, record_stride=50))
    path = tmp_path / "trajectory.csv"
    traj.to_csv(path, basis)
    lines = path.read_text().splitlines()
    assert lines[0] == "tau,P00,P01,P10,P11,leakage,norm"
    assert len(lines) == 1 + len(traj.taus)
    first = [float(v) for v in lines[1].split(",")]
    assert first[:2] == [0.0, 1.0]


def test_initial_state_must_be_normalized(table):
    ham = _ham(table, dr.DriveSchedule(pulses=[]))
    bad = pr.StateVector(c=np.full(len(table.energies), 0.5, complex))
    with pytest.raises(ConfigurationError):
        pr.propagate(bad, ham, duration=1.0)


def test_step_resolution_guard(table, basis):
    ham = _ham(table, _working_point_two_tone(table, width=10.0))
    c0 = pr.StateVector.basis_state(len(table.energies), basis.index("00"))
    with pytest.raises(ConfigurationError):
        pr.propagate(c0, ham, pr.IntegratorConfig(dtau=0.5))


def test_rk4_instability_detected(table, basis):
    # a large step on fast phases makes RK4 bleed norm; the guard trips
    ham = _ham(table, dr.DriveSchedule(pulses=[]))
    c = np.zeros(len(table.energies), complex)
    c[0] = c[-1] = 1.0 / math.sqrt(2.0)
    cfg = pr.IntegratorConfig(dtau=2.0, record_stride=10**6,
                              method="reference-rk4")
    with pytest.raises(IntegratorInstabilityError):
        pr.propagate(pr.StateVector(c=c), ham, cfg, duration=40000.0)


def test_time_reversal(table, basis):
    width = 2000.0
    sched = _working_point_two_tone(table, width=width)
    ham = _ham(table, sched)
    n = len(table.energies)
    c0 = pr.StateVector.basis_state(n, basis.index("00"))
    cfg = pr.IntegratorConfig(dtau=0.05, record_stride=10**9)
    fwd = pr.propagate(c0, ham, cfg, duration=width)
    # mirrored schedule: field'(tau) = field(T - tau)
    mirrored = [dr.PulseSpec(line=pl.line, amplitude=pl.amplitude, omega=pl.omega,
                             width=pl.width, t_start=width - pl.t_end,
                             phase=-(pl.omega * width + pl.phase))
                for pl in sched.pulses]
    ham_rev = _ham(table, dr.DriveSchedule(pulses=mirrored))
    c_back = pr.StateVector(c=np.conj(fwd.amps[-1]))
    back = pr.propagate(c_back, ham_rev, cfg, duration=width)
    assert np.linalg.norm(back.amps[-1] - np.conj(c0.c)) < 1e-8


class TestBackends:
    def test_backends_available(self):
        assert "pure" in pr.available_backends()

    @pytest.mark.skipif("compiled" not in pr.available_backends(),
                        reason="compiled extension not built")
    def test_compiled_and_pure_agree(self, table, basis):
        # simultaneous C and T tones exercise the general (per-step
        # eigendecomposition) path; staggered starts exercise segmentation
        om_c = abs(table.spacing("00", "10"))
        om_t = abs(table.spacing("10", "11"))
        pulses = [dr.PulseSpec(line="C", amplitude=5e-5, omega=om_c, width=300.0),
                  dr.PulseSpec(line="T", amplitude=4e-5, omega=om_t, width=150.0,
                               t_start=100.0, envelope="cosine-ramped")]
        ham = _ham(table, dr.DriveSchedule(pulses=pulses), include_d12=True)
        c0 = pr.StateVector.basis_state(len(table.energies), basis.index("00"))
        cfg = pr.IntegratorConfig(dtau=0.05, record_stride=100)
        out = {b: pr.propagate(c0, ham, cfg, backend=b)
               for b in ("compiled", "pure")}
        assert np.max(np.abs(out["compiled"].amps - out["pure"].amps)) < 1e-12
        for method in ("reference-rk4",):
            cfg2 = pr.IntegratorConfig(dtau=0.05, record_stride=100, method=method)
            o2 = {b: pr.propagate(c0, ham, cfg2, backend=b)
                  for b in ("compiled", "pure")}
            assert np.max(np.abs(o2["compiled"].amps - o2["pure"].amps)) < 1e-12

    def test_kernel_loop_matches_single_steps(self, table, basis):
        ham = _ham(table, _working_point_two_tone(table, width=20.0))
        n = len(table.energies)
        c0 = pr.StateVector.basis_state(n, basis.index("00"))
        traj = pr.propagate(c0, ham, pr.IntegratorConfig(dtau=0.05,
                                                         record_stride=10**9))
        state = c0
        for _ in range(400):
            state = pr.step_split_operator(state, ham, 0.05)
        assert np.max(np.abs(traj.amps[-1] - state.c)) < 1e-12

    def test_proportional_equals_general_path(self, table, basis):
        # an overlapping infinitesimal T tone forces the general path
        # without changing the physics
        om_c = abs(table.spacing("00", "10"))
        base = [dr.PulseSpec(line="C", amplitude=5e-5, omega=om_c, width=400.0)]
        forced = base + [dr.PulseSpec(line="T", amplitude=1e-300, omega=om_c,
                                      width=400.0)]
        c0 = pr.StateVector.basis_state(len(table.energies), basis.index("00"))
        cfg = pr.IntegratorConfig(dtau=0.05, record_stride=200)
        t_prop = pr.propagate(c0, _ham(table, dr.DriveSchedule(pulses=base)), cfg)
        t_gen = pr.propagate(c0, _ham(table, dr.DriveSchedule(pulses=forced)), cfg)
        assert np.max(np.abs(t_prop.amps - t_gen.amps)) < 5e-11
