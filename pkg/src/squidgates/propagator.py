"""Time propagation of i dc/dtau = H(tau) c over the truncated eigenbasis.

The default integrator is a Strang-split step

    c <- exp(-i*E*dtau/2) exp(-i*W(tau_mid)*dtau) exp(-i*E*dtau/2) c,

with E the diagonal energies and W the drive part evaluated at the step
midpoint; exp(-i*W*dtau) is applied through an exact eigendecomposition
of the small Hermitian W, so every step is unitary to rounding error.
When only one drive line is active during a step, W(tau) is a scalar
multiple of a fixed direction matrix and its eigendecomposition is
precomputed once for the whole span; the result is identical to the
per-step decomposition.

A fixed-step RK4 integrator over the same equation (energies shifted by
their mean to keep the phases slow, shift undone on output) serves as an
independent cross-check.

The inner loops live in a compiled extension (squidgates._stepper) with
a pure-numpy fallback; set SQUIDGATES_PURE=1 to force the fallback.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, IntegratorInstabilityError

try:
    from . import _stepper as _compiled_kernels
except ImportError:
    _compiled_kernels = None
from . import _stepper_py as _pure_kernels

METHODS = ("split-operator", "reference-rk4")


def available_backends():
    return ("compiled", "pure") if _compiled_kernels is not None else ("pure",)


def default_backend():
    if os.environ.get("SQUIDGATES_PURE", "") not in ("", "0"):
        return "pure"
    return "compiled" if _compiled_kernels is not None else "pure"


def _kernels(backend):
    if backend is None:
        backend = default_backend()
    if backend == "compiled":
        if _compiled_kernels is None:
            raise ConfigurationError("compiled stepper extension is not available")
        return _compiled_kernels
    if backend == "pure":
        return _pure_kernels
    raise ConfigurationError(f"unknown backend {backend!r}")


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the retained eigenstates at time tau."""

    c: np.ndarray
    tau: float = 0.0

    @classmethod
    def basis_state(cls, n_states, index, tau=0.0):
        c = np.zeros(n_states, complex)
        c[index] = 1.0
        return cls(c=c, tau=tau)

    @property
    def norm(self):
        return float(np.sum(np.abs(self.c) ** 2))


@dataclass(frozen=True)
class IntegratorConfig:
    dtau: float = 0.05
    record_stride: int = 20
    method: str = "split-operator"

    def __post_init__(self):
        if not self.dtau > 0.0:
            raise ConfigurationError(f"dtau must be positive, got {self.dtau}")
        if self.record_stride < 1:
            raise ConfigurationError("record_stride must be >= 1")
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}")


@dataclass(frozen=True)
class TrajectoryRecord:
    """Sampled amplitudes c_n(tau) along one propagation (lab frame)."""

    taus: np.ndarray         # (n_samples,)
    amps: np.ndarray         # (n_samples, n_states) complex
    energies: np.ndarray     # for rotating-frame transforms

    @property
    def populations(self):
        return np.abs(self.amps) ** 2

    @property
    def norms(self):
        return self.populations.sum(axis=1)

    def rotating_amps(self):
        """Amplitudes with the static phases exp(-i*E_n*tau) removed."""
        return self.amps * np.exp(1j * self.taus[:, None] * self.energies[None, :])

    def leakage(self, basis):
        """Population outside the four computational states at each sample."""
        comp = self.populations[:, basis.indices].sum(axis=1)
        return self.norms - comp

    def final_state(self):
        return StateVector(c=self.amps[-1].copy(), tau=float(self.taus[-1]))

    def state_at(self, idx):
        return StateVector(c=self.amps[idx].copy(), tau=float(self.taus[idx]))

    def to_csv(self, path, basis, fmt="%.17g"):
        """Trajectory CSV: tau, P00, P01, P10, P11, leakage, norm."""
        pops = self.populations
        leak = self.leakage(basis)
        norms = self.norms
        idx = basis.indices
        with open(path, "w") as f:
            f.write("tau,P00,P01,P10,P11,leakage,norm\n")
            for s in range(len(self.taus)):
                row = [fmt % self.taus[s]]
                row += [fmt % pops[s, i] for i in idx]
                row += [fmt % leak[s], fmt % norms[s]]
                f.write(",".join(row) + "\n")


def fidelity(state, target):
    """|<target|state>|^2 for normalized state vectors."""
    return float(np.abs(np.vdot(target.c, state.c)) ** 2)


def step_split_operator(state, ham, dtau):
    """One Strang-split step (reference implementation used by the tests)."""
    tau_mid = state.tau + 0.5 * dtau
    w = ham.drive_part(tau_mid)
    evals, evecs = np.linalg.eigh(w)
    c = state.c * np.exp(-0.5j * ham.energies * dtau)
    c = evecs @ (np.exp(-1j * evals * dtau) * (evecs.T.conj() @ c))
    c *= np.exp(-0.5j * ham.energies * dtau)
    return StateVector(c=c, tau=state.tau + dtau)


def _pack_tones(pulses):
    env_code = {"rectangular": 0.0, "cosine-ramped": 1.0}
    rows = [(pl.amplitude, pl.omega, pl.phase, pl.t_start, pl.width,
             env_code[pl.envelope], pl.ramp_fraction) for pl in pulses]
    if not rows:
        return np.zeros((0, 7), float)
    return np.array(rows, float)


def _activity_segments(schedule, dtau, n_total):
    """Runs of steps grouped by which drive lines act at the step midpoint."""
    tmid = (np.arange(n_total) + 0.5) * dtau
    code = np.zeros(n_total, np.int8)
    for pl in schedule.pulses:
        if pl.amplitude == 0.0:
            continue
        mask = (tmid >= pl.t_start) & (tmid < pl.t_end)
        code[mask] |= 1 if pl.line == "C" else 2
    cuts = np.flatnonzero(np.diff(code)) + 1
    starts = np.concatenate(([0], cuts))
    ends = np.concatenate((cuts, [n_total]))
    return [(int(s), int(e - s), int(code[s])) for s, e in zip(starts, ends)]


def _run_split(kern, c, ham, dtau, n_total, stride, rec_tau, rec_amps):
    p, d = ham.params, ham.constants
    inv_eta = 1.0 / d.eta
    energies = np.ascontiguousarray(ham.energies, float)
    d1_mat = np.ascontiguousarray(ham.D1, float)
    d2_mat = np.ascontiguousarray(ham.D2, float)
    pulses_c = ham.schedule.line_pulses("C")
    pulses_t = ham.schedule.line_pulses("T")
    tones_c = _pack_tones(pulses_c)
    tones_t = _pack_tones(pulses_t)
    tones_all = np.vstack([tones_c, tones_t])
    lines_all = np.array([0] * len(pulses_c) + [1] * len(pulses_t), np.int32)
    eig_cache = {}

    def direction_eig(line_code):
        if line_code not in eig_cache:
            if line_code == 1:
                m = d1_mat + 0.5 * p.kappa * d2_mat
            else:
                m = d2_mat + 0.5 * p.kappa * d1_mat
            evals, evecs = np.linalg.eigh(m)
            # one Newton polish toward exact orthogonality: this matrix is
            # reused for millions of steps, so LAPACK's O(n*eps) defect
            # would otherwise accumulate into a coherent norm drift
            evecs = 0.5 * evecs @ (3.0 * np.eye(len(evals)) - evecs.T @ evecs)
            eig_cache[line_code] = (evals, evecs)
        return eig_cache[line_code]

    rec_idx = 1
    for k_start, n_steps, code in _activity_segments(ham.schedule, dtau, n_total):
        if code == 0:
            # drive-free span: the Strang step collapses to the exact
            # diagonal phases, applied here in closed form per sample
            ks = np.arange(k_start + 1, k_start + n_steps + 1)
            recs = ks[(ks % stride == 0) | (ks == n_total)]
            for k in recs:
                rec_tau[rec_idx] = k * dtau
                rec_amps[rec_idx] = c * np.exp(-1j * energies
                                               * ((k - k_start) * dtau))
                rec_idx += 1
            c *= np.exp(-1j * energies * (n_steps * dtau))
        elif code == 3:
            rec_idx = kern.run_split_general(
                c, energies, d1_mat, d2_mat, tones_all, lines_all, p.kappa,
                inv_eta, ham.include_d12, dtau, k_start, n_steps, stride,
                n_total, rec_tau, rec_amps, rec_idx)
        else:
            # single active line: W(tau) = s(tau) * M
            evals, evecs = direction_eig(code)
            tones = tones_c if code == 1 else tones_t
            rec_idx = kern.run_split_proportional(
                c, energies, np.ascontiguousarray(evals),
                np.ascontiguousarray(evecs), tones, inv_eta, ham.include_d12,
                dtau, k_start, n_steps, stride, n_total, rec_tau, rec_amps, rec_idx)
    return rec_idx


def _run_rk4(kern, c, ham, dtau, n_total, stride, rec_tau, rec_amps):
    p, d = ham.params, ham.constants
    pulses_c = ham.schedule.line_pulses("C")
    pulses_t = ham.schedule.line_pulses("T")
    tones = np.vstack([_pack_tones(pulses_c), _pack_tones(pulses_t)])
    lines = np.array([0] * len(pulses_c) + [1] * len(pulses_t), np.int32)
    e_mean = float(np.mean(ham.energies))
    energies = np.ascontiguousarray(ham.energies - e_mean, float)
    rec_idx = kern.run_rk4(c, energies, np.ascontiguousarray(ham.D1, float),
                           np.ascontiguousarray(ham.D2, float), tones, lines,
                           p.kappa, 1.0 / d.eta, ham.include_d12, dtau, 0,
                           n_total, stride, n_total, rec_tau, rec_amps, rec_idx=1)
    # undo the mean-energy frame shift
    rec_amps[:rec_idx] *= np.exp(-1j * e_mean * rec_tau[:rec_idx])[:, None]
    return rec_idx


def propagate(c0, ham, cfg=None, duration=None, backend=None):
    """Propagate c0 under the driven Hamiltonian and record the trajectory.

    duration defaults to the schedule duration.  Samples are taken at
    tau = 0, after every record_stride-th step, and at the endpoint.
    Raises :class:`IntegratorInstabilityError` if the norm drifts by more
    than 1e-6 anywhere along the trajectory.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    kern = _kernels(backend)
    if abs(c0.norm - 1.0) > 1e-9:
        raise ConfigurationError("initial state is not normalized")
    max_omega = ham.schedule.max_omega()
    if cfg.dtau * max_omega > 0.1 + 1e-12:
        raise ConfigurationError(
            f"dtau={cfg.dtau} under-resolves the fastest tone "
            f"(omega={max_omega}); need dtau*omega <= 0.1")
    if duration is None:
        duration = ham.schedule.duration
    n_total = int(round(duration / cfg.dtau))
    stride = cfg.record_stride
    n_rec = 1 + n_total // stride + (1 if n_total % stride else 0)
    rec_tau = np.empty(n_rec)
    rec_amps = np.empty((n_rec, ham.n), complex)
    rec_tau[0] = 0.0
    rec_amps[0] = c0.c
    c = np.ascontiguousarray(c0.c, complex).copy()

    if cfg.method == "split-operator":
        rec_idx = _run_split(kern, c, ham, cfg.dtau, n_total, stride, rec_tau, rec_amps)
    else:
        rec_idx = _run_rk4(kern, c, ham, cfg.dtau, n_total, stride, rec_tau, rec_amps)

    traj = TrajectoryRecord(taus=rec_tau[:rec_idx], amps=rec_amps[:rec_idx],
                            energies=ham.energies.copy())
    drift = np.max(np.abs(traj.norms - 1.0))
    if drift > 1e-6:
        raise IntegratorInstabilityError(
            f"norm drifted by {drift:.3e} (> 1e-6); reduce dtau")
    return traj
