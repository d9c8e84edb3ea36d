"""Pure-Python (numpy) stepping kernels.

Fallback for :mod:`squidgates._stepper`; both expose the same three
entry points and produce the same trajectories to rounding error.
Tone rows are packed as (amp, omega, phase, t_start, width, env_type,
ramp_fraction) with env_type 0 = rectangular, 1 = cosine-ramped.
"""

import math

import numpy as np

COMPILED = False


def _field_sum(tones, tau):
    x = 0.0
    for amp, omega, phase, t0, width, env_type, ramp_frac in tones:
        s = tau - t0
        if s < 0.0 or s >= width:
            continue
        env = 1.0
        if env_type != 0.0:
            ramp = ramp_frac * width
            if s < ramp:
                env = 0.5 * (1.0 - math.cos(math.pi * s / ramp))
            elif s > width - ramp:
                env = 0.5 * (1.0 - math.cos(math.pi * (width - s) / ramp))
        x += amp * env * math.cos(omega * tau + phase)
    return x


def _line_fields(tones, lines, tau):
    x_c = _field_sum(tones[lines == 0], tau)
    x_t = _field_sum(tones[lines == 1], tau)
    return x_c, x_t


def _maybe_record(c, k_next, dtau, stride, n_total, rec_tau, rec_amps, rec_idx):
    if k_next % stride == 0 or k_next == n_total:
        rec_tau[rec_idx] = k_next * dtau
        rec_amps[rec_idx] = c
        rec_idx += 1
    return rec_idx


def run_split_proportional(c, energies, evals, evecs, tones, inv_eta, include_d12,
                           dtau, k_start, n_steps, stride, n_total,
                           rec_tau, rec_amps, rec_idx):
    """Strang steps over a span where a single drive line is active.

    The drive part is W(tau) = s(tau)*M with a fixed direction matrix M,
    so one eigendecomposition (evals, evecs) serves every step.
    """
    half = np.exp(-0.5j * energies * dtau)
    for i in range(n_steps):
        k = k_start + i
        tau_mid = (k + 0.5) * dtau
        x = _field_sum(tones, tau_mid)
        c *= half
        if x != 0.0:
            y = evecs.T @ c
            y *= np.exp(-1j * (x * inv_eta * dtau) * evals)
            c[:] = evecs @ y
        c *= half
        if include_d12 and x != 0.0:
            c *= np.exp(-0.5j * x * x * inv_eta * dtau)
        rec_idx = _maybe_record(c, k + 1, dtau, stride, n_total,
                                rec_tau, rec_amps, rec_idx)
    return rec_idx


def run_split_general(c, energies, d1_mat, d2_mat, tones, lines, kappa, inv_eta,
                      include_d12, dtau, k_start, n_steps, stride, n_total,
                      rec_tau, rec_amps, rec_idx):
    """Strang steps with both drive lines active: per-step eigendecomposition."""
    half = np.exp(-0.5j * energies * dtau)
    for i in range(n_steps):
        k = k_start + i
        tau_mid = (k + 0.5) * dtau
        x_c, x_t = _line_fields(tones, lines, tau_mid)
        d1 = (x_c + kappa * x_t / 2.0) * inv_eta
        d2 = (x_t + kappa * x_c / 2.0) * inv_eta
        w = d1 * d1_mat + d2 * d2_mat
        evals, evecs = np.linalg.eigh(w)
        c *= half
        y = evecs.T @ c
        y *= np.exp(-1j * dtau * evals)
        c[:] = evecs @ y
        c *= half
        if include_d12:
            d12 = (x_c**2 + x_t**2 + kappa * x_c * x_t) * 0.5 * inv_eta
            c *= np.exp(-1j * d12 * dtau)
        rec_idx = _maybe_record(c, k + 1, dtau, stride, n_total,
                                rec_tau, rec_amps, rec_idx)
    return rec_idx


def run_rk4(c, energies, d1_mat, d2_mat, tones, lines, kappa, inv_eta,
            include_d12, dtau, k_start, n_steps, stride, n_total,
            rec_tau, rec_amps, rec_idx):
    """Classic fixed-step RK4 on i dc/dtau = H(tau) c.

    The caller passes mean-shifted energies and restores the global phase
    afterwards.
    """
    def rhs(tau, v):
        x_c, x_t = _line_fields(tones, lines, tau)
        d1 = (x_c + kappa * x_t / 2.0) * inv_eta
        d2 = (x_t + kappa * x_c / 2.0) * inv_eta
        h = energies * v + d1 * (d1_mat @ v) + d2 * (d2_mat @ v)
        if include_d12:
            h += ((x_c**2 + x_t**2 + kappa * x_c * x_t) * 0.5 * inv_eta) * v
        return -1j * h

    for i in range(n_steps):
        k = k_start + i
        tau = k * dtau
        k1 = rhs(tau, c)
        k2 = rhs(tau + 0.5 * dtau, c + 0.5 * dtau * k1)
        k3 = rhs(tau + 0.5 * dtau, c + 0.5 * dtau * k2)
        k4 = rhs(tau + dtau, c + dtau * k3)
        c += (dtau / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        rec_idx = _maybe_record(c, k + 1, dtau, stride, n_total,
                                rec_tau, rec_amps, rec_idx)
    return rec_idx
