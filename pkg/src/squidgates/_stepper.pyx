# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled stepping kernels (hot inner loops of the time propagation).

Same entry points and semantics as squidgates._stepper_py; see there for
the tone packing convention.  Callers pack C-line tones before T-line
tones.
"""

import numpy as np

from libc.math cimport M_PI, cos, sin
from scipy.linalg.cython_lapack cimport dsyev

COMPILED = True


cdef inline double _field_sum(const double[:, ::1] tones, double tau) noexcept nogil:
    cdef double x = 0.0
    cdef double s, env, ramp
    cdef Py_ssize_t j
    for j in range(tones.shape[0]):
        s = tau - tones[j, 3]
        if s < 0.0 or s >= tones[j, 4]:
            continue
        env = 1.0
        if tones[j, 5] != 0.0:
            ramp = tones[j, 6] * tones[j, 4]
            if s < ramp:
                env = 0.5 * (1.0 - cos(M_PI * s / ramp))
            elif s > tones[j, 4] - ramp:
                env = 0.5 * (1.0 - cos(M_PI * (tones[j, 4] - s) / ramp))
        x += tones[j, 0] * env * cos(tones[j, 1] * tau + tones[j, 2])
    return x


cdef inline void _apply_diag_phase(double complex[::1] c, const double[::1] cos_p,
                                   const double[::1] sin_p) noexcept nogil:
    cdef Py_ssize_t a
    cdef double cr, ci
    for a in range(c.shape[0]):
        cr = c[a].real
        ci = c[a].imag
        c[a] = (cr * cos_p[a] - ci * sin_p[a]) + 1j * (cr * sin_p[a] + ci * cos_p[a])


cdef inline void _rotate_scalar(double complex[::1] c, double angle) noexcept nogil:
    cdef double co = cos(angle), sn = sin(angle)
    cdef Py_ssize_t a
    cdef double cr, ci
    for a in range(c.shape[0]):
        cr = c[a].real
        ci = c[a].imag
        c[a] = (cr * co - ci * sn) + 1j * (cr * sn + ci * co)


cdef inline void _apply_exp_w(double complex[::1] c, const double* q,
                              const double* lam, double scale, double dtau,
                              double* yr, double* yi, Py_ssize_t n) noexcept nogil:
    # c <- Q exp(-i*scale*lam*dtau) Q^T c, with Q column-major n x n
    cdef Py_ssize_t a, b
    cdef double sr, si, ph, co, sn, qv
    for a in range(n):
        sr = 0.0
        si = 0.0
        for b in range(n):
            qv = q[b + a * n]
            sr += qv * c[b].real
            si += qv * c[b].imag
        ph = -scale * lam[a] * dtau
        co = cos(ph)
        sn = sin(ph)
        yr[a] = sr * co - si * sn
        yi[a] = sr * sn + si * co
    for a in range(n):
        sr = 0.0
        si = 0.0
        for b in range(n):
            qv = q[a + b * n]
            sr += qv * yr[b]
            si += qv * yi[b]
        c[a] = sr + 1j * si


def run_split_proportional(double complex[::1] c, double[::1] energies,
                           double[::1] evals, double[:, ::1] evecs,
                           double[:, ::1] tones, double inv_eta, bint include_d12,
                           double dtau, long k_start, long n_steps, long stride,
                           long n_total, double[::1] rec_tau,
                           double complex[:, ::1] rec_amps, long rec_idx):
    cdef Py_ssize_t n = c.shape[0]
    cdef double[::1] cos_p = np.cos(-0.5 * np.asarray(energies) * dtau)
    cdef double[::1] sin_p = np.sin(-0.5 * np.asarray(energies) * dtau)
    cdef double[::1, :] qf = np.asfortranarray(evecs)
    cdef double[::1] lam_v = np.ascontiguousarray(evals)
    cdef double[::1] ybuf = np.empty(2 * n)
    cdef const double* q = &qf[0, 0]
    cdef const double* lam = &lam_v[0]
    cdef double* yr = &ybuf[0]
    cdef double* yi = yr + n
    cdef long i, k
    cdef double tau_mid, x
    for i in range(n_steps):
        k = k_start + i
        tau_mid = (k + 0.5) * dtau
        x = _field_sum(tones, tau_mid)
        _apply_diag_phase(c, cos_p, sin_p)
        if x != 0.0:
            _apply_exp_w(c, q, lam, x * inv_eta, dtau, yr, yi, n)
        _apply_diag_phase(c, cos_p, sin_p)
        if include_d12 and x != 0.0:
            _rotate_scalar(c, -0.5 * x * x * inv_eta * dtau)
        if (k + 1) % stride == 0 or k + 1 == n_total:
            rec_tau[rec_idx] = (k + 1) * dtau
            rec_amps[rec_idx, :] = c
            rec_idx += 1
    return rec_idx


def run_split_general(double complex[::1] c, double[::1] energies,
                      double[:, ::1] d1_mat, double[:, ::1] d2_mat,
                      double[:, ::1] tones, int[::1] lines, double kappa,
                      double inv_eta, bint include_d12, double dtau,
                      long k_start, long n_steps, long stride, long n_total,
                      double[::1] rec_tau, double complex[:, ::1] rec_amps,
                      long rec_idx):
    cdef Py_ssize_t n = c.shape[0]
    cdef int ni = <int> n, info = 0, lwork = -1
    cdef char jobz = b'V', uplo = b'L'
    cdef double[::1] cos_p = np.cos(-0.5 * np.asarray(energies) * dtau)
    cdef double[::1] sin_p = np.sin(-0.5 * np.asarray(energies) * dtau)
    cdef double[::1] wbuf = np.empty(n * n)
    cdef double[::1] lam_v = np.empty(n)
    cdef double[::1] ybuf = np.empty(2 * n)
    cdef double* w = &wbuf[0]
    cdef double* lam = &lam_v[0]
    cdef double* yr = &ybuf[0]
    cdef double* yi = yr + n
    cdef double wkopt = 0.0
    dsyev(&jobz, &uplo, &ni, w, &ni, lam, &wkopt, &lwork, &info)
    lwork = <int> wkopt
    cdef double[::1] work_v = np.empty(lwork)
    cdef double* work = &work_v[0]
    cdef Py_ssize_t a, b, jj
    cdef long n_c = 0
    for jj in range(lines.shape[0]):
        if lines[jj] == 0:
            n_c += 1
    cdef long i, k
    cdef double tau_mid, x_c, x_t, d1, d2
    for i in range(n_steps):
        k = k_start + i
        tau_mid = (k + 0.5) * dtau
        x_c = _field_sum(tones[:n_c], tau_mid)
        x_t = _field_sum(tones[n_c:], tau_mid)
        d1 = (x_c + kappa * x_t / 2.0) * inv_eta
        d2 = (x_t + kappa * x_c / 2.0) * inv_eta
        for a in range(n):
            for b in range(n):
                w[a + b * n] = d1 * d1_mat[a, b] + d2 * d2_mat[a, b]
        dsyev(&jobz, &uplo, &ni, w, &ni, lam, work, &lwork, &info)
        if info != 0:
            raise RuntimeError(f"dsyev failed with info={info} at step {k}")
        _apply_diag_phase(c, cos_p, sin_p)
        _apply_exp_w(c, w, lam, 1.0, dtau, yr, yi, n)
        _apply_diag_phase(c, cos_p, sin_p)
        if include_d12:
            _rotate_scalar(c, -(x_c * x_c + x_t * x_t + kappa * x_c * x_t)
                           * 0.5 * inv_eta * dtau)
        if (k + 1) % stride == 0 or k + 1 == n_total:
            rec_tau[rec_idx] = (k + 1) * dtau
            rec_amps[rec_idx, :] = c
            rec_idx += 1
    return rec_idx


cdef inline void _rhs(const double complex* v, double tau,
                      const double[::1] energies, const double[:, ::1] d1_mat,
                      const double[:, ::1] d2_mat, const double[:, ::1] tones,
                      long n_c, double kappa, double inv_eta, bint include_d12,
                      double complex* out) noexcept nogil:
    # out = -i H(tau) v
    cdef Py_ssize_t n = energies.shape[0]
    cdef double x_c = _field_sum(tones[:n_c], tau)
    cdef double x_t = _field_sum(tones[n_c:], tau)
    cdef double d1 = (x_c + kappa * x_t / 2.0) * inv_eta
    cdef double d2 = (x_t + kappa * x_c / 2.0) * inv_eta
    cdef double d12 = 0.0
    if include_d12:
        d12 = (x_c * x_c + x_t * x_t + kappa * x_c * x_t) * 0.5 * inv_eta
    cdef Py_ssize_t a, b
    cdef double hr, hi, m
    for a in range(n):
        hr = (energies[a] + d12) * v[a].real
        hi = (energies[a] + d12) * v[a].imag
        for b in range(n):
            m = d1 * d1_mat[a, b] + d2 * d2_mat[a, b]
            hr += m * v[b].real
            hi += m * v[b].imag
        out[a] = hi - 1j * hr


def run_rk4(double complex[::1] c, double[::1] energies,
            double[:, ::1] d1_mat, double[:, ::1] d2_mat,
            double[:, ::1] tones, int[::1] lines, double kappa, double inv_eta,
            bint include_d12, double dtau, long k_start, long n_steps,
            long stride, long n_total, double[::1] rec_tau,
            double complex[:, ::1] rec_amps, long rec_idx):
    cdef Py_ssize_t n = c.shape[0]
    cdef double complex[:, ::1] buf = np.empty((5, n), dtype=np.complex128)
    cdef double complex* k1 = &buf[0, 0]
    cdef double complex* k2 = &buf[1, 0]
    cdef double complex* k3 = &buf[2, 0]
    cdef double complex* k4 = &buf[3, 0]
    cdef double complex* tmp = &buf[4, 0]
    cdef Py_ssize_t a, jj
    cdef long n_c = 0
    for jj in range(lines.shape[0]):
        if lines[jj] == 0:
            n_c += 1
    cdef long i, k
    cdef double tau
    cdef double complex* cp = &c[0]
    for i in range(n_steps):
        k = k_start + i
        tau = k * dtau
        _rhs(cp, tau, energies, d1_mat, d2_mat, tones, n_c, kappa, inv_eta,
             include_d12, k1)
        for a in range(n):
            tmp[a] = c[a] + 0.5 * dtau * k1[a]
        _rhs(tmp, tau + 0.5 * dtau, energies, d1_mat, d2_mat, tones, n_c,
             kappa, inv_eta, include_d12, k2)
        for a in range(n):
            tmp[a] = c[a] + 0.5 * dtau * k2[a]
        _rhs(tmp, tau + 0.5 * dtau, energies, d1_mat, d2_mat, tones, n_c,
             kappa, inv_eta, include_d12, k3)
        for a in range(n):
            tmp[a] = c[a] + dtau * k3[a]
        _rhs(tmp, tau + dtau, energies, d1_mat, d2_mat, tones, n_c,
             kappa, inv_eta, include_d12, k4)
        for a in range(n):
            c[a] = c[a] + (dtau / 6.0) * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a])
        if (k + 1) % stride == 0 or k + 1 == n_total:
            rec_tau[rec_idx] = (k + 1) * dtau
            rec_amps[rec_idx, :] = c
            rec_idx += 1
    return rec_idx
