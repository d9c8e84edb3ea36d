"""Microwave drive pulses and the driven Hamiltonian in the eigenbasis.

A pulse applies a flux tone amp*env(tau)*cos(omega*tau + phase) to the
control (C, qubit 1) or target (T, qubit 2) line.  With x_C and x_T the
instantaneous drive fluxes, the interaction is

    V = d1*(x1 - xe1) + d2*(x2 - xe2) + d12,
    d1 = m*omega_LC^2*(x_C + kappa*x_T/2),
    d2 = m*omega_LC^2*(x_T + kappa*x_C/2),
    d12 = m*omega_LC^2*(x_C^2 + x_T^2 + kappa*x_C*x_T)/2,

so in the truncated eigenbasis (hbar*omega_LC units) the driven
Hamiltonian is H(tau) = diag(E_n) + d1(tau)*D1 + d2(tau)*D2 + d12(tau)*I
with the dipole matrices from the transition table.  The d12 term is a
multiple of the identity and only contributes a global phase; it is off
by default.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

ENVELOPES = ("rectangular", "cosine-ramped")
LINES = ("C", "T")


@dataclass(frozen=True)
class PulseSpec:
    """One microwave tone on one drive line.

    Times are dimensionless (tau = omega_LC*t), omega is in units of
    omega_LC, amplitude is a dimensionless flux.  The carrier phase is
    referenced to tau = 0 regardless of t_start.
    """

    line: str
    amplitude: float
    omega: float
    width: float
    t_start: float = 0.0
    phase: float = 0.0
    envelope: str = "rectangular"
    ramp_fraction: float = 0.1

    def __post_init__(self):
        if self.line not in LINES:
            raise ConfigurationError(f"line must be 'C' or 'T', got {self.line!r}")
        if self.amplitude < 0.0:
            raise ConfigurationError(f"amplitude must be >= 0, got {self.amplitude}")
        if not self.width > 0.0:
            raise ConfigurationError(f"width must be positive, got {self.width}")
        if not self.omega > 0.0:
            raise ConfigurationError(f"omega must be positive, got {self.omega}")
        if self.envelope not in ENVELOPES:
            raise ConfigurationError(f"unknown envelope {self.envelope!r}")
        if not 0.0 < self.ramp_fraction <= 0.5:
            raise ConfigurationError("ramp_fraction must lie in (0, 0.5]")

    @property
    def t_end(self):
        return self.t_start + self.width

    def envelope_at(self, tau):
        s = tau - self.t_start
        if s < 0.0 or s >= self.width:
            return 0.0
        if self.envelope == "rectangular":
            return 1.0
        ramp = self.ramp_fraction * self.width
        if s < ramp:
            return 0.5 * (1.0 - math.cos(math.pi * s / ramp))
        if s > self.width - ramp:
            return 0.5 * (1.0 - math.cos(math.pi * (self.width - s) / ramp))
        return 1.0

    def field_at(self, tau):
        env = self.envelope_at(tau)
        if env == 0.0:
            return 0.0
        return self.amplitude * env * math.cos(self.omega * tau + self.phase)


@dataclass(frozen=True)
class DriveSchedule:
    """A set of pulses; overlapping pulses on one line sum."""

    pulses: tuple
    duration: float = None

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        t_end = max((pl.t_end for pl in self.pulses), default=0.0)
        if self.duration is None:
            object.__setattr__(self, "duration", t_end)
        elif self.duration < t_end - 1e-12:
            raise ConfigurationError(
                f"duration {self.duration} is shorter than the last pulse end {t_end}")

    def line_pulses(self, line):
        return [pl for pl in self.pulses if pl.line == line]

    def x_c(self, tau):
        return sum(pl.field_at(tau) for pl in self.line_pulses("C"))

    def x_t(self, tau):
        return sum(pl.field_at(tau) for pl in self.line_pulses("T"))

    def max_omega(self):
        return max((pl.omega for pl in self.pulses), default=0.0)


def drive_coefficients(x_c, x_t, p, d):
    """Dimensionless coupling coefficients (d1, d2, d12) for drive fluxes.

    Dividing the SI coefficients by hbar*omega_LC turns the prefactor
    m*omega_LC^2/(hbar*omega_LC) into 1/eta.
    """
    d1 = (x_c + p.kappa * x_t / 2.0) / d.eta
    d2 = (x_t + p.kappa * x_c / 2.0) / d.eta
    d12 = (x_c**2 + x_t**2 + p.kappa * x_c * x_t) / (2.0 * d.eta)
    return d1, d2, d12


@dataclass(frozen=True)
class ReducedHamiltonian:
    """Driven Hamiltonian over the truncated eigenbasis, hbar*omega_LC units.

    Immutable; ``matrix(tau)`` is a pure function and safe to evaluate
    concurrently.
    """

    energies: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    schedule: DriveSchedule
    params: object
    constants: object
    include_d12: bool = False

    @property
    def n(self):
        return len(self.energies)

    def drive_values(self, tau):
        """(d1, d2, d12) at time tau."""
        return drive_coefficients(self.schedule.x_c(tau), self.schedule.x_t(tau),
                                  self.params, self.constants)

    def matrix(self, tau):
        d1, d2, d12 = self.drive_values(tau)
        h = np.diag(self.energies).astype(float)
        h += d1 * self.D1 + d2 * self.D2
        if self.include_d12:
            h[np.diag_indices_from(h)] += d12
        return h

    def drive_part(self, tau):
        """W(tau) = H(tau) - diag(E), the off-diagonal drive term."""
        d1, d2, d12 = self.drive_values(tau)
        w = d1 * self.D1 + d2 * self.D2
        if self.include_d12:
            w = w + d12 * np.eye(self.n)
        return w


def reduced_hamiltonian(sol, table, sched, include_d12=False):
    """Assemble the driven Hamiltonian from a solution and its table."""
    for pl in sched.pulses:
        if pl.line not in LINES:
            raise ConfigurationError(f"no dipole data for line {pl.line!r}")
    return ReducedHamiltonian(energies=sol.energies.copy(), D1=table.D1, D2=table.D2,
                              schedule=sched, params=sol.params,
                              constants=sol.constants, include_d12=include_d12)
