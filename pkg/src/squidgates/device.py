"""Device model for two identical, inductively coupled rf-SQUID flux qubits.

Each SQUID is a superconducting loop of inductance L interrupted by a
Josephson junction (critical current Ic, shunt capacitance C).  With the
enclosed flux expressed in units of the flux quantum, x = Phi/Phi0, the
qubit behaves as a "flux" particle of mass m = C*Phi0^2 in the potential

    U(x) = m*omega_LC^2*(x - xe)^2/2 - E_J*cos(2*pi*x),

with omega_LC = 1/sqrt(L*C), E_J = m*omega_LC^2*beta_L/(4*pi^2) and
beta_L = 2*pi*L*Ic/Phi0.  Two SQUIDs couple through their mutual
inductance M (kappa = 2*M/L):

    U12(x1, x2) = m*omega_LC^2*kappa*(x1 - xe1)*(x2 - xe2)/2.

All internal computations are dimensionless: flux in Phi0, energy in
hbar*omega_LC, time as tau = omega_LC*t.  The single scale factor is
eta = hbar/(m*omega_LC); dividing U by hbar*omega_LC gives

    u(x) = (x - xe)^2/(2*eta) - beta_L/(4*pi^2*eta)*cos(2*pi*x).

SI units appear only at the configuration boundary.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateLandscapeError, ParameterError

# CODATA values, fixed for bit-reproducible derived constants.
PHI0 = 2.067833848e-15  # flux quantum h/2e [Wb]
HBAR = 1.054571817e-34  # reduced Planck constant [J s]

_TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class DeviceParams:
    """Physical inputs for a pair of identical coupled SQUIDs.

    Exactly one of (beta_L, Ic) and one of (kappa, M) must be supplied;
    the missing partner is filled in from the round-trip identities
    beta_L = 2*pi*L*Ic/Phi0 and kappa = 2*M/L.
    """

    L: float                      # loop inductance [H]
    C: float                      # junction shunt capacitance [F]
    xe1: float                    # external flux bias of qubit 1 [Phi0]
    xe2: float                    # external flux bias of qubit 2 [Phi0]
    beta_L: float = None          # 2*pi*L*Ic/Phi0
    Ic: float = None              # junction critical current [A]
    kappa: float = None           # coupling strength 2*M/L
    M: float = None               # mutual inductance [H]

    def __post_init__(self):
        if not (self.L > 0.0 and self.C > 0.0):
            raise ParameterError(f"L and C must be positive, got L={self.L}, C={self.C}")
        if (self.beta_L is None) == (self.Ic is None):
            raise ParameterError("exactly one of beta_L and Ic must be supplied")
        if (self.kappa is None) == (self.M is None):
            raise ParameterError("exactly one of kappa and M must be supplied")
        if self.beta_L is None:
            object.__setattr__(self, "beta_L", _TWO_PI * self.L * self.Ic / PHI0)
        else:
            object.__setattr__(self, "Ic", self.beta_L * PHI0 / (_TWO_PI * self.L))
        if self.kappa is None:
            object.__setattr__(self, "kappa", 2.0 * self.M / self.L)
        else:
            object.__setattr__(self, "M", self.kappa * self.L / 2.0)
        if self.beta_L < 0.0:
            raise ParameterError(f"beta_L must be >= 0, got {self.beta_L}")
        if not abs(self.kappa) < 1.0:
            raise ParameterError(f"|kappa| must be < 1, got {self.kappa}")
        for name, xe in (("xe1", self.xe1), ("xe2", self.xe2)):
            if not 0.0 < xe < 1.0:
                raise ParameterError(f"{name} must lie in (0, 1), got {xe}")

    def bias(self, qubit):
        """Flux bias of qubit 1 or 2."""
        if qubit == 1:
            return self.xe1
        if qubit == 2:
            return self.xe2
        raise ParameterError(f"qubit must be 1 or 2, got {qubit}")


def default_device():
    """The working point used throughout the acceptance experiments."""
    return DeviceParams(L=100e-12, C=40e-15, beta_L=1.2, kappa=5e-4,
                        xe1=0.499, xe2=0.4998)


@dataclass(frozen=True)
class DerivedConstants:
    """Secondary constants computed once from :class:`DeviceParams`."""

    omega_LC: float   # characteristic frequency 1/sqrt(L*C) [rad/s]
    m: float          # flux-particle mass C*Phi0^2 [kg]
    E_J: float        # Josephson energy m*omega_LC^2*beta_L/(4*pi^2) [J]
    Phi0: float       # flux quantum [Wb]
    eta: float        # quantum scale hbar/(m*omega_LC), dimensionless

    @property
    def f_LC_ghz(self):
        """omega_LC / 2*pi in GHz."""
        return self.omega_LC / _TWO_PI / 1e9


def derive_constants(p):
    """Populate all derived constants and check internal consistency.

    The consistency identities (beta_L round-trip through Ic, and
    eta = hbar*sqrt(L/C)/Phi0^2) are verified to a relative 1e-12.
    """
    omega_lc = 1.0 / math.sqrt(p.L * p.C)
    m = p.C * PHI0**2
    e_j = m * omega_lc**2 * p.beta_L / (4.0 * math.pi**2)
    eta = HBAR / (m * omega_lc)
    d = DerivedConstants(omega_LC=omega_lc, m=m, E_J=e_j, Phi0=PHI0, eta=eta)
    beta_rt = _TWO_PI * p.L * p.Ic / PHI0
    if abs(beta_rt - p.beta_L) > 1e-12 * p.beta_L:
        raise ParameterError("beta_L does not round-trip through Ic")
    eta_alt = HBAR * math.sqrt(p.L / p.C) / PHI0**2
    if abs(eta_alt - eta) > 1e-12 * eta:
        raise ParameterError("eta identity violated (inconsistent L, C)")
    return d


# --------------------------------------------------------------------------
# potential energy surface (dimensionless, units of hbar*omega_LC)

def potential_1d(p, d, x, qubit):
    """Single-SQUID potential u(x) = U(x)/(hbar*omega_LC) for one qubit."""
    xe = p.bias(qubit)
    x = np.asarray(x, dtype=float)
    return (x - xe) ** 2 / (2.0 * d.eta) \
        - p.beta_L / (4.0 * math.pi**2 * d.eta) * np.cos(_TWO_PI * x)


def potential_2d(p, d, x1, x2):
    """Coupled-pair potential U(x1, x2)/(hbar*omega_LC).

    Equals the SI-unit potential divided by hbar*omega_LC; broadcasts over
    array inputs.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    u = potential_1d(p, d, x1, 1) + potential_1d(p, d, x2, 2)
    return u + p.kappa * (x1 - p.xe1) * (x2 - p.xe2) / (2.0 * d.eta)


def potential_gradient(p, d, x1, x2):
    """Gradient of :func:`potential_2d` with respect to (x1, x2)."""
    g1 = (x1 - p.xe1) / d.eta \
        + p.beta_L / (_TWO_PI * d.eta) * math.sin(_TWO_PI * x1) \
        + p.kappa * (x2 - p.xe2) / (2.0 * d.eta)
    g2 = (x2 - p.xe2) / d.eta \
        + p.beta_L / (_TWO_PI * d.eta) * math.sin(_TWO_PI * x2) \
        + p.kappa * (x1 - p.xe1) / (2.0 * d.eta)
    return np.array([g1, g2])


def potential_hessian(p, d, x1, x2):
    h11 = (1.0 + p.beta_L * math.cos(_TWO_PI * x1)) / d.eta
    h22 = (1.0 + p.beta_L * math.cos(_TWO_PI * x2)) / d.eta
    h12 = p.kappa / (2.0 * d.eta)
    return np.array([[h11, h12], [h12, h22]])


# --------------------------------------------------------------------------
# well location and labeling

@dataclass(frozen=True)
class Well:
    """A local minimum of the 2D potential surface."""

    location: tuple          # (x1*, x2*), dimensionless flux
    depth: float             # u(x1*, x2*) in hbar*omega_LC
    label: str               # computational quadrant: 00, 01, 10 or 11


def minima_1d(p, d, qubit, search_half_width=0.35, n_scan=801):
    """Local minima of the 1D potential of one qubit, Newton-refined.

    Scans [xe - w, xe + w] and polishes each seed with damped Newton until
    the gradient magnitude drops below 1e-10.
    """
    xe = p.bias(qubit)
    xs = np.linspace(xe - search_half_width, xe + search_half_width, n_scan)
    u = potential_1d(p, d, xs, qubit)
    seeds = xs[1:-1][(u[1:-1] < u[:-2]) & (u[1:-1] < u[2:])]
    out = []
    for x in seeds:
        for _ in range(100):
            g = (x - xe) / d.eta + p.beta_L / (_TWO_PI * d.eta) * math.sin(_TWO_PI * x)
            h = (1.0 + p.beta_L * math.cos(_TWO_PI * x)) / d.eta
            if abs(g) < 1e-11:
                break
            step = -g / h
            lam = 1.0
            u0 = potential_1d(p, d, x, qubit)
            # allow rounding noise of u near the bottom, where the true
            # decrease per step drops below machine precision
            slack = 64.0 * np.finfo(float).eps * max(1.0, abs(u0))
            while lam > 1e-8 and potential_1d(p, d, x + lam * step, qubit) > u0 + slack:
                lam *= 0.5
            x = x + lam * step
        out.append(float(x))
    return sorted(out)


def barrier_1d(p, d, qubit):
    """Position of the 1D barrier top between the two wells of one qubit.

    Only meaningful in the double-well regime; used to split the plane
    into computational quadrants.
    """
    wells = minima_1d(p, d, qubit)
    if len(wells) != 2:
        raise DegenerateLandscapeError(
            f"qubit {qubit} potential has {len(wells)} wells, expected 2")
    lo, hi = wells
    # golden-section maximum of u on [lo, hi]
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    e = a + inv_phi * (b - a)
    while b - a > 1e-13:
        if potential_1d(p, d, c, qubit) > potential_1d(p, d, e, qubit):
            b = e
        else:
            a = c
        c = b - inv_phi * (b - a)
        e = a + inv_phi * (b - a)
    return 0.5 * (a + b)


def find_wells(p, d, search_box=None, n_scan=201):
    """Locate and label the four wells of the coupled potential surface.

    A coarse n_scan x n_scan grid scan over ``search_box`` (default
    [xe_i - 0.35, xe_i + 0.35] per axis) seeds a damped Newton iteration;
    each minimum is refined to gradient norm < 1e-10 and verified to have
    a positive-definite Hessian.  Wells are labeled by quadrant relative
    to the inter-well barrier: qubit 1 reads 0/1 from the x1 side, qubit 2
    from the x2 side.

    Raises :class:`DegenerateLandscapeError` unless exactly four wells are
    found, which signals parameters outside the four-well regime.
    """
    if search_box is None:
        search_box = ((p.xe1 - 0.35, p.xe1 + 0.35), (p.xe2 - 0.35, p.xe2 + 0.35))
    (a1, b1), (a2, b2) = search_box
    g1 = np.linspace(a1, b1, n_scan)
    g2 = np.linspace(a2, b2, n_scan)
    u = potential_2d(p, d, g1[:, None], g2[None, :])
    interior = u[1:-1, 1:-1]
    is_min = np.ones_like(interior, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            is_min &= interior < u[1 + di:n_scan - 1 + di, 1 + dj:n_scan - 1 + dj]
    seeds = [(g1[i + 1], g2[j + 1]) for i, j in zip(*np.nonzero(is_min))]

    refined = []
    for x1, x2 in seeds:
        pt = np.array([x1, x2])
        for _ in range(100):
            g = potential_gradient(p, d, pt[0], pt[1])
            if np.linalg.norm(g) < 1e-11:
                break
            h = potential_hessian(p, d, pt[0], pt[1])
            step = np.linalg.solve(h, -g)
            lam = 1.0
            u0 = potential_2d(p, d, pt[0], pt[1])
            # allow rounding noise of u near the bottom, where the true
            # decrease per step drops below machine precision
            slack = 64.0 * np.finfo(float).eps * max(1.0, abs(float(u0)))
            while lam > 1e-8 and potential_2d(p, d, *(pt + lam * step)) > u0 + slack:
                lam *= 0.5
            pt = pt + lam * step
        if np.linalg.norm(potential_gradient(p, d, pt[0], pt[1])) > 1e-10:
            continue
        if not np.all(np.linalg.eigvalsh(potential_hessian(p, d, pt[0], pt[1])) > 0.0):
            continue
        if not (a1 <= pt[0] <= b1 and a2 <= pt[1] <= b2):
            continue
        if any(np.hypot(pt[0] - w[0], pt[1] - w[1]) < 1e-6 for w in refined):
            continue
        refined.append((float(pt[0]), float(pt[1])))

    if len(refined) != 4:
        raise DegenerateLandscapeError(
            f"found {len(refined)} wells, expected 4; parameters are outside "
            "the four-well regime")

    s1 = barrier_1d(p, d, 1)
    s2 = barrier_1d(p, d, 2)
    wells = []
    for x1, x2 in refined:
        label = f"{int(x1 > s1)}{int(x2 > s2)}"
        wells.append(Well(location=(x1, x2),
                          depth=float(potential_2d(p, d, x1, x2)),
                          label=label))
    wells.sort(key=lambda w: w.label)
    if [w.label for w in wells] != ["00", "01", "10", "11"]:
        raise DegenerateLandscapeError(
            "wells do not occupy one quadrant each: "
            + ", ".join(w.label for w in wells))
    return wells
