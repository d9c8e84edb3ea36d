"""Stationary eigenproblem of the coupled SQUIDs on a Fourier grid.

The kinetic operator is the standard closed-form spectral (sinc-DVR)
second derivative on a uniform grid; the potential is diagonal.  The
coupled problem is solved either in a truncated product basis of 1D
eigenstates (default) or directly on the 2D grid with a matrix-free
block eigensolver, and the two routes are required to agree.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse.linalg as spla

from . import device as dev
from .errors import ConfigurationError, LabelingError, SolverError

N_STATES_DEFAULT = 20
K_1D_DEFAULT = 16


@dataclass(frozen=True)
class Grid1D:
    """Uniform coordinate grid for one qubit."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ConfigurationError(
                f"grid bounds out of order: [{self.x_min}, {self.x_max}]")
        if self.n_points < 64:
            raise ConfigurationError(
                f"n_points must be >= 64, got {self.n_points}")

    @property
    def spacing(self):
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self):
        return np.linspace(self.x_min, self.x_max, self.n_points)


def grid_for_qubit(p, d, qubit, half_width=0.35, n_points=256):
    """Default grid: centered on the qubit's bias point."""
    xe = p.bias(qubit)
    return Grid1D(xe - half_width, xe + half_width, n_points)


def _check_coverage(p, d, grid, qubit):
    # every 1D well must sit >= 5 harmonic widths sqrt(eta) inside the box
    margin = 5.0 * np.sqrt(d.eta)
    for w in dev.minima_1d(p, d, qubit):
        if w - margin < grid.x_min or w + margin > grid.x_max:
            raise ConfigurationError(
                f"grid [{grid.x_min:.4f}, {grid.x_max:.4f}] leaves less than "
                f"5*sqrt(eta) margin around the well at x={w:.4f} (qubit {qubit})")


def kinetic_matrix(n, dx, eta):
    """Spectral second-derivative (sinc-DVR) kinetic operator, scaled by eta/2.

    T_ii = k^2/3 and T_ij = 2*k^2/pi^2 * (-1)^(i-j)/(i-j)^2 with k = pi/dx.
    """
    i = np.arange(n)
    dij = i[:, None] - i[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = 2.0 * (-1.0) ** dij / (dij.astype(float) ** 2) / dx**2
    np.fill_diagonal(t, (np.pi / dx) ** 2 / 3.0)
    return (eta / 2.0) * t


def fgh_hamiltonian_1d(p, d, grid, which_qubit):
    """Dense symmetric 1D grid Hamiltonian for one qubit (hbar*omega_LC units)."""
    _check_coverage(p, d, grid, which_qubit)
    h = kinetic_matrix(grid.n_points, grid.spacing, d.eta)
    h[np.diag_indices_from(h)] += dev.potential_1d(p, d, grid.points, which_qubit)
    return h


def solve_1d(p, d, grid, which_qubit, n_states=None):
    """Eigenpairs of the 1D grid Hamiltonian, ascending.

    Eigenvector signs are fixed so the largest-magnitude component is
    positive.
    """
    h = fgh_hamiltonian_1d(p, d, grid, which_qubit)
    energies, vecs = np.linalg.eigh(h)
    if n_states is not None:
        energies, vecs = energies[:n_states], vecs[:, :n_states]
    for k in range(vecs.shape[1]):
        j = np.argmax(np.abs(vecs[:, k]))
        if vecs[j, k] < 0.0:
            vecs[:, k] *= -1.0
    return energies, vecs


@dataclass(frozen=True)
class EigenSolution:
    """Lowest eigenstates of the coupled system on the 2D grid.

    ``states[n]`` holds the n-th eigenvector on the (grid1 x grid2) mesh,
    normalized so its squared elements sum to one.
    """

    energies: np.ndarray          # (n_states,), ascending, hbar*omega_LC
    states: np.ndarray            # (n_states, n1, n2)
    basis_descriptor: str
    n_states: int
    grid1: Grid1D
    grid2: Grid1D
    params: dev.DeviceParams
    constants: dev.DerivedConstants

    def state_flat(self, n):
        return self.states[n].ravel()


def _fix_phases(states):
    # largest-|component| entry made positive; for the well-localized
    # computational states this pins the amplitude at the well bottom
    for n in range(states.shape[0]):
        flat = states[n].ravel()
        j = np.argmax(np.abs(flat))
        if flat[j] < 0.0:
            states[n] *= -1.0


def _validate_solution(sol):
    flat = sol.states.reshape(sol.n_states, -1)
    gram = flat @ flat.T
    if np.max(np.abs(gram - np.eye(sol.n_states))) > 1e-10:
        raise SolverError("retained eigenvectors are not orthonormal to 1e-10")
    if np.any(np.diff(sol.energies) < -1e-12):
        raise SolverError("eigenvalues are not ascending")
    edge = np.concatenate([
        np.abs(sol.states[:, 0, :]).max(axis=1),
        np.abs(sol.states[:, -1, :]).max(axis=1),
        np.abs(sol.states[:, :, 0]).max(axis=1),
        np.abs(sol.states[:, :, -1]).max(axis=1),
    ])
    if np.max(edge) ** 2 > 1e-8:
        raise SolverError(
            "an eigenstate reaches the grid boundary; enlarge the box")


def _solve_product_basis(p, d, grid1, grid2, n_states, k_1d):
    e1, v1 = solve_1d(p, d, grid1, 1, n_states=k_1d)
    e2, v2 = solve_1d(p, d, grid2, 2, n_states=k_1d)
    x1 = grid1.points - p.xe1
    x2 = grid2.points - p.xe2
    d1 = v1.T @ (x1[:, None] * v1)
    d2 = v2.T @ (x2[:, None] * v2)
    h = np.kron(np.diag(e1), np.eye(k_1d)) + np.kron(np.eye(k_1d), np.diag(e2))
    h += (p.kappa / (2.0 * d.eta)) * np.kron(d1, d2)
    energies, vecs = np.linalg.eigh(h)
    coeff = vecs[:, :n_states].reshape(k_1d, k_1d, n_states)
    states = np.einsum("ia,abn,jb->nij", v1, coeff, v2, optimize=True)
    return energies[:n_states], np.ascontiguousarray(states)


def _solve_direct_2d(p, d, grid1, grid2, n_states, k_1d, tol=1e-9, maxiter=300):
    n1, n2 = grid1.n_points, grid2.n_points
    t1 = kinetic_matrix(n1, grid1.spacing, d.eta)
    t2 = kinetic_matrix(n2, grid2.spacing, d.eta)
    u = dev.potential_2d(p, d, grid1.points[:, None], grid2.points[None, :])

    def apply_h(block):
        nv = block.shape[1]
        psi = block.reshape(n1, n2, nv)
        out = np.einsum("ik,kjv->ijv", t1, psi, optimize=True)
        out += np.einsum("jk,ikv->ijv", t2, psi, optimize=True)
        out += u[:, :, None] * psi
        return out.reshape(n1 * n2, nv)

    op = spla.LinearOperator((n1 * n2, n1 * n2), matvec=lambda v: apply_h(v.reshape(-1, 1)).ravel(),
                             matmat=apply_h, dtype=float)
    # product states seed the block iteration; convergence is certified by
    # the residual check below, independent of the seed
    n_block = n_states + 6
    _, seed = _solve_product_basis(p, d, grid1, grid2, n_block, k_1d)
    x0 = seed.reshape(n_block, n1 * n2).T.copy()
    with np.errstate(all="ignore"):
        w, v = spla.lobpcg(op, x0, largest=False, tol=tol, maxiter=maxiter)
    order = np.argsort(w)[:n_states]
    w = w[order]
    v = v[:, order]
    res = apply_h(v) - v * w
    res_norm = np.linalg.norm(res, axis=0)
    scale = np.abs(w) + np.linalg.norm(u.ravel(), np.inf)
    if np.any(res_norm > 1e-7 * scale):
        raise SolverError(
            "direct-2d eigensolver did not converge; residual norms: "
            + np.array2string(res_norm, precision=3))
    states = np.ascontiguousarray(v.T.reshape(n_states, n1, n2))
    return w, states


def solve_coupled(p, d, grids=None, n_states=N_STATES_DEFAULT,
                  method="product-basis", k_1d=K_1D_DEFAULT,
                  half_width=0.35, n_points=256):
    """Solve the coupled eigenproblem and return an :class:`EigenSolution`.

    method="product-basis" diagonalizes the coupled Hamiltonian in the
    k_1d^2 product basis of 1D eigenstates; method="direct-2d" runs a
    matrix-free block eigensolver on the full 2D grid operator.  Both
    return grid-represented, phase-fixed, orthonormal states.
    """
    if n_states > 40:
        raise ConfigurationError(f"n_states must be <= 40, got {n_states}")
    if grids is None:
        grid1 = grid_for_qubit(p, d, 1, half_width, n_points)
        grid2 = grid_for_qubit(p, d, 2, half_width, n_points)
    else:
        grid1, grid2 = grids
    if method == "product-basis":
        energies, states = _solve_product_basis(p, d, grid1, grid2, n_states, k_1d)
        descriptor = f"grid {grid1.n_points}x{grid2.n_points} via product basis (K={k_1d})"
    elif method == "direct-2d":
        energies, states = _solve_direct_2d(p, d, grid1, grid2, n_states, k_1d)
        descriptor = f"grid {grid1.n_points}x{grid2.n_points} direct"
    else:
        raise ConfigurationError(f"unknown method {method!r}")
    _fix_phases(states)
    sol = EigenSolution(energies=np.asarray(energies), states=states,
                        basis_descriptor=descriptor, n_states=n_states,
                        grid1=grid1, grid2=grid2, params=p, constants=d)
    _validate_solution(sol)
    return sol


# --------------------------------------------------------------------------
# computational-state labeling

LABELS = ("00", "01", "10", "11")


@dataclass(frozen=True)
class ComputationalBasis:
    """Assignment of computational labels to eigenstate indices."""

    label_to_index: dict
    quadrant_mass: dict       # label -> probability mass in the well quadrant

    @property
    def indices(self):
        """Eigenstate indices ordered as (00, 01, 10, 11)."""
        return [self.label_to_index[lab] for lab in LABELS]

    def index(self, label):
        return self.label_to_index[label]


def quadrant_masses(sol):
    """Probability mass of every retained state in each well quadrant.

    Quadrants split at the 1D barrier-top coordinates, which is robust
    for asymmetric biases.  Returns an (n_states, 2, 2) array indexed by
    (state, x1 side, x2 side).
    """
    p, d = sol.params, sol.constants
    hi1 = sol.grid1.points > dev.barrier_1d(p, d, 1)
    hi2 = sol.grid2.points > dev.barrier_1d(p, d, 2)
    prob = sol.states**2
    m1 = np.stack([prob[:, ~hi1, :].sum(axis=1), prob[:, hi1, :].sum(axis=1)], axis=1)
    return np.stack([m1[:, :, ~hi2].sum(axis=2), m1[:, :, hi2].sum(axis=2)], axis=2)


def label_computational_states(sol, wells, threshold=0.9):
    """Pick the lowest eigenstate localized in each well's quadrant.

    A state qualifies for a well if more than ``threshold`` of its
    probability mass lies in that quadrant.  Raises
    :class:`LabelingError` when a quadrant has no qualifying state, as
    happens for strongly hybridized (e.g. symmetric-bias) spectra.
    """
    masses = quadrant_masses(sol)
    label_to_index = {}
    mass_of = {}
    for well in wells:
        i, j = int(well.label[0]), int(well.label[1])
        found = None
        for n in range(sol.n_states):
            if masses[n, i, j] >= threshold and n not in label_to_index.values():
                found = n
                break
        if found is None:
            raise LabelingError(
                f"no eigenstate has >= {threshold:.0%} probability mass in the "
                f"{well.label} quadrant; states are too strongly hybridized")
        label_to_index[well.label] = found
        mass_of[well.label] = float(masses[found, i, j])
    if len(set(label_to_index.values())) != 4:
        raise LabelingError("computational labels are not distinct")
    return ComputationalBasis(label_to_index=label_to_index, quadrant_mass=mass_of)


# --------------------------------------------------------------------------
# transition energies and dipole matrix elements

@dataclass(frozen=True)
class TransitionTable:
    """Level spacings and flux dipole matrix elements over retained states.

    delta_e[n, m] = E_m - E_n; D1[n, m] = (n|x1 - xe1|m) and D2 likewise
    for qubit 2.  Both dipole matrices are real-symmetric under the fixed
    eigenvector phase convention.
    """

    delta_e: np.ndarray
    D1: np.ndarray
    D2: np.ndarray
    energies: np.ndarray
    basis: ComputationalBasis
    params: dev.DeviceParams
    constants: dev.DerivedConstants

    @property
    def n_states(self):
        return len(self.energies)

    def spacing(self, label_a, label_b):
        """E(label_b) - E(label_a) between computational states."""
        return float(self.delta_e[self.basis.index(label_a), self.basis.index(label_b)])

    def dipole(self, line, label_a, label_b):
        """Dipole element of drive line "C" (x1) or "T" (x2)."""
        mat = self.D1 if line == "C" else self.D2
        return float(mat[self.basis.index(label_a), self.basis.index(label_b)])


def transition_table(sol, basis):
    """Tabulate all pairwise spacings and dipole elements."""
    x1 = sol.grid1.points - sol.params.xe1
    x2 = sol.grid2.points - sol.params.xe2
    flat = sol.states.reshape(sol.n_states, -1)
    w1 = (sol.states * x1[None, :, None]).reshape(sol.n_states, -1)
    w2 = (sol.states * x2[None, None, :]).reshape(sol.n_states, -1)
    d1 = flat @ w1.T
    d2 = flat @ w2.T
    d1 = 0.5 * (d1 + d1.T)
    d2 = 0.5 * (d2 + d2.T)
    delta = sol.energies[None, :] - sol.energies[:, None]
    return TransitionTable(delta_e=delta, D1=d1, D2=d2, energies=sol.energies.copy(),
                           basis=basis, params=sol.params, constants=sol.constants)


# --------------------------------------------------------------------------
# CSV export

def write_spectrum_csv(sol, path, fmt="%.17g"):
    """spectrum.csv with 1-based state index n and energy E_n."""
    with open(path, "w") as f:
        f.write("n,E_n\n")
        for n, e in enumerate(sol.energies, start=1):
            f.write(f"{n},{fmt % e}\n")


def write_transitions_csv(table, path, fmt="%.17g"):
    """transitions.csv with columns n, n_prime, dE, D1, D2 (1-based)."""
    with open(path, "w") as f:
        f.write("n,n_prime,dE,D1,D2\n")
        ns = table.n_states
        for n in range(ns):
            for m in range(ns):
                if n == m:
                    continue
                f.write(f"{n + 1},{m + 1},{fmt % table.delta_e[n, m]},"
                        f"{fmt % table.D1[n, m]},{fmt % table.D2[n, m]}\n")
