"""Brute-force Fock-space reference for the closed forms.

The post-collision two-mirror density matrix is assembled explicitly in a
truncated Fock basis.  Everything else, including the Wigner function,
the characteristic function and the homodyne statistics, is read off that
matrix without using any of the closed-form expressions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .beamstate import BeamState, amplitude, coherence_factor
from .homodyne import HomodyneSetting
from .qmath import displacement_matrix, hermite_functions, thermal_weights

CUTOFF_TOLERANCE = 1e-6


class CutoffError(RuntimeError):
    """The Fock cutoff is too small for the requested displacements."""


@dataclass
class FockDensity:
    """Two-mode density matrix; basis index n1 * n_max + n2."""

    n_max: int
    matrix: np.ndarray
    #: trace before normalisation (the state's norm with unit-norm particle amplitudes)
    raw_trace: float = 1.0

    @property
    def tensor(self) -> np.ndarray:
        n = self.n_max
        return self.matrix.reshape(n, n, n, n)

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def hermitian_error(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def min_eigenvalue(self) -> float:
        # O(n_max^6); use a small cutoff when calling this
        return float(np.linalg.eigvalsh(self.matrix).min())

    def validate(self, psd: bool = False, tol: float = 1e-10) -> None:
        if abs(self.trace() - 1) > tol:
            raise ValueError(f"trace deviates from one: {self.trace()}")
        if self.hermitian_error() > tol:
            raise ValueError("density matrix is not Hermitian")
        if psd and self.min_eigenvalue() < -tol:
            raise ValueError("density matrix has a negative eigenvalue")


def _displaced_thermal(a: complex, b: complex, rho_th: np.ndarray, n_max: int) -> np.ndarray:
    Da = displacement_matrix(a, n_max)
    Db = Da if a == b else displacement_matrix(b, n_max)
    return (Da * rho_th) @ Db.conj().T


def build_post_collision(beam: BeamState, gamma: float, nbar: float, n_max: int = 60) -> FockDensity:
    """Sum over (r1, r2) of w(r1) w(r2) Phi(r1 - r2) times the displaced thermal factors.

    Mode 1 is displaced by i gamma (N - r) and mode 2 by i gamma r; the trace is
    fixed to one by explicit normalisation.  Raises ``CutoffError`` if any
    diagonal factor loses more than ``CUTOFF_TOLERANCE`` of its trace.
    """
    N = beam.n_particles
    th = thermal_weights(nbar, n_max)
    for r in range(N + 1):
        for shift in (gamma * (N - r), gamma * r):
            loss = 1.0 - np.trace(_displaced_thermal(1j * shift, 1j * shift, th, n_max)).real
            if loss > CUTOFF_TOLERANCE:
                raise CutoffError(f"n_max={n_max} loses {loss:.2e} of the trace at shift {shift:.3g}")

    R = np.zeros((n_max,) * 4, dtype=complex)
    for r1 in range(N + 1):
        for r2 in range(N + 1):
            c = amplitude(N, r1) * amplitude(N, r2) * coherence_factor(r1 - r2, beam.mode)
            if not c:
                continue
            A = _displaced_thermal(1j * gamma * (N - r1), 1j * gamma * (N - r2), th, n_max)
            B = _displaced_thermal(1j * gamma * r1, 1j * gamma * r2, th, n_max)
            R += c * A[:, None, :, None] * B[None, :, None, :]
    raw = np.einsum("abab->", R)
    R /= raw
    return FockDensity(n_max, R.reshape(n_max * n_max, n_max * n_max), float(raw.real))


def _two_mode_expectation(rho: FockDensity, M1: np.ndarray, M2: np.ndarray) -> complex:
    # Tr[rho (M1 (x) M2)] = sum R[i1,i2,j1,j2] M1[j1,i1] M2[j2,i2]
    X = np.tensordot(rho.tensor, M1, axes=([0, 2], [1, 0]))
    return complex(np.sum(X * M2.T))


def _parity_displacement(beta: complex, n_max: int) -> np.ndarray:
    sign = (-1.0) ** np.arange(n_max)
    return displacement_matrix(2 * beta, n_max) * sign[None, :]


def wigner_from_density(rho: FockDensity, b1: complex, b2: complex) -> float:
    """W(b1, b2) = (2/pi)^2 Tr[rho D(2 b1) Pi (x) D(2 b2) Pi], Pi the parity."""
    n = rho.n_max
    val = _two_mode_expectation(rho, _parity_displacement(b1, n), _parity_displacement(b2, n))
    return (2 / math.pi) ** 2 * val.real


def wigner_grid_from_density(rho: FockDensity, b1_values, b2_values) -> np.ndarray:
    """W on the outer product of two lists of phase-space points."""
    n = rho.n_max
    M2s = [_parity_displacement(b, n).T for b in b2_values]
    out = np.empty((len(b1_values), len(b2_values)))
    for i, b1 in enumerate(b1_values):
        X = np.tensordot(rho.tensor, _parity_displacement(b1, n), axes=([0, 2], [1, 0]))
        for j, M2t in enumerate(M2s):
            out[i, j] = np.sum(X * M2t).real
    return (2 / math.pi) ** 2 * out


def characteristic_from_density(rho: FockDensity, b1: float, b2: float) -> complex:
    """chi(b1, b2) = Tr[D1(i b1) D2(i b2) rho] for real b1, b2."""
    n = rho.n_max
    return _two_mode_expectation(rho, displacement_matrix(1j * b1, n), displacement_matrix(1j * b2, n))


class BeamSplitter:
    """B = exp[i pi/4 (a1^dag a2 + a1 a2^dag)] in the truncated product basis.

    B conserves n1 + n2, so it is built block by block from the eigensystem of
    the real tridiagonal generator.  Blocks with n1 + n2 >= n_max are cut by
    the basis; they are still exactly unitary on the kept states.
    """

    def __init__(self, n_max: int, angle: float = math.pi / 4):
        self.n_max = n_max
        self.blocks = []
        for total in range(2 * n_max - 1):
            n1 = np.arange(max(0, total - n_max + 1), min(total, n_max - 1) + 1)
            n2 = total - n1
            # a1^dag a2 |n1, n2> = sqrt((n1+1) n2) |n1+1, n2-1>
            off = np.sqrt((n1[:-1] + 1.0) * n2[:-1])
            G = np.diag(off, -1) + np.diag(off, 1)
            w, V = np.linalg.eigh(G)
            U = (V * np.exp(1j * angle * w)) @ V.T
            self.blocks.append((n1 * n_max + n2, U))

    def apply(self, vec: np.ndarray, adjoint: bool = False) -> np.ndarray:
        out = np.empty_like(vec, dtype=complex)
        for idx, U in self.blocks:
            out[idx] = (U.conj().T if adjoint else U) @ vec[idx]
        return out

    def dense(self) -> np.ndarray:
        n2 = self.n_max ** 2
        M = np.zeros((n2, n2), dtype=complex)
        for idx, U in self.blocks:
            M[np.ix_(idx, idx)] = U
        return M


def beamsplitter_unitary(n_max: int) -> BeamSplitter:
    return BeamSplitter(n_max)


def quadrature_ket(value: float, angle: float, n_max: int) -> np.ndarray:
    """Fock components <n|x_angle = value> = e^{i angle n} psi_n(value)."""
    n = np.arange(n_max)
    return np.exp(1j * angle * n) * hermite_functions(n_max, value)


def homodyne_from_density(rho: FockDensity, setting: HomodyneSetting,
                          splitter: BeamSplitter | None = None) -> float:
    """|<x_theta, y_phi| B rho B^dag |x_theta, y_phi>|^2 by direct contraction."""
    n = rho.n_max
    bs = splitter or BeamSplitter(n)
    ket = np.outer(quadrature_ket(setting.x, setting.theta, n),
                   quadrature_ket(setting.y, setting.phi, n)).ravel()
    v = bs.apply(ket, adjoint=True)
    return abs(np.vdot(v, rho.matrix @ v)) ** 2
