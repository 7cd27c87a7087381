"""Dense complex linear algebra used by every oracle computation.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Nothing here knows
about anti-diagonal structure; the fast path lives in :mod:`bellforge.quantum`
and this module is what it gets checked against.
"""

from functools import reduce

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])


class NotHermitianError(ValueError):
    """Raised when a matrix handed to a Hermitian routine is not Hermitian."""

    def __init__(self, asymmetry):
        super().__init__(f"matrix is not Hermitian: max |M - M^dagger| = {asymmetry:.3e}")
        self.asymmetry = asymmetry


def as_matrix(m):
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def kron(a, b):
    """Kronecker product; ``result[i*rb + k, j*cb + l] = a[i, j] * b[k, l]``."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats):
    return reduce(kron, mats)


def dagger(m):
    return np.conj(np.transpose(m))


def hermitian_asymmetry(m):
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return np.inf
    return float(np.max(np.abs(m - dagger(m)), initial=0.0))


def is_hermitian(m, tol=HERMITIAN_TOL):
    return hermitian_asymmetry(m) <= tol


def unitarity_defect(m):
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return np.inf
    return float(np.max(np.abs(m @ dagger(m) - np.eye(m.shape[0]))))


def is_unitary(m, tol=UNITARY_TOL):
    return unitarity_defect(m) <= tol


def commutator(a, b):
    return a @ b - b @ a


def anticommutator(a, b):
    return a @ b + b @ a


def max_abs(m):
    return float(np.max(np.abs(m), initial=0.0))


def hermitian_eigensystem(h, tol=1e-10):
    """Eigenvalues (ascending) and orthonormal eigenvectors (as columns).

    ``tol`` bounds the allowed asymmetry relative to ``max(1, ||h||_max)``;
    small asymmetries are symmetrised away before diagonalising.
    """
    h = as_matrix(h)
    asym = hermitian_asymmetry(h)
    if asym > tol * max(1.0, max_abs(h)):
        raise NotHermitianError(asym)
    h = 0.5 * (h + dagger(h))
    evals, evecs = np.linalg.eigh(h)
    return evals, evecs


def top_eigenpair(h):
    evals, evecs = hermitian_eigensystem(h)
    return float(evals[-1]), evecs[:, -1]


def pauli_observable(bloch, tol=1e-12):
    """``n_x X + n_y Y + n_z Z`` for a unit Bloch vector ``n``."""
    n = np.asarray(bloch, dtype=float)
    if n.shape != (3,):
        raise ValueError("Bloch vector must have three components")
    norm = np.linalg.norm(n)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"Bloch vector must be a unit vector, |n| = {norm!r}")
    return np.tensordot(n, PAULIS, axes=1)


def random_unitary(dim, rng):
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_hermitian(dim, rng):
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return 0.5 * (z + dagger(z))


def normalize(v):
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)
