"""Structure of a pair of binary projective observables.

Given ``A`` and ``A'`` with ``A^2 = A'^2 = I``, ``A'`` splits into a part that
commutes with ``A`` and a part that anticommutes with it. The anticommuting
part has a spectrum symmetric about zero, its kernel carries no correlations,
and on each of its ``+-sin(theta)`` eigenspaces the pair reduces to a qubit-like
triple which a single unitary puts in anti-diagonal form.

Angle convention: ``A'_+ = cos(theta) B_+`` and ``A'_- = sin(theta) B_-``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg

PROJECTIVE_TOL = 1e-10
KERNEL_TOL = 1e-10
GROUP_TOL = 1e-8
PAIRING_TOL = 1e-8
ANTIDIAGONAL_TOL = 1e-9

# maps sigma_z -> sigma_x -> sigma_y -> sigma_z under conjugation
ROTATION_111 = 0.5 * np.array([[-1 + 1j, 1 + 1j], [-1 + 1j, -1 - 1j]])


class StructureError(ValueError):
    """Precondition failure, with the offending residuals attached."""

    def __init__(self, message, residuals):
        detail = ", ".join(f"{k}={v:.3e}" for k, v in residuals.items())
        super().__init__(f"{message} ({detail})")
        self.residuals = residuals


def projective_defect(m):
    m = linalg.as_matrix(m)
    return linalg.max_abs(m @ m - np.eye(m.shape[0]))


def anticommutator_norm(a, b):
    return linalg.max_abs(linalg.anticommutator(a, b))


def commutator_norm(a, b):
    return linalg.max_abs(linalg.commutator(a, b))


@dataclass
class ObservablePair:
    a: np.ndarray
    a_prime: np.ndarray

    def __post_init__(self):
        self.a = linalg.as_matrix(self.a)
        self.a_prime = linalg.as_matrix(self.a_prime)
        if self.a.shape != self.a_prime.shape or self.a.shape[0] != self.a.shape[1]:
            raise ValueError("observables must be square matrices of the same size")
        residuals = {"|A^2-I|": projective_defect(self.a), "|A'^2-I|": projective_defect(self.a_prime)}
        hermitian = {"|A-A^dag|": linalg.hermitian_asymmetry(self.a),
                     "|A'-A'^dag|": linalg.hermitian_asymmetry(self.a_prime)}
        if max(hermitian.values()) > PROJECTIVE_TOL:
            raise StructureError("observables must be Hermitian", hermitian)
        if max(residuals.values()) > PROJECTIVE_TOL:
            raise StructureError("observables must be projective", residuals)

    @property
    def dimension(self):
        return self.a.shape[0]


@dataclass
class SplitResult:
    a: np.ndarray
    a_plus: np.ndarray
    a_minus: np.ndarray
    block_sizes: tuple

    def residuals(self):
        dim = self.a.shape[0]
        return {
            "[A,A'+]": commutator_norm(self.a, self.a_plus),
            "{A,A'-}": anticommutator_norm(self.a, self.a_minus),
            "{A'+,A'-}": anticommutator_norm(self.a_plus, self.a_minus),
            "A'+^2+A'-^2-I": linalg.max_abs(self.a_plus @ self.a_plus + self.a_minus @ self.a_minus
                                             - np.eye(dim)),
        }


def _sorted_eigenbasis(a):
    """Eigenvectors of a projective ``a`` with the ``+1`` eigenvalues first."""
    evals, evecs = linalg.hermitian_eigensystem(a)
    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    return int(np.sum(evals > 0)), evecs


def split_commuting_parts(pair):
    """``A' = A'_+ + A'_-`` with ``[A, A'_+] = 0`` and ``{A, A'_-} = 0``.

    In an eigenbasis of ``A`` with the ``+1`` block first, ``A'_+`` keeps the two
    diagonal blocks of ``A'`` and ``A'_-`` the off-diagonal ones. ``A'_-`` is
    taken as ``A' - A'_+`` so the sum is reproduced exactly.
    """
    if not isinstance(pair, ObservablePair):
        pair = ObservablePair(*pair)
    m, v = _sorted_eigenbasis(pair.a)
    rotated = linalg.dagger(v) @ pair.a_prime @ v
    diag_part = np.zeros_like(rotated)
    diag_part[:m, :m] = rotated[:m, :m]
    diag_part[m:, m:] = rotated[m:, m:]
    a_plus = v @ diag_part @ linalg.dagger(v)
    a_plus = 0.5 * (a_plus + linalg.dagger(a_plus))
    a_minus = pair.a_prime - a_plus
    return SplitResult(pair.a, a_plus, a_minus, (m, pair.dimension - m))


def split_oracle(a, a_prime):
    """``A'_+- = (A' +- A A' A) / 2``, independent of any eigenbasis."""
    conj = a @ a_prime @ a
    return 0.5 * (a_prime + conj), 0.5 * (a_prime - conj)


@dataclass
class PairingReport:
    passed: bool
    paired: int
    nullified: int
    max_residual: float
    spectrum_symmetric: tuple
    failures: list = field(default_factory=list)


def _restricted_spectrum_symmetric(x, y, tol):
    """Spectrum of ``x`` on ``range(y)`` is symmetric about zero."""
    evals, evecs = linalg.hermitian_eigensystem(y)
    support = evecs[:, np.abs(evals) > KERNEL_TOL]
    if support.shape[1] == 0:
        return True
    restricted = linalg.dagger(support) @ x @ support
    spectrum = np.sort(linalg.hermitian_eigensystem(restricted)[0])
    return bool(np.max(np.abs(spectrum + spectrum[::-1])) <= tol)


def spectral_pairing_check(a, b, tol=PAIRING_TOL):
    """Check that ``b`` maps each ``lambda``-eigenvector of ``a`` to ``-lambda`` or to zero.

    Spectral symmetry is checked on the part each operator can see, namely
    the range of the other one (on ``ker b`` the operator ``a`` is unconstrained).
    """
    a, b = linalg.as_matrix(a), linalg.as_matrix(b)
    residual = anticommutator_norm(a, b)
    if residual > tol:
        raise StructureError("operators do not anticommute", {"{a,b}": residual})
    evals, evecs = linalg.hermitian_eigensystem(a)
    scale = max(1.0, linalg.max_abs(a))
    paired = nullified = 0
    worst = 0.0
    failures = []
    for lam, v in zip(evals, evecs.T):
        w = b @ v
        norm = np.linalg.norm(w)
        if norm <= tol:
            nullified += 1
            continue
        res = np.linalg.norm(a @ w + lam * w) / (norm * scale)
        worst = max(worst, res)
        if res > tol:
            failures.append((float(lam), float(res)))
        else:
            paired += 1
    symmetric = (_restricted_spectrum_symmetric(a, b, 1e3 * tol * scale),
                 _restricted_spectrum_symmetric(b, a, 1e3 * tol * scale))
    return PairingReport(not failures and all(symmetric), paired, nullified, worst, symmetric, failures)


@dataclass
class Subspace:
    theta: float
    basis: np.ndarray
    a: np.ndarray
    b_plus: np.ndarray
    b_minus: np.ndarray

    @property
    def dimension(self):
        return self.basis.shape[1]

    def projective_residual(self):
        c, s = np.cos(self.theta), np.sin(self.theta)
        lhs = c * c * self.b_plus @ self.b_plus + s * s * self.b_minus @ self.b_minus
        return linalg.max_abs(lhs - np.eye(self.dimension))


@dataclass
class SubspaceDecomposition:
    subspaces: list
    kernel_dimension: int
    kernel_basis: np.ndarray

    @property
    def angles(self):
        return [s.theta for s in self.subspaces]

    @property
    def subspace_bases(self):
        return [s.basis for s in self.subspaces]


def _restrict(op, basis):
    r = linalg.dagger(basis) @ op @ basis
    return 0.5 * (r + linalg.dagger(r))


def _matrix_sign(h):
    # exact B for h = c B with B^2 = I, without dividing by a possibly tiny c
    evals, evecs = linalg.hermitian_eigensystem(h)
    return (evecs * np.sign(evals)) @ linalg.dagger(evecs)


def truncate_kernel(split, kernel_tol=KERNEL_TOL, group_tol=GROUP_TOL):
    """Drop ``ker(A'_-)`` and cut the rest into the ``+-sin(theta_i)`` eigenspaces of ``A'_-``.

    Eigenvalue groups are ordered by decreasing ``|lambda|``. ``B_+-`` are the
    matrix signs of the restricted ``A'_+-``. If ``cos(theta)`` vanishes on a
    subspace then ``A'_+`` does too and ``B_+`` is taken to be ``A`` restricted
    there, which keeps the required (anti)commutation.
    """
    evals, evecs = linalg.hermitian_eigensystem(split.a_minus)
    mags = np.abs(evals)
    kernel = mags < kernel_tol
    order = np.argsort(-mags, kind="stable")
    order = order[~kernel[order]]
    subspaces = []
    i = 0
    while i < order.size:
        j = i
        while j + 1 < order.size and mags[order[i]] - mags[order[j + 1]] <= group_tol:
            j += 1
        cols = order[i:j + 1]
        s = min(float(np.mean(mags[cols])), 1.0)
        theta = float(np.arcsin(s))
        basis = evecs[:, cols]
        a_r = _restrict(split.a, basis)
        b_minus = _matrix_sign(_restrict(split.a_minus, basis))
        restricted_plus = _restrict(split.a_plus, basis)
        b_plus = _matrix_sign(restricted_plus) if linalg.max_abs(restricted_plus) > 1e-7 else a_r
        subspaces.append(Subspace(theta, basis, a_r, b_plus, b_minus))
        i = j + 1
    return SubspaceDecomposition(subspaces, int(kernel.sum()), evecs[:, kernel])


def rotated_observable(b_plus, b_minus, alpha):
    return np.cos(alpha) * b_plus + np.sin(alpha) * b_minus


def _sign_split(op, basis):
    """Split ``span(basis)`` into the +1 and -1 eigenspaces of ``op`` restricted to it."""
    if basis.shape[1] == 0:
        return basis, basis
    evals, evecs = linalg.hermitian_eigensystem(_restrict(op, basis))
    vecs = basis @ evecs
    return vecs[:, evals > 0], vecs[:, evals <= 0]


def antidiagonalize(a, b_plus, b_minus, tol=1e-8):
    """Unitary ``W`` with ``W X W^dag`` anti-diagonal for ``X`` in ``{a, b_plus, b_minus}``.

    Joint eigenspaces of ``a`` and ``b_plus`` come in sizes ``(d1, d2, d2, d1)``
    for the signs ``(++), (+-), (-+), (--)``; ``b_minus`` swaps ``(++)`` with
    ``(--)`` and ``(+-)`` with ``(-+)``. Pairing each ``(++)``/``(+-)`` vector
    ``u`` with ``b_minus u`` turns the triple into ``(Z, +-Z, X)`` on each pair;
    :data:`ROTATION_111` then sends it to ``(X, +-X, Y)``. Pair ``k`` is placed at
    positions ``k`` and ``D-1-k`` so the whole matrix becomes anti-diagonal.
    """
    a, b_plus, b_minus = (linalg.as_matrix(x) for x in (a, b_plus, b_minus))
    dim = a.shape[0]
    residuals = {
        "tr a": abs(np.trace(a)), "tr b+": abs(np.trace(b_plus)), "tr b-": abs(np.trace(b_minus)),
        "a^2-I": projective_defect(a), "b+^2-I": projective_defect(b_plus),
        "b-^2-I": projective_defect(b_minus),
        "[a,b+]": commutator_norm(a, b_plus), "{a,b-}": anticommutator_norm(a, b_minus),
        "{b+,b-}": anticommutator_norm(b_plus, b_minus),
    }
    if max(residuals.values()) > tol:
        raise StructureError("antidiagonalize preconditions violated", residuals)
    plus, minus = _sign_split(a, np.eye(dim, dtype=complex))
    pp, pm = _sign_split(b_plus, plus)
    leaders = np.hstack([pp, pm])
    columns = np.zeros((dim, dim), dtype=complex)
    rot_h = linalg.dagger(ROTATION_111)
    for k in range(leaders.shape[1]):
        u = leaders[:, k]
        w = b_minus @ u
        w = w / np.linalg.norm(w)
        pair = np.stack([u, w], axis=1) @ rot_h
        columns[:, k] = pair[:, 0]
        columns[:, dim - 1 - k] = pair[:, 1]
    return linalg.dagger(columns)


def off_antidiagonal_norm(m):
    m = linalg.as_matrix(m)
    mask = np.ones(m.shape, dtype=bool)
    mask[np.arange(m.shape[0]), np.arange(m.shape[0])[::-1]] = False
    return float(np.max(np.abs(m[mask]), initial=0.0))


def is_antidiagonal(m, tol=ANTIDIAGONAL_TOL):
    return off_antidiagonal_norm(m) <= tol


# ---------------------------------------------------------------------------
# Seeded random instances
# ---------------------------------------------------------------------------

def random_observable(dim, rng, plus=None):
    """``W diag(+-1) W^dag`` with ``plus`` positive eigenvalues (random if omitted)."""
    if plus is None:
        plus = int(rng.integers(0, dim + 1))
    signs = np.array([1.0] * plus + [-1.0] * (dim - plus))
    w = linalg.random_unitary(dim, rng)
    return (w * signs) @ linalg.dagger(w)


def random_projective_pair(dim, rng):
    return ObservablePair(random_observable(dim, rng), random_observable(dim, rng))


def random_anticommuting_pair(half_dim, rng, kernel=0):
    """``W (Z (x) D) W^dag`` and ``W (X (x) D') W^dag`` with ``kernel`` zeros in ``D'``."""
    d = rng.uniform(-1.0, 1.0, half_dim)
    dp = rng.uniform(-1.0, 1.0, half_dim)
    dp[:kernel] = 0.0
    w = linalg.random_unitary(2 * half_dim, rng)
    a = w @ np.kron(linalg.SIGMA_Z, np.diag(d)) @ linalg.dagger(w)
    b = w @ np.kron(linalg.SIGMA_X, np.diag(dp)) @ linalg.dagger(w)
    return 0.5 * (a + linalg.dagger(a)), 0.5 * (b + linalg.dagger(b))


def random_antidiagonalizable_triple(half_dim, rng):
    """Conjugated ``(Z (x) I, Z (x) S, [[0, U], [U^dag, 0]])`` with ``U`` commuting with ``S``."""
    plus = int(rng.integers(0, half_dim + 1))
    s = np.diag([1.0] * plus + [-1.0] * (half_dim - plus)).astype(complex)
    u = np.zeros((half_dim, half_dim), dtype=complex)
    if plus:
        u[:plus, :plus] = linalg.random_unitary(plus, rng)
    if half_dim - plus:
        u[plus:, plus:] = linalg.random_unitary(half_dim - plus, rng)
    zero = np.zeros_like(u)
    b_minus = np.block([[zero, u], [linalg.dagger(u), zero]])
    w = linalg.random_unitary(2 * half_dim, rng)
    conj = [w @ x @ linalg.dagger(w) for x in (np.kron(linalg.SIGMA_Z, np.eye(half_dim)),
                                                np.kron(linalg.SIGMA_Z, s), b_minus)]
    return tuple(0.5 * (x + linalg.dagger(x)) for x in conj)
