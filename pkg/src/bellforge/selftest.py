"""Self-testing checks on optimal angle configurations.

The verdict taxonomy is this package's own:

* ``full-selftest``: a single optimal configuration (up to sign flips), GHZ
  maximiser, maximally anticommuting observables;
* ``partial``: the optimum is a continuum tied together by a detected
  constraint such as ``theta2 +- theta3 = +-pi/2``;
* ``state-only``: the GHZ-form maximiser is certified but the observables are
  not pinned to maximally anticommuting pairs;
* ``none``: no quantum violation, or no GHZ-form maximiser.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .bounds import local_bound
from .quantum import (DEFAULT_SEED, GhzDescriptor, antidiagonal_elements, angle_observables,
                      block_label, dense_operator, optimize_angles, wrap_angles, _refine)

BALANCE_TOL = 1e-10
RESIDUAL_TOL = 1e-6
FIDELITY_TOL = 1e-9
CLUSTER_DISTANCE = 1e-3
PIN_SPREAD = 1e-4
CONSTRAINT_TOL = 1e-6
DEGENERACY_TOL = 1e-9


@dataclass
class SelftestReport:
    ghz_fidelity: float
    anticommutation_residuals: list
    optimal_angle_sets: list
    verdict: str
    constraints_detected: list = field(default_factory=list)
    pinned: dict = field(default_factory=dict)
    free: list = field(default_factory=list)
    maximizers: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "fidelity": float(self.ghz_fidelity),
            "residuals": [float(r) for r in self.anticommutation_residuals],
            "optimal_angle_sets": [[float(t) for t in s] for s in self.optimal_angle_sets],
            "verdict": self.verdict,
            "constraints_detected": list(self.constraints_detected),
            "pinned": {f"theta{j + 1}": float(v) for j, v in sorted(self.pinned.items())},
            "free": [f"theta{j + 1}" for j in self.free],
            "maximizers": [m.to_dict() for m in self.maximizers],
            "diagnostics": self.diagnostics,
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)


def extract_maximizer(expr, angles, tol=1e-12):
    """GHZ-form maximisers ``alpha|b> + beta|bbar>``, one per tied block.

    Amplitudes come from the top eigenvector of each 2x2 block
    ``[[0, beta_b], [beta_bbar, 0]]``. Those blocks always give equal moduli, so
    an imbalance beyond ``1e-10`` means something upstream is broken.
    """
    op = antidiagonal_elements(expr, angles)
    if not np.any(np.abs(op.beta) > tol):
        raise ValueError("the Bell operator vanishes at these angles; there is no maximiser")
    moduli = [max(abs(x), abs(y)) for _, x, y in op.blocks()]
    top = max(moduli)
    out = []
    for (b, x, y), m in zip(op.blocks(), moduli):
        if m < top - tol:
            continue
        evals, evecs = linalg.hermitian_eigensystem(np.array([[0, x], [y, 0]]))
        v = evecs[:, -1]
        alpha, beta = abs(v[0]), abs(v[1])
        if abs(alpha - beta) > BALANCE_TOL:
            raise RuntimeError(f"unbalanced GHZ amplitudes {alpha:.3e}, {beta:.3e} in block {b}")
        phase = float(np.angle(v[1]) - np.angle(v[0]))
        phase = float(wrap_angles([phase])[0])
        out.append(GhzDescriptor(op.n_parties, block_label(b, op.n_parties), phase, (alpha, beta)))
    return out


def anticommutation_residual(angles):
    """``||{A, A'}|| / 2 = |cos(theta_j)|`` for ``A = X``, ``A' = cos X + sin Y``."""
    out = []
    for a, ap in angle_observables(angles):
        anti = linalg.anticommutator(linalg.pauli_observable(a), linalg.pauli_observable(ap, tol=1e-9))
        out.append(0.5 * linalg.max_abs(anti))
    return out


def ghz_fidelity(expr, angles, descriptor):
    """Overlap of the GHZ descriptor with the dense operator's top eigenspace.

    With a non-degenerate top eigenvalue this is ``|<GHZ|top eigenvector>|``;
    with degeneracy it is the norm of the projection onto the whole eigenspace.
    """
    h = dense_operator(expr, angle_observables(angles))
    evals, evecs = linalg.hermitian_eigensystem(h)
    top = evecs[:, evals >= evals[-1] - DEGENERACY_TOL]
    return float(np.linalg.norm(linalg.dagger(top) @ descriptor.state_vector()))


def reduce_angles(thetas):
    """Representative modulo ``theta_j -> -theta_j`` sign flips."""
    return np.abs(wrap_angles(thetas))


def _cluster(configs, distance):
    reps = []
    for c in configs:
        if not any(np.max(np.abs(c - r)) <= distance for r in reps):
            reps.append(c)
    return reps


def _detect_constraints(raw, free):
    """Pairs ``(i, j)`` with ``cos(theta_i +- theta_j) = 0`` on every sample."""
    found = []
    for pos, i in enumerate(free):
        for j in free[pos + 1:]:
            # cos(x+y) cos(x-y) = (cos 2x + cos 2y) / 2
            residual = np.abs(np.cos(2 * raw[:, i]) + np.cos(2 * raw[:, j]))
            if np.all(residual <= CONSTRAINT_TOL):
                found.append((i, j))
    return found


def uniqueness_scan(expr, value_tol=1e-8, samples=64, seed=DEFAULT_SEED, optimum=None):
    """Collect near-optimal angle configurations and classify their structure.

    ``samples`` seeded random starts are refined by the same coordinate ascent
    used in :func:`bellforge.quantum.optimize_angles`; those within
    ``value_tol`` of the optimum are reduced modulo per-party sign flips and
    clustered at distance ``1e-3``. More than ``samples / 4`` clusters counts as
    a continuum. A coordinate whose reduced value spreads by at most ``1e-4`` is
    pinned; non-pinned pairs are tested for ``theta_i +- theta_j = +-pi/2``.
    """
    n = expr.n
    coeffs = expr.as_array().astype(complex)
    optimum = optimum if optimum is not None else optimize_angles(expr)
    rng = np.random.default_rng(seed)
    raw = []
    for start in rng.uniform(-np.pi, np.pi, size=(samples, n)):
        thetas, value, _ = _refine(coeffs, n, start, 1e-13)
        if value >= optimum.value - value_tol:
            raw.append(thetas)
    raw.append(np.asarray(optimum.angles))
    raw = np.array(raw)
    reduced = reduce_angles(raw)
    order = np.lexsort(reduced.T[::-1])
    reduced_sorted = reduced[order]
    reps = _cluster(reduced_sorted, CLUSTER_DISTANCE)
    continuum = len(reps) > samples / 4

    spread = reduced.max(axis=0) - reduced.min(axis=0)
    pinned = {j: float(np.median(reduced[:, j])) for j in range(n) if spread[j] <= PIN_SPREAD}
    unpinned = [j for j in range(n) if j not in pinned]
    pairs = _detect_constraints(raw, unpinned) if continuum else []
    coupled = sorted({j for p in pairs for j in p})
    free = [j for j in unpinned if j not in coupled]
    constraints = [f"theta{i + 1}±theta{j + 1}=±pi/2" for i, j in pairs]

    residuals = anticommutation_residual(optimum.angles)
    maximizers = extract_maximizer(expr, optimum.angles)
    fidelity = min(ghz_fidelity(expr, optimum.angles, m) for m in maximizers)
    local = float(local_bound(expr, max_strategies=1).local_bound) if n <= 8 else None

    if (local is not None and optimum.value <= local + 1e-9) or fidelity < 1 - FIDELITY_TOL:
        verdict = "none"
    elif len(reps) == 1 and max(residuals) <= RESIDUAL_TOL:
        verdict = "full-selftest"
    elif continuum and pairs:
        verdict = "partial"
    else:
        verdict = "state-only"

    diagnostics = {
        "samples": samples,
        "accepted": int(raw.shape[0]),
        "distinct_reduced": len(reps),
        "continuum_threshold": samples / 4,
        "cluster_distance": CLUSTER_DISTANCE,
        "pin_spread": PIN_SPREAD,
        "value_tol": value_tol,
        "optimum": float(optimum.value),
        "local_bound": local,
    }
    return SelftestReport(fidelity, residuals, reps, verdict, constraints, pinned, free,
                          maximizers, diagnostics)
