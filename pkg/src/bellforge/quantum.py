"""Quantum values of correlation Bell expressions.

Two independent routes are provided:

* the fast path, which parameterises party ``j`` by ``A = X`` and
  ``A' = cos(theta_j) X + sin(theta_j) Y``. The Bell operator is then
  anti-diagonal, its spectrum is ``{+-|beta_b|}``, and the search runs over
  ``n`` angles only;
* dense oracles (see-saw over qubit observables, and a support-function scan
  for the quadratic Uffink functional) that never use that structure.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from . import kernels, linalg
from .inequalities import BellExpression, svetlichny

DEFAULT_SEED = 1729
MAX_DENSE_PARTIES = 10
GRID_PARTY_LIMIT = 6
TIE_TOL = 1e-12
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def coefficient_array(expr):
    if isinstance(expr, BellExpression):
        return expr.as_array()
    return np.asarray(expr)


def _n_from_coeffs(coeffs):
    n = coeffs.shape[0].bit_length() - 1
    if coeffs.ndim != 1 or 2 ** n != coeffs.shape[0]:
        raise ValueError("coefficient vector length must be a power of two")
    return n


def wrap_angles(thetas):
    """Map angles into ``(-pi, pi]``."""
    t = np.mod(np.asarray(thetas, dtype=float) + np.pi, 2 * np.pi) - np.pi
    return np.where(t <= -np.pi + 1e-15, np.pi, t)


def block_label(b, n):
    return format(b, f"0{n}b")


@dataclass
class GhzDescriptor:
    """``alpha |b> + beta |bbar>`` with ``beta/alpha = e^{i phase} |beta|/|alpha|``."""

    n_parties: int
    branch_b: str
    phase: float
    amplitude_moduli: tuple = (2 ** -0.5, 2 ** -0.5)

    def state_vector(self):
        n = self.n_parties
        b = int(self.branch_b, 2)
        psi = np.zeros(2 ** n, dtype=complex)
        alpha, beta = self.amplitude_moduli
        psi[b] = alpha
        psi[b ^ (2 ** n - 1)] = beta * np.exp(1j * self.phase)
        return psi

    def to_dict(self):
        return {"b": self.branch_b, "phase": float(self.phase)}


@dataclass
class AntidiagonalOperator:
    """Matrix whose only nonzero entries are ``M[b, bbar] = beta[b]``."""

    n_parties: int
    beta: np.ndarray
    hermitian: bool = True

    def dense(self):
        size = 2 ** self.n_parties
        m = np.zeros((size, size), dtype=complex)
        rows = np.arange(size)
        m[rows, rows ^ (size - 1)] = self.beta
        return m

    def blocks(self):
        """``(b, beta[b], beta[bbar])`` for the ``2^(n-1)`` blocks with leading bit 0."""
        size = 2 ** self.n_parties
        return [(b, self.beta[b], self.beta[b ^ (size - 1)]) for b in range(size // 2)]


@dataclass
class QuantumValueResult:
    value: float
    angles: np.ndarray
    maximizers: list = field(default_factory=list)
    method: str = "fast-path"
    diagnostics: dict = field(default_factory=dict)
    state: np.ndarray = field(default=None, repr=False)

    @property
    def maximizer(self):
        return self.maximizers[0] if self.maximizers else None

    def to_dict(self):
        return {
            "value": float(self.value),
            "thetas": [float(t) for t in self.angles],
            "maximizer": None if self.maximizer is None else self.maximizer.to_dict(),
            "method": self.method,
            "diagnostics": _jsonable(self.diagnostics),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


# ---------------------------------------------------------------------------
# Anti-diagonal fast path
# ---------------------------------------------------------------------------

def antidiagonal_elements(expr, angles):
    """Anti-diagonal entries of the Bell operator at the given relative angles.

    ``expr`` may also be a raw (possibly complex) coefficient vector, which is
    how the linearised Uffink operator is handled.
    """
    coeffs = coefficient_array(expr)
    n = _n_from_coeffs(coeffs)
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (n,):
        raise ValueError(f"expected {n} angles, got {angles.shape}")
    beta = kernels.antidiagonal_batch(coeffs.astype(complex), angles[None, :])[0]
    hermitian = not np.iscomplexobj(coeffs) or not np.any(np.imag(coeffs))
    return AntidiagonalOperator(n, beta, hermitian)


def _block_phase(x, y):
    # maximises |x e^{i phi} + y e^{-i phi}|
    return float(np.angle(y) - np.angle(x)) / 2.0 if (x or y) else 0.0


def block_maxima(op, tol=TIE_TOL):
    """All blocks whose value ``(|beta_b| + |beta_bbar|)/2`` is within ``tol`` of the max."""
    values = [(b, 0.5 * (abs(x) + abs(y)), x, y) for b, x, y in op.blocks()]
    top = max(v for _, v, _, _ in values)
    return top, [(b, x, y) for b, v, x, y in values if v >= top - tol]


def ghz_value(op):
    """Largest eigenvalue of a Hermitian anti-diagonal operator and its GHZ maximiser.

    Returns ``(value, b, phase)`` with ``value = max_b |beta[b]|`` and the
    maximiser ``(|b> + e^{i phase}|bbar>)/sqrt(2)``, ``phase = -arg beta[b]``.
    """
    if not op.hermitian:
        raise ValueError("ghz_value needs a Hermitian operator; use uffink_value for the linearised operator")
    top, ties = block_maxima(op)
    b, x, _ = ties[0]
    phase = -float(np.angle(x)) if x else 0.0
    return float(top), block_label(b, op.n_parties), phase


def ghz_maximizers(op, tol=TIE_TOL):
    top, ties = block_maxima(op, tol)
    return [GhzDescriptor(op.n_parties, block_label(b, op.n_parties), _block_phase(x, y))
            for b, x, y in ties]


def _weights(thetas, b, n):
    """Per-party entry of ``A'`` on row bit ``b_j``: ``e^{-i theta}`` for 0, ``e^{+i theta}`` for 1."""
    bits = np.array([(b >> (n - 1 - j)) & 1 for j in range(n)])
    sigma = np.where(bits == 1, 1.0, -1.0)
    return np.exp(1j * sigma * thetas), sigma


def _kron_vectors(vectors):
    out = np.ones(1, dtype=complex)
    for v in vectors:
        out = np.kron(out, v)
    return out


def _coordinate_parts(tensor, weights, j, n):
    """``(P, Q)`` with ``beta_b = P + Q * w_j``; ``Q`` excludes party ``j``'s weight."""
    left = _kron_vectors([np.array([1.0, w]) for w in weights[:j]])
    right = _kron_vectors([np.array([1.0, w]) for w in weights[j + 1:]])
    v = tensor.reshape(2 ** j, 2, 2 ** (n - 1 - j))
    p, q = np.einsum("a,abc,c->b", left, v, right)
    return p, q


def beta_gradient(expr, angles, b):
    """Analytic ``d|beta_b|^2 / d theta_j`` for every party ``j``."""
    coeffs = coefficient_array(expr).astype(complex)
    n = _n_from_coeffs(coeffs)
    angles = np.asarray(angles, dtype=float)
    weights, sigma = _weights(angles, b, n)
    grad = np.empty(n)
    for j in range(n):
        p, q = _coordinate_parts(coeffs, weights, j, n)
        beta = p + q * weights[j]
        grad[j] = 2.0 * np.real(np.conj(beta) * 1j * sigma[j] * q * weights[j])
    return grad


def _golden_max(f, lo, hi, xtol=1e-12, max_iter=200):
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if hi - lo < xtol:
            break
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = f(d)
    return (c, fc) if fc >= fd else (d, fd)


def _block_value(coeffs, thetas, b, n):
    mask = 2 ** n - 1
    w, _ = _weights(thetas, b, n)
    wb, _ = _weights(thetas, b ^ mask, n)
    x = np.dot(coeffs, _kron_vectors([np.array([1.0, v]) for v in w]))
    y = np.dot(coeffs, _kron_vectors([np.array([1.0, v]) for v in wb]))
    return 0.5 * (abs(x) + abs(y))


def _coordinate_ascent(coeffs, n, thetas, b, tol, max_sweeps=500, samples=24):
    """Maximise block ``b``'s value one angle at a time (bracket scan + golden section)."""
    mask = 2 ** n - 1
    thetas = thetas.copy()
    value = _block_value(coeffs, thetas, b, n)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        start = value
        for j in range(n):
            w, sig = _weights(thetas, b, n)
            wb, sigb = _weights(thetas, b ^ mask, n)
            p, q = _coordinate_parts(coeffs, w, j, n)
            pb, qb = _coordinate_parts(coeffs, wb, j, n)
            s, sb = sig[j], sigb[j]

            def g(t):
                return 0.5 * (abs(p + q * np.exp(1j * s * t)) + abs(pb + qb * np.exp(1j * sb * t)))

            grid = thetas[j] + np.linspace(-np.pi, np.pi, samples, endpoint=False)
            vals = [g(t) for t in grid]
            i = int(np.argmax(vals))
            h = 2 * np.pi / samples
            t_best, v_best = _golden_max(g, grid[i] - h, grid[i] + h)
            if v_best > value:
                thetas[j] = t_best
                value = v_best
        if value - start < tol:
            break
    return thetas, value, sweeps


def _best_block(coeffs, thetas, n):
    op = AntidiagonalOperator(n, kernels.antidiagonal_batch(coeffs, thetas[None, :])[0], False)
    top, ties = block_maxima(op)
    return ties[0][0], top


def _refine(coeffs, n, theta0, tol):
    thetas = np.asarray(theta0, dtype=float).copy()
    b, value = _best_block(coeffs, thetas, n)
    total_sweeps = 0
    for _ in range(20):
        thetas, value, sweeps = _coordinate_ascent(coeffs, n, thetas, b, tol)
        total_sweeps += sweeps
        b_new, full = _best_block(coeffs, thetas, n)
        if full <= value + tol or b_new == b:
            value = max(value, full)
            break
        b, value = b_new, full
    return wrap_angles(thetas), value, total_sweeps


def _coarse_points(n, grid_density, seed):
    if n <= GRID_PARTY_LIMIT:
        axis = -np.pi + 2 * np.pi * np.arange(grid_density) / grid_density
        mesh = np.meshgrid(*([axis] * n), indexing="ij")
        return np.stack([m.reshape(-1) for m in mesh], axis=1), "grid"
    rng = np.random.default_rng(seed)
    return rng.uniform(-np.pi, np.pi, size=(64 * n, n)), "random-starts"


def _lex_key(thetas):
    return tuple(np.round(thetas, 12))


def _optimize_blocks(coeffs, grid_density, refinements, seed, tol):
    n = _n_from_coeffs(coeffs)
    coeffs = np.ascontiguousarray(coeffs, dtype=complex)
    points, coarse = _coarse_points(n, grid_density, seed)
    values = kernels.pair_objective_batch(coeffs, points)
    order = np.argsort(-values, kind="stable")
    candidates = order[:max(1, refinements)]
    best = None
    sweeps = []
    for idx in candidates:
        thetas, value, s = _refine(coeffs, n, points[idx], tol)
        sweeps.append(s)
        if best is None or value > best[1] + TIE_TOL or (
                abs(value - best[1]) <= TIE_TOL and _lex_key(thetas) < _lex_key(best[0])):
            best = (thetas, value)
    diagnostics = {
        "coarse_stage": coarse,
        "coarse_points": int(points.shape[0]),
        "coarse_best": float(values[order[0]]),
        "refined_candidates": int(len(candidates)),
        "refinement_sweeps": sweeps,
    }
    return best[0], best[1], diagnostics


def optimize_angles(expr, grid_density=8, refinements=8, seed=DEFAULT_SEED, tol=1e-10):
    """Maximise the largest anti-diagonal modulus over the relative angles.

    Coarse stage: a ``grid_density^n`` grid over ``[-pi, pi)^n`` for ``n <= 6``,
    otherwise ``64 n`` seeded uniform starts. The best ``refinements`` points
    are polished by coordinate ascent with golden-section line searches until a
    sweep gains less than ``tol``.
    """
    coeffs = coefficient_array(expr)
    _n_from_coeffs(coeffs)
    if np.iscomplexobj(coeffs) and np.any(np.imag(coeffs)):
        raise ValueError("optimize_angles takes real Bell expressions; use optimize_uffink")
    thetas, value, diag = _optimize_blocks(coeffs, grid_density, refinements, seed, tol)
    op = antidiagonal_elements(coeffs, thetas)
    return QuantumValueResult(float(value), thetas, ghz_maximizers(op), "fast-path", diag)


# ---------------------------------------------------------------------------
# Dense oracle
# ---------------------------------------------------------------------------

def angle_observables(angles):
    """Bloch vectors ``A = X``, ``A' = cos(t) X + sin(t) Y`` per party, shape ``(n, 2, 3)``."""
    angles = np.asarray(angles, dtype=float)
    obs = np.zeros((angles.shape[0], 2, 3))
    obs[:, 0, 0] = 1.0
    obs[:, 1, 0] = np.cos(angles)
    obs[:, 1, 1] = np.sin(angles)
    return obs


def _operator_stack(observables):
    return [np.stack([linalg.pauli_observable(v, tol=1e-9) for v in party]) for party in observables]


def _dense_from_stack(coeffs, stack):
    n = len(stack)
    if n == 1:
        return coeffs[0] * stack[0][0] + coeffs[1] * stack[0][1]
    half = coeffs.shape[0] // 2
    out = 0
    for setting, part in ((0, coeffs[:half]), (1, coeffs[half:])):
        if np.any(part):
            out = out + linalg.kron(stack[0][setting], _dense_from_stack(part, stack[1:]))
    if isinstance(out, int):
        size = 2 ** n
        return np.zeros((size, size), dtype=complex)
    return out


def dense_operator(expr, observables):
    """``sum_k c_k (x)_j O_j(k_j)`` as a dense ``2^n x 2^n`` matrix."""
    coeffs = coefficient_array(expr)
    n = _n_from_coeffs(coeffs)
    if n > MAX_DENSE_PARTIES:
        raise ValueError(f"dense operators are limited to n <= {MAX_DENSE_PARTIES}")
    observables = np.asarray(observables, dtype=float)
    if observables.shape != (n, 2, 3):
        raise ValueError(f"expected observables of shape ({n}, 2, 3), got {observables.shape}")
    return _dense_from_stack(coeffs, _operator_stack(observables))


def _random_bloch(rng, shape):
    v = rng.standard_normal(shape + (3,))
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


class _PartyContraction:
    """Computes, for one party, ``<psi| (x)_{i != j} O_i(k_i) (x) sigma_mu |psi>`` per setting."""

    def __init__(self, coeffs, n):
        self.n = n
        self.tensor = np.asarray(coeffs, dtype=complex).reshape((2,) * n)
        self._paths = {}

    def _subscripts(self, j):
        n = self.n
        k = list(range(n))
        b = list(range(n, 2 * n))
        a = list(range(2 * n, 3 * n))
        operands = [(k, "C"), (b, "psi")]
        for i in range(n):
            if i != j:
                operands.append(([k[i], a[i], b[i]], i))
        out = [k[j]] + [a[i] if i != j else b[i] for i in range(n)]
        return operands, out

    def gradients(self, stack, psi, j):
        operands, out = self._subscripts(j)
        psi_t = psi.reshape((2,) * self.n)
        args = []
        for sub, tag in operands:
            if tag == "C":
                args += [self.tensor, sub]
            elif tag == "psi":
                args += [psi_t, sub]
            else:
                args += [stack[tag], sub]
        args.append(out)
        if j not in self._paths:
            self._paths[j] = np.einsum_path(*args, optimize="greedy")[0]
        reduced = np.einsum(*args, optimize=self._paths[j])
        psi_j = np.moveaxis(psi_t, j, 0)
        grads = np.empty((2, 3))
        for x in range(2):
            r = np.moveaxis(reduced[x], j, 0)
            for mu in range(3):
                sp = np.tensordot(linalg.PAULIS[mu], psi_j, axes=(1, 0))
                grads[x, mu] = np.real(np.vdot(sp, r))
        return grads


def _seesaw_run(coeffs, n, obs, contraction, max_sweeps, tol):
    stack = _operator_stack(obs)
    value, psi = linalg.top_eigenpair(_dense_from_stack(coeffs, stack))
    history = [value]
    converged = False
    for _ in range(max_sweeps):
        for j in range(n):
            g = contraction.gradients(stack, psi, j)
            for x in range(2):
                norm = np.linalg.norm(g[x])
                if norm > 1e-15:
                    obs[j, x] = g[x] / norm
            stack[j] = np.stack([linalg.pauli_observable(v, tol=1e-9) for v in obs[j]])
        new_value, psi = linalg.top_eigenpair(_dense_from_stack(coeffs, stack))
        history.append(new_value)
        gained = new_value - value
        value = max(value, new_value)
        if gained < tol:
            converged = True
            break
    return value, obs, psi, history, converged


def relative_angles(observables):
    dots = np.clip(np.sum(observables[:, 0] * observables[:, 1], axis=-1), -1.0, 1.0)
    return np.arccos(dots)


def seesaw_oracle(expr, restarts=20, seed=DEFAULT_SEED, max_sweeps=200, tol=1e-12, initial=None):
    """Alternating state/observable maximisation over qubit observables.

    Each restart draws random unit Bloch vectors for every party. One sweep
    sets the state to the top eigenvector, then updates each party's two Bloch
    vectors to the normalised contraction with everything else held fixed.
    ``initial`` (shape ``(n, 2, 3)``) adds a warm start ahead of the restarts.
    """
    coeffs = np.asarray(coefficient_array(expr), dtype=float)
    n = _n_from_coeffs(coeffs)
    if n > 8:
        raise ValueError("the see-saw oracle is limited to n <= 8")
    rng = np.random.default_rng(seed)
    starts = [] if initial is None else [np.array(initial, dtype=float)]
    starts += [_random_bloch(rng, (n, 2)) for _ in range(restarts)]
    contraction = _PartyContraction(coeffs, n)
    best = None
    runs = []
    for obs in starts:
        value, obs, psi, history, converged = _seesaw_run(coeffs, n, obs.copy(), contraction, max_sweeps, tol)
        steps = np.diff(history)
        runs.append({"value": value, "sweeps": len(history) - 1, "converged": converged,
                     "min_step": float(steps.min()) if steps.size else 0.0})
        if best is None or value > best[0] + TIE_TOL:
            best = (value, obs, psi)
    value, obs, psi = best
    diag = {
        "restarts": len(starts),
        "restart_values": [r["value"] for r in runs],
        "sweeps": [r["sweeps"] for r in runs],
        "converged": all(r["converged"] for r in runs),
        "monotone": all(r["min_step"] >= -1e-12 for r in runs),
        "observables": obs,
    }
    return QuantumValueResult(float(value), relative_angles(obs), [], "see-saw", diag, psi)


# ---------------------------------------------------------------------------
# Uffink quadratic functional
# ---------------------------------------------------------------------------

def uffink_value(q, angles):
    """``<E>^2 + <E'>^2`` maximised over states at fixed angles.

    Uses ``|<E + iE'>|``: on block ``b`` the numerical radius of the 2x2
    anti-diagonal block is ``(|beta_b| + |beta_bbar|)/2``, attained by an
    equal-weight GHZ-type state.
    """
    op = antidiagonal_elements(q.complex_coefficients(), angles)
    top, _ = block_maxima(op)
    return QuantumValueResult(float(top) ** 2, np.asarray(angles, dtype=float), ghz_maximizers(op),
                              "fast-path", {"linearized_modulus": float(top)})


def optimize_uffink(q, grid_density=8, refinements=8, seed=DEFAULT_SEED, tol=1e-12):
    thetas, value, diag = _optimize_blocks(q.complex_coefficients(), grid_density, refinements, seed, tol)
    result = uffink_value(q, thetas)
    result.diagnostics.update(diag)
    return result


def linearized_expectation(q, psi, angles):
    """``<psi| E + iE' |psi>`` with dense matrices at the given angles."""
    obs = angle_observables(angles)
    u = dense_operator(q.first, obs) + 1j * dense_operator(q.second, obs)
    return complex(np.vdot(psi, u @ psi))


def uffink_oracle(q, phi_steps=360, restarts=4, seed=DEFAULT_SEED, refine_tol=1e-9):
    """``max_phi [max <cos(phi) E + sin(phi) E'>]^2`` by a phi-scan over see-saw values.

    The achievable ``(<E>, <E'>)`` set is convex and compact, so its largest
    squared radius is the largest squared support value. The scan warm-starts
    each phi from the previous optimum plus one fresh restart; the best phi is
    then polished by golden section with ``restarts`` fresh restarts per step.
    """
    n = q.n
    warm = None
    rng = np.random.default_rng(seed)
    best_phi, best_h, best_obs = 0.0, -np.inf, None
    scan = []
    for i in range(phi_steps):
        phi = 2 * np.pi * i / phi_steps
        r = seesaw_oracle(q.rotated(phi), restarts=1, seed=int(rng.integers(2 ** 31)), initial=warm)
        warm = r.diagnostics["observables"]
        scan.append(r.value)
        if r.value > best_h + TIE_TOL:
            best_phi, best_h, best_obs = phi, r.value, warm

    cache = {}

    def h(phi):
        if phi not in cache:
            cache[phi] = seesaw_oracle(q.rotated(phi), restarts=restarts, seed=seed, initial=best_obs).value
        return cache[phi]

    step = 2 * np.pi / phi_steps
    phi_star, h_star = _golden_max(h, best_phi - step, best_phi + step, xtol=refine_tol)
    if h_star < best_h:
        phi_star, h_star = best_phi, best_h
    h_star = max(h_star, 0.0)
    diag = {"phi": float(phi_star), "support_value": float(h_star), "phi_steps": phi_steps,
            "scan_min": float(min(scan)), "scan_max": float(max(scan))}
    return QuantumValueResult(h_star ** 2, np.zeros(n), [], "phi-scan", diag)


# ---------------------------------------------------------------------------
# Svetlichny scale check
# ---------------------------------------------------------------------------

def svetlichny_ratio_report(n, restarts=20, seed=DEFAULT_SEED, tol=1e-4):
    """Measured quantum value of each Svetlichny sign over the biseparable constant ``2^(n-1)``.

    The expected ratio is ``sqrt(2)``; the report states the measured ratio and
    whether it matches instead of asserting the constant.
    """
    bisep = 2.0 ** (n - 1)
    out = {}
    for sign in ("+", "-"):
        expr = svetlichny(n, sign)
        fast = optimize_angles(expr).value
        oracle = seesaw_oracle(expr, restarts=restarts, seed=seed).value
        ratio = oracle / bisep
        out[sign] = {
            "fast_path": fast,
            "oracle": oracle,
            "biseparable": bisep,
            "ratio": ratio,
            "expected_ratio": float(np.sqrt(2)),
            "matches": bool(abs(ratio - np.sqrt(2)) <= tol),
            "paths_agree": bool(abs(fast - oracle) <= 1e-6),
        }
    return out


def mabk_quantum_maximum(n):
    return 2.0 ** ((n - 1) / 2)


__all__ = [
    "AntidiagonalOperator", "GhzDescriptor", "QuantumValueResult", "antidiagonal_elements",
    "angle_observables", "beta_gradient", "dense_operator", "ghz_maximizers", "ghz_value",
    "mabk_quantum_maximum", "optimize_angles", "optimize_uffink", "seesaw_oracle",
    "svetlichny_ratio_report", "uffink_oracle", "uffink_value",
]
