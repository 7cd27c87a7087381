"""Hot loops, each with a numba kernel and a pure-numpy twin.

The dispatchers at the bottom pick the numba version when
:data:`bellforge._accel.USE_NUMBA` is set (the default when numba imports) and
the numpy version otherwise. Both versions are importable directly so tests
and ``benchmarks/bench_kernels.py`` can compare them.

Index conventions: a length-``2^n`` vector is indexed by a bitstring read as
binary with party 1 as the most significant bit.
"""

import numpy as np

from ._accel import USE_NUMBA, njit, prange

_NUMPY_CHUNK = 4096


# ---------------------------------------------------------------------------
# Anti-diagonal elements: beta[b] = sum_k c_k prod_j T_j[k_j, b_j] with
# T_j = [[1, 1], [exp(-i theta_j), exp(+i theta_j)]]. One butterfly per party.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _butterfly_inplace(x, thetas):
    n = thetas.shape[0]
    size = x.shape[0]
    for j in range(n):
        bit = 1 << (n - 1 - j)
        e = np.exp(-1j * thetas[j])
        ec = np.conj(e)
        for i in range(size):
            if i & bit == 0:
                x0 = x[i]
                x1 = x[i | bit]
                x[i] = x0 + x1 * e
                x[i | bit] = x0 + x1 * ec


@njit(cache=True, parallel=True)
def antidiagonal_batch_numba(coeffs, thetas):
    points = thetas.shape[0]
    out = np.empty((points, coeffs.shape[0]), dtype=np.complex128)
    for p in prange(points):
        x = coeffs.copy()
        _butterfly_inplace(x, thetas[p])
        out[p, :] = x
    return out


@njit(cache=True, parallel=True)
def pair_objective_batch_numba(coeffs, thetas):
    points = thetas.shape[0]
    size = coeffs.shape[0]
    mask = size - 1
    out = np.empty(points, dtype=np.float64)
    for p in prange(points):
        x = coeffs.copy()
        _butterfly_inplace(x, thetas[p])
        best = 0.0
        for b in range(size // 2):
            v = 0.5 * (abs(x[b]) + abs(x[b ^ mask]))
            if v > best:
                best = v
        out[p] = best
    return out


def antidiagonal_batch_numpy(coeffs, thetas):
    coeffs = np.asarray(coeffs, dtype=complex)
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    points, n = thetas.shape
    x = np.broadcast_to(coeffs, (points, coeffs.shape[0])).copy()
    for j in range(n):
        x = x.reshape(points, 2 ** j, 2, 2 ** (n - 1 - j))
        e = np.exp(-1j * thetas[:, j])[:, None, None]
        x0 = x[:, :, 0, :]
        x1 = x[:, :, 1, :]
        x = np.stack([x0 + x1 * e, x0 + x1 * np.conj(e)], axis=2)
    return x.reshape(points, -1)


def pair_objective_batch_numpy(coeffs, thetas):
    thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
    out = np.empty(thetas.shape[0])
    for start in range(0, thetas.shape[0], _NUMPY_CHUNK):
        beta = np.abs(antidiagonal_batch_numpy(coeffs, thetas[start:start + _NUMPY_CHUNK]))
        half = beta.shape[1] // 2
        out[start:start + _NUMPY_CHUNK] = np.max(0.5 * (beta[:, :half] + beta[:, ::-1][:, :half]), axis=1)
    return out


# ---------------------------------------------------------------------------
# Deterministic strategies. Strategy index bits, most significant first, are
# (a_1, a'_1, ..., a_n, a'_n) with bit 0 meaning +1. Contracting party by party
# keeps the whole scan at O(4^n) work.
# ---------------------------------------------------------------------------

@njit(cache=True)
def _strategy_scan_numba(numerators, n, target, collect, limit):
    size = 1 << n
    buf = np.zeros((n + 1, size), dtype=np.int64)
    buf[0, :] = numerators
    total = 1 << (2 * n)
    best = np.iinfo(np.int64).min
    hits = np.empty(max(limit, 1), dtype=np.int64)
    count = 0
    for s in range(total):
        start = 0
        if s > 0:
            diff = s ^ (s - 1)
            h = 0
            while diff > 1:
                diff >>= 1
                h += 1
            start = n - 1 - h // 2
        for level in range(start, n):
            shift = 2 * (n - 1 - level)
            a = 1 - 2 * ((s >> (shift + 1)) & 1)
            ap = 1 - 2 * ((s >> shift) & 1)
            half = size >> (level + 1)
            for m in range(half):
                buf[level + 1, m] = a * buf[level, m] + ap * buf[level, m + half]
        v = buf[n, 0]
        if collect:
            if v == target:
                if count < limit:
                    hits[count] = s
                count += 1
        elif v > best:
            best = v
    return best, hits[:min(count, limit)], count


def _contract_party_numpy(vals):
    half = vals.shape[1] // 2
    lo, hi = vals[:, :half], vals[:, half:]
    return np.stack([lo + hi, lo - hi, hi - lo, -lo - hi], axis=1).reshape(-1, half)


def strategy_values_numpy(numerators, n, prefix=None):
    """Values of all ``4^n`` strategies (or those under a fixed prefix), in index order."""
    vals = np.asarray(numerators, dtype=np.int64).reshape(1, -1)
    start = 0
    if prefix is not None:
        prefix_parties, prefix_index = prefix
        for level in range(prefix_parties):
            shift = 2 * (prefix_parties - 1 - level)
            choice = (prefix_index >> shift) & 3
            vals = _contract_party_numpy(vals)[choice:choice + 1]
        start = prefix_parties
    for _ in range(start, n):
        vals = _contract_party_numpy(vals)
    return vals[:, 0]


def _prefix_split(n, max_block=1 << 20):
    prefix_parties = 0
    while 4 ** (n - prefix_parties) > max_block:
        prefix_parties += 1
    return prefix_parties


def _strategy_scan_numpy(numerators, n, target, collect, limit):
    p = _prefix_split(n)
    block = 4 ** (n - p)
    best = None
    hits = []
    count = 0
    for prefix_index in range(4 ** p):
        vals = strategy_values_numpy(numerators, n, (p, prefix_index) if p else None)
        if collect:
            idx = np.flatnonzero(vals == target)
            count += idx.size
            room = limit - len(hits)
            if room > 0:
                hits.extend((idx[:room] + prefix_index * block).tolist())
        else:
            m = int(vals.max())
            best = m if best is None else max(best, m)
    return best, np.asarray(hits, dtype=np.int64), count


def strategy_scan(numerators, n, target=0, collect=False, limit=0, use_numba=None):
    """Max strategy value, or (with ``collect``) the indices achieving ``target``."""
    use_numba = USE_NUMBA if use_numba is None else use_numba
    numerators = np.ascontiguousarray(numerators, dtype=np.int64)
    if use_numba:
        best, hits, count = _strategy_scan_numba(numerators, n, np.int64(target), collect, limit)
        return int(best), hits, int(count)
    best, hits, count = _strategy_scan_numpy(numerators, n, target, collect, limit)
    return (None if best is None else int(best)), hits, count


def antidiagonal_batch(coeffs, thetas, use_numba=None):
    use_numba = USE_NUMBA if use_numba is None else use_numba
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    thetas = np.ascontiguousarray(np.atleast_2d(thetas), dtype=np.float64)
    if use_numba:
        return antidiagonal_batch_numba(coeffs, thetas)
    return antidiagonal_batch_numpy(coeffs, thetas)


def pair_objective_batch(coeffs, thetas, use_numba=None):
    """``max_b (|beta_b| + |beta_bbar|)/2`` at each row of ``thetas``."""
    use_numba = USE_NUMBA if use_numba is None else use_numba
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    thetas = np.ascontiguousarray(np.atleast_2d(thetas), dtype=np.float64)
    if use_numba:
        return pair_objective_batch_numba(coeffs, thetas)
    return pair_objective_batch_numpy(coeffs, thetas)
