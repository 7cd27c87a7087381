import os
import subprocess
import sys

import numpy as np
import pytest

from bellforge import kernels
from bellforge._accel import NUMBA_AVAILABLE
from bellforge.inequalities import mabk, svetlichny

needs_numba = pytest.mark.skipif(not NUMBA_AVAILABLE, reason="numba not installed")


def direct_beta(coeffs, thetas):
    n = len(thetas)
    out = np.zeros(2 ** n, dtype=complex)
    for b in range(2 ** n):
        for k in range(2 ** n):
            term = coeffs[k]
            for j in range(n):
                kj = (k >> (n - 1 - j)) & 1
                bj = (b >> (n - 1 - j)) & 1
                if kj:
                    term *= np.exp(1j * thetas[j] * (1 if bj else -1))
            out[b] += term
    return out


@pytest.mark.parametrize("use_numba", [pytest.param(True, marks=needs_numba), False])
def test_antidiagonal_matches_direct_sum(use_numba, rng):
    for n in (1, 2, 3, 4):
        c = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
        t = rng.uniform(-np.pi, np.pi, (3, n))
        got = kernels.antidiagonal_batch(c, t, use_numba=use_numba)
        for row, th in zip(got, t):
            assert np.allclose(row, direct_beta(c, th), atol=1e-12)


@needs_numba
def test_numba_numpy_agree(rng):
    for n in (2, 5, 7):
        c = mabk(n).as_array()
        t = rng.uniform(-np.pi, np.pi, (5000, n))
        assert np.allclose(kernels.antidiagonal_batch(c, t, use_numba=True),
                           kernels.antidiagonal_batch(c, t, use_numba=False), atol=1e-12)
        assert np.allclose(kernels.pair_objective_batch(c, t, use_numba=True),
                           kernels.pair_objective_batch(c, t, use_numba=False), atol=1e-12)


@needs_numba
def test_strategy_scan_agree():
    for e in (mabk(5), svetlichny(5)):
        numer, _ = e.numerators()
        a = kernels.strategy_scan(numer, e.n, use_numba=True)
        b = kernels.strategy_scan(numer, e.n, use_numba=False)
        assert a[0] == b[0]
        ha = kernels.strategy_scan(numer, e.n, target=a[0], collect=True, limit=50, use_numba=True)
        hb = kernels.strategy_scan(numer, e.n, target=a[0], collect=True, limit=50, use_numba=False)
        assert ha[2] == hb[2]
        assert np.array_equal(ha[1], hb[1])


def test_strategy_values_order():
    # CHSH numerators over 2: the all-+1 strategy gives 1 + 1 + 1 - 1 = 2
    numer, _ = mabk(2).numerators()
    vals = kernels.strategy_values_numpy(numer, 2)
    assert vals.shape == (16,)
    assert vals[0] == 2
    assert vals.max() == 2


def test_prefix_split_keeps_blocks_small():
    assert kernels._prefix_split(8) == 0
    assert 4 ** (12 - kernels._prefix_split(12)) <= 1 << 20


def test_env_flag_disables_numba():
    env = dict(os.environ, BELLFORGE_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", "from bellforge import _accel; print(_accel.USE_NUMBA)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"


def test_numpy_fallback_end_to_end():
    code = ("from bellforge import mabk; from bellforge.quantum import optimize_angles; "
            "from bellforge.bounds import local_bound; "
            "print(round(optimize_angles(mabk(4)).value, 9), local_bound(mabk(4)).local_bound)")
    env = dict(os.environ, BELLFORGE_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == [str(round(2 ** 1.5, 9)), "1"]
