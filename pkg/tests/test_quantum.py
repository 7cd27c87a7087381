import json
from fractions import Fraction

import numpy as np
import pytest

from bellforge import linalg
from bellforge.facets import TRIPARTITE_REPRESENTATIVES
from bellforge.inequalities import BellExpression, QuadraticExpression, SignTable, mabk, uffink, wwzb_from_sign_table
from bellforge.quantum import (AntidiagonalOperator, angle_observables, antidiagonal_elements, beta_gradient,
                               dense_operator, ghz_value, optimize_angles, optimize_uffink, seesaw_oracle,
                               svetlichny_ratio_report, uffink_oracle, uffink_value, wrap_angles)

REPS = {label: rep for label, rep, _ in TRIPARTITE_REPRESENTATIVES}
HALF_PI = np.pi / 2


def random_expression(n, rng):
    return BellExpression(n, {format(i, f"0{n}b"): int(v) for i, v in enumerate(rng.integers(-3, 4, 2 ** n))})


@pytest.mark.parametrize("n", range(2, 7))
def test_mabk_elements_at_right_angles(n):
    op = antidiagonal_elements(mabk(n), [HALF_PI] * n)
    mags = np.abs(op.beta)
    big = np.flatnonzero(mags > 1e-12)
    # one block: the entry b and its Hermitian partner bbar
    assert len(big) == 2 and big[0] ^ big[1] == 2 ** n - 1
    assert np.allclose(mags[big], 2 ** ((n - 1) / 2), atol=1e-12)


def test_chsh_elements_at_zero_angles():
    assert np.allclose(np.abs(antidiagonal_elements(mabk(2), [0, 0]).beta), 1)


def test_zero_expression():
    op = antidiagonal_elements(BellExpression(3), [0.1, 0.2, 0.3])
    assert np.all(op.beta == 0)
    assert ghz_value(op)[0] == 0


def test_angle_count_checked():
    with pytest.raises(ValueError):
        antidiagonal_elements(mabk(3), [0, 0])


def test_elements_match_dense_operator(rng):
    for n in (1, 2, 3, 4, 5):
        e = random_expression(n, rng)
        thetas = rng.uniform(-np.pi, np.pi, n)
        dense = dense_operator(e, angle_observables(thetas))
        expected = antidiagonal_elements(e, thetas).dense()
        assert linalg.max_abs(dense - expected) <= 1e-12
        assert linalg.is_hermitian(dense)


@pytest.mark.parametrize("n", range(1, 7))
def test_ghz_value_matches_eigensolver(n, rng):
    for _ in range(5):
        size = 2 ** n
        beta = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        beta = 0.5 * (beta + np.conj(beta[::-1]))
        op = AntidiagonalOperator(n, beta)
        value, b, phase = ghz_value(op)
        evals, _ = linalg.hermitian_eigensystem(op.dense())
        assert value == pytest.approx(evals[-1], abs=1e-10)
        psi = np.zeros(size, dtype=complex)
        psi[int(b, 2)] = psi[int(b, 2) ^ (size - 1)] = 2 ** -0.5
        psi[int(b, 2) ^ (size - 1)] *= np.exp(1j * phase)
        assert np.vdot(psi, op.dense() @ psi).real == pytest.approx(value, abs=1e-10)


def test_ghz_value_rejects_non_hermitian():
    with pytest.raises(ValueError):
        ghz_value(antidiagonal_elements(uffink(3).complex_coefficients(), [0, 0, 0]))


def test_optimize_mabk3():
    r = optimize_angles(mabk(3))
    assert r.value == pytest.approx(2, abs=1e-10)
    assert np.allclose(np.abs(r.angles), HALF_PI, atol=1e-6)
    assert r.maximizer.branch_b == "000"


def test_optimize_unbalanced():
    r = optimize_angles(REPS["unbalanced"])
    assert r.value == pytest.approx(20 / 3, abs=1e-9)
    assert np.allclose(np.cos(r.angles), -1 / 3, atol=1e-6)


def test_optimize_chsh_like():
    r = optimize_angles(REPS["CHSH-like"])
    assert r.value == pytest.approx(np.sqrt(2), abs=1e-10)
    assert len(r.maximizers) == 2


def test_optimize_is_deterministic():
    a = optimize_angles(REPS["extended-CHSH"])
    b = optimize_angles(REPS["extended-CHSH"])
    assert a.to_json() == b.to_json()


def test_angles_are_wrapped():
    t = wrap_angles([np.pi, -np.pi, 3 * np.pi, 0.5])
    assert np.allclose(t, [np.pi, np.pi, np.pi, 0.5])


def test_large_n_random_start_stage():
    r = optimize_angles(mabk(8))
    assert r.diagnostics["coarse_stage"] == "random-starts"
    assert r.value == pytest.approx(2 ** 3.5, abs=1e-9)


def test_dense_operator_examples():
    obs = np.array([[[1, 0, 0], [0, 1, 0]]] * 2, dtype=float)
    evals, _ = linalg.hermitian_eigensystem(dense_operator(mabk(2), obs))
    assert evals[-1] == pytest.approx(np.sqrt(2), abs=1e-12)
    assert linalg.max_abs(dense_operator(BellExpression(3), angle_observables([0.3] * 3))) == 0


def test_dense_operator_all_x(rng):
    # with A = A' every correlator is X^(x)n
    for n in (2, 3, 4):
        e = random_expression(n, rng)
        obs = np.array([[[1, 0, 0], [1, 0, 0]]] * n, dtype=float)
        xs = linalg.kron_all([linalg.SIGMA_X] * n)
        total = float(sum(v for _, v in e))
        assert linalg.max_abs(dense_operator(e, obs) - total * xs) <= 1e-12


def test_dense_operator_limits():
    with pytest.raises(ValueError):
        dense_operator(mabk(11), angle_observables([0] * 11))
    with pytest.raises(ValueError):
        dense_operator(mabk(2), angle_observables([0] * 3))


def test_seesaw_mabk4():
    r = seesaw_oracle(mabk(4), restarts=20)
    assert r.value == pytest.approx(2 ** 1.5, abs=1e-7)
    assert r.diagnostics["monotone"]
    assert r.method == "see-saw"


def test_seesaw_extended_chsh_matches_fast_path():
    e = REPS["extended-CHSH"]
    assert seesaw_oracle(e).value == pytest.approx(optimize_angles(e).value, abs=1e-7)


def test_seesaw_single_correlator():
    assert seesaw_oracle(BellExpression(3, {"010": 1})).value == pytest.approx(1, abs=1e-12)


def test_seesaw_state_is_top_eigenvector():
    r = seesaw_oracle(mabk(3), restarts=3)
    h = dense_operator(mabk(3), r.diagnostics["observables"])
    assert np.vdot(r.state, h @ r.state).real == pytest.approx(r.value, abs=1e-10)


def test_fast_path_agrees_with_oracle_on_random_tables(rng):
    worst = 0.0
    for n, count in ((3, 25), (4, 25)):
        for index in rng.integers(0, 2 ** (2 ** n), count):
            e = wwzb_from_sign_table(SignTable.from_index(n, int(index)))
            worst = max(worst, abs(optimize_angles(e).value - seesaw_oracle(e, restarts=20).value))
    assert worst <= 1e-6


def test_beta_gradient_matches_finite_differences(rng):
    step = 1e-6
    for _ in range(100):
        n = int(rng.integers(1, 6))
        e = random_expression(n, rng)
        thetas = rng.uniform(-np.pi, np.pi, n)
        b = int(rng.integers(0, 2 ** n))
        grad = beta_gradient(e, thetas, b)
        for j in range(n):
            up, down = thetas.copy(), thetas.copy()
            up[j] += step
            down[j] -= step
            fd = (abs(antidiagonal_elements(e, up).beta[b]) ** 2
                  - abs(antidiagonal_elements(e, down).beta[b]) ** 2) / (2 * step)
            assert grad[j] == pytest.approx(fd, rel=1e-5, abs=1e-6)


def test_uffink_value_at_right_angles():
    r = uffink_value(uffink(3), [HALF_PI] * 3)
    assert r.diagnostics["linearized_modulus"] == pytest.approx(2, abs=1e-12)
    assert r.value == pytest.approx(4, abs=1e-12)


def test_uffink_value_at_zero_angles():
    # A' = A makes M = M' = X(x)X(x)X, so <M>^2 + <M'>^2 reaches 2
    r = uffink_value(uffink(3), [0, 0, 0])
    assert r.value == pytest.approx(2, abs=1e-12)


def test_uffink_zero():
    z = BellExpression(3)
    q = QuadraticExpression(z, z, Fraction(0), Fraction(0))
    assert uffink_value(q, [0.4, 0.1, 2.0]).value == 0
    assert uffink_oracle(q, phi_steps=12, restarts=1).value == 0


@pytest.mark.parametrize("n", [3, 4, 5])
def test_uffink_value_matches_dense_expectations(n, rng):
    q = uffink(n)
    for _ in range(5):
        thetas = rng.uniform(-np.pi, np.pi, n)
        r = uffink_value(q, thetas)
        assert r.value <= 2 ** (n - 1) + 1e-9
        obs = angle_observables(thetas)
        e1, e2 = dense_operator(q.first, obs), dense_operator(q.second, obs)
        psi = r.maximizer.state_vector()
        got = np.vdot(psi, e1 @ psi).real ** 2 + np.vdot(psi, e2 @ psi).real ** 2
        assert got == pytest.approx(r.value, abs=1e-10)


def test_uffink_svetlichny_base_agrees_with_oracle():
    # at n = 3 the primed Svetlichny expression is a relabelling of the unprimed one,
    # so the quadratic value is 2 <S>^2 at the linear optimum
    q = uffink(3, "svetlichny")
    fast = optimize_uffink(q).value
    assert fast == pytest.approx(uffink_oracle(q).value, abs=1e-6)
    assert fast == pytest.approx(2 * optimize_angles(q.first).value ** 2, abs=1e-6)


def test_result_json_shape():
    d = json.loads(optimize_angles(mabk(3)).to_json())
    assert set(d) == {"value", "thetas", "maximizer", "method", "diagnostics"}
    assert set(d["maximizer"]) == {"b", "phase"}


def test_svetlichny_report_is_explicit():
    report = svetlichny_ratio_report(3, restarts=5)
    for r in report.values():
        assert r["paths_agree"]
        assert r["ratio"] == pytest.approx(r["oracle"] / 4)
    assert report["+"]["ratio"] == pytest.approx(2 * np.sqrt(2), abs=1e-6)
    assert not report["+"]["matches"]
