import json

import numpy as np
import pytest

from bellforge import linalg
from bellforge.facets import TRIPARTITE_REPRESENTATIVES
from bellforge.inequalities import BellExpression, SignTable, mabk, svetlichny, wwzb_from_sign_table
from bellforge.quantum import angle_observables, optimize_angles
from bellforge.selftest import (anticommutation_residual, extract_maximizer, ghz_fidelity, reduce_angles,
                                uniqueness_scan)

REPS = {label: rep for label, rep, _ in TRIPARTITE_REPRESENTATIVES}
HALF_PI = np.pi / 2


def test_mabk3_maximizer():
    r = optimize_angles(mabk(3))
    (m,) = extract_maximizer(mabk(3), r.angles)
    assert m.branch_b == "000"
    assert m.amplitude_moduli == pytest.approx((2 ** -0.5, 2 ** -0.5), abs=1e-12)
    assert sum(x * x for x in m.amplitude_moduli) == pytest.approx(1, abs=1e-12)


def test_mabk2_maximizer_is_bell_state():
    r = optimize_angles(mabk(2))
    ms = extract_maximizer(mabk(2), r.angles)
    assert all(ghz_fidelity(mabk(2), r.angles, m) >= 1 - 1e-9 for m in ms)
    psi = ms[0].state_vector()
    # maximally entangled: reduced state is I/2
    rho = psi.reshape(2, 2) @ psi.reshape(2, 2).conj().T
    assert linalg.max_abs(rho - np.eye(2) / 2) <= 1e-12


def test_degenerate_blocks_give_two_descriptors():
    e = REPS["CHSH-like"]
    ms = extract_maximizer(e, optimize_angles(e).angles)
    assert len(ms) == 2
    assert len({m.branch_b for m in ms}) == 2


def test_zero_operator_rejected():
    with pytest.raises(ValueError):
        extract_maximizer(BellExpression(2), [0.1, 0.2])


def test_residual_examples():
    assert anticommutation_residual([HALF_PI] * 3) == pytest.approx([0, 0, 0], abs=1e-12)
    assert anticommutation_residual([0.0]) == pytest.approx([1.0], abs=1e-12)
    t = np.arccos(-1 / 3)
    assert anticommutation_residual([t] * 3) == pytest.approx([1 / 3] * 3, abs=1e-12)


def test_unbalanced_optimum_residuals():
    r = optimize_angles(REPS["unbalanced"])
    assert anticommutation_residual(r.angles) == pytest.approx([1 / 3] * 3, abs=1e-6)


def test_residuals_invariant_under_global_flip(rng):
    for _ in range(20):
        t = rng.uniform(-np.pi, np.pi, 4)
        assert anticommutation_residual(t) == pytest.approx(anticommutation_residual(-t), abs=1e-12)


def test_reduce_angles():
    assert np.allclose(reduce_angles([-1.0, 1.0, 3 * np.pi]), [1.0, 1.0, np.pi])


FAMILIES = ([mabk(n) for n in range(2, 7)] + [svetlichny(n, s) for n in (3, 4, 5) for s in "+-"])


@pytest.mark.parametrize("expr", FAMILIES, ids=lambda e: f"n{e.n}-{len(e)}terms")
def test_fidelity_against_dense_eigenvector(expr):
    r = optimize_angles(expr)
    for m in extract_maximizer(expr, r.angles):
        assert ghz_fidelity(expr, r.angles, m) >= 1 - 1e-8


def test_fidelity_on_random_tables(rng):
    for n in (3, 4):
        for index in rng.integers(0, 2 ** (2 ** n), 10):
            e = wwzb_from_sign_table(SignTable.from_index(n, int(index)))
            if not any(v for _, v in e):
                continue
            r = optimize_angles(e)
            for m in extract_maximizer(e, r.angles):
                assert ghz_fidelity(e, r.angles, m) >= 1 - 1e-8


def test_scan_mabk3_full_selftest():
    rep = uniqueness_scan(mabk(3))
    assert rep.verdict == "full-selftest"
    assert rep.ghz_fidelity >= 1 - 1e-9
    assert max(rep.anticommutation_residuals) <= 1e-6
    assert len(rep.optimal_angle_sets) == 1


def test_scan_extended_chsh_partial():
    rep = uniqueness_scan(REPS["extended-CHSH"])
    assert rep.verdict == "partial"
    assert rep.pinned.keys() == {0}
    assert rep.pinned[0] == pytest.approx(HALF_PI, abs=1e-6)
    assert rep.constraints_detected == ["theta2±theta3=±pi/2"]


def test_scan_chsh_like_state_only():
    rep = uniqueness_scan(REPS["CHSH-like"])
    assert rep.verdict == "state-only"
    assert set(rep.pinned) == {0, 1}
    assert all(v == pytest.approx(HALF_PI, abs=1e-6) for v in rep.pinned.values())
    assert rep.free == [2]


def test_scan_is_deterministic():
    e = REPS["extended-CHSH"]
    assert uniqueness_scan(e, seed=5).to_json() == uniqueness_scan(e, seed=5).to_json()


def test_report_json_shape():
    d = json.loads(uniqueness_scan(mabk(3), samples=16).to_json())
    for key in ("fidelity", "residuals", "optimal_angle_sets", "verdict", "constraints_detected"):
        assert key in d


def test_junk_state_product_form(rng):
    # every party holds an extra qubit on which its observables act trivially;
    # GHZ (x) junk reaches the same value as GHZ alone
    e = mabk(3)
    r = optimize_angles(e)
    obs = angle_observables(r.angles)
    n = e.n
    mats = [[linalg.kron(linalg.pauli_observable(o), np.eye(2)) for o in party] for party in obs]
    h = np.zeros((4 ** n, 4 ** n), dtype=complex)
    for key, value in e:
        h += float(value) * linalg.kron_all([mats[j][int(k)] for j, k in enumerate(key)])
    junk = rng.standard_normal(2 ** n) + 1j * rng.standard_normal(2 ** n)
    junk /= np.linalg.norm(junk)
    ghz = r.maximizer.state_vector()
    # interleave (s1, s2, s3) with (j1, j2, j3) as (s1, j1, s2, j2, s3, j3)
    full = np.einsum("abc,def->adbecf", ghz.reshape(2, 2, 2), junk.reshape(2, 2, 2)).reshape(-1)
    assert np.vdot(full, h @ full).real == pytest.approx(r.value, abs=1e-10)
