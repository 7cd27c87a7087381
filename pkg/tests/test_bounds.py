import itertools
import json
from fractions import Fraction

import numpy as np
import pytest

from bellforge import bounds
from bellforge.bounds import decode_strategy, encode_strategy, evaluate_strategy, local_bound, reference_bounds
from bellforge.inequalities import BellExpression, SignTable, mabk, svetlichny, wwzb_from_sign_table


def brute_force(expr):
    values = [evaluate_strategy(expr, list(zip(a[::2], a[1::2])))
              for a in itertools.product((1, -1), repeat=2 * expr.n)]
    best = max(values)
    return best, sum(v == best for v in values)


@pytest.mark.parametrize("n", range(2, 7))
def test_mabk_local_bound(n):
    report = local_bound(mabk(n))
    assert report.local_bound == 1
    assert isinstance(report.local_bound, Fraction)


@pytest.mark.parametrize("use_numba", [True, False])
def test_against_brute_force(use_numba, rng):
    cases = [mabk(3), svetlichny(3), BellExpression(2, {"00": 3, "01": "-1/3", "11": 2})]
    for _ in range(5):
        n = int(rng.integers(1, 5))
        cases.append(BellExpression(n, {format(i, f"0{n}b"): Fraction(int(v), int(d))
                                        for i, (v, d) in enumerate(zip(rng.integers(-4, 5, 2 ** n),
                                                                       rng.integers(1, 4, 2 ** n)))}))
    for e in cases:
        if e.is_zero():
            continue
        best, count = brute_force(e)
        report = local_bound(e, use_numba=use_numba)
        assert report.local_bound == best
        assert report.strategy_count == count
        for s in report.achieving_strategies:
            assert evaluate_strategy(e, s) == best


def test_every_tripartite_sign_table_has_local_bound_one():
    for index in range(256):
        assert local_bound(wwzb_from_sign_table(SignTable.from_index(3, index))).local_bound == 1


def test_strategy_encoding_roundtrip():
    for n in (1, 2, 3):
        for i in range(4 ** n):
            assert encode_strategy(decode_strategy(i, n)) == i
    assert decode_strategy(0, 2) == [(1, 1), (1, 1)]
    assert decode_strategy(0b0110, 2) == [(1, -1), (-1, 1)]


def test_strategy_listing_cap():
    report = local_bound(mabk(3), max_strategies=3)
    assert len(report.achieving_strategies) == 3
    assert report.strategy_count == 32


def test_numba_and_numpy_lists_agree():
    for e in (mabk(4), svetlichny(4, "-")):
        a = local_bound(e, use_numba=True)
        b = local_bound(e, use_numba=False)
        assert a.local_bound == b.local_bound
        assert a.achieving_strategies == b.achieving_strategies


def test_size_limit():
    with pytest.raises(ValueError, match="n <= 12"):
        local_bound(mabk(13))


def test_reference_bounds():
    r = reference_bounds("mabk", 3)
    assert (str(r.local_bound), str(r.reference_biseparable), str(r.reference_quantum)) == ("1", "2^(1/2)", "2")
    assert float(r.reference_biseparable) == pytest.approx(np.sqrt(2))
    s = reference_bounds("svetlichny", 3)
    assert str(s.reference_biseparable) == "4" and str(s.reference_quantum) == "2^(5/2)"
    assert str(reference_bounds("uffink-m", 4).reference_quantum) == "8"
    assert str(reference_bounds("uffink-s", 3).reference_quantum) == "32"
    with pytest.raises(ValueError):
        reference_bounds("nope", 3)
    with pytest.raises(ValueError):
        reference_bounds("uffink-m", 2)


def test_report_json():
    d = json.loads(local_bound(mabk(2)).to_json())
    assert d["local"] == "1"
    assert d["strategies"][0] == {"party_assignments": [[1, 1], [1, 1]]}
    half = local_bound(BellExpression(1, {"0": "1/2"}))
    assert half.to_dict()["local"] == "1/2"
    assert bounds.BoundReport(None).to_dict()["local"] is None
