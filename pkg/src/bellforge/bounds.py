"""Exact local bounds and reference bound constants."""

import json
from dataclasses import dataclass, field
from fractions import Fraction

from . import kernels

MAX_LOCAL_PARTIES = 12
DEFAULT_STRATEGY_CAP = 4096


@dataclass(frozen=True)
class PowerOfTwo:
    """The exact number ``2 ** exponent`` for a rational exponent."""

    exponent: Fraction

    def __float__(self):
        return 2.0 ** float(self.exponent)

    def __str__(self):
        e = Fraction(self.exponent)
        if e.denominator == 1:
            return str(Fraction(2) ** e.numerator)
        return f"2^({e.numerator}/{e.denominator})"


def _pow2(p, q=1):
    return PowerOfTwo(Fraction(p, q))


@dataclass
class BoundReport:
    local_bound: Fraction | None
    achieving_strategies: list = field(default_factory=list)
    reference_biseparable: object = None
    reference_quantum: object = None
    strategy_count: int = 0

    def to_dict(self):
        def fmt(v):
            return None if v is None else str(v)
        return {
            "local": fmt(self.local_bound),
            "strategies": [{"party_assignments": [list(p) for p in s]}
                           for s in self.achieving_strategies],
            "biseparable": fmt(self.reference_biseparable),
            "quantum": fmt(self.reference_quantum),
        }

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)


def decode_strategy(index, n):
    """Strategy index to per-party ``(a_j, a'_j)`` pairs."""
    out = []
    for party in range(n):
        shift = 2 * (n - 1 - party)
        out.append((1 - 2 * ((index >> (shift + 1)) & 1), 1 - 2 * ((index >> shift) & 1)))
    return out


def encode_strategy(assignments):
    index = 0
    for a, ap in assignments:
        index = (index << 2) | ((a < 0) << 1) | (ap < 0)
    return index


def evaluate_strategy(expr, assignments):
    """Exact value of ``expr`` under a deterministic assignment."""
    total = Fraction(0)
    for key, value in expr:
        sign = 1
        for ch, (a, ap) in zip(key, assignments):
            sign *= a if ch == "0" else ap
        total += sign * value
    return total


def local_bound(expr, max_strategies=None, use_numba=None):
    """Maximum of ``expr`` over all ``4^n`` deterministic strategies, exactly.

    ``max_strategies`` caps how many achieving strategies are listed (all of
    them by default up to n = 8, else ``DEFAULT_STRATEGY_CAP``); the full count
    is kept in ``strategy_count``. Strategies are listed in enumeration
    order (``(a_1, a'_1, ..., a_n, a'_n)`` lexicographic, +1 first).
    """
    n = expr.n
    if n > MAX_LOCAL_PARTIES:
        raise ValueError(f"local bound enumeration is limited to n <= {MAX_LOCAL_PARTIES} (4^n strategies)")
    numer, den = expr.numerators()
    best, _, _ = kernels.strategy_scan(numer, n, use_numba=use_numba)
    if max_strategies is None:
        limit = 4 ** n if n <= 8 else DEFAULT_STRATEGY_CAP
    else:
        limit = max(1, max_strategies)
    _, hits, count = kernels.strategy_scan(numer, n, target=best, collect=True,
                                           limit=limit, use_numba=use_numba)
    strategies = [decode_strategy(int(s), n) for s in hits]
    return BoundReport(Fraction(best, den), strategies, strategy_count=count)


FAMILIES = ("mabk", "svetlichny", "uffink-m", "uffink-s")


def reference_bounds(family, n):
    """Published bound constants for a family; nothing is computed here."""
    family = family.lower().replace("_", "-")
    if family == "mabk":
        if n < 2:
            raise ValueError("MABK reference bounds need n >= 2")
        return BoundReport(Fraction(1), reference_biseparable=_pow2(n - 2, 2),
                           reference_quantum=_pow2(n - 1, 2))
    if family == "svetlichny":
        if n < 2:
            raise ValueError("Svetlichny reference bounds need n >= 2")
        return BoundReport(None, reference_biseparable=_pow2(n - 1),
                           reference_quantum=_pow2(2 * n - 1, 2))
    if family in ("uffink-m", "uffinkm"):
        if n < 3:
            raise ValueError("Uffink inequalities need n >= 3")
        return BoundReport(None, reference_biseparable=_pow2(n - 2),
                           reference_quantum=_pow2(n - 1))
    if family in ("uffink-s", "uffinks"):
        if n < 3:
            raise ValueError("Uffink inequalities need n >= 3")
        return BoundReport(None, reference_biseparable=_pow2(2 * n - 2),
                           reference_quantum=_pow2(2 * n - 1))
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")
