"""Construction of two-setting correlation Bell expressions.

A :class:`BellExpression` is a map from setting bitstrings ``k`` to exact
rational coefficients. Character ``j`` of ``k`` selects the observable of
party ``j + 1``: ``'0'`` is ``A``, ``'1'`` is ``A'``. When a coefficient vector
is laid out as an array, the key is read as a binary number, so party 1 is the
most significant bit.
"""

import json
from dataclasses import dataclass
from fractions import Fraction
from math import lcm

import numpy as np


def key_to_index(key):
    return int(key, 2)


def index_to_key(index, n):
    return format(index, f"0{n}b")


def complement_key(key):
    return "".join("1" if ch == "0" else "0" for ch in key)


def _as_fraction(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    if isinstance(value, float):
        if not value.is_integer():
            raise TypeError("float coefficients are not exact; pass a Fraction or 'p/q' string")
        return Fraction(int(value))
    return Fraction(value)


def _is_power_of_two(n):
    return n > 0 and n & (n - 1) == 0


class BellExpression:
    """Exact correlator coefficients ``c_k`` of an ``n``-party expression.

    Zero coefficients are dropped on construction, so two expressions compare
    equal exactly when their nonzero coefficients agree.
    """

    __slots__ = ("n", "_coefficients")

    def __init__(self, n, coefficients=None):
        if n < 1:
            raise ValueError("an expression needs at least one party")
        self.n = int(n)
        coeffs = {}
        for key, value in (coefficients or {}).items():
            if len(key) != self.n or set(key) - {"0", "1"}:
                raise ValueError(f"setting key {key!r} is not a {self.n}-bit string")
            frac = _as_fraction(value)
            if frac:
                coeffs[key] = coeffs.get(key, Fraction(0)) + frac
        self._coefficients = {k: coeffs[k] for k in sorted(coeffs) if coeffs[k]}

    @property
    def coefficients(self):
        return dict(self._coefficients)

    def __getitem__(self, key):
        return self._coefficients.get(key, Fraction(0))

    def __iter__(self):
        return iter(self._coefficients.items())

    def __len__(self):
        return len(self._coefficients)

    def __eq__(self, other):
        if not isinstance(other, BellExpression):
            return NotImplemented
        return self.n == other.n and self._coefficients == other._coefficients

    def __hash__(self):
        return hash((self.n, tuple(self._coefficients.items())))

    def __repr__(self):
        body = ", ".join(f"{k}: {v}" for k, v in self._coefficients.items())
        return f"BellExpression(n={self.n}, {{{body}}})"

    def is_zero(self):
        return not self._coefficients

    def __neg__(self):
        return self.scaled(-1)

    def __add__(self, other):
        if other.n != self.n:
            raise ValueError("cannot add expressions with different party counts")
        merged = dict(self._coefficients)
        for key, value in other:
            merged[key] = merged.get(key, Fraction(0)) + value
        return BellExpression(self.n, merged)

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, factor):
        factor = _as_fraction(factor)
        return BellExpression(self.n, {k: factor * v for k, v in self})

    def common_denominator(self):
        return lcm(1, *(v.denominator for _, v in self))

    def has_dyadic_coefficients(self):
        return all(_is_power_of_two(v.denominator) for _, v in self)

    def numerators(self):
        """Integer numerators over ``common_denominator()`` as a length-``2^n`` array."""
        den = self.common_denominator()
        out = np.zeros(2 ** self.n, dtype=np.int64)
        for key, value in self:
            out[key_to_index(key)] = value.numerator * (den // value.denominator)
        return out, den

    def as_array(self):
        out = np.zeros(2 ** self.n, dtype=float)
        for key, value in self:
            out[key_to_index(key)] = float(value)
        return out

    @classmethod
    def from_array(cls, n, values, denominator=1):
        values = np.asarray(values)
        if values.shape != (2 ** n,):
            raise ValueError(f"expected {2 ** n} coefficients, got shape {values.shape}")
        return cls(n, {index_to_key(i, n): Fraction(int(v), denominator)
                       for i, v in enumerate(values) if v})

    def to_dict(self):
        return {"n": self.n,
                "coefficients": {k: f"{v.numerator}/{v.denominator}" for k, v in self}}

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["n"]), {k: Fraction(v) for k, v in data["coefficients"].items()})

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class SignTable:
    """A sign function ``S: {+1,-1}^n -> {+1,-1}``.

    ``bits[i]`` is ``'0'`` for ``S = +1`` and ``'1'`` for ``S = -1``, where the
    index ``i`` is the s-bitstring read as binary with ``0 -> s_j = +1``.
    """

    n: int
    bits: str

    def __post_init__(self):
        if len(self.bits) != 2 ** self.n or set(self.bits) - {"0", "1"}:
            raise ValueError(f"a sign table for n={self.n} needs {2 ** self.n} bits of 0/1")

    @classmethod
    def from_index(cls, n, index):
        """Table whose bit ``i`` is bit ``i`` (least significant first) of ``index``."""
        size = 2 ** n
        return cls(n, "".join("1" if (index >> i) & 1 else "0" for i in range(size)))

    @classmethod
    def from_signs(cls, n, signs):
        return cls(n, "".join("0" if s > 0 else "1" for s in signs))

    def signs(self):
        return np.array([1 if b == "0" else -1 for b in self.bits], dtype=np.int64)

    def to_dict(self):
        return {"n": self.n, "bits": self.bits}

    def to_json(self, **kwargs):
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)

    @classmethod
    def from_dict(cls, data):
        return cls(int(data["n"]), str(data["bits"]))


def walsh_hadamard(values):
    """Unnormalised Walsh-Hadamard transform of an integer or float vector."""
    x = np.array(values)
    n = x.shape[0].bit_length() - 1
    if 2 ** n != x.shape[0]:
        raise ValueError("length must be a power of two")
    x = x.reshape((2,) * n) if n else x
    for axis in range(n):
        a = np.take(x, 0, axis=axis)
        b = np.take(x, 1, axis=axis)
        x = np.stack([a + b, a - b], axis=axis)
    return x.reshape(-1)


def wwzb_from_sign_table(table):
    """Correlator coefficients of the WWWZB operator defined by ``table``.

    ``c_k = 2^-n sum_s S(s) prod_j s_j^{k_j}``; the sum is a Walsh-Hadamard
    transform because ``s_j^{k_j} = (-1)^{t_j k_j}`` for ``s_j = (-1)^{t_j}``.
    """
    numer = walsh_hadamard(table.signs())
    return BellExpression.from_array(table.n, numer, 2 ** table.n)


def sign_table_from_expression(expr):
    """Inverse of :func:`wwzb_from_sign_table`; ``None`` if ``expr`` is not of that form."""
    numer, den = expr.numerators()
    values = walsh_hadamard(numer)
    if np.all(np.abs(values) == den):
        return SignTable.from_signs(expr.n, values // den)
    return None


def prime_partner(expr):
    """The expression with every ``A`` and ``A'`` interchanged."""
    return BellExpression(expr.n, {complement_key(k): v for k, v in expr})


def _extend(expr, plus_coeff, minus_coeff):
    half = Fraction(1, 2)
    out = {}
    for key, value in expr:
        out[key + "0"] = out.get(key + "0", 0) + half * plus_coeff * value
        out[key + "1"] = out.get(key + "1", 0) + half * minus_coeff * value
    return out


def mabk(n):
    """MABK expression from the recursion, starting at ``M_1 = A``, ``M'_1 = A'``."""
    if n < 1:
        raise ValueError("MABK needs n >= 1")
    current = BellExpression(1, {"0": 1})
    for _ in range(n - 1):
        primed = prime_partner(current)
        terms = _extend(current, 1, 1)
        for key, value in _extend(primed, 1, -1).items():
            terms[key] = terms.get(key, 0) + value
        current = BellExpression(current.n + 1, terms)
    return current


def _gauss_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def mabk_closed_form(n):
    """MABK from the expansion of ``((1-i)/2)^(n-1) (x)(A + iA')`` plus its conjugate.

    The two conjugate terms add up to twice the real part, so
    ``c_k = Re[((1-i)/2)^(n-1) i^{|k|}]``. Kept separate from :func:`mabk` as a
    cross-check of the recursion's base case.
    """
    if n < 1:
        raise ValueError("MABK needs n >= 1")
    z = (Fraction(1), Fraction(0))
    step = (Fraction(1, 2), Fraction(-1, 2))
    for _ in range(n - 1):
        z = _gauss_mul(z, step)
    i_powers = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    coeffs = {}
    for idx in range(2 ** n):
        key = index_to_key(idx, n)
        real, _ = _gauss_mul(z, i_powers[key.count("1") % 4])
        if real:
            coeffs[key] = real
    return BellExpression(n, coeffs)


def _parse_sign(sign):
    if sign in ("+", 1, "plus"):
        return 1
    if sign in ("-", -1, "minus"):
        return -1
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def svetlichny(n, sign="+"):
    """Svetlichny expression assembled from MABK operators.

    Even ``n = 2k``: ``2^(k-1) (-1)^(k(k+-1)/2) M^+-``. Odd ``n = 2k+1``:
    ``2^(k+-1) ((-1)^(k(k+-1)/2) M -+ (-1)^(k(k-+1)/2) M')``. Prefactors are used
    exactly as written; see :func:`bellforge.quantum.svetlichny_ratio_report`
    for how the resulting scale compares with the reference bounds.
    """
    if n < 2:
        raise ValueError("Svetlichny needs n >= 2")
    s = _parse_sign(sign)
    m = mabk(n)
    mp = prime_partner(m)
    if n % 2 == 0:
        k = n // 2
        phase = (-1) ** ((k * (k + s)) // 2)
        base = m if s > 0 else mp
        return base.scaled(Fraction(2) ** (k - 1) * phase)
    k = (n - 1) // 2
    first = (-1) ** ((k * (k + s)) // 2)
    second = (-1) ** ((k * (k - s)) // 2)
    combo = m.scaled(first) - mp.scaled(s * second)
    return combo.scaled(Fraction(2) ** (k + s))


@dataclass(frozen=True)
class QuadraticExpression:
    """``<first>^2 + <second>^2`` with its reference bounds."""

    first: BellExpression
    second: BellExpression
    biseparable_bound: Fraction
    quantum_bound: Fraction
    base: str = "mabk"

    @property
    def n(self):
        return self.first.n

    def complex_coefficients(self):
        """Coefficients of ``first + i*second``, the linearised operator."""
        return self.first.as_array() + 1j * self.second.as_array()

    def rotated(self, phi):
        """Float coefficients of ``cos(phi) first + sin(phi) second``."""
        return np.cos(phi) * self.first.as_array() + np.sin(phi) * self.second.as_array()


def uffink(n, base="mabk"):
    if n < 3:
        raise ValueError("Uffink's quadratic inequalities need n >= 3")
    base = base.lower()
    if base == "mabk":
        first = mabk(n)
        bisep, quantum = Fraction(2) ** (n - 2), Fraction(2) ** (n - 1)
    elif base == "svetlichny":
        first = svetlichny(n, "+")
        bisep, quantum = Fraction(2) ** (2 * n - 2), Fraction(2) ** (2 * n - 1)
    else:
        raise ValueError(f"unknown Uffink base {base!r}")
    return QuadraticExpression(first, prime_partner(first), bisep, quantum, base)
