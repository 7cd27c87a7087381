"""Orbits of WWWZB sign tables under relabelling.

The relabelling group is generated by party permutations, per-party setting
swaps ``A <-> A'``, independent negations ``A -> -A`` and ``A' -> -A'`` per
party, and global negation. It acts on a coefficient vector as a signed
permutation of setting keys.

Two independent routes find the orbits: :func:`canonical_form` minimises over
the whole group, and :func:`orbit_partition` runs union-find over generator
images only.
"""

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product

import numpy as np

from .bounds import local_bound
from .inequalities import BellExpression, SignTable, mabk, sign_table_from_expression, wwzb_from_sign_table
from .quantum import DEFAULT_SEED, optimize_angles, seesaw_oracle
from .selftest import anticommutation_residual, uniqueness_scan

MAX_TABLE_PARTIES = 4
TRIVIAL_TOL = 1e-8

_H = Fraction(1, 2)
# labelled tripartite classes: (label, representative, factor turning it into a sign-table expression)
TRIPARTITE_REPRESENTATIVES = (
    ("Mermin", mabk(3), Fraction(1)),
    ("unbalanced", BellExpression(3, {"000": 3, "001": 1, "010": 1, "100": 1,
                                      "011": -1, "101": -1, "110": -1, "111": 1}), Fraction(1, 4)),
    ("extended-CHSH", BellExpression(3, {"000": _H, "100": _H, "011": _H, "111": -_H}), Fraction(1)),
    ("CHSH-like", BellExpression(3, {"000": _H, "010": _H, "100": _H, "110": -_H}), Fraction(1)),
)

GROUP_DESCRIPTION = ("party permutations x per-party setting swaps x per-party independent "
                     "negation of A and A' x global sign")


def enumerate_sign_tables(n):
    """All ``2^(2^n)`` sign tables in index order."""
    if n < 1 or n > MAX_TABLE_PARTIES:
        raise ValueError(f"sign-table enumeration is limited to 1 <= n <= {MAX_TABLE_PARTIES}")
    for index in range(2 ** (2 ** n)):
        yield SignTable.from_index(n, index)


def _key_bits(n):
    idx = np.arange(2 ** n)
    return (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


def _element(n, perm, swap, neg_a, neg_ap, sign):
    """Destination index and sign per source key for one group element."""
    bits = _key_bits(n)
    moved = np.empty_like(bits)
    moved[:, list(perm)] = bits
    moved ^= np.array(swap)[None, :]
    dest = (moved << (n - 1 - np.arange(n))[None, :]).sum(axis=1)
    neg = np.where(bits == 0, np.array(neg_a)[None, :], np.array(neg_ap)[None, :])
    signs = sign * np.prod(neg, axis=1)
    return dest, signs


@lru_cache(maxsize=None)
def group_arrays(n):
    """``(dest, signs)`` arrays of shape ``(|G|, 2^n)`` for every parameter combination."""
    dests, signs = [], []
    flips = list(product((0, 1), repeat=n))
    negs = list(product((1, -1), repeat=n))
    for perm in permutations(range(n)):
        for swap in flips:
            for na in negs:
                for nap in negs:
                    for g in (1, -1):
                        d, s = _element(n, perm, swap, na, nap, g)
                        dests.append(d)
                        signs.append(s)
    return np.array(dests), np.array(signs, dtype=np.int64)


def _group_images(numer, n):
    dests, signs = group_arrays(n)
    images = np.zeros((dests.shape[0], numer.shape[0]), dtype=np.int64)
    np.put_along_axis(images, dests, numer[None, :] * signs, axis=1)
    return images


def _lex_min_row(rows):
    keep = np.arange(rows.shape[0])
    for col in range(rows.shape[1]):
        column = rows[keep, col]
        keep = keep[column == column.min()]
        if keep.size == 1:
            break
    return rows[keep[0]]


def canonical_form(expr):
    """Lexicographically smallest image of ``expr`` under the relabelling group.

    Coefficients are compared as integer numerators over the (invariant) common
    denominator, in key order ``00..0, 00..1, ...``.
    """
    if expr.n > MAX_TABLE_PARTIES:
        raise ValueError(f"canonical forms are limited to n <= {MAX_TABLE_PARTIES}")
    numer, den = expr.numerators()
    return BellExpression.from_array(expr.n, _lex_min_row(_group_images(numer, expr.n)), den)


# generators, written directly on setting keys (independent of group_arrays)

def _generators(n):
    gens = []
    for j in range(n - 1):
        gens.append(("transpose", j))
    for j in range(n):
        gens += [("swap", j), ("neg_a", j), ("neg_ap", j)]
    gens.append(("global", None))
    return gens


def _apply_generator(expr, gen):
    kind, j = gen
    out = {}
    for key, value in expr:
        if kind == "transpose":
            ks = list(key)
            ks[j], ks[j + 1] = ks[j + 1], ks[j]
            out["".join(ks)] = value
        elif kind == "swap":
            out[key[:j] + ("1" if key[j] == "0" else "0") + key[j + 1:]] = value
        elif kind == "neg_a":
            out[key] = -value if key[j] == "0" else value
        elif kind == "neg_ap":
            out[key] = -value if key[j] == "1" else value
        else:
            out[key] = -value
    return BellExpression(expr.n, out)


def _generator_arrays(n, gen):
    """Destination key index and sign of each unit correlator under ``gen``."""
    dest = np.empty(2 ** n, dtype=np.int64)
    signs = np.empty(2 ** n, dtype=np.int64)
    for i in range(2 ** n):
        key = format(i, f"0{n}b")
        ((image, value),) = _apply_generator(BellExpression(n, {key: 1}), gen)
        dest[i] = int(image, 2)
        signs[i] = value
    return dest, signs


def _all_table_signs(n):
    index = np.arange(2 ** (2 ** n), dtype=np.int64)
    bits = (index[:, None] >> np.arange(2 ** n)[None, :]) & 1
    return 1 - 2 * bits


def orbit_partition(n):
    """Union-find over generator images; returns orbits as sorted lists of table indices.

    Every table is mapped to its sign-table expression (numerators over
    ``2^n``), each generator is applied as a signed key permutation and the
    image is transformed back to a table index.
    """
    if n < 1 or n > MAX_TABLE_PARTIES:
        raise ValueError(f"sign-table enumeration is limited to 1 <= n <= {MAX_TABLE_PARTIES}")
    size = 2 ** (2 ** n)
    signs = _all_table_signs(n)
    numer = _batch_wht(signs)
    weights = 1 << np.arange(2 ** n, dtype=np.int64)
    parent = np.arange(size)

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for gen in _generators(n):
        dest, gsign = _generator_arrays(n, gen)
        moved = np.zeros_like(numer)
        moved[:, dest] = numer * gsign[None, :]
        image_signs = _batch_wht(moved) // (2 ** n)
        if np.any(np.abs(image_signs) != 1):
            raise RuntimeError("relabelling left the sign-table family")
        images = ((image_signs < 0) * weights[None, :]).sum(axis=1)
        for i, j in zip(range(size), images.tolist()):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    orbits = {}
    for i in range(size):
        orbits.setdefault(int(find(i)), []).append(i)
    return sorted(orbits.values())


def _batch_wht(rows):
    # the transform is its own inverse up to a factor 2^n
    x = np.asarray(rows, dtype=np.int64)
    n = x.shape[1].bit_length() - 1
    x = x.reshape((x.shape[0],) + (2,) * n)
    for axis in range(1, n + 1):
        a = np.take(x, 0, axis=axis)
        b = np.take(x, 1, axis=axis)
        x = np.stack([a + b, a - b], axis=axis)
    return x.reshape(rows.shape[0], -1)


@dataclass
class FacetClass:
    label: str
    representative: BellExpression
    orbit_size: int
    local_bound: Fraction
    quantum_value: float
    quantum_value_oracle: float
    residuals: list
    selftest_verdict: str
    members: list = field(default_factory=list, repr=False)
    canonical: BellExpression = field(default=None, repr=False)

    def row(self):
        return {
            "label": self.label,
            "orbit_size": self.orbit_size,
            "local_bound": str(self.local_bound),
            "quantum_value_fastpath": f"{self.quantum_value:.12f}",
            "quantum_value_oracle": f"{self.quantum_value_oracle:.12f}",
            "residuals": ";".join(f"{r:.9f}" for r in self.residuals),
            "verdict": self.selftest_verdict,
        }


CSV_COLUMNS = ("label", "orbit_size", "local_bound", "quantum_value_fastpath",
               "quantum_value_oracle", "residuals", "verdict")


def _labels(n):
    if n != 3:
        return {}
    out = {}
    for label, rep, factor in TRIPARTITE_REPRESENTATIVES:
        if sign_table_from_expression(rep.scaled(factor)) is None:
            raise RuntimeError(f"{label} representative is not a rescaled sign-table expression")
        out[canonical_form(rep.scaled(factor))] = (label, rep)
    return out


def classify(n, restarts=10, samples=64, seed=DEFAULT_SEED):
    """One :class:`FacetClass` per orbit, in order of each orbit's first table index."""
    orbits = orbit_partition(n)
    labels = _labels(n)
    classes = []
    counter = 0
    for members in orbits:
        first = wwzb_from_sign_table(SignTable.from_index(n, members[0]))
        canon = canonical_form(first)
        label, rep = labels.get(canon, (None, canon))
        bound = local_bound(rep, max_strategies=1).local_bound
        fast = optimize_angles(rep, seed=seed)
        oracle = seesaw_oracle(rep, restarts=restarts, seed=seed)
        residuals = anticommutation_residual(fast.angles)
        trivial = abs(max(fast.value, oracle.value) - float(bound)) <= TRIVIAL_TOL
        if trivial:
            label, verdict = "trivial", "none"
        else:
            if label is None:
                counter += 1
                label = f"orbit-{counter}"
            verdict = uniqueness_scan(rep, samples=samples, seed=seed, optimum=fast).verdict
        classes.append(FacetClass(label, rep, len(members), bound, fast.value, oracle.value,
                                  residuals, verdict, members, canon))
    return classes


def classes_to_csv(classes):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for c in classes:
        writer.writerow(c.row())
    return buf.getvalue()
