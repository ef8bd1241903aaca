"""Exact-rational recomputation of the information quantities.

Probabilities are assembled as ``fractions.Fraction`` values (float inputs
convert exactly, since binary floats are rationals), and entropies are then
evaluated with 50-digit mpmath logarithms.  This is the oracle mode used to
certify the float pipeline; it is practical for supports up to ~1e4 points.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter
from fractions import Fraction
from typing import Sequence

import mpmath as mp

from .info import LearnerChannel
from .model import HypothesisClass

__all__ = [
    "exact_iid_symmetric",
    "exact_entropy",
    "exact_mutual_information",
    "exact_learner_information",
]

_DPS = 50


def exact_iid_symmetric(probs: Sequence[Fraction], m: int) -> dict[tuple[int, ...], Fraction]:
    """Multiset law of m i.i.d. draws, in exact rational arithmetic."""
    support = [x for x, p in enumerate(probs) if p != 0]
    mass: dict[tuple[int, ...], Fraction] = {}
    for key in itertools.combinations_with_replacement(support, m):
        counts = Counter(key)
        perm = Fraction(math.factorial(m))
        for c in counts.values():
            perm /= math.factorial(c)
        p = perm
        for x in key:
            p *= Fraction(probs[x])
        mass[key] = p
    return mass


def _entropy_terms(values) -> float:
    with mp.workdps(_DPS):
        total = mp.mpf(0)
        for v in values:
            if v == 0:
                continue
            x = mp.mpf(v.numerator) / mp.mpf(v.denominator)
            total -= x * mp.log(x, 2)
        return float(total)


def exact_entropy(pmf: Sequence[Fraction]) -> float:
    """Entropy in bits of an exactly-rational pmf."""
    total = sum(pmf, Fraction(0))
    if total != 1:
        raise ValueError(f"pmf mass {total} is not exactly 1")
    return _entropy_terms(pmf)


def exact_mutual_information(joint: Sequence[Sequence[Fraction]]) -> float:
    """Mutual information in bits of an exactly-rational joint pmf."""
    rows = [sum(row, Fraction(0)) for row in joint]
    ncols = len(joint[0])
    cols = [sum((row[j] for row in joint), Fraction(0)) for j in range(ncols)]
    if sum(rows, Fraction(0)) != 1:
        raise ValueError("joint mass is not exactly 1")
    flat = [v for row in joint for v in row]
    return _entropy_terms(rows) + _entropy_terms(cols) - _entropy_terms(flat)


def exact_learner_information(
    cls: HypothesisClass,
    iid_probs: Sequence[Fraction],
    m: int,
    h: int,
    channel: LearnerChannel,
) -> float:
    """Exact-rational recomputation of I(S; A(S)) for an i.i.d. input law.

    Channel probabilities are converted float-to-Fraction without rounding,
    so the only approximation anywhere is the final 50-digit logarithm.
    """
    bits = cls.matrix[h]
    joint: list[list[Fraction]] = []
    for points in itertools.product(range(len(iid_probs)), repeat=m):
        p = Fraction(1)
        for x in points:
            p *= Fraction(iid_probs[x])
        if p == 0:
            continue
        key = tuple((x, int(bits[x])) for x in points)
        row = channel.row(key)
        joint.append([p * Fraction(float(v)) for v in row])
    return exact_mutual_information(joint)
