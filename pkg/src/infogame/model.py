"""Finite domains, binary hypothesis classes, labeled samples and the
combinatorial primitives on them (shattering, VC dimension, disagreement
mass, consistency).

Everything lives on an ordered finite domain whose points are the indices
``0..n-1``; a hypothesis is a bit vector of length ``n``.  All values are
immutable after construction and all operations are pure functions.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from math import comb
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Domain",
    "Hypothesis",
    "HypothesisClass",
    "LabeledSample",
    "shatters",
    "vc_dimension",
    "empirical_error",
    "true_error",
    "disagreement",
    "realizing_hypotheses",
    "make_thresholds",
    "make_full_cube",
    "make_random_class",
    "load_class",
    "save_class",
]


@dataclass(frozen=True)
class Domain:
    """Ordered finite input domain; points are the indices ``0..size-1``."""

    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError(f"domain size must be >= 1, got {self.size}")

    def check_point(self, x: int) -> None:
        if not 0 <= x < self.size:
            raise ValueError(f"point index {x} out of range for domain of size {self.size}")


@dataclass(frozen=True)
class Hypothesis:
    """A binary function on a domain, stored as a tuple of 0/1 labels."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        if not all(b in (0, 1) for b in self.bits):
            raise ValueError("hypothesis labels must be 0/1 bits")

    @classmethod
    def from_bits(cls, bits: Iterable[int]) -> "Hypothesis":
        return cls(tuple(int(b) for b in bits))

    def __len__(self) -> int:
        return len(self.bits)

    def __call__(self, x: int) -> int:
        return self.bits[x]


@dataclass(frozen=True)
class HypothesisClass:
    """An ordered, duplicate-free finite set of binary hypotheses.

    Hypothesis order is canonical: it defines the hypothesis indices that
    channels, priors and nets refer to.  Duplicate label vectors are
    dropped on construction (first occurrence wins) because every
    information quantity downstream depends only on the distinct
    functions.
    """

    domain: Domain
    hypotheses: tuple[Hypothesis, ...]
    # dense 0/1 view of the class, shape (|C|, n); derived, never mutated
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        seen: dict[tuple[int, ...], None] = {}
        for h in self.hypotheses:
            if len(h) != self.domain.size:
                raise ValueError(
                    f"hypothesis length {len(h)} != domain size {self.domain.size}"
                )
            seen.setdefault(h.bits)
        deduped = tuple(Hypothesis(bits) for bits in seen)
        object.__setattr__(self, "hypotheses", deduped)
        mat = np.array([h.bits for h in deduped], dtype=np.int8)
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    def __len__(self) -> int:
        return len(self.hypotheses)

    def index_of(self, h: Hypothesis | Sequence[int]) -> int:
        bits = tuple(int(b) for b in (h.bits if isinstance(h, Hypothesis) else h))
        for i, known in enumerate(self.hypotheses):
            if known.bits == bits:
                return i
        raise KeyError(f"hypothesis {bits} not in class")


@dataclass(frozen=True)
class LabeledSample:
    """An ordered sequence of (point index, label bit) pairs."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if len(self.pairs) < 1:
            raise ValueError("a labeled sample must contain at least one pair")
        norm = tuple((int(x), int(y)) for x, y in self.pairs)
        if not all(y in (0, 1) for _, y in norm):
            raise ValueError("labels must be 0/1 bits")
        object.__setattr__(self, "pairs", norm)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "LabeledSample":
        return cls(tuple(pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    @property
    def points(self) -> tuple[int, ...]:
        return tuple(x for x, _ in self.pairs)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(y for _, y in self.pairs)

    def check_domain(self, domain: Domain) -> None:
        for x, _ in self.pairs:
            domain.check_point(x)


def _as_bits(h: Hypothesis | Sequence[int]) -> np.ndarray:
    if isinstance(h, Hypothesis):
        return np.asarray(h.bits, dtype=np.int8)
    return np.asarray(h, dtype=np.int8)


def shatters(cls: HypothesisClass, subset: Iterable[int]) -> bool:
    """Whether the class realizes all 2^|subset| label patterns on ``subset``."""
    pts = sorted(set(int(x) for x in subset))
    for x in pts:
        cls.domain.check_point(x)
    if not pts:
        return True
    if len(cls) < 2 ** len(pts):
        return False
    patterns = {tuple(row) for row in cls.matrix[:, pts]}
    return len(patterns) == 2 ** len(pts)


def vc_dimension(cls: HypothesisClass) -> int:
    """Exact VC dimension by exhaustive subset search.

    Scans subset sizes in increasing order and stops at the first size with
    no shattered subset.  Exponential in the domain size; intended for
    desk-scale classes (n up to ~20).
    """
    if len(cls) == 0:
        raise ValueError("VC dimension of an empty class is undefined")
    n = cls.domain.size
    max_size = min(n, int(np.log2(len(cls))))  # need 2^k distinct patterns
    d = 0
    for k in range(1, max_size + 1):
        if any(shatters(cls, s) for s in itertools.combinations(range(n), k)):
            d = k
        else:
            break
    return d


def empirical_error(h: Hypothesis | Sequence[int], sample: LabeledSample) -> float:
    """Fraction of sample pairs the hypothesis mislabels (0-1 loss)."""
    bits = _as_bits(h)
    mistakes = sum(1 for x, y in sample.pairs if bits[x] != y)
    return mistakes / len(sample)


def _check_distribution(probs: np.ndarray) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if probs.ndim != 1:
        raise ValueError("distribution must be a 1-D probability vector")
    if np.any(probs < -1e-12):
        raise ValueError("distribution has negative mass")
    if abs(probs.sum() - 1.0) > 1e-9:
        raise ValueError(f"distribution mass {probs.sum()} is not 1 within 1e-9")
    return probs


def true_error(
    h: Hypothesis | Sequence[int],
    target: Hypothesis | Sequence[int],
    probs,
) -> float:
    """Probability mass of the disagreement set between ``h`` and ``target``.

    ``probs`` is a normalized distribution over domain points (anything
    array-like, including :class:`infogame.prob.DistributionOverX`).
    """
    return disagreement(h, target, probs)


def disagreement(
    h1: Hypothesis | Sequence[int],
    h2: Hypothesis | Sequence[int],
    probs,
) -> float:
    """Distribution mass of ``{x : h1(x) != h2(x)}`` (a pseudometric on C)."""
    p = _check_distribution(getattr(probs, "probs", probs))
    b1, b2 = _as_bits(h1), _as_bits(h2)
    if len(b1) != len(b2) or len(b1) != len(p):
        raise ValueError("hypotheses and distribution must share the domain")
    return float(p[b1 != b2].sum())


def realizing_hypotheses(cls: HypothesisClass, sample: LabeledSample) -> tuple[int, ...]:
    """Indices of all hypotheses consistent with the sample.

    An empty result marks the sample as non-realizable for the class.
    """
    sample.check_domain(cls.domain)
    pts = list(sample.points)
    labels = np.asarray(sample.labels, dtype=np.int8)
    ok = np.all(cls.matrix[:, pts] == labels[None, :], axis=1)
    return tuple(int(i) for i in np.flatnonzero(ok))


def make_thresholds(n: int) -> HypothesisClass:
    """The n+1 threshold functions h_t(x) = 1 iff x >= t, listed from the
    all-zeros function (t = n) down to the all-ones function (t = 0)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    hyps = [
        Hypothesis(tuple(1 if x >= t else 0 for x in range(n)))
        for t in range(n, -1, -1)
    ]
    return HypothesisClass(Domain(n), tuple(hyps))


def make_full_cube(n: int) -> HypothesisClass:
    """All 2^n binary functions on n points, in lexicographic order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    hyps = [Hypothesis(bits) for bits in itertools.product((0, 1), repeat=n)]
    return HypothesisClass(Domain(n), tuple(hyps))


def make_random_class(n: int, c: int, seed: int) -> HypothesisClass:
    """``c`` distinct uniformly random hypotheses on ``n`` points.

    Deterministic in ``seed``.
    """
    if n < 1 or c < 1:
        raise ValueError("n and c must be >= 1")
    if c > 2 ** n:
        raise ValueError(f"cannot draw {c} distinct hypotheses on {n} points")
    rng = np.random.default_rng(seed)
    seen: dict[tuple[int, ...], None] = {}
    while len(seen) < c:
        row = tuple(int(b) for b in rng.integers(0, 2, size=n))
        seen.setdefault(row)
    return HypothesisClass(Domain(n), tuple(Hypothesis(bits) for bits in seen))


def save_class(cls: HypothesisClass, path: str) -> None:
    """Write a class file: ``{"n": int, "hypotheses": [bitstrings]}``."""
    payload = {
        "n": cls.domain.size,
        "hypotheses": ["".join(str(b) for b in h.bits) for h in cls.hypotheses],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_class(path: str) -> HypothesisClass:
    """Read a class file written by :func:`save_class`."""
    with open(path) as fh:
        payload = json.load(fh)
    n = int(payload["n"])
    hyps = []
    for s in payload["hypotheses"]:
        if len(s) != n:
            raise ValueError(f"bitstring {s!r} does not match domain size {n}")
        hyps.append(Hypothesis(tuple(int(ch) for ch in s)))
    return HypothesisClass(Domain(n), tuple(hyps))


def num_multisets(n: int, m: int) -> int:
    """Number of size-m multisets over n points (support size of a symmetric law)."""
    return comb(n + m - 1, m)
