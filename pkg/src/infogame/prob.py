"""Distributions over the domain, symmetric laws over size-m samples,
priors over a hypothesis class, and the labeled-sample laws they induce.

A symmetric law (invariant under coordinate permutations) is stored on
multisets: the key is the sorted m-tuple of point indices and the ordered
law is uniform over the distinct orderings of each multiset.  This shrinks
state from n^m points to C(n+m-1, m).
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .model import Domain, Hypothesis, HypothesisClass, LabeledSample, _as_bits

__all__ = [
    "DistributionOverX",
    "SymmetricSampleDistribution",
    "Prior",
    "SampleLaw",
    "iid_to_symmetric",
    "mix",
    "marginal",
    "l1_distance",
    "sample_law",
    "draw_sample",
    "permutation_count",
    "load_distribution",
    "save_distribution",
    "load_symmetric",
    "save_symmetric",
]

_MASS_TOL = 1e-9


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.asarray(arr, dtype=float).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DistributionOverX:
    """A probability vector over the n domain points."""

    probs: np.ndarray

    def __post_init__(self) -> None:
        p = _freeze(self.probs)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("probs must be a nonempty 1-D vector")
        if np.any(p < -1e-12):
            raise ValueError("negative probability mass")
        if abs(p.sum() - 1.0) > _MASS_TOL:
            raise ValueError(f"mass {p.sum()} is not 1 within {_MASS_TOL}")
        object.__setattr__(self, "probs", p)

    @classmethod
    def uniform(cls, n: int) -> "DistributionOverX":
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, n: int, x: int) -> "DistributionOverX":
        p = np.zeros(n)
        p[x] = 1.0
        return cls(p)

    @property
    def n(self) -> int:
        return self.probs.size

    def __getitem__(self, x: int) -> float:
        return float(self.probs[x])


def permutation_count(multiset: Sequence[int]) -> int:
    """Number of distinct orderings of a multiset."""
    counts = Counter(multiset)
    total = math.factorial(len(multiset))
    for c in counts.values():
        total //= math.factorial(c)
    return total


@dataclass(frozen=True)
class SymmetricSampleDistribution:
    """A permutation-invariant law over X^m, stored on sorted m-tuples."""

    m: int
    mass: dict[tuple[int, ...], float]

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("sample size m must be >= 1")
        clean: dict[tuple[int, ...], float] = {}
        total = 0.0
        for key, p in self.mass.items():
            key = tuple(int(x) for x in key)
            if len(key) != self.m:
                raise ValueError(f"multiset {key} does not have m={self.m} entries")
            if any(key[i] > key[i + 1] for i in range(len(key) - 1)):
                raise ValueError(f"multiset key {key} is not sorted")
            p = float(p)
            if p < -1e-12:
                raise ValueError("negative multiset mass")
            if p != 0.0:
                clean[key] = clean.get(key, 0.0) + p
            total += p
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"total mass {total} is not 1 within {_MASS_TOL}")
        object.__setattr__(self, "mass", clean)

    @classmethod
    def point_mass(cls, multiset: Sequence[int]) -> "SymmetricSampleDistribution":
        key = tuple(sorted(int(x) for x in multiset))
        return cls(len(key), {key: 1.0})

    def support(self) -> list[tuple[int, ...]]:
        return sorted(self.mass)

    def __getitem__(self, multiset: Sequence[int]) -> float:
        return self.mass.get(tuple(sorted(int(x) for x in multiset)), 0.0)


@dataclass(frozen=True)
class Prior:
    """A probability vector over the hypotheses of a fixed class."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = _freeze(self.weights)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("weights must be a nonempty 1-D vector")
        if np.any(w < -1e-12):
            raise ValueError("negative prior weight")
        if abs(w.sum() - 1.0) > _MASS_TOL:
            raise ValueError(f"prior mass {w.sum()} is not 1 within {_MASS_TOL}")
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, size: int) -> "Prior":
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def point_mass(cls, size: int, index: int) -> "Prior":
        w = np.zeros(size)
        w[index] = 1.0
        return cls(w)

    def __len__(self) -> int:
        return self.weights.size

    def __getitem__(self, i: int) -> float:
        return float(self.weights[i])


@dataclass(frozen=True)
class SampleLaw:
    """The law of an ordered labeled sample S ~ (X, h(X))^m.

    Support is restricted to samples labeled consistently by the generating
    hypothesis; ordered-tuple probabilities are multiset mass divided by the
    permutation count.
    """

    m: int
    mass: dict[LabeledSample, float]
    source: SymmetricSampleDistribution = field(compare=False)
    hypothesis: Hypothesis = field(compare=False)

    def __post_init__(self) -> None:
        total = 0.0
        for s, p in self.mass.items():
            if len(s) != self.m:
                raise ValueError("sample length mismatch in law")
            if any(self.hypothesis(x) != y for x, y in s.pairs):
                raise ValueError(f"sample {s} not labeled by the generating hypothesis")
            total += p
        if abs(total - 1.0) > _MASS_TOL:
            raise ValueError(f"sample-law mass {total} is not 1 within {_MASS_TOL}")

    def support(self) -> list[LabeledSample]:
        return sorted(self.mass, key=lambda s: s.pairs)


def iid_to_symmetric(dist: DistributionOverX, m: int) -> SymmetricSampleDistribution:
    """The symmetric law of m i.i.d. draws from ``dist``.

    The multiset {x_1..x_m} receives mass multinomial(m; multiplicities)
    times the product of the point probabilities.
    """
    if m < 1:
        raise ValueError("sample size m must be >= 1")
    support = [x for x in range(dist.n) if dist.probs[x] > 0.0]
    mass: dict[tuple[int, ...], float] = {}
    for key in itertools.combinations_with_replacement(support, m):
        p = permutation_count(key)
        for x in key:
            p *= dist[x]
        mass[key] = p
    return SymmetricSampleDistribution(m, mass)


def mix(
    components: Sequence[SymmetricSampleDistribution],
    weights,
) -> SymmetricSampleDistribution:
    """Pointwise convex combination of symmetric laws with a common m."""
    if not components:
        raise ValueError("need at least one component")
    w = np.asarray(weights, dtype=float)
    if w.size != len(components):
        raise ValueError("weights length must match components")
    if np.any(w < -1e-12) or abs(w.sum() - 1.0) > _MASS_TOL:
        raise ValueError("weights must form a probability vector")
    m = components[0].m
    if any(c.m != m for c in components):
        raise ValueError("all components must share the sample size m")
    mass: dict[tuple[int, ...], float] = {}
    for wi, comp in zip(w, components):
        if wi == 0.0:
            continue
        for key, p in comp.mass.items():
            mass[key] = mass.get(key, 0.0) + wi * p
    return SymmetricSampleDistribution(m, mass)


def marginal(law: SymmetricSampleDistribution, n: int | None = None) -> DistributionOverX:
    """The common per-coordinate marginal of a symmetric law.

    Equals, for each x, the expected fraction of coordinates landing on x.
    ``n`` fixes the domain size; by default it is inferred from the support.
    """
    if n is None:
        n = max(max(key) for key in law.mass) + 1
    probs = np.zeros(n)
    for key, p in law.mass.items():
        for x in key:
            probs[x] += p / law.m
    return DistributionOverX(probs / probs.sum())


def l1_distance(p: Prior, q: Prior) -> float:
    """Statistical distance sum_h |P(h) - Q(h)| (between 0 and 2)."""
    if len(p) != len(q):
        raise ValueError("priors live on classes of different sizes")
    return float(np.abs(p.weights - q.weights).sum())


def sample_law(law: SymmetricSampleDistribution, h: Hypothesis | Sequence[int]) -> SampleLaw:
    """Law of the ordered labeled sample with x-part drawn from ``law`` and
    labels forced by ``h``.

    Materializes every ordered arrangement of every supported multiset;
    meant for desk-scale supports (use the multiset representation
    directly for anything larger).
    """
    bits = _as_bits(h)
    mass: dict[LabeledSample, float] = {}
    for key, p in law.mass.items():
        orderings = set(itertools.permutations(key))
        share = p / len(orderings)
        for order in orderings:
            pairs = tuple((x, int(bits[x])) for x in order)
            mass[LabeledSample(pairs)] = share
    hyp = h if isinstance(h, Hypothesis) else Hypothesis.from_bits(h)
    return SampleLaw(law.m, mass, law, hyp)


def draw_sample(law: SampleLaw, seed) -> LabeledSample:
    """Draw one labeled sample; deterministic in the seed.

    ``seed`` may be an int or a ``numpy.random.Generator`` so concurrent
    experiments can own independent generators.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    samples = law.support()
    probs = np.array([law.mass[s] for s in samples])
    idx = rng.choice(len(samples), p=probs / probs.sum())
    return samples[idx]


def save_distribution(dist: DistributionOverX, path: str) -> None:
    with open(path, "w") as fh:
        json.dump({"probs": [float(p) for p in dist.probs]}, fh, indent=2)
        fh.write("\n")


def load_distribution(path: str) -> DistributionOverX:
    with open(path) as fh:
        payload = json.load(fh)
    return DistributionOverX(np.asarray(payload["probs"], dtype=float))


def save_symmetric(law: SymmetricSampleDistribution, path: str) -> None:
    rows = [{"multiset": list(key), "p": float(p)} for key, p in sorted(law.mass.items())]
    with open(path, "w") as fh:
        json.dump({"m": law.m, "mass": rows}, fh, indent=2)
        fh.write("\n")


def load_symmetric(path: str) -> SymmetricSampleDistribution:
    with open(path) as fh:
        payload = json.load(fh)
    mass = {tuple(row["multiset"]): float(row["p"]) for row in payload["mass"]}
    return SymmetricSampleDistribution(int(payload["m"]), mass)
