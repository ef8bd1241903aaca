"""Exact entropy and mutual information over finite supports, and learners
viewed as channels from labeled samples to hypotheses.

All logarithms are base 2; every quantity is in bits.  Zero-mass outcomes
contribute nothing (0 log 1/0 = 0).
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import xlogy

from .model import Hypothesis, HypothesisClass, LabeledSample, _as_bits
from .prob import Prior, SymmetricSampleDistribution

__all__ = [
    "entropy",
    "mutual_information",
    "LearnerChannel",
    "learner_information",
    "average_information",
    "deterministic_channel",
    "enumerate_realizable_samples",
    "load_channel",
    "save_channel",
]

_LN2 = np.log(2.0)
_MASS_TOL = 1e-9


def entropy(pmf) -> float:
    """Shannon entropy of a finite pmf, in bits."""
    p = np.asarray(pmf, dtype=float).ravel()
    if np.any(p < -1e-12):
        raise ValueError("pmf has negative mass")
    if abs(p.sum() - 1.0) > _MASS_TOL:
        raise ValueError(f"pmf mass {p.sum()} is not 1 within {_MASS_TOL}")
    return float(-xlogy(p, p).sum() / _LN2)


def mutual_information(joint) -> float:
    """Mutual information of a 2-D joint pmf, in bits.

    Computed through H(rows) + H(cols) - H(joint); negative values from
    rounding are clamped at zero (they never exceed 1e-9 on a valid joint).
    """
    j = np.asarray(joint, dtype=float)
    if j.ndim != 2:
        raise ValueError("joint pmf must be a 2-D matrix")
    if np.any(j < -1e-12):
        raise ValueError("joint pmf has negative mass")
    if abs(j.sum() - 1.0) > _MASS_TOL:
        raise ValueError(f"joint mass {j.sum()} is not 1 within {_MASS_TOL}")
    value = entropy(j.sum(axis=1)) + entropy(j.sum(axis=0)) - entropy(j)
    if value < -1e-9:
        raise ValueError(f"mutual information {value} below -1e-9; joint is inconsistent")
    return max(value, 0.0)


def _sample_key(sample: LabeledSample | Sequence[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    if isinstance(sample, LabeledSample):
        return sample.pairs
    return tuple((int(x), int(y)) for x, y in sample)


@dataclass(frozen=True)
class LearnerChannel:
    """A (possibly randomized) learner as a conditional law p(output | sample).

    ``rows`` maps each realizable ordered labeled sample to a probability
    vector over hypothesis indices; ``allowed`` gives the index set the row
    is permitted to use (its support must stay inside it).
    """

    m: int
    n_outputs: int
    rows: dict[tuple[tuple[int, int], ...], np.ndarray]
    allowed: dict[tuple[tuple[int, int], ...], tuple[int, ...]] = field(repr=False)

    def __post_init__(self) -> None:
        clean_rows = {}
        clean_allowed = {}
        for key, probs in self.rows.items():
            key = _sample_key(key)
            if len(key) != self.m:
                raise ValueError(f"sample {key} does not have m={self.m} pairs")
            p = np.asarray(probs, dtype=float).copy()
            if p.shape != (self.n_outputs,):
                raise ValueError("row length must equal the number of hypotheses")
            if np.any(p < -1e-12):
                raise ValueError("negative row probability")
            if abs(p.sum() - 1.0) > _MASS_TOL:
                raise ValueError(f"row for {key} has mass {p.sum()}, not 1 within {_MASS_TOL}")
            allowed = tuple(sorted(int(i) for i in self.allowed.get(key, ())))
            if not allowed:
                raise ValueError(f"row for {key} has an empty allowed-support set")
            outside = set(np.flatnonzero(p > 1e-12)) - set(allowed)
            if outside:
                raise ValueError(f"row for {key} puts mass outside its allowed support: {sorted(outside)}")
            p.setflags(write=False)
            clean_rows[key] = p
            clean_allowed[key] = allowed
        object.__setattr__(self, "rows", clean_rows)
        object.__setattr__(self, "allowed", clean_allowed)

    def row(self, sample: LabeledSample | Sequence[tuple[int, int]]) -> np.ndarray:
        key = _sample_key(sample)
        try:
            return self.rows[key]
        except KeyError:
            raise KeyError(f"channel has no row for sample {key}") from None

    def is_deterministic(self, tol: float = 1e-12) -> bool:
        return all(np.max(p) >= 1.0 - tol for p in self.rows.values())


def _ordered_law(law: SymmetricSampleDistribution, bits: np.ndarray):
    """Yield (sample key, probability) over ordered labeled samples."""
    for key, p in law.mass.items():
        orderings = set(itertools.permutations(key))
        share = p / len(orderings)
        for order in orderings:
            yield tuple((x, int(bits[x])) for x in order), share


def learner_information(
    cls: HypothesisClass,
    law: SymmetricSampleDistribution,
    h: int | Hypothesis | Sequence[int],
    channel: LearnerChannel,
) -> float:
    """Exact I(S; A(S)) in bits for S ~ (law, h(law))^m.

    Materializes the joint over (ordered labeled sample, output); the
    supported scale is |support| * |C| up to ~1e7 entries.
    """
    bits = cls.matrix[h] if isinstance(h, (int, np.integer)) else _as_bits(h)
    entries = list(_ordered_law(law, bits))
    joint = np.empty((len(entries), len(cls)))
    for i, (key, p) in enumerate(entries):
        joint[i] = p * channel.row(key)
    return mutual_information(joint)


def average_information(
    cls: HypothesisClass,
    prior: Prior,
    law: SymmetricSampleDistribution,
    channel: LearnerChannel,
) -> float:
    """Prior-weighted mean of per-hypothesis information leakage, in bits."""
    if len(prior) != len(cls):
        raise ValueError("prior size must match the class")
    total = 0.0
    for idx, w in enumerate(prior.weights):
        if w > 0.0:
            total += w * learner_information(cls, law, idx, channel)
    return total


def enumerate_realizable_samples(
    cls: HypothesisClass, m: int
) -> list[tuple[tuple[int, int], ...]]:
    """All ordered labeled samples of size m realizable by the class.

    There are at most n^m * |C| of them; intended for desk-scale m.
    """
    n = cls.domain.size
    out = []
    for points in itertools.product(range(n), repeat=m):
        patterns = {tuple(int(b) for b in cls.matrix[k, list(points)]) for k in range(len(cls))}
        for labels in sorted(patterns):
            out.append(tuple(zip(points, labels)))
    return out


def deterministic_channel(
    cls: HypothesisClass,
    learner_fn: Callable[[LabeledSample], int],
    m: int,
) -> LearnerChannel:
    """Wrap a deterministic learner as a point-mass channel.

    ``learner_fn`` must return a hypothesis index for every realizable
    sample of size m; each row's allowed support is the singleton output.
    """
    rows = {}
    allowed = {}
    for key in enumerate_realizable_samples(cls, m):
        out = int(learner_fn(LabeledSample(key)))
        if not 0 <= out < len(cls):
            raise ValueError(f"learner output {out} outside the class on sample {key}")
        p = np.zeros(len(cls))
        p[out] = 1.0
        rows[key] = p
        allowed[key] = (out,)
    return LearnerChannel(m, len(cls), rows, allowed)


def save_channel(channel: LearnerChannel, path: str) -> None:
    """Write a channel file: ``{"m": int, "rows": [{"sample": [[x,y]..], "probs": [..]}]}``."""
    rows = [
        {"sample": [list(pair) for pair in key], "probs": [float(v) for v in probs]}
        for key, probs in sorted(channel.rows.items())
    ]
    with open(path, "w") as fh:
        json.dump({"m": channel.m, "rows": rows}, fh, indent=2)
        fh.write("\n")


def load_channel(path: str) -> LearnerChannel:
    """Read a channel file; allowed supports are taken to be the positive entries."""
    with open(path) as fh:
        payload = json.load(fh)
    m = int(payload["m"])
    rows = {}
    allowed = {}
    n_outputs = None
    for row in payload["rows"]:
        key = tuple((int(x), int(y)) for x, y in row["sample"])
        p = np.asarray(row["probs"], dtype=float)
        if n_outputs is None:
            n_outputs = p.size
        rows[key] = p
        allowed[key] = tuple(int(i) for i in np.flatnonzero(p > 0))
    if n_outputs is None:
        raise ValueError("channel file has no rows")
    return LearnerChannel(m, n_outputs, rows, allowed)
