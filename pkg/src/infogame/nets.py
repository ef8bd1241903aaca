"""The cover-cascade learner and its information audit.

A net sequence holds covers of the class at radii eps/2, eps/4, ... under
the disagreement metric of a fixed marginal distribution, with the full
class appended as a terminal fallback so the scan always stops.  The
learner returns the first member with empirical error at most eps; the
audit measures the stopping-index distribution, its entropy, the per-net
log-size term, and the exact information leaked, and checks the tail and
entropy-chain inequalities on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .info import entropy, mutual_information
from .model import HypothesisClass, LabeledSample
from .prob import DistributionOverX, SymmetricSampleDistribution, marginal

__all__ = [
    "EpsilonNet",
    "NetSequence",
    "StoppingReport",
    "greedy_cover",
    "exact_minimal_cover",
    "build_net_sequence",
    "nets_learn",
    "stopping_report",
    "haussler_bound",
    "NetsLearner",
]

_EXACT_COVER_LIMIT = 22


@dataclass(frozen=True)
class EpsilonNet:
    """A certified cover of the class: every hypothesis is within ``radius``
    (disagreement mass) of some member."""

    radius: float
    members: tuple[int, ...]


@dataclass(frozen=True)
class NetSequence:
    """Covers at strictly halving radii eps/2^j plus the full-class fallback."""

    cls: HypothesisClass
    base_epsilon: float
    nets: tuple[EpsilonNet, ...]
    fallback: EpsilonNet
    built_for: DistributionOverX

    def all_nets(self) -> tuple[EpsilonNet, ...]:
        return self.nets + (self.fallback,)

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(net.members) for net in self.all_nets())


def _distance_matrix(cls: HypothesisClass, dist: DistributionOverX) -> np.ndarray:
    diff = cls.matrix[:, None, :] != cls.matrix[None, :, :]
    return diff @ dist.probs


def _verify_cover(dmat: np.ndarray, members: tuple[int, ...], radius: float) -> None:
    worst = dmat[list(members)].min(axis=0).max()
    if worst > radius + 1e-12:
        raise AssertionError(
            f"cover certificate failed: worst distance {worst} exceeds radius {radius}"
        )


def greedy_cover(cls: HypothesisClass, dist: DistributionOverX, eps: float) -> EpsilonNet:
    """Greedy internal eps-cover of the class.

    Repeatedly adds the hypothesis whose ball covers the most uncovered
    hypotheses, breaking ties by lowest index; may exceed the minimum size
    by up to a ln|C| factor.
    """
    if eps <= 0:
        raise ValueError("cover radius must be positive")
    dmat = _distance_matrix(cls, dist)
    covers = dmat <= eps + 1e-12
    uncovered = np.ones(len(cls), dtype=bool)
    members: list[int] = []
    while uncovered.any():
        gain = (covers & uncovered[None, :]).sum(axis=1)
        pick = int(np.argmax(gain))  # argmax takes the lowest index on ties
        members.append(pick)
        uncovered &= ~covers[pick]
    net = EpsilonNet(eps, tuple(members))
    _verify_cover(dmat, net.members, eps)
    return net


def exact_minimal_cover(cls: HypothesisClass, dist: DistributionOverX, eps: float) -> EpsilonNet:
    """A minimum-cardinality eps-cover by exhaustive subset search.

    Only valid for |C| <= 22; used to test cover-size bounds as stated.
    """
    if eps <= 0:
        raise ValueError("cover radius must be positive")
    if len(cls) > _EXACT_COVER_LIMIT:
        raise ValueError(f"class of size {len(cls)} too large for exhaustive cover search")
    import itertools

    dmat = _distance_matrix(cls, dist)
    covers = dmat <= eps + 1e-12
    indices = range(len(cls))
    for size in range(1, len(cls) + 1):
        for combo in itertools.combinations(indices, size):
            if covers[list(combo)].any(axis=0).all():
                net = EpsilonNet(eps, combo)
                _verify_cover(dmat, net.members, eps)
                return net
    raise AssertionError("the full class always covers itself")  # pragma: no cover


def haussler_bound(eps: float, d: int) -> float:
    """Packing/covering bound (4 e^2 / eps)^d on minimal cover sizes."""
    return (4.0 * math.e ** 2 / eps) ** max(d, 0)


def build_net_sequence(
    cls: HypothesisClass,
    dist: DistributionOverX,
    eps: float,
    mode: Literal["greedy", "exact"] = "greedy",
) -> NetSequence:
    """Covers at radii eps/2, eps/4, ... plus the full class as fallback.

    The cascade is truncated at the first cover certified at radius zero
    (further nets would repeat it), or at j = ceil(log2(2 eps / delta_min))
    where delta_min is the smallest positive disagreement under ``dist``;
    past that radius every cover is exact.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    if mode not in ("greedy", "exact"):
        raise ValueError(f"unknown cover mode {mode!r}")
    builder = greedy_cover if mode == "greedy" else exact_minimal_cover
    dmat = _distance_matrix(cls, dist)
    positive = dmat[dmat > 1e-12]
    if positive.size:
        delta_min = float(positive.min())
        j_max = max(1, math.ceil(math.log2(2.0 * eps / delta_min)))
    else:
        j_max = 1
    nets: list[EpsilonNet] = []
    for j in range(1, j_max + 1):
        net = builder(cls, dist, eps / 2 ** j)
        nets.append(net)
        worst = dmat[list(net.members)].min(axis=0).max()
        if worst <= 1e-12:  # radius-0 certified; later nets would be identical
            break
    fallback = EpsilonNet(0.0, tuple(range(len(cls))))
    return NetSequence(cls, eps, tuple(nets), fallback, dist)


def _scan_order(seq: NetSequence) -> tuple[np.ndarray, np.ndarray]:
    """Flattened member scan order and the start offset of each net."""
    order: list[int] = []
    offsets = [0]
    for net in seq.all_nets():
        order.extend(net.members)
        offsets.append(len(order))
    return np.asarray(order, dtype=np.intp), np.asarray(offsets, dtype=np.intp)


def nets_learn(seq: NetSequence, sample: LabeledSample, eps: float) -> tuple[int, int]:
    """Scan the nets in order and return (hypothesis index, stopping index J).

    J is 1-based; the fallback net has index len(nets)+1.  Deterministic:
    within each net, members are tried in construction order.  Raises if
    even the fallback holds nothing acceptable (non-realizable sample with
    eps below the achievable error).
    """
    sample.check_domain(seq.cls.domain)
    pts = list(sample.points)
    labels = np.asarray(sample.labels, dtype=np.int8)
    mistakes = (seq.cls.matrix[:, pts] != labels[None, :]).sum(axis=1)
    acceptable = mistakes / len(sample) <= eps + 1e-12
    for j, net in enumerate(seq.all_nets(), start=1):
        for member in net.members:
            if acceptable[member]:
                return member, j
    raise ValueError("no hypothesis reaches the target empirical error; sample is not realizable")


@dataclass(frozen=True)
class StoppingReport:
    """Audit of one (net sequence, input law, target) run of the learner."""

    eps: float
    j_pmf: tuple[float, ...]  # indexed by J-1
    net_sizes: tuple[int, ...]
    entropy_j: float
    size_term: float  # sum_j P(J=j) log2 |N_j|
    information: float
    output_entropy: float
    markov_ok: bool
    chain_ok: bool

    @property
    def chain_bound(self) -> float:
        return self.entropy_j + self.size_term

    def to_dict(self) -> dict:
        return {
            "eps": self.eps,
            "j_pmf": list(self.j_pmf),
            "net_sizes": list(self.net_sizes),
            "entropy_j": self.entropy_j,
            "size_term": self.size_term,
            "information": self.information,
            "output_entropy": self.output_entropy,
            "chain_bound": self.chain_bound,
            "markov_ok": self.markov_ok,
            "chain_ok": self.chain_ok,
        }


def stopping_report(
    seq: NetSequence,
    law: SymmetricSampleDistribution,
    h: int,
    eps: float,
) -> StoppingReport:
    """Exact stopping-index pmf, H(J), the per-net log-size term and the
    measured information for target hypothesis ``h`` under ``law``.

    Requires the law's coordinate marginal to match the distribution the
    nets were built for (otherwise the cover certificates say nothing).
    The learner is deterministic and permutation-invariant, so the joint is
    materialized on multisets; the measured information equals the ordered
    -sample information exactly.
    """
    cls = seq.cls
    n = cls.domain.size
    marg = marginal(law, n)
    drift = float(np.abs(marg.probs - seq.built_for.probs).max())
    if drift > 1e-9:
        raise ValueError(
            f"law marginal deviates from the nets' distribution by {drift}; rebuild the nets"
        )
    support = law.support()
    q = np.array([law.mass[key] for key in support])
    counts = np.zeros((len(support), n))
    for i, key in enumerate(support):
        for x in key:
            counts[i, x] += 1
    labels_h = cls.matrix[h]
    disagree = (cls.matrix != labels_h[None, :]).astype(float)  # |C| x n
    mistakes = counts @ disagree.T  # support x |C|
    acceptable = mistakes / law.m <= eps + 1e-12

    order, offsets = _scan_order(seq)
    acc_ord = acceptable[:, order]
    if not acc_ord.any(axis=1).all():
        raise ValueError("law support contains a sample the fallback cannot serve")
    first = np.argmax(acc_ord, axis=1)
    j_of = np.searchsorted(offsets, first, side="right")  # 1-based net index
    outputs = order[first]

    n_nets = len(seq.all_nets())
    j_pmf = np.bincount(j_of, weights=q, minlength=n_nets + 1)[1:]
    out_pmf = np.bincount(outputs, weights=q, minlength=len(cls))
    joint = np.zeros((len(support), len(cls)))
    joint[np.arange(len(support)), outputs] = q
    info = mutual_information(joint)
    h_j = entropy(j_pmf)
    sizes = seq.sizes()
    size_term = float(sum(p * math.log2(s) for p, s in zip(j_pmf, sizes)))
    markov_ok = all(
        j_pmf[j - 1] <= 2.0 ** (-(j - 1)) + 1e-12 for j in range(2, n_nets + 1)
    )
    chain_ok = info <= h_j + size_term + 1e-9
    return StoppingReport(
        eps=eps,
        j_pmf=tuple(float(p) for p in j_pmf),
        net_sizes=sizes,
        entropy_j=h_j,
        size_term=size_term,
        information=info,
        output_entropy=entropy(out_pmf),
        markov_ok=bool(markov_ok),
        chain_ok=bool(chain_ok),
    )


class NetsLearner:
    """Callable wrapper around (sequence, eps) with a vectorized batch path."""

    def __init__(self, seq: NetSequence, eps: float):
        self.seq = seq
        self.eps = eps
        self._order, self._offsets = _scan_order(seq)

    def __call__(self, sample: LabeledSample) -> int:
        return nets_learn(self.seq, sample, self.eps)[0]

    def batch_select(self, points: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Outputs and stopping indices for a batch of samples.

        ``points`` and ``labels`` are (trials, m) integer arrays.
        """
        mat = self.seq.cls.matrix.astype(float)
        n = self.seq.cls.domain.size
        trials, m = points.shape
        ones = np.zeros((trials, n))
        zeros = np.zeros((trials, n))
        rows = np.repeat(np.arange(trials), m)
        np.add.at(ones, (rows, points.ravel()), labels.ravel().astype(float))
        np.add.at(zeros, (rows, points.ravel()), 1.0 - labels.ravel())
        mistakes = ones @ (1.0 - mat.T) + zeros @ mat.T
        acceptable = mistakes / m <= self.eps + 1e-12
        acc_ord = acceptable[:, self._order]
        if not acc_ord.any(axis=1).all():
            raise ValueError("batch contains a sample the fallback cannot serve")
        first = np.argmax(acc_ord, axis=1)
        j_of = np.searchsorted(self._offsets, first, side="right")
        return self._order[first], j_of
