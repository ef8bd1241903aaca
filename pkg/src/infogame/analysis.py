"""Prior-perturbation stability of the leaked information, average
information complexity over a vertex sweep, and the seeded Monte Carlo
generalization experiment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .info import LearnerChannel, average_information, learner_information
from .model import HypothesisClass, LabeledSample
from .nets import NetsLearner
from .prob import DistributionOverX, Prior, SymmetricSampleDistribution, l1_distance

__all__ = [
    "StabilityReport",
    "GeneralizationReport",
    "ShiftReport",
    "stability_check",
    "sample_complexity_shift",
    "average_information_complexity",
    "generalization_experiment",
]


@dataclass(frozen=True)
class StabilityReport:
    """Both sides of the prior-perturbation bounds on average leakage."""

    lhs: float  # |E_P I - E_Q I|
    cs_bound: float  # sqrt(E_P I^2 + E_Q I^2) * sqrt(||P-Q||_1)
    l1: float
    per_h_information: tuple[float, ...]
    mean_p: float
    mean_q: float
    ratio_cap: float | None = None
    ratio_bound_ok: bool | None = None

    def __post_init__(self) -> None:
        if self.lhs > self.cs_bound + 1e-9:
            raise AssertionError(
                f"Cauchy-Schwarz bound violated: {self.lhs} > {self.cs_bound}"
            )

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "cs_bound": self.cs_bound,
            "l1": self.l1,
            "mean_p": self.mean_p,
            "mean_q": self.mean_q,
            "per_h_information": list(self.per_h_information),
            "ratio_cap": self.ratio_cap,
            "ratio_bound_ok": self.ratio_bound_ok,
        }


def per_hypothesis_information(
    cls: HypothesisClass,
    law: SymmetricSampleDistribution,
    channel: LearnerChannel,
) -> np.ndarray:
    """Exact I(S_h; A(S_h)) for every hypothesis in the class."""
    return np.array(
        [learner_information(cls, law, h, channel) for h in range(len(cls))]
    )


def stability_check(
    cls: HypothesisClass,
    p: Prior,
    q: Prior,
    law: SymmetricSampleDistribution,
    channel: LearnerChannel,
    ratio_cap: float | None = None,
    info: np.ndarray | None = None,
) -> StabilityReport:
    """Evaluate the perturbation bounds on |E_P I - E_Q I| exactly.

    The Cauchy-Schwarz side sqrt(E_P I^2 + E_Q I^2) * sqrt(||P-Q||_1) is
    always computed; the density-ratio side E_Q I <= C E_P I is checked
    only when a cap C with sup_h Q(h)/P(h) <= C is supplied (a violated
    cap is an error, not a silent skip).  ``info`` short-circuits the
    per-hypothesis computation when the caller already has it.
    """
    if len(p) != len(cls) or len(q) != len(cls):
        raise ValueError("priors must match the class size")
    if info is None:
        info = per_hypothesis_information(cls, law, channel)
    mean_p = float(p.weights @ info)
    mean_q = float(q.weights @ info)
    l1 = l1_distance(p, q)
    lhs = abs(mean_p - mean_q)
    second = float(p.weights @ info ** 2 + q.weights @ info ** 2)
    cs_bound = math.sqrt(second) * math.sqrt(l1)
    ratio_ok = None
    if ratio_cap is not None:
        if np.any(q.weights > ratio_cap * p.weights + 1e-12):
            raise ValueError(
                f"density-ratio cap {ratio_cap} is violated by the supplied priors"
            )
        ratio_ok = bool(mean_q <= ratio_cap * mean_p + 1e-9)
    return StabilityReport(
        lhs=lhs,
        cs_bound=cs_bound,
        l1=l1,
        per_h_information=tuple(float(v) for v in info),
        mean_p=mean_p,
        mean_q=mean_q,
        ratio_cap=ratio_cap,
        ratio_bound_ok=ratio_ok,
    )


def average_information_complexity(
    cls: HypothesisClass,
    prior: Prior,
    channel: LearnerChannel,
    strategy_vertices: Sequence[SymmetricSampleDistribution],
) -> tuple[float, int]:
    """Max of the average leakage over the supplied strategy vertices.

    Returns (value in bits, arg-max vertex position).  This is exact on the
    vertex list; for the supremum over a full convex set refine with
    :func:`infogame.minimax.best_response_nature` (the payoff is concave,
    so vertices alone only give a lower bound).
    """
    if not strategy_vertices:
        raise ValueError("need at least one strategy vertex")
    values = [
        average_information(cls, prior, law, channel) for law in strategy_vertices
    ]
    best = int(np.argmax(values))
    return float(values[best]), best


@dataclass(frozen=True)
class GeneralizationReport:
    """Monte Carlo estimates of Pr[true error > 2 eps] for a learner."""

    m: int
    eps: float
    trials: int
    seed: int
    cut: float
    prior_weights: tuple[float, ...]
    per_h_failure: tuple[float, ...]  # nan where a hypothesis drew no trials
    per_h_se: tuple[float, ...]
    per_h_trials: tuple[int, ...]
    average_failure: float
    average_se: float
    mass_above_cut: float

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "eps": self.eps,
            "trials": self.trials,
            "seed": self.seed,
            "cut": self.cut,
            "per_h_failure": list(self.per_h_failure),
            "per_h_se": list(self.per_h_se),
            "per_h_trials": list(self.per_h_trials),
            "average_failure": self.average_failure,
            "average_se": self.average_se,
            "mass_above_cut": self.mass_above_cut,
        }


def generalization_experiment(
    cls: HypothesisClass,
    prior: Prior,
    learner: Callable[[LabeledSample], int] | NetsLearner,
    dist: DistributionOverX,
    m: int,
    eps: float,
    trials: int,
    seed: int,
    cut: float = 0.1,
) -> GeneralizationReport:
    """Estimate tail probabilities of the true error at threshold 2 eps.

    Each trial draws h from the prior and an i.i.d. sample of size m from
    ``dist`` labeled by h, runs the learner, and measures the exact true
    error of the output against h under ``dist``.  Deterministic in
    ``seed``.  ``mass_above_cut`` is the prior mass of hypotheses whose
    estimated failure probability exceeds ``cut``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    K = len(cls)
    n = cls.domain.size
    diff = cls.matrix[:, None, :] != cls.matrix[None, :, :]
    dmat = diff @ dist.probs  # exact true-error lookup table

    counts = rng.multinomial(trials, prior.weights)
    fail_counts = np.zeros(K)
    threshold = 2.0 * eps
    for h in range(K):
        t_h = int(counts[h])
        if t_h == 0:
            continue
        points = rng.choice(n, size=(t_h, m), p=dist.probs)
        labels = cls.matrix[h][points]
        if isinstance(learner, NetsLearner):
            outputs, _ = learner.batch_select(points, labels)
        else:
            outputs = np.array(
                [
                    learner(LabeledSample(tuple(zip(map(int, pts), map(int, labs)))))
                    for pts, labs in zip(points, labels)
                ]
            )
        fail_counts[h] = float((dmat[h, outputs] > threshold).sum())

    with np.errstate(invalid="ignore", divide="ignore"):
        per_h = np.where(counts > 0, fail_counts / np.maximum(counts, 1), np.nan)
        per_h_se = np.where(
            counts > 0,
            np.sqrt(np.maximum(per_h * (1 - per_h), 0.0) / np.maximum(counts, 1)),
            np.nan,
        )
    avg = float(fail_counts.sum() / trials)
    avg_se = math.sqrt(max(avg * (1 - avg), 0.0) / trials)
    above = np.nan_to_num(per_h, nan=0.0) > cut
    mass_above = float(prior.weights[above].sum())
    return GeneralizationReport(
        m=m,
        eps=eps,
        trials=trials,
        seed=seed,
        cut=cut,
        prior_weights=tuple(float(v) for v in prior.weights),
        per_h_failure=tuple(float(v) for v in per_h),
        per_h_se=tuple(float(v) for v in per_h_se),
        per_h_trials=tuple(int(v) for v in counts),
        average_failure=avg,
        average_se=avg_se,
        mass_above_cut=mass_above,
    )


@dataclass(frozen=True)
class ShiftReport:
    """Shifted-confidence accounting when the assumed prior is wrong."""

    l1: float
    failure_at_p: float
    guaranteed_bound: float  # failure_at_p + ||P-Q||_1, clipped at 1
    measured_at_q: float
    measured_se: float
    ok: bool

    def to_dict(self) -> dict:
        return {
            "l1": self.l1,
            "failure_at_p": self.failure_at_p,
            "guaranteed_bound": self.guaranteed_bound,
            "measured_at_q": self.measured_at_q,
            "measured_se": self.measured_se,
            "ok": self.ok,
        }


def sample_complexity_shift(
    cls: HypothesisClass,
    learner: Callable[[LabeledSample], int] | NetsLearner,
    dist: DistributionOverX,
    report: GeneralizationReport,
    q: Prior,
    seed: int | None = None,
) -> ShiftReport:
    """Failure bound under a perturbed prior, verified empirically.

    A learner with average failure delta under P keeps average failure at
    most delta + ||P-Q||_1 under Q; the bound is re-measured by rerunning
    the experiment with the same configuration under Q (fresh seed unless
    given) and accepted within three Monte Carlo standard errors.
    """
    p = Prior(np.asarray(report.prior_weights))
    l1 = l1_distance(p, q)
    bound = min(1.0, report.average_failure + l1)
    rerun = generalization_experiment(
        cls,
        q,
        learner,
        dist,
        report.m,
        report.eps,
        report.trials,
        report.seed + 1 if seed is None else seed,
        cut=report.cut,
    )
    slack = 3.0 * math.sqrt(report.average_se ** 2 + rerun.average_se ** 2)
    return ShiftReport(
        l1=l1,
        failure_at_p=report.average_failure,
        guaranteed_bound=bound,
        measured_at_q=rerun.average_failure,
        measured_se=rerun.average_se,
        ok=bool(rerun.average_failure <= bound + slack),
    )
