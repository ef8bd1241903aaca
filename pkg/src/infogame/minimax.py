"""Saddle-point machinery for the average-information game.

The learner picks a channel from realizable labeled samples to hypotheses
(rows constrained to an empirical-error budget); nature picks a symmetric
law over size-m inputs from a convex strategy set.  The payoff, nature's
gain, is the prior-weighted average over target hypotheses of the mutual
information between the sample and the output.  It is convex in the
channel and concave in the input law, so the game has a value.

Solvers
-------
- learner best response: exact alternating minimization (output-marginal
  step / information-projection step) with a linearization lower bound as
  an a-posteriori optimality certificate;
- nature best response: Frank-Wolfe over the strategy simplex with exact
  line search and the standard linearized-gap certificate;
- saddle: simultaneous entropic mirror descent/ascent in extragradient
  (mirror-prox) form with iterate averaging and epoch restarts; the
  reported duality gap is certified by the two best-response oracles,
  never by iteration counts.

Everything is materialized over the n^m ordered input tuples, so the
supported scale is desk-size (n^m * |C| up to ~1e6 tableau entries).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from .info import LearnerChannel
from .model import HypothesisClass, LabeledSample
from .prob import (
    DistributionOverX,
    Prior,
    SymmetricSampleDistribution,
    iid_to_symmetric,
    mix,
)

__all__ = [
    "NatureStrategySet",
    "SaddleResult",
    "ConvergenceError",
    "allowed_outputs",
    "best_response_learner",
    "best_response_nature",
    "solve_saddle",
    "duality_gap",
    "worst_case_value",
]

_TINY = 1e-300
_FLOOR = 1e-30  # keeps multiplicative iterates strictly positive
_TABLEAU_LIMIT = 3_000_000
LossFn = Callable[[int, int], float]


class ConvergenceError(RuntimeError):
    """An oracle failed to certify its tolerance within its iteration cap."""


@dataclass(frozen=True)
class NatureStrategySet:
    """Nature's convex strategy set over symmetric size-m input laws.

    kind "symmetric" is the full simplex over multisets; kind "hull" is the
    convex hull of the i.i.d. laws of the listed generators.  Any other
    convex set must be supplied as its vertex list through "hull".
    """

    kind: str
    m: int
    generators: tuple[DistributionOverX, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("symmetric", "hull"):
            raise ValueError(f"unknown strategy-set kind {self.kind!r}")
        if self.m < 1:
            raise ValueError("sample size m must be >= 1")
        if self.kind == "hull" and not self.generators:
            raise ValueError("hull strategy set needs at least one generator")


@dataclass(frozen=True)
class SaddleResult:
    """Approximate equilibrium of the average-information game.

    ``gap`` is a certified upper bound on the true duality gap at the
    returned pair (oracle upper value minus oracle lower value).
    """

    learner: LearnerChannel
    nature: SymmetricSampleDistribution
    value: float
    gap: float
    iterations: int
    converged: bool


def _zero_one_errors(patterns: np.ndarray, labels: np.ndarray, loss: LossFn | None) -> np.ndarray:
    """Empirical loss of every hypothesis restriction against the labels."""
    if loss is None:
        return (patterns != labels[None, :]).mean(axis=1)
    vals = [
        sum(loss(int(y), int(c)) for y, c in zip(labels, row)) / len(labels)
        for row in patterns
    ]
    return np.asarray(vals)


def allowed_outputs(
    cls: HypothesisClass,
    sample: LabeledSample,
    eps: float,
    loss: LossFn | None = None,
) -> tuple[int, ...]:
    """Hypothesis indices whose empirical loss on the sample is at most eps.

    Raises if the set is empty (non-realizable sample below the achievable
    error); callers must handle that explicitly rather than patch it.
    """
    sample.check_domain(cls.domain)
    patterns = cls.matrix[:, list(sample.points)]
    errs = _zero_one_errors(patterns, np.asarray(sample.labels), loss)
    out = tuple(int(i) for i in np.flatnonzero(errs <= eps + 1e-12))
    if not out:
        raise ValueError(
            f"no hypothesis reaches empirical error {eps} on sample {sample.pairs}"
        )
    return out


class _Game:
    """Dense tableau of one game instance.

    Rows are the realizable ordered labeled samples, columns the
    hypotheses; nature is a point of a simplex mapped linearly onto laws
    over the n^m ordered input tuples.
    """

    def __init__(
        self,
        cls: HypothesisClass,
        prior: Prior,
        nature: NatureStrategySet,
        eps: float,
        loss: LossFn | None = None,
    ):
        if len(prior) != len(cls):
            raise ValueError("prior size must match the class")
        self.cls = cls
        self.nature = nature
        self.eps = eps
        self.w = prior.weights
        n = cls.domain.size
        m = nature.m
        K = len(cls)
        self.m, self.K = m, K
        if n ** m * K > _TABLEAU_LIMIT:
            raise ValueError(
                f"game tableau n^m*|C| = {n ** m * K} exceeds the supported "
                f"enumeration budget of {_TABLEAU_LIMIT}"
            )
        mat = cls.matrix
        tuples = np.array(list(itertools.product(range(n), repeat=m)), dtype=np.intp)
        T = len(tuples)

        row_index: dict[tuple[int, tuple[int, ...]], int] = {}
        allowed_rows: list[np.ndarray] = []
        samples: list[tuple[tuple[int, int], ...]] = []
        row_of = np.empty((K, T), dtype=np.intp)
        for t in range(T):
            patterns = mat[:, tuples[t]]
            for k in range(K):
                key = (t, tuple(int(b) for b in patterns[k]))
                rid = row_index.get(key)
                if rid is None:
                    rid = len(samples)
                    row_index[key] = rid
                    labels = patterns[k]
                    allowed_rows.append(
                        _zero_one_errors(patterns, labels, loss) <= eps + 1e-12
                    )
                    samples.append(
                        tuple((int(x), int(y)) for x, y in zip(tuples[t], labels))
                    )
                row_of[k, t] = rid
        self.tuples = tuples
        self.row_of = row_of
        self.samples = samples
        self.R = len(samples)
        self.allowed = np.array(allowed_rows)
        if not self.allowed.any(axis=1).all():
            raise ValueError("a realizable sample has an empty allowed-output set")

        if nature.kind == "symmetric":
            multi_index: dict[tuple[int, ...], int] = {}
            j_of_tuple = np.empty(T, dtype=np.intp)
            for t in range(T):
                key = tuple(sorted(int(x) for x in tuples[t]))
                j_of_tuple[t] = multi_index.setdefault(key, len(multi_index))
            perms = np.bincount(j_of_tuple).astype(float)
            V = np.zeros((len(multi_index), T))
            V[j_of_tuple, np.arange(T)] = 1.0 / perms[j_of_tuple]
            self.multisets = list(multi_index)
        else:
            V = np.stack([np.prod(g.probs[tuples], axis=1) for g in nature.generators])
            self.multisets = None
        self.V = V
        self.dim_nature = V.shape[0]

    # ------------------------------------------------------------------ laws

    def input_matrix(self, theta: np.ndarray) -> np.ndarray:
        """Per-hypothesis law over rows, shape (|C|, R)."""
        p_tuple = theta @ self.V
        P = np.zeros((self.K, self.R))
        # for a fixed hypothesis, distinct tuples land on distinct rows
        P[np.arange(self.K)[:, None], self.row_of] = p_tuple[None, :]
        return P

    def theta_from_symmetric(self, law: SymmetricSampleDistribution) -> np.ndarray:
        if self.nature.kind != "symmetric":
            raise ValueError("this game parametrizes nature by hull weights")
        index = {key: j for j, key in enumerate(self.multisets)}
        theta = np.zeros(self.dim_nature)
        for key, p in law.mass.items():
            if key not in index:
                raise ValueError(f"multiset {key} outside the domain of this game")
            theta[index[key]] = p
        return theta

    def nature_law(self, theta: np.ndarray) -> SymmetricSampleDistribution:
        theta = np.maximum(theta, 0.0)
        theta = theta / theta.sum()
        if self.nature.kind == "symmetric":
            mass = {key: float(p) for key, p in zip(self.multisets, theta) if p > 0}
            return SymmetricSampleDistribution(self.m, mass)
        laws = [iid_to_symmetric(g, self.m) for g in self.nature.generators]
        return mix(laws, theta)

    def channel(self, W: np.ndarray) -> LearnerChannel:
        rows = {key: W[r] for r, key in enumerate(self.samples)}
        allowed = {
            key: tuple(int(i) for i in np.flatnonzero(self.allowed[r]))
            for r, key in enumerate(self.samples)
        }
        return LearnerChannel(self.m, self.K, rows, allowed)

    def weights_from_channel(self, channel: LearnerChannel) -> np.ndarray:
        W = np.empty((self.R, self.K))
        for r, key in enumerate(self.samples):
            W[r] = channel.row(key)
        return W

    def uniform_channel_weights(self) -> np.ndarray:
        W = self.allowed.astype(float)
        return W / W.sum(axis=1, keepdims=True)

    # --------------------------------------------------------------- payoff

    def parts(self, P: np.ndarray, W: np.ndarray):
        """Payoff F, per-hypothesis information, and the KL tableau."""
        Q = P @ W
        logW = np.where(W > 0, np.log2(np.maximum(W, _TINY)), 0.0)
        logQ = np.log2(np.maximum(Q, _TINY))
        row_neg_ent = (W * logW).sum(axis=1)
        KL = row_neg_ent[:, None] - W @ logQ.T  # (R, |C|)
        I_vec = np.einsum("kr,rk->k", P, KL)
        F = float(self.w @ I_vec)
        return F, I_vec, KL, Q, logW, logQ

    def payoff(self, P: np.ndarray, W: np.ndarray) -> float:
        return self.parts(P, W)[0]

    def grad_W(self, P: np.ndarray, logW: np.ndarray, logQ: np.ndarray) -> np.ndarray:
        B = self.w @ P
        return B[:, None] * logW - (self.w[:, None] * P).T @ logQ

    def grad_theta(self, KL: np.ndarray) -> np.ndarray:
        KL_at = KL[self.row_of, np.arange(self.K)[:, None]]  # (|C|, T)
        return self.V @ (self.w @ KL_at)


# ---------------------------------------------------------------- learner BR


def _ba_min(
    game: _Game,
    P: np.ndarray,
    tol: float,
    max_iter: int = 50000,
    W0: np.ndarray | None = None,
):
    """Minimize the average information over channels for a fixed input law.

    Alternates the exact output-marginal step with the exact row step (each
    row becomes the posterior-weighted geometric mean of the per-hypothesis
    output marginals, restricted to its allowed support).  Every sweep
    decreases the objective; the loop exits once the linearization lower
    bound proves the value optimal within tol, or at max_iter.

    Returns (W, value, certified slack); value - slack lower-bounds the
    true minimum whatever the slack is.
    """
    allowed = game.allowed
    W = game.uniform_channel_weights() if W0 is None else W0.copy()
    beta = game.w[:, None] * P
    B = beta.sum(axis=0)
    supported = B > 0
    resp = np.zeros_like(beta)
    resp[:, supported] = beta[:, supported] / B[supported]

    slack = math.inf
    value = game.payoff(P, W)
    for _ in range(max_iter):
        Q = P @ W
        logQ = np.log2(np.maximum(Q, _TINY))
        expo = resp.T @ logQ  # (R, |C|)
        expo = np.where(allowed, expo, -np.inf)
        expo -= expo.max(axis=1, keepdims=True)
        W_new = np.exp2(expo)
        W_new[~allowed] = 0.0
        W_new /= W_new.sum(axis=1, keepdims=True)
        W_new[~supported] = W[~supported]
        value, _, _, _, logW, logQ = game.parts(P, W_new)
        G = game.grad_W(P, logW, logQ)
        slack = float(
            (G * W_new).sum() - np.where(allowed, G, np.inf).min(axis=1).sum()
        )
        W = W_new
        if slack <= tol:
            break
    return W, value, slack


def best_response_learner(
    cls: HypothesisClass,
    prior: Prior,
    law: SymmetricSampleDistribution,
    eps: float,
    tol: float,
    loss: LossFn | None = None,
) -> tuple[LearnerChannel, float]:
    """Channel minimizing the average information against a fixed input law.

    The achieved value is certified to lie within tol of the convex optimum.
    """
    nature = NatureStrategySet("symmetric", law.m)
    game = _Game(cls, prior, nature, eps, loss)
    P = game.input_matrix(game.theta_from_symmetric(law))
    W, value, slack = _ba_min(game, P, tol)
    if slack > tol:
        raise ConvergenceError(
            f"learner best response certified only to {slack}, above tol {tol}"
        )
    return game.channel(W), value


# ----------------------------------------------------------------- nature BR


def _fw_max(
    game: _Game,
    W: np.ndarray,
    tol: float,
    max_iter: int = 5000,
    theta0: np.ndarray | None = None,
):
    """Maximize the (concave) average information over the nature simplex by
    pairwise conditional-gradient steps with a bounded 1-D line search.

    Returns (theta, value, final linearized gap); value + gap is an upper
    bound on the true maximum whatever the gap is, so callers can use the
    certificate even when tol was not reached within max_iter.
    """
    if theta0 is None:
        theta = np.zeros(game.dim_nature)
        theta[0] = 1.0  # vertex start
    else:
        theta = theta0.copy()

    def evaluate(th: np.ndarray):
        P = game.input_matrix(th)
        F, _, KL, _, _, _ = game.parts(P, W)
        return F, KL

    def line_search(direction: np.ndarray, hi: float):
        def neg_payoff(gamma: float) -> float:
            return -evaluate(theta + gamma * direction)[0]

        res = minimize_scalar(
            neg_payoff, bounds=(0.0, hi), method="bounded", options={"xatol": 1e-12}
        )
        gamma = float(res.x)
        candidate = np.maximum(theta + gamma * direction, 0.0)
        candidate /= candidate.sum()
        return candidate

    value, KL = evaluate(theta)
    gap = math.inf
    for _ in range(max_iter):
        g = game.grad_theta(KL)
        toward = int(np.argmax(g))
        gap = float(g[toward] - theta @ g)
        if gap <= tol:
            break
        # pairwise step: shift mass from the worst supported vertex to the
        # best one (plain steps toward a vertex zigzag at interior optima)
        support = theta > 1e-15
        away = int(np.flatnonzero(support)[np.argmin(g[support])])
        direction = np.zeros_like(theta)
        direction[toward] += 1.0
        direction[away] -= 1.0
        candidate = line_search(direction, float(theta[away]))
        cand_value, cand_KL = evaluate(candidate)
        if cand_value <= value + 1e-15:
            direction = -theta.copy()
            direction[toward] += 1.0
            candidate = line_search(direction, 1.0)
            cand_value, cand_KL = evaluate(candidate)
            if cand_value <= value + 1e-15:
                break  # no measurable progress; gap is the honest certificate
        theta, value, KL = candidate, cand_value, cand_KL
    return theta, value, gap


def best_response_nature(
    cls: HypothesisClass,
    prior: Prior,
    channel: LearnerChannel,
    strategy_set: NatureStrategySet,
    tol: float,
    loss: LossFn | None = None,
) -> tuple[SymmetricSampleDistribution, float]:
    """Input law maximizing the average information against a fixed channel.

    The channel must have a row for every realizable sample of the game.
    The achieved value is certified within tol of the concave optimum.
    """
    game = _Game(cls, prior, strategy_set, eps=1.0, loss=loss)
    W = game.weights_from_channel(channel)
    theta, value, gap = _fw_max(game, W, tol)
    if gap > tol:
        raise ConvergenceError(
            f"nature best response certified only to {gap}, above tol {tol}"
        )
    return game.nature_law(theta), value


# -------------------------------------------------------------------- saddle


def _mirror_step(point: np.ndarray, exponent: np.ndarray, mask=None) -> np.ndarray:
    """Entropic (multiplicative) update along rows, numerically stabilized."""
    shifted = exponent - exponent.max(axis=-1, keepdims=True)
    new = point * np.exp(shifted)
    if mask is not None:
        new = np.where(mask, np.maximum(new, _FLOOR), 0.0)
    else:
        new = np.maximum(new, _FLOOR)
    return new / new.sum(axis=-1, keepdims=True)


def _certify(game: _Game, W: np.ndarray, theta: np.ndarray, oracle_tol: float):
    """Oracle-certified duality-gap upper bound at the pair (W, theta)."""
    P = game.input_matrix(theta)
    _, lo_value, lo_slack = _ba_min(game, P, oracle_tol)
    _, hi_value, hi_gap = _fw_max(game, W, oracle_tol, theta0=theta)
    gap = (hi_value + hi_gap) - (lo_value - lo_slack)
    return gap, lo_value, hi_value


def solve_saddle(
    cls: HypothesisClass,
    prior: Prior,
    eps: float,
    strategy_set: NatureStrategySet,
    tol: float = 1e-3,
    max_iter: int = 100000,
    loss: LossFn | None = None,
) -> SaddleResult:
    """Approximate equilibrium of the average-information game.

    Runs simultaneous entropic no-regret updates (mirror-prox extragradient
    steps on the channel's product of sub-simplices and on nature's
    simplex), averages the iterates, and certifies the duality gap of the
    averaged pair with the two best-response oracles.  Epochs restart from
    the averaged pair with a halved step size.  If the certified gap does
    not reach tol within max_iter total steps the best pair found is
    returned with ``converged=False``.
    """
    game = _Game(cls, prior, strategy_set, eps, loss)
    W = game.uniform_channel_weights()
    theta = np.full(game.dim_nature, 1.0 / game.dim_nature)
    oracle_tol = max(tol / 10.0, 1e-9)

    def grads(W_, theta_):
        P = game.input_matrix(theta_)
        _, _, KL, _, logW, logQ = game.parts(P, W_)
        return game.grad_W(P, logW, logQ), game.grad_theta(KL)

    gW0, gT0 = grads(W, theta)
    scale = max(np.abs(gW0).max(), np.abs(gT0).max(), 1e-6)
    eta = 4.0 / scale

    best: tuple[float, np.ndarray, np.ndarray] | None = None
    prev_gap = math.inf
    iterations = 0
    epoch_len = 500
    while iterations < max_iter:
        steps = min(epoch_len, max_iter - iterations)
        acc_W = np.zeros_like(W)
        acc_theta = np.zeros_like(theta)
        for _ in range(steps):
            gW, gT = grads(W, theta)
            W_half = _mirror_step(W, -eta * gW, game.allowed)
            theta_half = _mirror_step(theta, eta * gT)
            gW, gT = grads(W_half, theta_half)
            W = _mirror_step(W, -eta * gW, game.allowed)
            theta = _mirror_step(theta, eta * gT)
            acc_W += W_half
            acc_theta += theta_half
        iterations += steps
        W_bar = acc_W / steps
        theta_bar = acc_theta / steps
        gap, lo_value, hi_value = _certify(game, W_bar, theta_bar, oracle_tol)
        if best is None or gap < best[0]:
            best = (gap, W_bar, theta_bar)
        if best[0] <= tol:
            break
        if gap > 0.7 * prev_gap:  # stalling or unstable: damp the steps
            eta *= 0.5
        prev_gap = gap
        W, theta = W_bar, theta_bar
        epoch_len = min(epoch_len * 2, 20000)

    gap, W_bar, theta_bar = best
    value = game.payoff(game.input_matrix(theta_bar), W_bar)
    if -1e-9 < value < 0.0:
        value = 0.0
    return SaddleResult(
        learner=game.channel(W_bar),
        nature=game.nature_law(theta_bar),
        value=value,
        gap=float(gap),
        iterations=iterations,
        converged=bool(gap <= tol),
    )


def duality_gap(
    cls: HypothesisClass,
    prior: Prior,
    channel: LearnerChannel,
    law: SymmetricSampleDistribution,
    eps: float,
    strategy_set: NatureStrategySet,
    tol: float = 1e-4,
    loss: LossFn | None = None,
) -> float:
    """Nature's best-response value minus the learner's best-response value.

    Nonnegative up to the oracle tolerances; at most tol at an approximate
    equilibrium pair.
    """
    _, hi_value = best_response_nature(cls, prior, channel, strategy_set, tol, loss)
    _, lo_value = best_response_learner(cls, prior, law, eps, tol, loss)
    return hi_value - lo_value


# --------------------------------------------------------------- worst case


def worst_case_value(
    cls: HypothesisClass,
    eps: float,
    m: int,
    nature_grid: list[DistributionOverX] | tuple[DistributionOverX, ...],
    tol: float = 1e-3,
    max_iter: int = 3000,
) -> float:
    """Empirical probe of the worst-case game on a finite nature grid.

    Approximates min over channels of max over (target hypothesis, grid
    distribution) of the leaked information, by entropic subgradient steps
    on the finite max.  The result depends on the supplied grid; no
    exactness is claimed (the probe only exhibits worst versus average).
    """
    if not nature_grid:
        raise ValueError("nature grid must be nonempty")
    nature = NatureStrategySet("hull", m, tuple(nature_grid))
    prior = Prior.uniform(len(cls))  # prior is irrelevant: payoff is a max over h
    game = _Game(cls, prior, nature, eps)
    n_grid = len(nature_grid)
    P_all = [game.input_matrix(np.eye(n_grid)[v]) for v in range(n_grid)]

    def info_table(W: np.ndarray) -> np.ndarray:
        vals = np.empty((n_grid, game.K))
        for v, P in enumerate(P_all):
            _, I_vec, _, _, _, _ = game.parts(P, W)
            vals[v] = I_vec
        return vals

    W = game.uniform_channel_weights()
    table = info_table(W)
    best = float(table.max())
    stall = 0
    for it in range(1, max_iter + 1):
        v_star, h_star = np.unravel_index(np.argmax(table), table.shape)
        P = P_all[v_star]
        Q = P @ W
        logW = np.where(W > 0, np.log2(np.maximum(W, _TINY)), 0.0)
        logQ = np.log2(np.maximum(Q, _TINY))
        G = P[h_star][:, None] * (logW - logQ[h_star][None, :])
        eta = 1.0 / (np.abs(G).max() + 1e-9) / math.sqrt(it)
        W = _mirror_step(W, -eta * G, game.allowed)
        table = info_table(W)
        current = float(table.max())
        if current < best - tol:
            best = current
            stall = 0
        else:
            best = min(best, current)
            stall += 1
            if stall >= 200:  # no tol-sized progress in a while
                break
    return best
