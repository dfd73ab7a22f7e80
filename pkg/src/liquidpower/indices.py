"""Power indices for weighted voting games.

Five indices are provided.  Banzhaf and Shapley assume voters approve
uniformly at random; the other three weight coalitions by non-uniform
approval probabilities: per-voter probabilities drawn from a beta
distribution ("beta"), deterministic per-voter probabilities from a
logistic curve over voting weight ("regression"), and a single shared
probability drawn from a beta distribution ("beta2").

Exact values come from exhaustive enumeration (small games).  The Monte
Carlo estimator mirrors the generative story directly: sample approval
probabilities, sample a yes-coalition, count swing events.  Note the
non-uniform indices weight full vote patterns including the target
voter's own yes vote, so e.g. beta with alpha=beta=1 equals half the raw
Banzhaf value; the Monte Carlo estimator matches that convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.random import Generator, Philox
from scipy.special import betaincinv, betaln

from .errors import InvalidInputError
from .game import DEFAULT_ENUMERATION_CAP, VotingGame, others_subset_tables, swing_counts_by_size

#: Monte Carlo runs used when the caller does not say otherwise.
DEFAULT_MC_RUNS = 1_000_000

MODEL_KINDS = (
    "uniform-independent",
    "uniform-homogeneous",
    "beta-independent",
    "beta-homogeneous",
    "logistic",
)


@dataclass(frozen=True)
class ApprovalModel:
    """Generative model of per-voter yes-probabilities.

    kind selects the sampling scheme: homogeneous variants share one p per
    voting, independent variants draw one p per voter, logistic derives p
    deterministically from the voter's weight.
    """

    kind: str
    alpha: float | None = None
    beta: float | None = None
    beta0: float | None = None
    beta1: float | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidInputError(f"unknown approval model kind {self.kind!r}")
        if self.kind in ("beta-independent", "beta-homogeneous"):
            if self.alpha is None or self.beta is None or self.alpha <= 0 or self.beta <= 0:
                raise InvalidInputError("beta models need alpha > 0 and beta > 0")
        if self.kind == "logistic" and (self.beta0 is None or self.beta1 is None):
            raise InvalidInputError("logistic model needs beta0 and beta1")

    @classmethod
    def uniform_independent(cls) -> "ApprovalModel":
        return cls("uniform-independent")

    @classmethod
    def uniform_homogeneous(cls) -> "ApprovalModel":
        return cls("uniform-homogeneous")

    @classmethod
    def beta_independent(cls, alpha: float, beta: float) -> "ApprovalModel":
        return cls("beta-independent", alpha=alpha, beta=beta)

    @classmethod
    def beta_homogeneous(cls, alpha: float, beta: float) -> "ApprovalModel":
        return cls("beta-homogeneous", alpha=alpha, beta=beta)

    @classmethod
    def logistic(cls, beta0: float, beta1: float) -> "ApprovalModel":
        return cls("logistic", beta0=beta0, beta1=beta1)

    @property
    def homogeneous(self) -> bool:
        return self.kind in ("uniform-homogeneous", "beta-homogeneous")


@dataclass(frozen=True)
class IndexResult:
    """Per-voter index values plus estimator provenance.

    normalised is only set where the index defines one (Banzhaf).  For
    Monte Carlo results stderr holds sqrt(v*(1-v)/runs) per voter.
    """

    values: dict[str, float]
    estimator: str  # "exact" | "monte-carlo"
    normalised: dict[str, float] | None = None
    runs: int | None = None
    seed: int | None = None
    stderr: dict[str, float] | None = None


def logistic_probability(weight: float | np.ndarray, beta0: float, beta1: float):
    """Approval probability 1 / (1 + exp(-(beta0 + beta1 * weight)))."""
    z = np.clip(beta0 + beta1 * np.asarray(weight, dtype=float), -700, 700)
    out = 1.0 / (1.0 + np.exp(-z))
    return float(out) if out.ndim == 0 else out


def banzhaf_exact(game: VotingGame, cap: int = DEFAULT_ENUMERATION_CAP) -> IndexResult:
    """Raw Banzhaf values |W_i| / 2^(n-1), with the sum-to-1 normalisation."""
    raw = {}
    denom = Fraction(2) ** (game.n - 1)
    for v in game.voters:
        raw[v] = Fraction(int(swing_counts_by_size(game, v, cap).sum())) / denom
    total = sum(raw.values())
    if total > 0:
        norm = {v: float(x / total) for v, x in raw.items()}
    else:
        norm = {v: 0.0 for v in raw}
    return IndexResult({v: float(x) for v, x in raw.items()}, "exact", normalised=norm)


def shapley_exact(game: VotingGame, cap: int = DEFAULT_ENUMERATION_CAP) -> IndexResult:
    """Shapley values from swing counts grouped by coalition size.

    Equivalent to the share of voter orderings in which the voter is
    pivotal: a size-s swing coalition contributes (s-1)!(n-s)!/n!.
    """
    n = game.n
    fact = [math.factorial(k) for k in range(n + 1)]
    values = {}
    for v in game.voters:
        counts = swing_counts_by_size(game, v, cap)
        phi = Fraction(0)
        for s in range(1, n + 1):
            c = int(counts[s])
            if c:
                phi += Fraction(c * fact[s - 1] * fact[n - s], fact[n])
        values[v] = float(phi)
    return IndexResult(values, "exact")


def beta_index_exact(game: VotingGame, alpha: float, beta: float,
                     cap: int = DEFAULT_ENUMERATION_CAP) -> IndexResult:
    """Beta-weighted swing probability with independent per-voter approvals.

    Each voter's probability appears linearly in every coalition term, so
    integrating the per-voter beta distributions reduces to plugging in the
    mean p = alpha / (alpha + beta):

        value_i = sum over swing coalitions S of p^|S| (1-p)^(n-|S|)

    The reduction is verified against direct numeric integration in the
    test suite.  Only the mean matters, and alpha = beta recovers half the
    raw Banzhaf value.
    """
    if alpha <= 0 or beta <= 0:
        raise InvalidInputError("alpha and beta must be positive")
    p = alpha / (alpha + beta)
    n = game.n
    values = {}
    for v in game.voters:
        counts = swing_counts_by_size(game, v, cap)
        sizes = np.nonzero(counts)[0]
        values[v] = float(sum(
            counts[s] * p ** int(s) * (1.0 - p) ** int(n - s) for s in sizes
        ))
    return IndexResult(values, "exact")


def regression_index_exact(game: VotingGame, beta0: float, beta1: float,
                           cap: int = DEFAULT_ENUMERATION_CAP) -> IndexResult:
    """Swing probability with per-voter approvals logistic in voting weight.

    Voters have distinct deterministic probabilities, so the full vote
    pattern of every swing coalition is enumerated.
    """
    probs = {v: logistic_probability(game.weight_of(v), beta0, beta1) for v in game.voters}
    values = {}
    for v in game.voters:
        _, _, swing = others_subset_tables(game, v, cap)
        other_probs = [probs[u] for u in game.voters if u != v]
        pattern = np.ones(1, dtype=np.float64)
        for p in other_probs:
            pattern = np.concatenate([pattern * (1.0 - p), pattern * p])
        values[v] = float(probs[v] * pattern[swing].sum())
    return IndexResult(values, "exact")


def beta2_index_exact(game: VotingGame, alpha: float, beta: float,
                      cap: int = DEFAULT_ENUMERATION_CAP) -> IndexResult:
    """Beta-weighted swing probability with one shared approval probability.

    Integrating the shared p over Beta(alpha, beta) gives, per swing
    coalition of size s, the beta-function ratio B(alpha+s, beta+n-s) /
    B(alpha, beta); evaluated in log space so large games cannot overflow.
    """
    if alpha <= 0 or beta <= 0:
        raise InvalidInputError("alpha and beta must be positive")
    n = game.n
    log_norm = betaln(alpha, beta)
    term = np.exp(betaln(alpha + np.arange(n + 1), beta + n - np.arange(n + 1)) - log_norm)
    values = {}
    for v in game.voters:
        counts = swing_counts_by_size(game, v, cap)
        values[v] = float(np.dot(counts, term))
    return IndexResult(values, "exact")


def _chunk_uniforms(seed: int, start_run: int, n_runs: int, draws_per_run: int) -> np.ndarray:
    """Uniforms for runs [start_run, start_run + n_runs), shape (n_runs, draws).

    Each run owns a fixed, aligned slice of one counter-based stream, so
    any chunking (and hence any parallel execution order) reproduces the
    same numbers bit for bit.  draws_per_run must be a multiple of 4, the
    Philox block size.
    """
    bg = Philox(key=seed)
    bg.advance(start_run * draws_per_run // 4)
    return Generator(bg).random((n_runs, draws_per_run))


def _draws_per_run(n: int) -> int:
    return -4 * (-(2 * n) // 4)  # 2n rounded up to a multiple of 4


def index_monte_carlo(game: VotingGame, model: ApprovalModel,
                      runs: int = DEFAULT_MC_RUNS, seed: int = 0,
                      chunk_size: int | None = None) -> IndexResult:
    """Monte Carlo estimate of the swing probability under a model.

    Per run: sample approval probabilities per the model, sample every
    voter's yes/no, and count each yes-voter that is a swing voter of the
    yes-coalition.  Deterministic given the seed and independent of
    chunking.
    """
    if runs < 1:
        raise InvalidInputError("runs must be >= 1")
    n = game.n
    w = np.asarray(game.weights, dtype=np.int64)
    qn, qd = game.quorum.numerator, game.quorum.denominator
    rhs = qn * game.total_weight
    k = _draws_per_run(n)
    if chunk_size is None:
        chunk_size = max(1, min(runs, 4_000_000 // k))
    hits = np.zeros(n, dtype=np.int64)
    if model.kind == "logistic":
        p_fixed = logistic_probability(w, model.beta0, model.beta1)
    start = 0
    while start < runs:
        m = min(chunk_size, runs - start)
        u = _chunk_uniforms(seed, start, m, k)
        if model.kind == "uniform-independent":
            p = u[:, :n]
        elif model.kind == "uniform-homogeneous":
            p = u[:, :1]
        elif model.kind == "beta-independent":
            p = betaincinv(model.alpha, model.beta, u[:, :n])
        elif model.kind == "beta-homogeneous":
            p = betaincinv(model.alpha, model.beta, u[:, :1])
        else:
            p = p_fixed[None, :]
        votes = u[:, n:2 * n] < p
        yes_w = votes @ w
        win_with = (yes_w * qd >= rhs)[:, None]
        lose_without = ((yes_w[:, None] - w[None, :]) * qd) < rhs
        hits += (votes & win_with & lose_without).sum(axis=0)
        start += m
    est = hits / runs
    stderr = np.sqrt(est * (1.0 - est) / runs)
    return IndexResult(
        dict(zip(game.voters, est.tolist())), "monte-carlo",
        runs=runs, seed=seed, stderr=dict(zip(game.voters, stderr.tolist())),
    )


def classical_index_monte_carlo(game: VotingGame, kind: str,
                                runs: int = DEFAULT_MC_RUNS, seed: int = 0,
                                chunk_size: int | None = None) -> IndexResult:
    """Monte Carlo fallback for raw Banzhaf / Shapley above the cap.

    Both classical indices are decisiveness probabilities over the other
    voters' votes: banzhaf draws each vote with p = 1/2, shapley draws one
    shared p uniformly per run.  The voter is counted when the others
    alone lose but win once the voter joins.
    """
    if kind not in ("banzhaf", "shapley"):
        raise InvalidInputError(f"unknown classical index {kind!r}")
    if runs < 1:
        raise InvalidInputError("runs must be >= 1")
    n = game.n
    w = np.asarray(game.weights, dtype=np.int64)
    qn, qd = game.quorum.numerator, game.quorum.denominator
    rhs = qn * game.total_weight
    k = -4 * (-(n + 1) // 4)  # 1 shared-p draw + n vote draws, padded
    if chunk_size is None:
        chunk_size = max(1, min(runs, 4_000_000 // k))
    hits = np.zeros(n, dtype=np.int64)
    start = 0
    while start < runs:
        m = min(chunk_size, runs - start)
        u = _chunk_uniforms(seed, start, m, k)
        p = u[:, :1] if kind == "shapley" else 0.5
        votes = u[:, 1:n + 1] < p
        yes_w = votes @ w
        others = yes_w[:, None] - votes * w[None, :]
        decisive = ((others * qd) < rhs) & (((others + w[None, :]) * qd) >= rhs)
        hits += decisive.sum(axis=0)
        start += m
    est = hits / runs
    stderr = np.sqrt(est * (1.0 - est) / runs)
    return IndexResult(
        dict(zip(game.voters, est.tolist())), "monte-carlo",
        runs=runs, seed=seed, stderr=dict(zip(game.voters, stderr.tolist())),
    )
