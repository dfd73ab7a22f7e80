"""Two-level evaluation of power indices against measured potential power.

Global level: every vote's predicted index and measured potential power
are averaged per voting weight (1..100) and compared as a sum of squared
per-weight errors.  Local level: the index is read as the predicted
probability of the voter having potential power in that vote, giving a
log-likelihood over all per-vote events and a perplexity normalised per
initiative.  Logs are base 2 throughout so likelihood and perplexity
compose as usual; because the normalisation is per initiative rather than
per observation, a per-observation perplexity is reported alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .empirical import PowerCurve, ResolvedVoting, potential_power
from .errors import InvalidInputError, ResourceLimitError
from .game import DEFAULT_ENUMERATION_CAP, VotingGame
from .indices import (
    ApprovalModel,
    DEFAULT_MC_RUNS,
    banzhaf_exact,
    beta2_index_exact,
    beta_index_exact,
    classical_index_monte_carlo,
    index_monte_carlo,
    regression_index_exact,
    shapley_exact,
)

#: Predictions are clamped into [EPSILON, 1 - EPSILON] before taking logs.
EPSILON = 1e-9

MODEL_NAMES = ("banzhaf", "shapley", "uniform-independent", "uniform-homogeneous",
               "beta", "regression", "beta2")

#: Reference parameters fitted on the platform data these analyses were
#: developed against; callers normally refit on their own dataset.
DEFAULT_ALPHA = 3.00
DEFAULT_BETA = 1.17
DEFAULT_BETA0 = 0.7933
DEFAULT_BETA1 = 0.0036


@dataclass(frozen=True)
class ModelSpec:
    """A named index with the parameters it needs."""

    name: str
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    beta0: float = DEFAULT_BETA0
    beta1: float = DEFAULT_BETA1

    def __post_init__(self):
        if self.name not in MODEL_NAMES:
            raise InvalidInputError(
                f"unknown model {self.name!r}; expected one of {', '.join(MODEL_NAMES)}")

    def cache_key(self) -> tuple:
        if self.name in ("beta", "beta2"):
            return (self.name, self.alpha, self.beta)
        if self.name == "regression":
            return (self.name, self.beta0, self.beta1)
        return (self.name,)

    def exact(self, game: VotingGame, cap: int) -> dict[str, float]:
        if self.name == "banzhaf":
            return banzhaf_exact(game, cap).values
        if self.name == "shapley":
            return shapley_exact(game, cap).values
        if self.name == "uniform-independent":
            return beta_index_exact(game, 1.0, 1.0, cap).values
        if self.name == "uniform-homogeneous":
            return beta2_index_exact(game, 1.0, 1.0, cap).values
        if self.name == "beta":
            return beta_index_exact(game, self.alpha, self.beta, cap).values
        if self.name == "regression":
            return regression_index_exact(game, self.beta0, self.beta1, cap).values
        return beta2_index_exact(game, self.alpha, self.beta, cap).values

    def monte_carlo(self, game: VotingGame, runs: int, seed: int) -> dict[str, float]:
        if self.name in ("banzhaf", "shapley"):
            return classical_index_monte_carlo(game, self.name, runs, seed).values
        if self.name == "uniform-independent":
            model = ApprovalModel.uniform_independent()
        elif self.name == "uniform-homogeneous":
            model = ApprovalModel.uniform_homogeneous()
        elif self.name == "beta":
            model = ApprovalModel.beta_independent(self.alpha, self.beta)
        elif self.name == "regression":
            model = ApprovalModel.logistic(self.beta0, self.beta1)
        else:
            model = ApprovalModel.beta_homogeneous(self.alpha, self.beta)
        return index_monte_carlo(game, model, runs, seed).values


def squared_error(predicted: PowerCurve, measured: PowerCurve,
                  max_weight: int = 100) -> float:
    """Sum over common weight buckets (1..max_weight) of squared differences.

    Buckets present on only one side are skipped pairwise.
    """
    common = [w for w in predicted.values
              if w in measured.values and 1 <= w <= max_weight]
    if not common:
        raise InvalidInputError("curves share no weight bucket")
    return float(sum((predicted.values[w] - measured.values[w]) ** 2 for w in common))


def log_likelihood(events: Iterable[tuple[float, int]]) -> tuple[float, int]:
    """Base-2 log-likelihood of observed potential-power events.

    Each event pairs a predicted probability with the observed 0/1
    outcome.  Predictions are clamped into [EPSILON, 1-EPSILON]; the
    second return value counts the log terms that hit the clamp.
    """
    terms = []
    clamped = 0
    for p, gamma in events:
        if gamma:
            if p < EPSILON:
                p = EPSILON
                clamped += 1
            terms.append(float(np.log2(p)))
        else:
            if p > 1.0 - EPSILON:
                p = 1.0 - EPSILON
                clamped += 1
            terms.append(float(np.log2(1.0 - p)))
    # fsum: exactly rounded, so the result ignores event ordering
    return math.fsum(terms), clamped


def perplexity(log_l: float, initiatives: int) -> float:
    """2 ** (-log_l / initiatives); 1 means perfect prediction."""
    if initiatives < 1:
        raise InvalidInputError("need at least one initiative")
    return float(2.0 ** (-log_l / initiatives))


@dataclass(frozen=True)
class ModelEvaluation:
    model: str
    squared_error: float
    log_likelihood: float
    perplexity: float
    perplexity_per_observation: float
    clamped: int
    buckets: int


@dataclass(frozen=True)
class EvaluationReport:
    rows: tuple[ModelEvaluation, ...]
    measured: PowerCurve
    predicted: dict[str, PowerCurve]
    initiatives: int
    observations: int
    mc_runs: int
    seed: int
    fingerprint: str | None = None


def _curve(pairs: Sequence[tuple[int, float]], max_weight: int) -> PowerCurve:
    buckets: dict[int, list[float]] = {}
    for w, x in pairs:
        if 1 <= w <= max_weight:
            buckets.setdefault(w, []).append(x)
    # fsum keeps bucket means independent of initiative ordering
    return PowerCurve({w: math.fsum(buckets[w]) / len(buckets[w])
                       for w in sorted(buckets)},
                      {w: len(buckets[w]) for w in sorted(buckets)})


def _game_seed(seed: int, initiative_id: str, model_key: tuple) -> int:
    import hashlib
    text = f"{seed}|{initiative_id}|{model_key}"
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "big")


class _IndexComputer:
    """Per-ballot index values with an exact-value cache across identical games.

    Games sharing a weight multiset and quorum have identical exact values
    per weight, so repeated game shapes are computed once.  Monte Carlo
    fallbacks get a seed derived from (seed, initiative, model).
    """

    def __init__(self, specs: Sequence[ModelSpec], cap: int, mc_runs: int, seed: int):
        self.specs = specs
        self.cap = cap
        self.mc_runs = mc_runs
        self.seed = seed
        self._cache: dict[tuple, dict[int, float]] = {}

    def values(self, bs) -> dict[str, tuple[dict[str, float], str]]:
        voters = tuple(v.voter for v in bs.votes)
        weights = tuple(v.weight for v in bs.votes)
        game = None
        out = {}
        for spec in self.specs:
            cache_key = (spec.cache_key(), tuple(sorted(weights)), bs.quorum)
            by_weight = self._cache.get(cache_key)
            if by_weight is not None:
                out[spec.name] = ({u: by_weight[w] for u, w in zip(voters, weights)},
                                  "exact")
                continue
            if game is None:
                game = VotingGame(voters, weights, bs.quorum)
            try:
                values = spec.exact(game, self.cap)
                self._cache[cache_key] = {game.weight_of(u): x for u, x in values.items()}
                out[spec.name] = (values, "exact")
            except ResourceLimitError:
                if self.mc_runs < 1:
                    raise
                mc_seed = _game_seed(self.seed, bs.initiative_id, spec.cache_key())
                out[spec.name] = (spec.monte_carlo(game, self.mc_runs, mc_seed),
                                  "monte-carlo")
        return out


def benchmark(resolved: ResolvedVoting, models: Sequence[ModelSpec | str],
              mc_runs: int = DEFAULT_MC_RUNS, seed: int = 0,
              cap: int = DEFAULT_ENUMERATION_CAP,
              max_weight: int = 100, fingerprint: str | None = None) -> EvaluationReport:
    """Evaluate index models over every voted initiative of a dataset.

    Per initiative the participating voters with their effective weights
    form a voting game; each model predicts a per-voter power probability
    (exactly up to the enumeration cap, by Monte Carlo beyond it, with
    mc_runs = 0 disabling the fallback).  Deterministic given the seed.
    """
    specs = [m if isinstance(m, ModelSpec) else ModelSpec(m) for m in models]
    measured_pairs: list[tuple[int, float]] = []
    predicted_pairs: dict[str, list[tuple[int, float]]] = {s.name: [] for s in specs}
    events: dict[str, list[tuple[float, int]]] = {s.name: [] for s in specs}
    computer = _IndexComputer(specs, cap, mc_runs, seed)

    for bs in resolved.ballots:
        gammas = {v.voter: potential_power(bs, v.voter) for v in bs.votes}
        for v in bs.votes:
            measured_pairs.append((v.weight, float(gammas[v.voter])))
        for name, (values, _) in computer.values(bs).items():
            for v in bs.votes:
                x = values[v.voter]
                predicted_pairs[name].append((v.weight, x))
                events[name].append((x, gammas[v.voter]))

    measured = _curve(measured_pairs, max_weight)
    predicted = {name: _curve(pairs, max_weight)
                 for name, pairs in predicted_pairs.items()}
    n_init = len(resolved.ballots)
    n_obs = len(measured_pairs)
    rows = []
    for spec in specs:
        curve = predicted[spec.name]
        sse = squared_error(curve, measured, max_weight) if n_obs else 0.0
        ll, clamped = log_likelihood(events[spec.name])
        rows.append(ModelEvaluation(
            model=spec.name,
            squared_error=sse,
            log_likelihood=ll,
            perplexity=perplexity(ll, max(n_init, 1)),
            perplexity_per_observation=perplexity(ll, max(n_obs, 1)),
            clamped=clamped,
            buckets=len(set(curve.values) & set(measured.values)),
        ))
    return EvaluationReport(tuple(rows), measured, predicted, n_init, n_obs,
                            mc_runs, seed, fingerprint)


def indices_table(resolved: ResolvedVoting, models: Sequence[ModelSpec | str],
                  mc_runs: int = DEFAULT_MC_RUNS, seed: int = 0,
                  cap: int = DEFAULT_ENUMERATION_CAP) -> list[dict]:
    """Per-vote index values as flat rows, one per (initiative, voter, model)."""
    specs = [m if isinstance(m, ModelSpec) else ModelSpec(m) for m in models]
    computer = _IndexComputer(specs, cap, mc_runs, seed)
    rows = []
    for bs in resolved.ballots:
        per_model = computer.values(bs)
        for spec in specs:
            values, estimator = per_model[spec.name]
            for v in bs.votes:
                rows.append({
                    "initiative_id": bs.initiative_id,
                    "issue_id": bs.issue_id,
                    "voter_id": v.voter,
                    "weight": v.weight,
                    "model": spec.name,
                    "value": values[v.voter],
                    "estimator": estimator,
                })
    return rows
