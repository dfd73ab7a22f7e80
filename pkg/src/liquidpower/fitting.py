"""Statistical fits: beta MLE, logistic regression, power-law tails, Gini.

The beta fit uses the digamma fixed-point iteration with inverse-digamma
Newton steps and moment-matching initialisation.  Exact 0/1 samples are
excluded before fitting (both break the log-likelihood the same way).
The logistic fit is plain iteratively reweighted least squares on a
weight-and-intercept design.  The power-law fit is the discrete
maximum-likelihood approximation with the half-integer shift
(exponent = 1 + n / sum log(x / (xmin - 1/2))); it is accurate for
xmin of a few and fitted over the observed support, so exponents below 2
are reported as-is even though such tails are only normalisable when
truncated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy.special import digamma, expit, polygamma

from .errors import DegenerateInputError, InvalidInputError, SeparationError


@dataclass(frozen=True)
class BetaFit:
    alpha: float
    beta: float
    samples: int
    excluded: int
    log_likelihood: float
    iterations: int
    converged: bool

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)


@dataclass(frozen=True)
class LogisticFit:
    beta0: float
    beta1: float
    observations: int
    converged: bool

    def predict(self, weight: float | np.ndarray):
        out = expit(self.beta0 + self.beta1 * np.asarray(weight, dtype=float))
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    xmin: int
    samples: int
    median: float


def _inverse_digamma(y: np.ndarray, iterations: int = 6) -> np.ndarray:
    # Newton on digamma(x) = y from the standard piecewise initialisation
    x = np.where(y >= -2.22, np.exp(y) + 0.5, -1.0 / (y + 0.5772156649015329))
    for _ in range(iterations):
        x = x - (digamma(x) - y) / polygamma(1, x)
    return x


def beta_log_likelihood(alpha: float, beta: float, samples: np.ndarray) -> float:
    from scipy.special import betaln
    return float(np.sum((alpha - 1) * np.log(samples)
                        + (beta - 1) * np.log1p(-samples)
                        - betaln(alpha, beta)))


def fit_beta_mle(samples: Iterable[float], tol: float = 1e-8,
                 max_iter: int = 500) -> BetaFit:
    """Maximum-likelihood Beta(alpha, beta) fit for rates in (0, 1).

    Samples exactly 0 or 1 are excluded and counted; at least two distinct
    interior samples must remain.
    """
    x = np.sort(np.asarray(list(samples), dtype=float))  # order-independent fit
    if x.size and (x.min() < 0 or x.max() > 1):
        raise InvalidInputError("samples must lie in [0, 1]")
    interior = x[(x > 0) & (x < 1)]
    excluded = int(x.size - interior.size)
    if interior.size < 2 or np.all(interior == interior[0]):
        raise DegenerateInputError("need at least two distinct samples strictly inside (0, 1)")

    m = float(interior.mean())
    v = float(interior.var())
    common = max(m * (1 - m) / v - 1.0, 1e-3) if v > 0 else 1.0
    alpha, beta = m * common, (1 - m) * common
    mean_log = float(np.log(interior).mean())
    mean_log1m = float(np.log1p(-interior).mean())

    converged = False
    iterations = max_iter
    for it in range(1, max_iter + 1):
        s = digamma(alpha + beta)
        new_alpha = float(_inverse_digamma(np.asarray(s + mean_log)))
        new_beta = float(_inverse_digamma(np.asarray(s + mean_log1m)))
        if abs(new_alpha - alpha) < tol and abs(new_beta - beta) < tol:
            alpha, beta = new_alpha, new_beta
            converged = True
            iterations = it
            break
        alpha, beta = new_alpha, new_beta
    return BetaFit(alpha, beta, int(interior.size), excluded,
                   beta_log_likelihood(alpha, beta, interior), iterations, converged)


def fit_logistic(observations: Iterable[tuple[int, int]], tol: float = 1e-10,
                 max_iter: int = 100) -> LogisticFit:
    """Logistic regression of a binary decision on voting weight, via IRLS."""
    obs = sorted(observations)  # order-independent fit
    if not obs:
        raise InvalidInputError("no observations")
    w = np.array([o[0] for o in obs], dtype=float)
    y = np.array([o[1] for o in obs], dtype=float)
    if np.all(y == 0) or np.all(y == 1):
        raise SeparationError("observations contain a single decision class")

    X = np.column_stack([np.ones_like(w), w])
    theta = np.zeros(2)
    last_ll = -np.inf
    converged = False
    for _ in range(max_iter):
        p = expit(X @ theta)
        ll = float(np.sum(y * np.log(np.clip(p, 1e-300, None))
                          + (1 - y) * np.log(np.clip(1 - p, 1e-300, None))))
        if ll - last_ll < tol and np.isfinite(last_ll):
            converged = True
            break
        last_ll = ll
        r = np.clip(p * (1 - p), 1e-12, None)
        hessian = X.T @ (r[:, None] * X)
        gradient = X.T @ (y - p)
        theta = theta + np.linalg.solve(hessian, gradient)
    return LogisticFit(float(theta[0]), float(theta[1]), len(obs), converged)


def fit_power_law(samples: Iterable[int], xmin: int = 1) -> PowerLawFit:
    """Discrete power-law exponent over the tail x >= xmin.

    Hill-style closed form of the half-shifted continuous likelihood:
    exponent = 1 + n / sum log(x_i / (xmin - 1/2)).
    """
    if xmin < 1:
        raise InvalidInputError("xmin must be >= 1")
    x = np.sort(np.asarray(list(samples), dtype=float))  # order-independent fit
    if x.size and x.min() < 1:
        raise InvalidInputError("samples must be positive integers")
    tail = x[x >= xmin]
    if tail.size < 10:
        raise InvalidInputError(f"need at least 10 samples >= xmin (got {tail.size})")
    if np.all(tail == tail[0]):
        raise DegenerateInputError("all tail samples identical")
    exponent = 1.0 + tail.size / float(np.log(tail / (xmin - 0.5)).sum())
    return PowerLawFit(float(exponent), xmin, int(tail.size), float(np.median(tail)))


def gini(values: Sequence[float]) -> float | None:
    """Gini coefficient: sum |x_i - x_j| over all pairs / (2 n sum x).

    None for all-zero input (undefined); 0 for perfectly equal values.
    """
    x = np.sort(np.asarray(list(values), dtype=float))
    if x.size == 0 or x.min() < 0:
        raise InvalidInputError("gini needs non-negative values, at least one")
    total = x.sum()
    if total == 0:
        return None
    n = x.size
    i = np.arange(1, n + 1)
    return float(np.sum((2 * i - n - 1) * x) / (n * total))
