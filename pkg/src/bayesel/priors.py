"""Prior distributions used by the shipped models.

Densities are evaluated in log space and return ``-inf`` off the support.
Normal priors are parametrised by *variance*, matching how the models
state them (``N(0, 100)`` has variance 100).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import betaln, gammaln

__all__ = [
    "Flat",
    "Normal",
    "InverseGamma",
    "DoubleExponential",
    "BetaBinomialModelPrior",
    "ProductPrior",
]

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class Flat:
    """Improper constant density; handy for tests."""

    def log_pdf(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return 0.0 if np.all(np.isfinite(x)) else -np.inf


@dataclass(frozen=True)
class Normal:
    mean: float = 0.0
    var: float = 1.0

    def log_pdf(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(-0.5 * x.size * (_LOG_2PI + np.log(self.var))
                     - 0.5 * np.sum((x - self.mean) ** 2) / self.var)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.normal(self.mean, np.sqrt(self.var), size=size)

    def posterior_given_normal(self, obs, obs_var: float) -> "Normal":
        """Conjugate update for the mean of ``obs ~ N(mu, obs_var)``."""
        obs = np.asarray(obs, dtype=float)
        prec = obs.size / obs_var + 1.0 / self.var
        mean = (obs.sum() / obs_var + self.mean / self.var) / prec
        return Normal(float(mean), float(1.0 / prec))


@dataclass(frozen=True)
class InverseGamma:
    """Inverse gamma with density ``b^a / G(a) x^(-a-1) exp(-b/x)``."""

    shape: float
    scale: float

    def log_pdf(self, x) -> float:
        if np.ndim(x) == 0 or np.size(x) == 1:
            # scalar path: this sits inside every sampler step
            v = float(np.reshape(x, -1)[0]) if np.ndim(x) else float(x)
            if not (0.0 < v < math.inf):
                return -math.inf
            a, b = self.shape, self.scale
            return a * math.log(b) - math.lgamma(a) - (a + 1.0) * math.log(v) - b / v
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0.0) or not np.all(np.isfinite(x)):
            return -np.inf
        a, b = self.shape, self.scale
        return float(x.size * (a * np.log(b) - gammaln(a))
                     - (a + 1.0) * np.sum(np.log(x)) - b * np.sum(1.0 / x))

    def sample(self, rng: np.random.Generator, size=None):
        return self.scale / rng.gamma(self.shape, 1.0, size=size)

    def mean(self) -> float:
        return self.scale / (self.shape - 1.0) if self.shape > 1.0 else np.inf

    def posterior_given_normal(self, resid) -> "InverseGamma":
        """Conjugate update for the variance of zero-mean normal residuals."""
        resid = np.asarray(resid, dtype=float)
        return InverseGamma(self.shape + 0.5 * resid.size,
                            self.scale + 0.5 * float(resid @ resid))


@dataclass(frozen=True)
class DoubleExponential:
    """Laplace density ``exp(-|x - loc| / scale) / (2 scale)``."""

    loc: float = 0.0
    scale: float = 1.0

    def log_pdf(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(-x.size * np.log(2.0 * self.scale)
                     - np.sum(np.abs(x - self.loc)) / self.scale)


@dataclass(frozen=True)
class BetaBinomialModelPrior:
    """Prior on inclusion vectors with a Beta(a, b) success probability
    integrated out, so ``P(gamma) = B(a + k, b + s - k) / B(a, b)``.
    """

    a: float = 2.0
    b: float = 7.0

    def log_prob(self, gamma) -> float:
        gamma = np.asarray(gamma)
        s = gamma.size
        k = int(np.count_nonzero(gamma))
        return float(betaln(self.a + k, self.b + s - k) - betaln(self.a, self.b))


@dataclass(frozen=True)
class ProductPrior:
    """Independent priors on ``theta1`` and ``theta2``.

    Each side is either one univariate prior applied to every coordinate or
    a sequence with one prior per coordinate.
    """

    theta1: object = field(default_factory=Flat)
    theta2: object = field(default_factory=Flat)

    @staticmethod
    def _side(prior, x) -> float:
        x = np.asarray(x, dtype=float)
        if isinstance(prior, Sequence):
            if len(prior) != x.size:
                raise ValueError("one prior per coordinate expected")
            total = 0.0
            for pr, xi in zip(prior, x):
                total += pr.log_pdf(xi)
                if total == -np.inf:
                    break
            return total
        return prior.log_pdf(x)

    def __call__(self, theta1, theta2) -> float:
        lp = self._side(self.theta1, theta1)
        if lp == -np.inf:
            return lp
        return lp + self._side(self.theta2, theta2)


LogPrior = Callable[[np.ndarray, np.ndarray], float]
