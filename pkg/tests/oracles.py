"""Independent reference computations used by the tests."""
import itertools
import math

import numpy as np

from bayesel.applications import normal_toy_model
from bayesel.elcore import solve_el
from bayesel.estimating import ELModel, ThetaSplit, log_posterior_unnorm
from bayesel.modelselect import AnchorHats, map_up, mcele_sigma2, ols, synth_regression


def bisection_el(c, iters: int = 200):
    """One-constraint EL by bisection on the multiplier.

    Solves ``sum c_i / (1 + lam c_i) = 0`` over the interval where every
    ``1 + lam c_i`` stays positive.
    """
    c = np.asarray(c, dtype=float).ravel()
    n = c.size
    lo, hi = -1.0 / c.max(), -1.0 / c.min()
    f = lambda lam: np.sum(c / (1.0 + lam * c))  # noqa: E731
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
    lam = 0.5 * (lo + hi)
    w = 1.0 / (n * (1.0 + lam * c))
    return w, float(np.log(w).sum())


def full_log_el(model: ELModel, theta1, theta2) -> float:
    return solve_el(np.hstack([model.g_matrix(theta1),
                               model.h_matrix(theta1, theta2)])).log_el


def profile(model: ELModel, theta1):
    """``theta2 -> log L(theta1, theta2)`` with the g block computed once."""
    g = model.g_matrix(theta1)
    a = np.asarray(theta1, dtype=float)
    return lambda t2: solve_el(np.hstack([g, model.h_matrix(a, t2)])).log_el


def grid_argmax(fun, lo, hi, steps=(0.1, 0.01, 1e-3)):
    """Maximise ``fun`` by successively finer exhaustive grids.

    The first pass covers the box ``[lo, hi]``; each later pass covers
    plus or minus 15 steps of the new size around the previous best cell.
    Returns the best grid point of the last pass.
    """
    lo, hi = np.atleast_1d(lo).astype(float), np.atleast_1d(hi).astype(float)
    best = None
    for k, h in enumerate(steps):
        if k == 0:
            axes = [np.arange(a, b + h / 2, h) for a, b in zip(lo, hi)]
        else:
            span = 15 * h
            axes = [np.round(np.arange(c - span, c + span + h / 2, h) / h) * h for c in best]
        vals = []
        pts = list(itertools.product(*axes))
        for p in pts:
            vals.append(fun(np.array(p)))
        vals = np.asarray(vals)
        if not np.isfinite(vals).any():
            return None
        best = np.array(pts[int(np.argmax(vals))])
    return best


def toy_data(n: int = 10, seed: int = 7) -> np.ndarray:
    return np.random.default_rng(seed).normal(0.0, 1.0, n)


class ToyGrid:
    """Normalised posterior of the normal toy on a regular grid.

    The box spans the data range for ``mu`` and ``(0, range^2]`` for
    ``sigma2``, which covers the support; cell centres are evaluated.
    """

    def __init__(self, x, res: int = 200):
        self.model = normal_toy_model(x)
        lo, hi = float(np.min(x)), float(np.max(x))
        self.mu_edges = np.linspace(lo, hi, res + 1)
        self.s2_edges = np.linspace(0.0, (hi - lo) ** 2, res + 1)
        mu = 0.5 * (self.mu_edges[1:] + self.mu_edges[:-1])
        s2 = 0.5 * (self.s2_edges[1:] + self.s2_edges[:-1])
        lp = np.array([[log_posterior_unnorm(self.model, ThetaSplit([a], [b])) for b in s2]
                       for a in mu])
        p = np.exp(lp - lp[np.isfinite(lp)].max())
        self.prob = p / p.sum()
        self.mu, self.s2, self.log_post = mu, s2, lp

    def mean(self):
        return (float(self.prob.sum(axis=1) @ self.mu),
                float(self.prob.sum(axis=0) @ self.s2))

    def coarse(self, bins: int = 20) -> np.ndarray:
        r = self.prob.shape[0] // bins
        return self.prob.reshape(bins, r, bins, r).sum(axis=(1, 3))

    def tv_distance(self, mu_draws, s2_draws, bins: int = 20) -> float:
        edges = (self.mu_edges[::self.prob.shape[0] // bins],
                 self.s2_edges[::self.prob.shape[0] // bins])
        hist, *_ = np.histogram2d(mu_draws, s2_draws, bins=edges)
        hist /= len(mu_draws)
        return 0.5 * float(np.abs(hist - self.coarse(bins)).sum())


def beta_binomial_prior(k: int, s: int, a: float = 2.0, b: float = 7.0) -> float:
    """Prior mass of one particular model with ``k`` of ``s`` covariates."""
    return math.exp(math.lgamma(a + k) + math.lgamma(b + s - k) - math.lgamma(a + b + s)
                    - math.lgamma(a) - math.lgamma(b) + math.lgamma(a + b))


def map_instance(seed, n: int = 60, s: int = 5):
    """A random birth move: data, both models, anchors, and a state to map.

    Draws are repeated until both MCELE anchors are feasible at the state
    and at its image, since a model that omits a strong signal has no
    feasible coefficients at all.
    """
    rng = np.random.default_rng(seed)
    while True:
        beta_true = rng.normal(0, 0.4, s) * (rng.uniform(size=s) < 0.5)
        data = synth_regression(int(rng.integers(2**31)), n, s, beta_true, 1.0)
        low = rng.uniform(size=s) < 0.4
        if low.all():
            continue
        j_cov = int(rng.choice(np.flatnonzero(~low)))
        high = low.copy()
        high[j_cov] = True
        pos = int(low[:j_cov].sum())
        mcele_of = lambda g: (lambda b: mcele_sigma2(data, g, b).sigma2_hat)  # noqa: E731
        hats = AnchorHats(ols(data, low), ols(data, high), mcele_of(low), mcele_of(high))
        beta = hats.beta_ols_low + 0.02 * rng.standard_normal(int(low.sum()))
        u = float(rng.normal(0, 0.05))
        s2 = float(mcele_of(low)(beta) + abs(rng.normal(0, 0.1)))
        if not np.isfinite(s2):
            continue
        bh, sh = map_up(beta, u, s2, hats, pos)
        if np.isfinite(sh) and sh > 0:
            return data, low, high, pos, hats, beta, u, s2


def numerical_jacobian(fun, x, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of ``fun`` at ``x``."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(fun(x))
    jac = np.empty((f0.size, x.size))
    for k in range(x.size):
        e = np.zeros_like(x)
        e[k] = h
        jac[:, k] = (np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2 * h)
    return jac


def map_up_jacobian_det(pos, hats, beta, u, s2) -> float:
    """Determinant of ``(beta_low with u at pos, sigma2) -> (beta_high, sigma2)``."""
    def fun(v):
        b = np.delete(v[:-1], pos)
        bh, sh = map_up(b, v[pos], v[-1], hats, pos)
        return np.append(bh, sh)

    x = np.append(np.insert(beta, pos, u), s2)
    return float(np.linalg.det(numerical_jacobian(fun, x)))
