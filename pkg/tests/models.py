"""Small models exercised by several test modules."""
import numpy as np

from bayesel.applications import normal_toy_model
from bayesel.estimating import ELModel


def _g(d, a):
    return d - a


def _h(d, a, t):
    # log-variance of the first coordinate and covariance per unit sd
    r = d - a
    sd = np.exp(0.5 * t[0])
    return np.column_stack([r[:, 0] ** 2 - sd * sd, r[:, 0] * r[:, 1] - t[1] * sd])


def bivariate_model(data) -> ELModel:
    """``theta1`` = both means, ``theta2`` = (log var of x, cov(x, y) / sd(x)).

    ``h`` is nonlinear in ``theta2`` so the MCELE goes through the
    numerical root solver.
    """
    return ELModel(np.asarray(data, dtype=float), 2, 2, _g, _h,
                   theta2_start=lambda d, a: np.zeros(2), name="bivariate")


def bivariate_data(seed, n: int = 20) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, 2))
    return np.column_stack([z[:, 0], 0.5 * z[:, 0] + 0.8 * z[:, 1]])


def random_instance(seed, n: int = 20):
    """A ``(model, theta1, box_lo, box_hi)`` with a feasible trial problem.

    Alternates between the one-parameter normal toy and the bivariate
    model; ``theta1`` is jittered around the sample mean.
    """
    rng = np.random.default_rng(seed)
    if seed % 2 == 0:
        x = rng.standard_normal(n)
        model = normal_toy_model(x)
        a = np.array([x.mean() + 0.2 * x.std() * rng.standard_normal()])
        hi = float(np.max((x - a[0]) ** 2))
        return model, a, np.array([0.0]), np.array([hi])
    data = bivariate_data(seed, n)
    model = bivariate_model(data)
    a = data.mean(axis=0) + 0.15 * data.std(axis=0) * rng.standard_normal(2)
    return model, a, np.array([-4.0, -2.0]), np.array([2.5, 2.0])
