"""Maximum conditional empirical likelihood estimate of ``theta2``.

For fixed ``theta1 = a`` the estimate is found in two stages: first the
trial weights ``nu`` maximise ``sum log nu`` subject to the ``g``
constraints only; then ``theta2`` solves ``sum_i nu_i h(x_i, a, theta2) = 0``.
The root equation has as many unknowns as equations, so the trial weights
also satisfy the ``h`` constraints at the root and are therefore optimal for
the full problem.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .elcore import ELSolution
from .errors import NonFiniteError, RootNotFound
from .estimating import ELModel

__all__ = ["MceleResult", "trial_weights", "solve_theta2", "mcele", "broyden"]

ROOT_TOL = 1e-8
ROOT_MAX_ITER = 100


@dataclass(frozen=True)
class MceleResult:
    theta2_hat: np.ndarray | None
    trial_weights: np.ndarray | None
    trial_log_el: float
    feasible: bool


def trial_weights(model: ELModel, theta1) -> ELSolution:
    """EL solution under the ``g`` constraints alone."""
    return model.trial_solution(theta1)


def broyden(fun, x0, tol: float = ROOT_TOL, max_iter: int = ROOT_MAX_ITER,
            fd_step: float = 1e-7) -> np.ndarray:
    """Damped Broyden iteration for ``fun(x) = 0``.

    The Jacobian is seeded by forward differences and then rank-one
    updated.  Steps are halved until the residual norm decreases.

    Raises
    ------
    RootNotFound
        If the residual inf-norm has not reached ``tol`` after
        ``max_iter`` iterations or a step cannot reduce the residual.
    """
    x = np.array(x0, dtype=float)
    f = np.asarray(fun(x), dtype=float)
    if np.abs(f).max() <= tol:
        return x
    jac = np.empty((f.size, x.size))
    for k in range(x.size):
        h = fd_step * max(1.0, abs(x[k]))
        xk = x.copy()
        xk[k] += h
        jac[:, k] = (np.asarray(fun(xk), dtype=float) - f) / h
    fnorm = float(np.linalg.norm(f))
    for _ in range(max_iter):
        try:
            dx = -np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            dx = -np.linalg.lstsq(jac, f, rcond=None)[0]
        t = 1.0
        for _ in range(30):
            x_new = x + t * dx
            f_new = np.asarray(fun(x_new), dtype=float)
            if np.all(np.isfinite(f_new)) and np.linalg.norm(f_new) < fnorm:
                break
            t *= 0.5
        else:
            raise RootNotFound("Broyden line search failed to reduce the residual")
        s = x_new - x
        y = f_new - f
        jac += np.outer(y - jac @ s, s) / (s @ s)
        x, f = x_new, f_new
        fnorm = float(np.linalg.norm(f))
        if np.abs(f).max() <= tol:
            return x
    raise RootNotFound(f"no root within {max_iter} iterations (residual {fnorm:.3g})")


def solve_theta2(model: ELModel, theta1, nu, x0=None) -> np.ndarray:
    """Solve ``sum_i nu_i h(x_i, theta1, theta2) = 0`` for ``theta2``.

    Uses the model's closed-form solver when it declares one.
    """
    theta1 = np.asarray(theta1, dtype=float)
    nu = np.asarray(nu, dtype=float)
    if model.theta2_solver is not None:
        t2 = np.atleast_1d(np.asarray(model.theta2_solver(model.data, theta1, nu), dtype=float))
        if not np.all(np.isfinite(t2)):
            raise NonFiniteError("closed-form theta2 solver returned NaN or Inf")
        return t2
    if x0 is None:
        if model.theta2_start is not None:
            x0 = model.theta2_start(model.data, theta1)
        else:
            x0 = np.zeros(model.h_dim)

    def residual(t2):
        return nu @ model.h_matrix(theta1, t2)

    return broyden(residual, np.atleast_1d(np.asarray(x0, dtype=float)))


def mcele(model: ELModel, theta1) -> MceleResult:
    """Two-stage MCELE of ``theta2`` given ``theta1``.

    ``feasible=False`` when the trial problem is infeasible; no root is
    attempted in that case.
    """
    sol = trial_weights(model, theta1)
    if not sol.feasible:
        return MceleResult(None, None, -np.inf, False)
    t2 = solve_theta2(model, theta1, sol.weights)
    return MceleResult(t2, sol.weights, sol.log_el, True)
