"""Estimating-equation models and their BayesEL posterior.

A model splits its parameter into ``theta1`` (length ``p``) and ``theta2``
(length ``q``).  The ``g`` equations involve ``theta1`` only; the ``h``
equations may involve both.  For a parameter value the constraint matrix
is ``[g | h]`` evaluated at every observation.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .elcore import ELSolution, SolverOptions, solve_el
from .errors import DimensionError, NonFiniteError
from .priors import LogPrior, ProductPrior

__all__ = [
    "ThetaSplit",
    "ELModel",
    "build_constraints",
    "log_el",
    "log_posterior_unnorm",
    "read_observations",
]


@dataclass(frozen=True)
class ThetaSplit:
    theta1: np.ndarray
    theta2: np.ndarray

    def __post_init__(self):
        t1 = np.atleast_1d(np.asarray(self.theta1, dtype=float)).copy()
        t2 = np.atleast_1d(np.asarray(self.theta2, dtype=float)).copy()
        if t1.ndim != 1 or t2.ndim != 1 or t1.size < 1 or t2.size < 1:
            raise DimensionError("theta1 and theta2 must be non-empty vectors")
        if not (np.all(np.isfinite(t1)) and np.all(np.isfinite(t2))):
            raise NonFiniteError("parameter contains NaN or Inf")
        t1.flags.writeable = False
        t2.flags.writeable = False
        object.__setattr__(self, "theta1", t1)
        object.__setattr__(self, "theta2", t2)

    @property
    def p(self) -> int:
        return self.theta1.size

    @property
    def q(self) -> int:
        return self.theta2.size

    def __eq__(self, other):
        if not isinstance(other, ThetaSplit):
            return NotImplemented
        return (np.array_equal(self.theta1, other.theta1)
                and np.array_equal(self.theta2, other.theta2))

    def __hash__(self):
        return hash((self.theta1.tobytes(), self.theta2.tobytes()))


@dataclass(frozen=True)
class ELModel:
    """A BayesEL model.

    ``g_eval(data, theta1)`` and ``h_eval(data, theta1, theta2)`` are
    vectorised over observations: they return arrays of shape ``(n, l)``
    and ``(n, d)`` whose row ``i`` belongs to observation ``i``.  ``g_eval``
    is never given ``theta2``.

    ``theta2_solver(data, theta1, nu)``, when provided, returns the closed
    form root of ``sum_i nu_i h(x_i, theta1, theta2) = 0``; set it for
    models whose ``h`` is affine in ``theta2``.  ``theta2_start`` supplies a
    starting point for the numerical root search otherwise.
    """

    data: np.ndarray
    g_dim: int
    h_dim: int
    g_eval: Callable[[np.ndarray, np.ndarray], np.ndarray]
    h_eval: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    log_prior: LogPrior = field(default_factory=ProductPrior)
    theta2_solver: Optional[Callable] = None
    theta2_start: Optional[Callable] = None
    name: str = "custom"
    solver_options: SolverOptions = field(default_factory=SolverOptions)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] < 1:
            raise DimensionError("data must be an (n, v) matrix")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def closed_form(self) -> bool:
        return self.theta2_solver is not None

    def g_matrix(self, theta1) -> np.ndarray:
        g = np.asarray(self.g_eval(self.data, np.asarray(theta1, dtype=float)), dtype=float)
        return _check_block(g, self.n, self.g_dim, "g")

    def h_matrix(self, theta1, theta2) -> np.ndarray:
        h = np.asarray(self.h_eval(self.data, np.asarray(theta1, dtype=float),
                                   np.asarray(theta2, dtype=float)), dtype=float)
        return _check_block(h, self.n, self.h_dim, "h")

    def trial_solution(self, theta1) -> ELSolution:
        """EL under the ``g`` constraints only.  Override for structured models."""
        return solve_el(self.g_matrix(theta1), self.solver_options)

    def full_solution(self, theta: "ThetaSplit") -> ELSolution:
        """EL under all constraints.  Override for structured models."""
        return solve_el(build_constraints(self, theta), self.solver_options)


def _check_block(block: np.ndarray, n: int, width: int, label: str) -> np.ndarray:
    if block.ndim == 1:
        block = block[:, None]
    if block.shape != (n, width):
        raise DimensionError(f"{label} block has shape {block.shape}, expected {(n, width)}")
    if not np.all(np.isfinite(block)):
        raise NonFiniteError(f"{label} estimating function returned NaN or Inf")
    return block


def build_constraints(model: ELModel, theta: ThetaSplit) -> np.ndarray:
    """Stack the g columns then the h columns into an ``(n, l + d)`` matrix."""
    g = model.g_matrix(theta.theta1)
    h = model.h_matrix(theta.theta1, theta.theta2)
    return np.hstack([g, h])


def log_el(model: ELModel, theta: ThetaSplit) -> ELSolution:
    return model.full_solution(theta)


def log_posterior_unnorm(model: ELModel, theta: ThetaSplit) -> float:
    """Log empirical likelihood plus log prior; ``-inf`` off the support."""
    lp = model.log_prior(theta.theta1, theta.theta2)
    if lp == -np.inf:
        return -np.inf
    sol = log_el(model, theta)
    if not sol.feasible:
        return -np.inf
    return sol.log_el + lp


def read_observations(path) -> tuple[np.ndarray, list[str] | None]:
    """Read a comma-separated numeric table, with or without a header row.

    Returns the ``(n, v)`` matrix and the column names (``None`` when the
    file has no header).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DimensionError(f"{path}: no rows")
    header = None
    try:
        [float(cell) for cell in rows[0]]
    except ValueError:
        header = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DimensionError(f"{path}: header only")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise DimensionError(f"{path}: ragged rows")
    try:
        data = np.array([[float(cell) for cell in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise DimensionError(f"{path}: non-numeric entry ({exc})") from None
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"{path}: NaN or Inf entries")
    return data, header
