"""Ready-made models: the normal mean/variance toy, the rat growth
hierarchy, synthetic regression data and per-node DAG parent selection.
"""
from __future__ import annotations

import math
import csv
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
from numba import njit

from .elcore import ELSolution, _grouped_kernel, solve_el_grouped, solve_el_separate
from .errors import DimensionError, InitInfeasible
from .estimating import ELModel, ThetaSplit, read_observations
from .priors import InverseGamma, Normal, ProductPrior
from .modelselect import (
    ModelTrace,
    RegressionData,
    SelectionPriors,
    SelectionProposals,
    rjmcmc,
    synth_regression,
)
from .sampler import (
    GibbsBlock,
    chain_rng,
    Proposal1,
    Proposal2,
    Trace,
    TwoStepBlock,
    inverse_gamma_var_block,
    metropolis_within_gibbs,
    normal_mean_block,
)

__all__ = [
    "normal_toy_model",
    "RatData",
    "load_rats",
    "RatELModel",
    "rat_model",
    "rat_initial_state",
    "run_rat_chain",
    "rat_table",
    "RegressionData",
    "synth_regression",
    "DagProblem",
    "DagResult",
    "read_dag_csv",
    "synth_dag",
    "dag_pipeline",
    "DAG_PROPOSALS",
]


# ---------------------------------------------------------------------------
# Normal mean / variance


def _toy_g(data, theta1):
    return data[:, 0] - theta1[0]


def _toy_h(data, theta1, theta2):
    return (data[:, 0] - theta1[0]) ** 2 - theta2[0]


def _toy_sigma2(data, theta1, nu):
    return np.array([nu @ (data[:, 0] - theta1[0]) ** 2])


def normal_toy_model(x, prior_mean_var: float = 100.0, ig_shape: float = 0.001,
                     ig_scale: float = 0.001) -> ELModel:
    """Mean ``mu`` (theta1) and variance ``sigma2`` (theta2) of a sample.

    Constraints are ``x - mu`` and ``(x - mu)^2 - sigma2``; priors are
    ``N(0, 100)`` and ``IG(0.001, 0.001)`` by default.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size < 3:
        raise DimensionError("the normal toy model needs at least 3 observations")
    prior = ProductPrior(Normal(0.0, prior_mean_var), InverseGamma(ig_shape, ig_scale))
    return ELModel(x[:, None], 1, 1, _toy_g, _toy_h, prior,
                   theta2_solver=_toy_sigma2, name="normal_toy")


# ---------------------------------------------------------------------------
# Rat growth


@dataclass(frozen=True)
class RatData:
    """Masses ``y[i, j]`` of rat ``i`` on day ``t[j]``; ``t_bar`` centres time."""

    y: np.ndarray
    t: np.ndarray
    t_bar: float = 22.0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        t = np.asarray(self.t, dtype=float)
        if y.ndim != 2 or y.shape[1] != t.size:
            raise DimensionError("y must be (rats, time points) matching t")
        if np.any(np.diff(t) <= 0):
            raise DimensionError("time points must be strictly increasing")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "t", t)

    @property
    def n_rats(self) -> int:
        return self.y.shape[0]


def load_rats() -> RatData:
    """The 30-rat, 5-measurement growth data (days 8, 15, 22, 29, 36)."""
    with resources.as_file(resources.files("bayesel") / "data" / "rats.csv") as path:
        y, _ = read_observations(path)
    return RatData(y, np.array([8.0, 15.0, 22.0, 29.0, 36.0]), 22.0)


class _RatCache:
    """Per-rat trial solutions and the last feasible full-problem multipliers.

    Shared by the models built for successive sweeps; everything in it is
    keyed on exact parameter values, so results never depend on history
    beyond the starting point of the dual iteration.
    """

    def __init__(self, G: int, r: int):
        self.theta1: Optional[np.ndarray] = None
        self.feasible = np.zeros(G, dtype=bool)
        self.u = np.full((G, r), 1.0 / r)
        self.log_el = np.zeros(G)
        self.lam = np.zeros((G, 2))
        self.full_start: Optional[np.ndarray] = None


@dataclass(frozen=True)
class RatELModel(ELModel):
    """EL model whose constraints are block diagonal across rats.

    ``theta1`` stacks the 30 intercepts then the 30 slopes; ``theta2`` is
    the error variance.  Per rat there is a mean constraint and a score
    constraint weighted by ``t_j``; one pooled variance constraint couples
    all rows.

    Without the variance constraint the problem factorises by rat, so the
    trial solution only re-solves rats whose parameters changed since the
    last call.  The full problem goes through :func:`solve_el_grouped`,
    warm-started from the previous feasible multipliers.  Both give the
    dense solver's answer to rounding.
    """

    cache: Optional[_RatCache] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        super().__post_init__()
        rows = self.data
        G = int(rows[-1, 3]) + 1
        r = rows.shape[0] // G
        object.__setattr__(self, "_y", rows[:, 0].reshape(G, r))
        object.__setattr__(self, "_t", rows[:r, 1].copy())
        object.__setattr__(self, "_tc", rows[:r, 1] - rows[0, 2])
        if self.cache is None:
            object.__setattr__(self, "cache", _RatCache(G, r))

    def _residuals(self, theta1):
        G = self._y.shape[0]
        return self._y - theta1[:G, None] - theta1[G:, None] * self._tc

    def _local(self, resid):
        return np.stack([resid, resid * self._t], axis=2)

    def trial_solution(self, theta1) -> ELSolution:
        theta1 = np.asarray(theta1, dtype=float)
        G, r = self._y.shape
        c = self.cache
        if c.theta1 is None:
            changed = np.arange(G)
        else:
            diff = theta1 != c.theta1
            changed = np.flatnonzero(diff[:G] | diff[G:])
        if changed.size:
            resid = self._residuals(theta1)[changed]
            f, u, le, lam = solve_el_separate(self._local(resid), self.solver_options)
            c.feasible[changed] = f
            c.u[changed] = u
            c.log_el[changed] = le
            c.lam[changed] = lam
            c.theta1 = theta1.copy()
        multipliers = c.lam.ravel().copy()
        if not c.feasible.all():
            return ELSolution(False, None, -np.inf, multipliers, 0, np.nan)
        n = G * r
        return ELSolution(True, c.u.ravel() / G, float(c.log_el.sum() - n * np.log(G)),
                          multipliers, 0, 0.0)

    def full_solution(self, theta: ThetaSplit) -> ELSolution:
        resid = self._residuals(theta.theta1)
        shared = (resid * resid - theta.theta2[0])[:, :, None]
        sol = solve_el_grouped(self._local(resid), shared, self.solver_options,
                               start=self.cache.full_start)
        if sol.feasible:
            self.cache.full_start = sol.multipliers
        return sol


def _rat_layout(data: RatData) -> np.ndarray:
    G, r = data.y.shape
    rows = np.empty((G * r, 4))
    rows[:, 0] = data.y.ravel()
    rows[:, 1] = np.tile(data.t, G)
    rows[:, 2] = data.t_bar
    rows[:, 3] = np.repeat(np.arange(G), r)
    return rows


def _rat_g(rows, theta1):
    G = int(rows[-1, 3]) + 1
    rat = rows[:, 3].astype(int)
    resid = rows[:, 0] - theta1[rat] - theta1[G + rat] * (rows[:, 1] - rows[:, 2])
    out = np.zeros((rows.shape[0], 2 * G))
    idx = np.arange(rows.shape[0])
    out[idx, 2 * rat] = resid
    out[idx, 2 * rat + 1] = resid * rows[:, 1]
    return out


def _rat_h(rows, theta1, theta2):
    G = int(rows[-1, 3]) + 1
    rat = rows[:, 3].astype(int)
    resid = rows[:, 0] - theta1[rat] - theta1[G + rat] * (rows[:, 1] - rows[:, 2])
    return resid * resid - theta2[0]


def _rat_sigma2(rows, theta1, nu):
    G = int(rows[-1, 3]) + 1
    rat = rows[:, 3].astype(int)
    resid = rows[:, 0] - theta1[rat] - theta1[G + rat] * (rows[:, 1] - rows[:, 2])
    return np.array([nu @ (resid * resid)])


HYPER_PRIOR_MEAN = Normal(0.0, 100.0 ** 2)
HYPER_PRIOR_VAR = InverseGamma(2.5, 5.0)
ERROR_VAR_PRIOR = InverseGamma(2.5, 5.0)


class _RatPrior:
    """Hierarchical prior given the current hyperparameters."""

    def __init__(self, G, m1, v1, m2, v2):
        self.G, self.m1, self.v1, self.m2, self.v2 = G, m1, v1, m2, v2
        self._const = -0.5 * G * (math.log(2 * math.pi * v1) + math.log(2 * math.pi * v2))

    def __call__(self, theta1, theta2):
        lp = ERROR_VAR_PRIOR.log_pdf(theta2[0])
        if lp == -np.inf:
            return lp
        a = theta1[: self.G] - self.m1
        b = theta1[self.G:] - self.m2
        return float(lp + self._const - 0.5 * (a @ a) / self.v1 - 0.5 * (b @ b) / self.v2)


def rat_el_model(data: RatData, theta1c=0.0, sigma2_1=1.0, theta2c=0.0, sigma2_2=1.0) -> RatELModel:
    G = data.n_rats
    return RatELModel(_rat_layout(data), 2 * G, 1, _rat_g, _rat_h,
                      _RatPrior(G, theta1c, sigma2_1, theta2c, sigma2_2),
                      theta2_solver=_rat_sigma2, name="rats")


def rat_initial_state(data: RatData) -> dict:
    """Per-rat least-squares fits, pooled residual variance, moment hyperparameters."""
    tc = data.t - data.t_bar
    slope = data.y @ tc / (tc @ tc)
    intercept = data.y.mean(axis=1)
    resid = data.y - intercept[:, None] - slope[:, None] * tc
    return {
        "theta1": np.concatenate([intercept, slope]),
        "sigma2_eps": np.float64(np.mean(resid ** 2)),
        "theta1c": np.float64(intercept.mean()),
        "sigma2_1": np.float64(intercept.var(ddof=1)),
        "theta2c": np.float64(slope.mean()),
        "sigma2_2": np.float64(slope.var(ddof=1)),
    }


def rat_model(data: Optional[RatData] = None, *, intercept_sd: float = 0.3,
              slope_sd: float = 0.03, sigma2_sd: float = 5.0,
              scan: str = "per-rat") -> list:
    """Metropolis-within-Gibbs blocks for the rat growth hierarchy.

    Gibbs blocks draw the population means and variances from their
    conjugate conditionals; the two-step block moves the 60 growth
    parameters (random walk) and the error variance (truncated normal at
    its MCELE).  ``scan="per-rat"`` updates one rat's pair at a time,
    ``scan="joint"`` moves all 60 at once.
    """
    data = data or load_rats()
    G = data.n_rats
    base = rat_el_model(data)

    def model(state):
        return RatELModel(base.data, base.g_dim, base.h_dim, base.g_eval, base.h_eval,
                          _RatPrior(G, float(state["theta1c"]), float(state["sigma2_1"]),
                                    float(state["theta2c"]), float(state["sigma2_2"])),
                          theta2_solver=base.theta2_solver, name="rats", cache=base.cache)

    scales = np.concatenate([np.full(G, intercept_sd), np.full(G, slope_sd)])
    if scan == "per-rat":
        groups = [[i, G + i] for i in range(G)]
    elif scan == "joint":
        groups = None
    else:
        raise ValueError(f"unknown scan {scan!r}")
    intercepts = lambda s: s["theta1"][:G]  # noqa: E731
    slopes = lambda s: s["theta1"][G:]  # noqa: E731
    return [
        normal_mean_block("theta1c", "theta1", "sigma2_1", HYPER_PRIOR_MEAN, intercepts),
        inverse_gamma_var_block("sigma2_1", "theta1", "theta1c", HYPER_PRIOR_VAR, intercepts),
        normal_mean_block("theta2c", "theta1", "sigma2_2", HYPER_PRIOR_MEAN, slopes),
        inverse_gamma_var_block("sigma2_2", "theta1", "theta2c", HYPER_PRIOR_VAR, slopes),
        TwoStepBlock(model, "theta1", "sigma2_eps",
                     Proposal1(scales),
                     Proposal2([sigma2_sd], "truncated-normal-at-mcele", [0.0]),
                     scan=groups),
    ]


@njit(cache=True)
def _rat_pair_trial(y, t, tc, a, b, tol, max_iter, max_halvings, cap):
    # one rat's 2-constraint problem; returns status and sum_j u_j r_j^2
    r = y.size
    loc = np.empty((1, r, 2))
    for j in range(r):
        res = y[j] - a - b * tc[j]
        loc[0, j, 0] = res
        loc[0, j, 1] = res * t[j]
    lam = np.zeros((1, 2))
    z, _, _, status = _grouped_kernel(loc, np.zeros((1, r, 0)), lam, np.zeros(0),
                                      tol, max_iter, max_halvings, cap)
    if status != 0:
        return status, 0.0
    total = 0.0
    ss = 0.0
    for j in range(r):
        total += 1.0 / z[0, j]
    for j in range(r):
        res = loc[0, j, 0]
        ss += res * res / z[0, j]
    return 0, ss / total


@njit(cache=True)
def _rat_full(y, t, tc, theta1, sigma2, lam, eta, tol, max_iter, max_halvings, cap):
    # full 61-constraint problem, warm-started from (lam, eta) in place
    G, r = y.shape
    loc = np.empty((G, r, 2))
    sh = np.empty((G, r, 1))
    for g in range(G):
        for j in range(r):
            res = y[g, j] - theta1[g] - theta1[G + g] * tc[j]
            loc[g, j, 0] = res
            loc[g, j, 1] = res * t[j]
            sh[g, j, 0] = res * res - sigma2
    z, _, _, status = _grouped_kernel(loc, sh, lam, eta, tol, max_iter, max_halvings, cap)
    if status != 0:
        return status, -np.inf
    n = G * r
    total = 0.0
    for g in range(G):
        for j in range(r):
            total += 1.0 / z[g, j]
    out = 0.0
    for g in range(G):
        for j in range(r):
            out += np.log(1.0 / (z[g, j] * total))
    return 0, out


class _RatTwoStep:
    """Compiled-solver version of the per-rat two-step block.

    Draws variates from the generator in the same order as
    :func:`bayesel.sampler.two_step_step` and uses the same proposal
    objects, so a chain matches the generic driver up to floating-point
    rounding in the EL solves.  Per-rat trial contributions to the MCELE
    of the error variance are cached, since a pair update changes only one.
    """

    def __init__(self, data: RatData, block: TwoStepBlock, state: dict, prior, opts):
        self.y = np.ascontiguousarray(data.y)
        self.t = np.ascontiguousarray(data.t)
        self.tc = self.t - data.t_bar
        self.G = data.n_rats
        self.q1, self.q2 = block.q1, block.q2
        self.key_theta1, self.key_theta2 = block.theta1, block.theta2
        self.opts = (opts.tol, opts.max_iter, opts.max_halvings, opts.lambda_cap)
        self.theta1 = np.array(state[block.theta1], dtype=float)
        self.sigma2 = float(np.atleast_1d(state[block.theta2])[0])
        self.ss = np.empty(self.G)
        for g in range(self.G):
            st, ss = _rat_pair_trial(self.y[g], self.t, self.tc, self.theta1[g],
                                     self.theta1[self.G + g], *self.opts)
            if st != 0:
                raise InitInfeasible("trial problem infeasible at the initial theta1")
            self.ss[g] = ss
        self.lam = np.zeros((self.G, 2))
        self.eta = np.zeros(1)
        st, le = _rat_full(self.y, self.t, self.tc, self.theta1, self.sigma2,
                           self.lam, self.eta, *self.opts)
        if st != 0:
            raise InitInfeasible("empirical likelihood is zero at the initial state")
        self.log_el = le
        self.mcele = self.ss.sum() / self.G
        self.log_prior = prior(self.theta1, np.array([self.sigma2]))
        if self.log_prior == -np.inf:
            raise InitInfeasible("initial state lies outside the prior support")

    def sweep(self, rng, prior) -> tuple[int, int, bool, Optional[float]]:
        G = self.G
        q1, q2 = self.q1, self.q2
        self.log_prior = prior(self.theta1, np.array([self.sigma2]))
        n_acc = 0
        last = None
        for i in range(G):
            idx = np.array([i, G + i])
            t1 = q1.sample(rng, self.theta1, idx)
            st, ss_i = _rat_pair_trial(self.y[i], self.t, self.tc, t1[i], t1[G + i], *self.opts)
            if st != 0:
                continue
            ss = self.ss.copy()
            ss[i] = ss_i
            center = np.array([ss.sum() / G])
            t2 = q2.sample(rng, t1, center)
            lp = prior(t1, t2)
            u = rng.uniform()
            if lp == -np.inf:
                continue
            lam, eta = self.lam.copy(), self.eta.copy()
            st, le = _rat_full(self.y, self.t, self.tc, t1, float(t2[0]), lam, eta, *self.opts)
            if st != 0:
                continue
            self.lam, self.eta = lam, eta
            cur2 = np.array([self.sigma2])
            num = le + lp + q2.log_density(cur2, self.theta1, np.array([self.mcele]))
            den = self.log_el + self.log_prior + q2.log_density(t2, t1, center)
            if not q1.symmetric:
                num += q1.log_density(self.theta1, t1, idx)
                den += q1.log_density(t1, self.theta1, idx)
            if np.log(u) < min(0.0, num - den):
                self.theta1, self.sigma2 = t1, float(t2[0])
                self.ss, self.mcele = ss, float(center[0])
                self.log_el, self.log_prior = le, lp
                n_acc += 1
                last = self.mcele
        return n_acc, G, n_acc > 0, last


def run_rat_chain(length: int, seed: Optional[int] = None, *, burn_in: int = 0,
                  data: Optional[RatData] = None, rng=None, engine: str = "compiled",
                  **kwargs) -> Trace:
    """Metropolis-within-Gibbs chain for the rat model.

    ``engine="generic"`` runs the blocks through
    :func:`metropolis_within_gibbs`; ``"compiled"`` (per-rat scan only)
    replaces the two-step block by a compiled equivalent.  Both consume
    random numbers identically.
    """
    data = data or load_rats()
    blocks = rat_model(data, **kwargs)
    init = rat_initial_state(data)
    if engine == "generic":
        return metropolis_within_gibbs(blocks, init, length, seed, burn_in=burn_in, rng=rng)
    if engine != "compiled":
        raise ValueError(f"unknown engine {engine!r}")
    if kwargs.get("scan", "per-rat") != "per-rat":
        raise ValueError("the compiled engine implements the per-rat scan only")
    if rng is None:
        rng = np.random.default_rng(seed)
    G = data.n_rats
    state = {k: (np.array(v, dtype=float) if np.ndim(v) else np.float64(v))
             for k, v in init.items()}
    gibbs = [b for b in blocks if isinstance(b, GibbsBlock)]
    mh = next(b for b in blocks if isinstance(b, TwoStepBlock))
    prior_of = lambda st: _RatPrior(G, float(st["theta1c"]), float(st["sigma2_1"]),  # noqa: E731
                                    float(st["theta2c"]), float(st["sigma2_2"]))
    block = _RatTwoStep(data, mh, state, prior_of(state), mh.model(state).solver_options)
    names = [b.name for b in gibbs]
    out_t1 = np.empty((length, 2 * G))
    out_t2 = np.empty((length, 1))
    out_lp = np.empty(length)
    out_acc = np.zeros(length, dtype=bool)
    out_m = np.full((length, 1), np.nan)
    extra = {k: np.empty(length) for k in names}
    n_acc = n_prop = 0
    for it in range(length):
        for b in blocks:
            if isinstance(b, GibbsBlock):
                state[b.name] = b.draw(state, rng)
                continue
            a, p, any_acc, pm = block.sweep(rng, prior_of(state))
            n_acc += a
            n_prop += p
            state[mh.theta1] = block.theta1.copy()
            state[mh.theta2] = np.float64(block.sigma2)
        out_t1[it] = block.theta1
        out_t2[it, 0] = block.sigma2
        out_lp[it] = block.log_el + block.log_prior
        out_acc[it] = any_acc
        if pm is not None:
            out_m[it, 0] = pm
        for k in names:
            extra[k][it] = state[k]
    counts = {k: (length, length) for k in names}
    counts[f"{mh.theta1}|{mh.theta2}"] = (n_acc, n_prop)
    return Trace(out_t1, out_t2, out_lp, out_acc, out_m, seed, burn_in, extra, counts)


def rat_table(trace, burn_in: int, t_bar: float = 22.0) -> dict[str, np.ndarray]:
    """Post-burn-in series of theta0, theta2c and sigma_eps."""
    t1c = np.asarray(trace.extra["theta1c"])[burn_in:]
    t2c = np.asarray(trace.extra["theta2c"])[burn_in:]
    return {
        "theta0": t1c - t2c * t_bar,
        "theta2c": t2c,
        "sigma_eps": np.sqrt(trace.theta2[burn_in:, 0]),
    }


# ---------------------------------------------------------------------------
# DAG parenthood selection


@dataclass(frozen=True)
class DagProblem:
    """Expression matrix with columns in a fixed causal ordering.

    The first ``roots`` columns have no parents; every later column may
    only have parents among the columns before it.
    """

    genes: np.ndarray
    names: tuple
    roots: int = 3

    def __post_init__(self):
        g = np.asarray(self.genes, dtype=float)
        if g.ndim != 2:
            raise DimensionError("genes must be an (n, nodes) matrix")
        names = tuple(str(v) for v in self.names)
        if len(names) != g.shape[1] or len(set(names)) != len(names):
            raise DimensionError("need one distinct name per column")
        if not 1 <= self.roots < g.shape[1]:
            raise DimensionError("roots must leave at least one node to select")
        if g.shape[1] - 1 >= g.shape[0]:
            raise DimensionError("need more observations than candidate parents")
        if not np.all(np.isfinite(g)):
            raise DimensionError("expression values must be finite")
        object.__setattr__(self, "genes", g)
        object.__setattr__(self, "names", names)

    @property
    def nodes(self) -> int:
        return self.genes.shape[1]

    def regression(self, k: int) -> RegressionData:
        """Standardised regression of node ``k`` (0-based) on nodes ``0..k-1``."""
        if not self.roots <= k < self.nodes:
            raise DimensionError(f"node {k} has no parent selection")
        return RegressionData(self.genes[:, k], self.genes[:, :k]).standardize()


def read_dag_csv(path, roots: int = 3) -> DagProblem:
    """CSV with a header of node names; column order is the causal order."""
    data, header = read_observations(path)
    if header is None:
        raise DimensionError(f"{path}: a header row with node names is required")
    return DagProblem(data, tuple(header), roots)


def synth_dag(seed, n: int = 100, nodes: int = 13, roots: int = 3,
              edges: Optional[dict] = None, noise: float = 0.5) -> tuple[DagProblem, dict]:
    """Linear Gaussian network for testing the pipeline.

    ``edges`` maps a child index to ``{parent: coefficient}``; by default a
    sparse graph is drawn from ``seed``.  Returns the problem and the edges.
    """
    rng = np.random.default_rng(seed)
    if edges is None:
        edges = {}
        for k in range(roots, nodes):
            m = int(rng.integers(0, 3))
            parents = sorted(rng.choice(k, size=m, replace=False).tolist())
            edges[k] = {p: float(rng.choice([-1.0, 1.0]) * rng.uniform(0.6, 1.2))
                        for p in parents}
    x = np.empty((n, nodes))
    for k in range(nodes):
        x[:, k] = noise * rng.standard_normal(n) if k >= roots else rng.standard_normal(n)
        for p, c in edges.get(k, {}).items():
            x[:, k] += c * x[:, p]
    names = tuple(f"g{k + 1}" for k in range(nodes))
    return DagProblem(x, names, roots), edges


DAG_PROPOSALS = SelectionProposals(beta_sd=0.03, sigma2_sd=1.0, u_sd=0.05)


@dataclass
class DagResult:
    traces: dict
    parents: dict
    problem: DagProblem
    burn_in: int

    @property
    def edges(self) -> list[tuple[str, str]]:
        return [(p, c) for c in self.problem.names for p in self.parents.get(c, ())]

    def write_edges(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["parent", "child"])
            w.writerows(self.edges)
        return path

    def to_dot(self) -> str:
        lines = ["digraph parenthood {"]
        lines += [f'  "{n}";' for n in self.problem.names]
        lines += [f'  "{p}" -> "{c}";' for p, c in self.edges]
        lines.append("}")
        return "\n".join(lines) + "\n"


def dag_pipeline(problem: DagProblem, length: int = 150_000, seed: int = 0, *,
                 burn_in: int = 50_000, proposals: SelectionProposals = DAG_PROPOSALS,
                 priors: Optional[SelectionPriors] = None,
                 nodes: Optional[list[int]] = None) -> DagResult:
    """Select the parents of every non-root node by reversible jump.

    Node ``k`` regresses its standardised values on the standardised
    values of all earlier nodes.  Each node's chain draws from its own
    stream ``chain_rng(seed, k)``, so results do not depend on which other
    nodes are run.  The selected parent set is the most visited model
    after burn-in, which keeps the graph acyclic.

    Parameters
    ----------
    nodes : list of int, optional
        0-based node indices to run; default every non-root node.
    """
    priors = priors or SelectionPriors()
    todo = range(problem.roots, problem.nodes) if nodes is None else nodes
    traces, parents = {}, {}
    for k in todo:
        data = problem.regression(k)
        tr = rjmcmc(data, length, seed, priors=priors, proposals=proposals,
                    burn_in=burn_in, rng=chain_rng(seed, k))
        name = problem.names[k]
        traces[name] = tr
        bits = tr.modal_model()
        parents[name] = tuple(problem.names[j] for j, b in enumerate(bits) if b == "1")
    return DagResult(traces, parents, problem, burn_in)
