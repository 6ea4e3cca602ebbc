"""BayesEL variable selection for linear models by reversible jump.

For inclusion vector ``gamma`` with coefficients ``beta`` (one per included
covariate, in covariate order) and variance ``sigma2``, the constraint
matrix has ``1 + s + 1`` columns: the residual ``r = y - x_gamma beta``,
``x_j r`` for *every* covariate ``j`` (included or not) and ``r^2 - sigma2``.
Dropping the last column gives the trial problem, which is the same for
every model; only the fitted values change.

Cross-model moves add or remove one covariate.  Parameters are translated
so that their offsets from the least-squares and MCELE anchors of the two
models agree, which keeps proposals inside the new model's support.  The
map is a shift plus a term that depends only on earlier coordinates, so
its Jacobian determinant is one.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

import numpy as np
import scipy.linalg

from .elcore import SolverOptions, solve_el
from .errors import BayesELError, DimensionError, InitInfeasible, SamplerAborted
from .estimating import ELModel, ThetaSplit
from .priors import BetaBinomialModelPrior, DoubleExponential, InverseGamma
from .sampler import ChainState, Proposal1, Proposal2, two_step_step

__all__ = [
    "RegressionData",
    "synth_regression",
    "read_model_trace_csv",
    "ModelState",
    "MceleSigma2",
    "AnchorHats",
    "SelectionPriors",
    "SelectionProposals",
    "ModelTrace",
    "build_ms_constraints",
    "ols",
    "mcele_sigma2",
    "map_up",
    "map_down",
    "log_model_prior",
    "gibbs_lambda",
    "rjmcmc",
    "gamma_bits",
]


@dataclass(frozen=True)
class RegressionData:
    y: np.ndarray
    x: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).ravel()
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if x.shape[0] != y.size:
            raise DimensionError("x and y disagree on the number of observations")
        if x.shape[1] >= y.size:
            raise DimensionError("need fewer covariates than observations")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DimensionError("regression data must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def s(self) -> int:
        return self.x.shape[1]

    def standardize(self) -> "RegressionData":
        x = (self.x - self.x.mean(0)) / self.x.std(0)
        y = (self.y - self.y.mean()) / self.y.std()
        return RegressionData(y, x, True)


def synth_regression(seed, n: int, s: int, beta_true, sigma_true: float) -> RegressionData:
    """``x`` iid standard normal, ``y = x beta_true + N(0, sigma_true^2)``."""
    if s >= n:
        raise DimensionError("need s < n")
    beta_true = np.asarray(beta_true, dtype=float)
    if beta_true.size != s:
        raise DimensionError("beta_true must have length s")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, s))
    y = x @ beta_true + sigma_true * rng.standard_normal(n)
    return RegressionData(y, x)


def _as_gamma(gamma, s: Optional[int] = None) -> np.ndarray:
    g = np.asarray(gamma).astype(bool).ravel()
    if s is not None and g.size != s:
        raise DimensionError(f"gamma has length {g.size}, expected {s}")
    return g


def gamma_bits(gamma) -> str:
    """``gamma`` as a 0/1 string in covariate order."""
    return "".join("1" if v else "0" for v in np.asarray(gamma).astype(bool))


def _residuals(data: RegressionData, gamma: np.ndarray, beta) -> np.ndarray:
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    k = int(gamma.sum())
    if beta.size != k:
        raise DimensionError(f"beta has length {beta.size}, model has {k} covariates")
    if k == 0:
        return data.y.copy()
    return data.y - data.x[:, gamma] @ beta


def build_ms_constraints(data: RegressionData, gamma, beta, sigma2: float) -> np.ndarray:
    """``(n, s + 2)`` constraint matrix ``[r, x_1 r, ..., x_s r, r^2 - sigma2]``."""
    gamma = _as_gamma(gamma, data.s)
    r = _residuals(data, gamma, beta)
    return np.column_stack([r, data.x * r[:, None], r * r - sigma2])


def _trial_matrix(data: RegressionData, r: np.ndarray) -> np.ndarray:
    return np.column_stack([r, data.x * r[:, None]])


def ols(data: RegressionData, gamma) -> np.ndarray:
    """Least-squares coefficients of ``y`` on the included columns.

    Rank-deficient designs get the minimum-norm solution from a complete
    orthogonal factorisation with column pivoting, which is deterministic.
    """
    gamma = _as_gamma(gamma, data.s)
    if not gamma.any():
        return np.zeros(0)
    xg = data.x[:, gamma]
    # LAPACK's default cutoff keeps exactly collinear columns at full rank
    cond = max(xg.shape) * np.finfo(float).eps
    coef, *_ = scipy.linalg.lstsq(xg, data.y, cond=cond, lapack_driver="gelsy")
    return np.asarray(coef, dtype=float)


@dataclass(frozen=True)
class MceleSigma2:
    sigma2_hat: float
    trial_weights: Optional[np.ndarray]
    feasible: bool


def mcele_sigma2(data: RegressionData, gamma, beta,
                 opts: Optional[SolverOptions] = None) -> MceleSigma2:
    """MCELE of ``sigma2`` given ``(gamma, beta)``: ``sum_i nu_i r_i^2``.

    ``nu`` are the EL weights under the residual-mean and residual-covariate
    constraints; ``feasible=False`` (and ``sigma2_hat=nan``) when those
    constraints admit no weights.
    """
    gamma = _as_gamma(gamma, data.s)
    r = _residuals(data, gamma, beta)
    sol = solve_el(_trial_matrix(data, r), opts)
    if not sol.feasible:
        return MceleSigma2(math.nan, None, False)
    return MceleSigma2(float(sol.weights @ (r * r)), sol.weights, True)


# ---------------------------------------------------------------------------
# Dimension-matching map


Sigma2Anchor = Union[float, Callable[[np.ndarray], float]]


@dataclass(frozen=True)
class AnchorHats:
    """Anchors of the smaller model (``low``) and the larger one (``high``).

    The MCELE anchors are either numbers or callables mapping that model's
    coefficient vector to its MCELE; the map uses the callables when the
    anchor must be evaluated at the freshly mapped coefficients.
    """

    beta_ols_low: np.ndarray
    beta_ols_high: np.ndarray
    sigma2_mcele_low: Sigma2Anchor
    sigma2_mcele_high: Sigma2Anchor


def _anchor(value: Sigma2Anchor, beta: np.ndarray) -> float:
    return float(value(beta)) if callable(value) else float(value)


def map_up(beta_low, u: float, sigma2_low: float, hats: AnchorHats, j: int):
    """Map ``(beta_low, u, sigma2_low)`` into the model with one more covariate.

    ``j`` is the position of the added covariate inside the larger
    coefficient vector.  Returns ``(beta_high, sigma2_high)``;
    ``sigma2_high`` is nan when an MCELE anchor is infeasible and may be
    non-positive, both of which the caller treats as rejection.
    """
    beta_low = np.atleast_1d(np.asarray(beta_low, dtype=float))
    bh = np.asarray(hats.beta_ols_high, dtype=float)
    bl = np.asarray(hats.beta_ols_low, dtype=float)
    if bh.size != beta_low.size + 1 or bl.size != beta_low.size:
        raise DimensionError("anchor dimensions do not match a one-covariate jump")
    rest = np.delete(bh, j)
    beta_high = np.insert(beta_low + (rest - bl), j, u + bh[j])
    sigma2_high = (sigma2_low + _anchor(hats.sigma2_mcele_high, beta_high)
                   - _anchor(hats.sigma2_mcele_low, beta_low))
    return beta_high, sigma2_high


def map_down(beta_high, sigma2_high: float, hats: AnchorHats, j: int):
    """Inverse of :func:`map_up`: returns ``(beta_low, u, sigma2_low)``."""
    beta_high = np.atleast_1d(np.asarray(beta_high, dtype=float))
    bh = np.asarray(hats.beta_ols_high, dtype=float)
    bl = np.asarray(hats.beta_ols_low, dtype=float)
    if bh.size != beta_high.size or bl.size + 1 != beta_high.size:
        raise DimensionError("anchor dimensions do not match a one-covariate jump")
    u = float(beta_high[j] - bh[j])
    beta_low = np.delete(beta_high, j) - (np.delete(bh, j) - bl)
    sigma2_low = (sigma2_high - _anchor(hats.sigma2_mcele_high, beta_high)
                  + _anchor(hats.sigma2_mcele_low, beta_low))
    return beta_low, u, sigma2_low


# ---------------------------------------------------------------------------
# Priors


def log_model_prior(gamma, a: float = 2.0, b: float = 7.0) -> float:
    """Beta-binomial log prior: inclusion probability ``~ Beta(a, b)`` integrated out."""
    return BetaBinomialModelPrior(a, b).log_prob(gamma)


def gibbs_lambda(beta_all, rng: np.random.Generator, a0: float = 5.0, b0: float = 5.0) -> float:
    """Draw the double-exponential scale from ``IG(a0 + k, b0 + sum |beta|)``."""
    beta_all = np.atleast_1d(np.asarray(beta_all, dtype=float))
    post = InverseGamma(a0 + beta_all.size, b0 + float(np.abs(beta_all).sum()))
    return float(post.scale / rng.gamma(post.shape))


@dataclass(frozen=True)
class SelectionPriors:
    """``beta_j ~ DE(0, lambda)``, ``lambda ~ IG(lambda_shape, lambda_scale)``,
    ``sigma2 ~ IG(sigma2_shape, sigma2_scale)`` and a beta-binomial model prior."""

    lambda_shape: float = 5.0
    lambda_scale: float = 5.0
    sigma2_shape: float = 0.1
    sigma2_scale: float = 0.1
    model_a: float = 2.0
    model_b: float = 7.0

    def log_prior(self, gamma, beta, sigma2: float, lam: float) -> float:
        lp = InverseGamma(self.sigma2_shape, self.sigma2_scale).log_pdf(sigma2)
        if lp == -np.inf:
            return lp
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        if beta.size:
            lp += DoubleExponential(0.0, lam).log_pdf(beta)
        return lp + log_model_prior(gamma, self.model_a, self.model_b)


@dataclass(frozen=True)
class SelectionProposals:
    """Within-model and cross-model proposal settings.

    ``within`` is ``"random-walk"`` (Gaussian steps from the current
    coefficients) or ``"ols-centered"`` (independent Gaussian draws around
    the model's least-squares fit).  ``sigma2`` is proposed from a normal
    truncated at zero and centred at its MCELE; ``u_sd`` is the sd of the
    dimension-matching variable.
    """

    beta_sd: float = 0.03
    sigma2_sd: float = 1.0
    u_sd: float = 0.05
    within: str = "random-walk"

    def __post_init__(self):
        if self.within not in ("random-walk", "ols-centered"):
            raise ValueError(f"unknown within-model proposal {self.within!r}")
        if min(self.beta_sd, self.sigma2_sd, self.u_sd) <= 0:
            raise ValueError("proposal scales must be positive")


# ---------------------------------------------------------------------------
# State and trace


@dataclass(frozen=True)
class ModelState:
    gamma: np.ndarray
    beta: np.ndarray
    sigma2: float
    beta_ols: np.ndarray
    sigma2_mcele: float
    log_el: float
    log_prior: float

    def __post_init__(self):
        g = np.asarray(self.gamma).astype(bool)
        b = np.atleast_1d(np.asarray(self.beta, dtype=float))
        if b.size != int(g.sum()):
            raise DimensionError("beta length must equal the number of included covariates")
        if not self.sigma2 > 0:
            raise ValueError("sigma2 must be positive")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "beta", b)

    @property
    def k(self) -> int:
        return int(self.gamma.sum())

    @property
    def log_post(self) -> float:
        return self.log_el + self.log_prior


MOVES = ("within", "birth", "death")


@dataclass
class ModelTrace:
    """Two rows per iteration: the within-model move, then the cross-model move.

    ``states`` holds the state after every move; model frequencies use the
    state at the end of each post-burn-in iteration.
    """

    move: np.ndarray
    accepted: np.ndarray
    gamma: np.ndarray
    sigma2: np.ndarray
    log_post: np.ndarray
    beta: list
    lam: np.ndarray
    s: int
    seed: Optional[int] = None
    burn_in: int = 0

    @property
    def iterations(self) -> int:
        return self.move.size // 2

    def end_of_iteration(self) -> np.ndarray:
        return np.arange(1, self.move.size, 2)

    def model_frequencies(self, burn_in: Optional[int] = None) -> dict[str, float]:
        burn_in = self.burn_in if burn_in is None else burn_in
        rows = self.end_of_iteration()[burn_in:]
        if rows.size == 0:
            return {}
        keys, counts = np.unique([gamma_bits(self.gamma[i]) for i in rows], return_counts=True)
        return {str(k): float(c) / rows.size for k, c in zip(keys, counts)}

    def modal_model(self, burn_in: Optional[int] = None) -> str:
        freq = self.model_frequencies(burn_in)
        # ties broken by the bitstring so the answer is deterministic
        return max(sorted(freq), key=lambda k: freq[k])

    def acceptance(self) -> dict[str, float]:
        out = {}
        for mv in MOVES:
            sel = self.move == mv
            out[mv] = float(self.accepted[sel].mean()) if sel.any() else math.nan
        cross = (self.move == "birth") | (self.move == "death")
        out["cross"] = float(self.accepted[cross].mean()) if cross.any() else math.nan
        return out

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "move", "accepted", "k", "gamma_bits", "sigma2",
                        "log_post", "beta_json"])
            for i in range(self.move.size):
                w.writerow([i // 2 + 1, self.move[i], int(self.accepted[i]),
                            int(self.gamma[i].sum()), gamma_bits(self.gamma[i]),
                            repr(float(self.sigma2[i])), repr(float(self.log_post[i])),
                            json.dumps([float(v) for v in self.beta[i]])])
        return path

    def write_frequencies(self, path, burn_in: Optional[int] = None) -> Path:
        path = Path(path)
        freq = self.model_frequencies(burn_in)
        path.write_text(json.dumps(dict(sorted(freq.items())), indent=2) + "\n")
        return path


def read_model_trace_csv(path) -> dict[str, list]:
    """Read a model trace CSV into column lists (``beta_json`` decoded)."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {
        "iter": [int(r["iter"]) for r in rows],
        "move": [r["move"] for r in rows],
        "accepted": [bool(int(r["accepted"])) for r in rows],
        "gamma_bits": [r["gamma_bits"] for r in rows],
        "sigma2": [float(r["sigma2"]) for r in rows],
        "log_post": [float(r["log_post"]) for r in rows],
        "beta": [json.loads(r["beta_json"]) for r in rows],
    }


# ---------------------------------------------------------------------------
# Sampler


class _Selector:
    """Per-run caches: least-squares fits and EL models keyed by ``gamma``."""

    def __init__(self, data: RegressionData, priors: SelectionPriors,
                 props: SelectionProposals, opts: Optional[SolverOptions]):
        self.data = data
        self.priors = priors
        self.props = props
        self.opts = opts or SolverOptions()
        self.lam = priors.lambda_scale / (priors.lambda_shape - 1.0) if priors.lambda_shape > 1 else 1.0
        self._ols: dict[bytes, np.ndarray] = {}
        self._models: dict[bytes, ELModel] = {}
        self.q2 = Proposal2([props.sigma2_sd], "truncated-normal-at-mcele", [0.0])
        self.stacked = np.column_stack([data.y, data.x])

    def ols(self, gamma: np.ndarray) -> np.ndarray:
        key = gamma.tobytes()
        if key not in self._ols:
            self._ols[key] = ols(self.data, gamma)
        return self._ols[key]

    def mcele(self, gamma, beta) -> float:
        m = mcele_sigma2(self.data, gamma, beta, self.opts)
        return m.sigma2_hat if m.feasible else math.nan

    def log_el(self, gamma, beta, sigma2) -> float:
        sol = solve_el(build_ms_constraints(self.data, gamma, beta, sigma2), self.opts)
        return sol.log_el

    def log_prior(self, gamma, beta, sigma2) -> float:
        return self.priors.log_prior(gamma, beta, sigma2, self.lam)

    def model(self, gamma: np.ndarray) -> ELModel:
        key = gamma.tobytes()
        if key not in self._models:
            idx = np.flatnonzero(gamma)
            data = self.data

            def g_eval(_, beta, idx=idx):
                r = data.y - data.x[:, idx] @ beta
                return np.column_stack([r, data.x * r[:, None]])

            def h_eval(_, beta, s2, idx=idx):
                r = data.y - data.x[:, idx] @ beta
                return r * r - s2[0]

            def solver(_, beta, nu, idx=idx):
                r = data.y - data.x[:, idx] @ beta
                return np.array([nu @ (r * r)])

            def prior(beta, s2, gamma=gamma):
                return self.log_prior(gamma, beta, s2[0])

            self._models[key] = ELModel(self.stacked, 1 + data.s, 1, g_eval, h_eval, prior,
                                        theta2_solver=solver, name=f"lm:{gamma_bits(gamma)}",
                                        solver_options=self.opts)
        return self._models[key]

    def make_state(self, gamma, beta, sigma2) -> Optional[ModelState]:
        """Evaluate a candidate state; ``None`` when it has zero posterior."""
        if not sigma2 > 0 or not math.isfinite(sigma2):
            return None
        m = self.mcele(gamma, beta)
        if math.isnan(m):
            return None
        lp = self.log_prior(gamma, beta, sigma2)
        if lp == -np.inf:
            return None
        le = self.log_el(gamma, beta, sigma2)
        if le == -np.inf:
            return None
        return ModelState(gamma, beta, sigma2, self.ols(gamma), m, le, lp)

    # -- within-model --------------------------------------------------------

    def within(self, st: ModelState, rng) -> tuple[ModelState, bool]:
        if st.k == 0:
            return self._within_null(st, rng)
        model = self.model(st.gamma)
        if self.props.within == "random-walk":
            q1 = Proposal1([self.props.beta_sd])
        else:
            q1 = Proposal1([self.props.beta_sd], "independent-gaussian", center=st.beta_ols)
        cs = ChainState(ThetaSplit(st.beta, [st.sigma2]), st.log_el, st.log_prior,
                        np.array([st.sigma2_mcele]))
        new, acc, _ = two_step_step(model, cs, q1, self.q2, rng)
        if not acc:
            return st, False
        return ModelState(st.gamma, np.array(new.theta.theta1), float(new.theta.theta2[0]),
                          st.beta_ols, float(new.mcele[0]), new.log_el, new.log_prior), True

    def _within_null(self, st: ModelState, rng) -> tuple[ModelState, bool]:
        # no coefficients: only sigma2 moves, around the fixed null-model MCELE
        center = np.array([st.sigma2_mcele])
        t2 = self.q2.sample(rng, np.zeros(0), center)
        lp = self.log_prior(st.gamma, st.beta, float(t2[0]))
        u = rng.uniform()
        if lp == -np.inf:
            return st, False
        le = self.log_el(st.gamma, st.beta, float(t2[0]))
        if le == -np.inf:
            return st, False
        num = le + lp + self.q2.log_density(np.array([st.sigma2]), None, center)
        den = st.log_post + self.q2.log_density(t2, None, center)
        if math.log(u) < min(0.0, num - den):
            return ModelState(st.gamma, st.beta, float(t2[0]), st.beta_ols, st.sigma2_mcele,
                              le, lp), True
        return st, False

    # -- cross-model ---------------------------------------------------------

    def _log_qu(self, u: float) -> float:
        sd = self.props.u_sd
        return -math.log(sd) - 0.5 * math.log(2 * math.pi) - 0.5 * (u / sd) ** 2

    def cross(self, st: ModelState, rng) -> tuple[ModelState, bool, str]:
        s = self.data.s
        j = int(rng.integers(s))
        if not st.gamma[j]:
            g_new = st.gamma.copy()
            g_new[j] = True
            pos = int(np.count_nonzero(st.gamma[:j]))
            u = float(rng.normal(0.0, self.props.u_sd))
            hats = AnchorHats(st.beta_ols, self.ols(g_new), st.sigma2_mcele,
                              lambda b, g=g_new: self.mcele(g, b))
            beta_new, s2_new = map_up(st.beta, u, st.sigma2, hats, pos)
            log_q = -self._log_qu(u)
            move = "birth"
        else:
            g_new = st.gamma.copy()
            g_new[j] = False
            pos = int(np.count_nonzero(st.gamma[:j]))
            hats = AnchorHats(self.ols(g_new), st.beta_ols,
                              lambda b, g=g_new: self.mcele(g, b), st.sigma2_mcele)
            beta_new, u, s2_new = map_down(st.beta, st.sigma2, hats, pos)
            log_q = self._log_qu(u)
            move = "death"
        accept_u = rng.uniform()
        if not (s2_new > 0):
            return st, False, move
        new = self.make_state(g_new, beta_new, float(s2_new))
        if new is None:
            return st, False, move
        # uniform index proposal: q_gamma terms cancel; Jacobian is one
        if math.log(accept_u) < min(0.0, new.log_post - st.log_post + log_q):
            return new, True, move
        return st, False, move

    def refresh_prior(self, st: ModelState) -> ModelState:
        lp = self.log_prior(st.gamma, st.beta, st.sigma2)
        return ModelState(st.gamma, st.beta, st.sigma2, st.beta_ols, st.sigma2_mcele,
                          st.log_el, lp)


def _default_start(sel: _Selector) -> Optional[ModelState]:
    # null model first; strong signals make it infeasible, then the full OLS fit
    data = sel.data
    st = sel.make_state(np.zeros(data.s, dtype=bool), np.zeros(0), float(np.var(data.y)))
    if st is not None:
        return st
    full = np.ones(data.s, dtype=bool)
    beta = sel.ols(full)
    s2 = sel.mcele(full, beta)
    return sel.make_state(full, beta, s2) if s2 > 0 else None


def rjmcmc(data: RegressionData, length: int, seed: Optional[int] = None, *,
           priors: Optional[SelectionPriors] = None,
           proposals: Optional[SelectionProposals] = None,
           init: Optional[tuple] = None, burn_in: int = 0,
           rng: Optional[np.random.Generator] = None,
           opts: Optional[SolverOptions] = None) -> ModelTrace:
    """Two-step reversible-jump sampler over linear models.

    Each iteration runs a two-step Metropolis-Hastings update of
    ``(beta, sigma2)`` inside the current model, then proposes adding or
    removing one covariate chosen uniformly, then redraws the
    double-exponential scale ``lambda`` from its conditional.

    Parameters
    ----------
    data : RegressionData
    length : int
        Number of iterations.
    seed : int, optional
        Seeds a fresh generator unless ``rng`` is supplied.
    init : (gamma, beta, sigma2), optional
        Default: the null model with ``sigma2`` the sample variance of
        ``y``; when that is infeasible, the full model at its least-squares
        fit with ``sigma2`` at its MCELE.

    Raises
    ------
    InitInfeasible
        If the initial state has zero posterior density.
    SamplerAborted
        On a numerical failure; the exception carries the partial trace.
    """
    priors = priors or SelectionPriors()
    proposals = proposals or SelectionProposals()
    if rng is None:
        rng = np.random.default_rng(seed)
    sel = _Selector(data, priors, proposals, opts)
    if init is None:
        st = _default_start(sel)
    else:
        g0 = _as_gamma(init[0], data.s)
        st = sel.make_state(g0, np.atleast_1d(np.asarray(init[1], dtype=float)), float(init[2]))
    if st is None:
        raise InitInfeasible("initial model state has zero posterior density")

    rows = 2 * length
    move = np.empty(rows, dtype=object)
    accepted = np.zeros(rows, dtype=bool)
    gammas = np.zeros((rows, data.s), dtype=bool)
    sigma2 = np.empty(rows)
    log_post = np.empty(rows)
    betas: list = [None] * rows
    lam = np.empty(length)
    filled = 0

    def record(mv, acc, state):
        nonlocal filled
        move[filled] = mv
        accepted[filled] = acc
        gammas[filled] = state.gamma
        sigma2[filled] = state.sigma2
        log_post[filled] = state.log_post
        betas[filled] = state.beta
        filled += 1

    def partial():
        k = filled - filled % 2
        return ModelTrace(move[:k].astype(str), accepted[:k], gammas[:k], sigma2[:k],
                          log_post[:k], betas[:k], lam[: k // 2], data.s, seed, burn_in)

    try:
        for it in range(length):
            st, acc = sel.within(st, rng)
            record("within", acc, st)
            st, acc, mv = sel.cross(st, rng)
            record(mv, acc, st)
            sel.lam = gibbs_lambda(st.beta, rng, priors.lambda_shape, priors.lambda_scale)
            lam[it] = sel.lam
            st = sel.refresh_prior(st)
    except (BayesELError, np.linalg.LinAlgError, FloatingPointError) as exc:
        raise SamplerAborted(f"chain aborted after {filled // 2} iterations: {exc}",
                             partial()) from exc
    return partial()
