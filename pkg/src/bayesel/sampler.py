"""Two-step Metropolis-Hastings for BayesEL posteriors.

Each step proposes ``theta1`` from a random walk, computes the MCELE of
``theta2`` at the proposed ``theta1``, draws ``theta2`` around that MCELE
and accepts with the usual Metropolis-Hastings ratio.  Because the
``theta2`` proposal is centred at a deterministic function of ``theta1``,
the reverse move needs the MCELE at the *current* ``theta1``; it is cached
in :class:`ChainState` so it is computed once per accepted state.
"""
from __future__ import annotations

import csv
import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import log_ndtr, ndtri

from .errors import BayesELError, InitInfeasible, SamplerAborted
from .estimating import ELModel, ThetaSplit
from .mcele import mcele
from .priors import InverseGamma, Normal

__all__ = [
    "Proposal1",
    "Proposal2",
    "ChainState",
    "Trace",
    "chain_rng",
    "init_state",
    "acceptance_ratio",
    "log_acceptance_ratio",
    "two_step_step",
    "two_step_mh",
    "GibbsBlock",
    "TwoStepBlock",
    "metropolis_within_gibbs",
    "normal_mean_block",
    "inverse_gamma_var_block",
    "write_trace_csv",
    "read_trace_csv",
]

_LOG_SQRT_2PI = 0.5 * float(np.log(2.0 * np.pi))


def chain_rng(seed: int, chain_id: int = 0) -> np.random.Generator:
    """Independent stream for chain ``chain_id`` under a run seed."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(chain_id),)))


@dataclass(frozen=True)
class Proposal1:
    """Proposal for ``theta1``.

    ``"gaussian-random-walk"`` steps from the current value;
    ``"independent-gaussian"`` draws around a fixed ``center`` and is not
    symmetric.
    """

    scales: np.ndarray
    kind: str = "gaussian-random-walk"
    center: Optional[np.ndarray] = None

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.scales, dtype=float))
        if self.kind not in ("gaussian-random-walk", "independent-gaussian"):
            raise ValueError(f"unknown theta1 proposal kind {self.kind!r}")
        if self.kind == "independent-gaussian":
            if self.center is None:
                raise ValueError("independent proposal needs a center")
            object.__setattr__(self, "center", np.atleast_1d(np.asarray(self.center, dtype=float)))
        if not np.all(s > 0):
            raise ValueError("proposal scales must be positive")
        object.__setattr__(self, "scales", s)

    @property
    def symmetric(self) -> bool:
        return self.kind == "gaussian-random-walk"

    def _scales_for(self, p: int) -> np.ndarray:
        return np.broadcast_to(self.scales, (p,)) if self.scales.size == 1 else self.scales

    def sample(self, rng: np.random.Generator, current: np.ndarray,
               idx: Optional[np.ndarray] = None) -> np.ndarray:
        out = np.array(current, dtype=float)
        s = self._scales_for(out.size)
        base = out if self.center is None else self.center
        if idx is None:
            out = base + s * rng.standard_normal(out.size)
        else:
            out[idx] = base[idx] + s[idx] * rng.standard_normal(len(idx))
        return out

    def log_density(self, to: np.ndarray, frm: np.ndarray,
                    idx: Optional[np.ndarray] = None) -> float:
        s = self._scales_for(np.size(frm))
        base = frm if self.center is None else self.center
        d = np.asarray(to, dtype=float) - np.asarray(base, dtype=float)
        if idx is not None:
            d, s = d[idx], s[idx]
        return float(-np.sum(np.log(s)) - d.size * _LOG_SQRT_2PI - 0.5 * np.sum((d / s) ** 2))


@dataclass(frozen=True)
class Proposal2:
    """Proposal for ``theta2`` centred at its MCELE.

    ``kind`` is ``"gaussian-at-mcele"`` or ``"truncated-normal-at-mcele"``;
    the latter needs ``lower_bounds`` and its density carries the
    centre-dependent normalising constant.
    """

    scales: np.ndarray
    kind: str = "gaussian-at-mcele"
    lower_bounds: Optional[np.ndarray] = None

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.scales, dtype=float))
        if not np.all(s > 0):
            raise ValueError("proposal scales must be positive")
        object.__setattr__(self, "scales", s)
        if self.kind == "truncated-normal-at-mcele":
            if self.lower_bounds is None:
                raise ValueError("truncated proposal needs lower_bounds")
            object.__setattr__(self, "lower_bounds",
                               np.atleast_1d(np.asarray(self.lower_bounds, dtype=float)))
        elif self.kind != "gaussian-at-mcele":
            raise ValueError(f"unknown theta2 proposal kind {self.kind!r}")

    @property
    def truncated(self) -> bool:
        return self.kind == "truncated-normal-at-mcele"

    def sample(self, rng: np.random.Generator, theta1: np.ndarray,
               center: np.ndarray) -> np.ndarray:
        center = np.asarray(center, dtype=float)
        if center.size == 1 and self.scales.size == 1:
            return self._sample_scalar(rng, float(center.reshape(-1)[0])).reshape(center.shape)
        s = np.broadcast_to(self.scales, center.shape)
        if not self.truncated:
            return center + s * rng.standard_normal(center.size)
        a = (np.broadcast_to(self.lower_bounds, center.shape) - center) / s
        # inverse-cdf draw from the upper tail, accurate even far out in it
        upper_mass = np.exp(log_ndtr(-a))
        v = rng.uniform(size=center.size) * upper_mass
        z = -ndtri(v)
        z = np.maximum(z, a)
        return center + s * z

    def _sample_scalar(self, rng, c: float) -> np.ndarray:
        # same draws and arithmetic as the vector path, minus array overhead
        s = float(self.scales[0])
        if not self.truncated:
            return np.array([c + s * rng.standard_normal(1)[0]])
        a = (float(self.lower_bounds[0]) - c) / s
        v = rng.uniform(size=1)[0] * math.exp(log_ndtr(-a))
        z = max(-float(ndtri(v)), a)
        return np.array([c + s * z])

    def log_density(self, x: np.ndarray, theta1: np.ndarray, center: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        center = np.asarray(center, dtype=float)
        if center.size == 1 and self.scales.size == 1:
            xv = float(x.reshape(-1)[0])
            cv = float(center.reshape(-1)[0])
            s = float(self.scales[0])
            z = (xv - cv) / s
            out = -math.log(s) - _LOG_SQRT_2PI - 0.5 * z * z
            if self.truncated:
                lb = float(self.lower_bounds[0])
                if xv < lb:
                    return -math.inf
                out -= float(log_ndtr((cv - lb) / s))
            return out
        s = np.broadcast_to(self.scales, center.shape)
        z = (x - center) / s
        out = -np.sum(np.log(s)) - z.size * _LOG_SQRT_2PI - 0.5 * float(z @ z)
        if self.truncated:
            lb = np.broadcast_to(self.lower_bounds, center.shape)
            if np.any(x < lb):
                return -np.inf
            out -= float(np.sum(log_ndtr((center - lb) / s)))
        return float(out)


@dataclass(frozen=True)
class ChainState:
    """A chain state with its cached log EL, log prior and MCELE."""

    theta: ThetaSplit
    log_el: float
    log_prior: float
    mcele: np.ndarray

    @property
    def log_post(self) -> float:
        return self.log_el + self.log_prior


def init_state(model: ELModel, init: ThetaSplit) -> ChainState:
    """Evaluate an initial state; raises :class:`InitInfeasible` off support."""
    lp = model.log_prior(init.theta1, init.theta2)
    if lp == -np.inf:
        raise InitInfeasible("initial state lies outside the prior support")
    sol = model.full_solution(init)
    if not sol.feasible:
        raise InitInfeasible("empirical likelihood is zero at the initial state")
    m = mcele(model, init.theta1)
    if not m.feasible:
        raise InitInfeasible("trial problem infeasible at the initial theta1")
    return ChainState(init, sol.log_el, lp, m.theta2_hat)


def log_acceptance_ratio(curr: ChainState, prop: ChainState, q1: Proposal1,
                         q2: Proposal2, idx: Optional[np.ndarray] = None) -> float:
    """Log of the two-step Metropolis-Hastings ratio, capped at 0."""
    if prop.log_post == -np.inf:
        return -np.inf
    c, p = curr.theta, prop.theta
    num = prop.log_post + q2.log_density(c.theta2, c.theta1, curr.mcele)
    den = curr.log_post + q2.log_density(p.theta2, p.theta1, prop.mcele)
    if not q1.symmetric:
        num += q1.log_density(c.theta1, p.theta1, idx)
        den += q1.log_density(p.theta1, c.theta1, idx)
    return min(0.0, num - den)


def acceptance_ratio(curr: ChainState, prop: ChainState, q1: Proposal1,
                     q2: Proposal2, idx: Optional[np.ndarray] = None) -> float:
    return float(np.exp(log_acceptance_ratio(curr, prop, q1, q2, idx)))


def two_step_step(model: ELModel, state: ChainState, q1: Proposal1, q2: Proposal2,
                  rng: np.random.Generator, idx: Optional[np.ndarray] = None,
                  ) -> tuple[ChainState, bool, Optional[np.ndarray]]:
    """One two-step Metropolis-Hastings transition.

    Returns the new state, whether the proposal was accepted, and the MCELE
    at the proposed ``theta1`` (``None`` when the trial problem was
    infeasible and the state was simply repeated).
    """
    t1 = q1.sample(rng, state.theta.theta1, idx)
    m = mcele(model, t1)
    if not m.feasible:
        return state, False, None
    t2 = q2.sample(rng, t1, m.theta2_hat)
    lp = model.log_prior(t1, t2)
    u = rng.uniform()
    if lp == -np.inf:
        return state, False, m.theta2_hat
    theta = ThetaSplit(t1, t2)
    sol = model.full_solution(theta)
    if not sol.feasible:
        return state, False, m.theta2_hat
    prop = ChainState(theta, sol.log_el, lp, m.theta2_hat)
    if np.log(u) < log_acceptance_ratio(state, prop, q1, q2, idx):
        return prop, True, m.theta2_hat
    return state, False, m.theta2_hat


@dataclass
class Trace:
    """Chain output: row ``t`` is the state after iteration ``t``.

    ``accepted[t]`` is false exactly when row ``t`` repeats row ``t - 1``
    (the initial state for ``t = 0``).  ``extra`` holds Gibbs-updated
    quantities as named columns.
    """

    theta1: np.ndarray
    theta2: np.ndarray
    log_post: np.ndarray
    accepted: np.ndarray
    mcele_values: np.ndarray
    seed: Optional[int] = None
    burn_in: int = 0
    extra: dict = field(default_factory=dict)
    acceptance_counts: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.log_post.size

    @property
    def states(self) -> list[ThetaSplit]:
        return [ThetaSplit(a, b) for a, b in zip(self.theta1, self.theta2)]

    def columns(self) -> dict[str, np.ndarray]:
        """All scalar parameter series keyed by their CSV column name."""
        cols = {}
        for j in range(self.theta1.shape[1]):
            cols[f"theta1_{j + 1}"] = self.theta1[:, j]
        for j in range(self.theta2.shape[1]):
            cols[f"theta2_{j + 1}"] = self.theta2[:, j]
        for name, values in self.extra.items():
            values = np.asarray(values)
            if values.ndim == 1:
                cols[name] = values
            else:
                for j in range(values.shape[1]):
                    cols[f"{name}_{j + 1}"] = values[:, j]
        return cols

    def truncated(self, size: int) -> "Trace":
        return dataclasses.replace(
            self,
            theta1=self.theta1[:size], theta2=self.theta2[:size],
            log_post=self.log_post[:size], accepted=self.accepted[:size],
            mcele_values=self.mcele_values[:size],
            extra={k: np.asarray(v)[:size] for k, v in self.extra.items()})


class _Recorder:
    def __init__(self, length: int, p: int, q: int):
        self.theta1 = np.empty((length, p))
        self.theta2 = np.empty((length, q))
        self.log_post = np.empty(length)
        self.accepted = np.zeros(length, dtype=bool)
        self.mcele = np.full((length, q), np.nan)
        self.extra: dict[str, np.ndarray] = {}
        self.size = 0

    def record(self, state: ChainState, accepted: bool, prop_mcele, extra=None, log_post=None):
        t = self.size
        self.theta1[t] = state.theta.theta1
        self.theta2[t] = state.theta.theta2
        self.log_post[t] = state.log_post if log_post is None else log_post
        self.accepted[t] = accepted
        if prop_mcele is not None:
            self.mcele[t] = prop_mcele
        for name, value in (extra or {}).items():
            value = np.asarray(value, dtype=float)
            if name not in self.extra:
                self.extra[name] = np.empty((self.theta1.shape[0],) + value.shape)
            self.extra[name][t] = value
        self.size += 1

    def trace(self, seed, burn_in, counts=None) -> Trace:
        k = self.size
        return Trace(self.theta1[:k], self.theta2[:k], self.log_post[:k],
                     self.accepted[:k], self.mcele[:k], seed, burn_in,
                     {n: v[:k] for n, v in self.extra.items()}, dict(counts or {}))


def two_step_mh(model: ELModel, init: ThetaSplit, q1: Proposal1, q2: Proposal2,
                length: int, seed: Optional[int] = None, *, burn_in: int = 0,
                rng: Optional[np.random.Generator] = None,
                scan: Optional[Sequence[Sequence[int]]] = None) -> Trace:
    """Run the fixed-dimension two-step Metropolis-Hastings sampler.

    Parameters
    ----------
    model : ELModel
    init : ThetaSplit
        Starting point; must have finite posterior density.
    q1, q2 : Proposal1, Proposal2
    length : int
        Number of iterations (rows in the returned trace).
    seed : int, optional
        Seeds a fresh generator unless ``rng`` is given.
    burn_in : int
        Stored on the trace for downstream summaries; nothing is discarded.
    scan : sequence of index groups, optional
        Update ``theta1`` one group at a time per iteration (systematic
        scan).  Default is one joint move.

    Raises
    ------
    InitInfeasible
        If the initial state has zero posterior density.
    SamplerAborted
        On a numerical failure mid-run; carries the partial trace.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    state = init_state(model, init)
    rec = _Recorder(length, init.p, init.q)
    groups = None if scan is None else [np.asarray(g, dtype=int) for g in scan]
    n_prop = n_acc = 0
    try:
        for _ in range(length):
            if groups is None:
                state, acc, pm = two_step_step(model, state, q1, q2, rng)
                n_prop += 1
                n_acc += acc
            else:
                acc, pm = False, None
                for g in groups:
                    state, a, pm_g = two_step_step(model, state, q1, q2, rng, g)
                    n_prop += 1
                    n_acc += a
                    acc = acc or a
                    if a:
                        pm = pm_g
            rec.record(state, acc, pm)
    except (BayesELError, np.linalg.LinAlgError, FloatingPointError) as exc:
        raise SamplerAborted(f"chain aborted after {rec.size} iterations: {exc}",
                             rec.trace(seed, burn_in)) from exc
    return rec.trace(seed, burn_in, {"two_step": (n_acc, n_prop)})


# ---------------------------------------------------------------------------
# Metropolis within Gibbs


@dataclass
class GibbsBlock:
    """Exact draw of ``name`` from its full conditional given the state."""

    name: str
    draw: Callable[[dict, np.random.Generator], np.ndarray]
    kind: str = "gibbs-conjugate"


@dataclass
class TwoStepBlock:
    """Two-step Metropolis-Hastings update of ``(state[theta1], state[theta2])``.

    ``model`` builds the EL model for the current state, so priors that
    depend on Gibbs-updated hyperparameters are picked up each sweep.
    """

    model: Callable[[dict], ELModel]
    theta1: str
    theta2: str
    q1: Proposal1
    q2: Proposal2
    scan: Optional[Sequence[Sequence[int]]] = None
    kind: str = "two-step-mh"


def normal_mean_block(name: str, values_key: str, var_key: str, prior: Normal,
                      index: Optional[Callable[[dict], np.ndarray]] = None) -> GibbsBlock:
    """Conjugate normal-normal update of a population mean."""

    def draw(state, rng):
        values = state[values_key] if index is None else index(state)
        post = prior.posterior_given_normal(values, float(state[var_key]))
        return np.float64(post.mean + np.sqrt(post.var) * rng.standard_normal())

    return GibbsBlock(name, draw, "normal-normal")


def inverse_gamma_var_block(name: str, values_key: str, mean_key: str, prior: InverseGamma,
                            index: Optional[Callable[[dict], np.ndarray]] = None) -> GibbsBlock:
    """Conjugate normal-inverse-gamma update of a population variance."""

    def draw(state, rng):
        values = state[values_key] if index is None else index(state)
        post = prior.posterior_given_normal(np.asarray(values) - float(state[mean_key]))
        return np.float64(post.scale / rng.gamma(post.shape))

    return GibbsBlock(name, draw, "normal-inverse-gamma")


def metropolis_within_gibbs(blocks: Sequence, init: dict, length: int,
                            seed: Optional[int] = None, *, burn_in: int = 0,
                            rng: Optional[np.random.Generator] = None,
                            record: Optional[Sequence[str]] = None) -> Trace:
    """Systematic-scan sampler mixing conjugate Gibbs and two-step MH blocks.

    ``init`` maps parameter names to values.  The trace's ``theta1`` and
    ``theta2`` come from the first two-step block; Gibbs-updated values
    named in ``record`` (default: all Gibbs blocks) go to ``Trace.extra``.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    state = {k: (np.array(v, dtype=float) if np.ndim(v) else np.float64(v))
             for k, v in init.items()}
    mh_blocks = [b for b in blocks if isinstance(b, TwoStepBlock)]
    gibbs_names = [b.name for b in blocks if isinstance(b, GibbsBlock)]
    record = gibbs_names if record is None else list(record)
    caches: dict[int, ChainState] = {}
    for b in mh_blocks:
        theta = ThetaSplit(state[b.theta1], state[b.theta2])
        caches[id(b)] = init_state(b.model(state), theta)
    primary = mh_blocks[0] if mh_blocks else None
    p = np.size(state[primary.theta1]) if primary else 1
    q = np.size(state[primary.theta2]) if primary else 1
    rec = _Recorder(length, p, q)
    counts = {b.name if isinstance(b, GibbsBlock) else f"{b.theta1}|{b.theta2}": [0, 0]
              for b in blocks}
    try:
        for _ in range(length):
            acc_any, pm = False, None
            for b in blocks:
                if isinstance(b, GibbsBlock):
                    state[b.name] = b.draw(state, rng)
                    counts[b.name][0] += 1
                    counts[b.name][1] += 1
                    continue
                model = b.model(state)
                cache = caches[id(b)]
                # refresh the prior: Gibbs blocks may have moved hyperparameters
                cache = dataclasses.replace(
                    cache, log_prior=model.log_prior(cache.theta.theta1, cache.theta.theta2))
                groups = [None] if b.scan is None else [np.asarray(g, dtype=int) for g in b.scan]
                key = f"{b.theta1}|{b.theta2}"
                for g in groups:
                    cache, a, pm_g = two_step_step(model, cache, b.q1, b.q2, rng, g)
                    counts[key][0] += a
                    counts[key][1] += 1
                    if a:
                        acc_any, pm = True, pm_g
                caches[id(b)] = cache
                state[b.theta1] = np.array(cache.theta.theta1)
                state[b.theta2] = np.array(cache.theta.theta2)
            if primary is not None:
                cs = caches[id(primary)]
                rec.record(cs, acc_any, pm, {k: state[k] for k in record})
            else:
                dummy = ChainState(ThetaSplit([0.0], [0.0]), 0.0, 0.0, np.zeros(1))
                rec.record(dummy, True, None, {k: state[k] for k in record})
    except (BayesELError, np.linalg.LinAlgError, FloatingPointError) as exc:
        raise SamplerAborted(f"chain aborted after {rec.size} iterations: {exc}",
                             rec.trace(seed, burn_in)) from exc
    return rec.trace(seed, burn_in, {k: tuple(v) for k, v in counts.items()})


# ---------------------------------------------------------------------------
# CSV export


def _fmt(x: float) -> str:
    return "NA" if np.isnan(x) else repr(float(x))


def write_trace_csv(trace: Trace, path) -> Path:
    """Write ``iter,accepted,log_post,theta1_*,theta2_*`` plus extra columns."""
    path = Path(path)
    cols = trace.columns()
    names = list(cols)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "accepted", "log_post"] + names)
        for t in range(len(trace)):
            w.writerow([t + 1, int(trace.accepted[t]), _fmt(trace.log_post[t])]
                       + [_fmt(cols[c][t]) for c in names])
    return path


def read_trace_csv(path) -> tuple[dict[str, np.ndarray], np.ndarray, np.ndarray]:
    """Read a trace CSV back as ``(parameter columns, accepted, log_post)``."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    if header[:3] != ["iter", "accepted", "log_post"]:
        raise ValueError(f"{path}: not a trace CSV (header {header[:3]})")
    arr = np.array([[np.nan if c == "NA" else float(c) for c in r] for r in rows], dtype=float)
    if arr.size == 0:
        arr = arr.reshape(0, len(header))
    params = {name: arr[:, j] for j, name in enumerate(header) if j >= 3}
    return params, arr[:, 1].astype(bool), arr[:, 2]
