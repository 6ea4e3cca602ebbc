"""Posterior summaries and convergence checks for chain output."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Mapping, Optional

import numpy as np
from scipy.special import gammaln, kv

from .errors import EmptyTrace, TooShort

__all__ = [
    "Summary",
    "SummaryTable",
    "summarize",
    "spectrum0",
    "pcramer",
    "HWResult",
    "heidelberger_welch",
    "ess",
    "acceptance_report",
]

@dataclass(frozen=True)
class Summary:
    mean: float
    sd: float
    q025: float
    median: float
    q975: float


class SummaryTable(dict):
    """Parameter name to :class:`Summary`, in insertion order."""

    def to_json(self) -> str:
        return json.dumps({k: asdict(v) for k, v in self.items()}, indent=2) + "\n"

    def to_text(self, digits: int = 4) -> str:
        head = ["", "Mean", "SD", "2.5%", "Median", "97.5%"]
        rows = [[name] + [f"{getattr(s, f):.{digits}f}" for f in
                          ("mean", "sd", "q025", "median", "q975")]
                for name, s in self.items()]
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
        fmt = lambda r: "  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                                  for i, (c, w) in enumerate(zip(r, widths)))
        return "\n".join(fmt(r) for r in [head] + rows) + "\n"

    def write_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["parameter", "mean", "sd", "q025", "median", "q975"])
            for name, s in self.items():
                w.writerow([name] + [repr(float(v)) for v in asdict(s).values()])
        return path


def _columns(trace) -> dict[str, np.ndarray]:
    if hasattr(trace, "columns"):
        return trace.columns()
    return {k: np.asarray(v, dtype=float) for k, v in trace.items()}


def summarize(trace, burn_in: int = 0,
              derived: Optional[Mapping[str, Callable[[dict], np.ndarray]]] = None
              ) -> SummaryTable:
    """Mean, sd and type-7 quantiles of every column after ``burn_in`` rows.

    Parameters
    ----------
    trace : Trace or mapping of name to series
    derived : mapping, optional
        Extra quantities; each callable receives the dict of post-burn-in
        columns and returns a series of the same length.

    Raises
    ------
    EmptyTrace
        If no rows remain after burn-in.
    """
    cols = {k: np.asarray(v, dtype=float)[burn_in:] for k, v in _columns(trace).items()}
    if not cols or min(v.size for v in cols.values()) == 0:
        raise EmptyTrace("no samples after burn-in")
    for name, fn in (derived or {}).items():
        cols[name] = np.asarray(fn(cols), dtype=float)
    out = SummaryTable()
    for name, v in cols.items():
        q = np.quantile(v, [0.025, 0.5, 0.975], method="linear")
        sd = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
        out[name] = Summary(float(np.mean(v)), sd, float(q[0]), float(q[1]), float(q[2]))
    return out


# ---------------------------------------------------------------------------
# Heidelberger-Welch


def spectrum0(x) -> float:
    """Spectral density at frequency zero, scaled so ``var(mean) ~ S0 / n``.

    Least-squares line through the periodogram at the lowest
    ``0.5 sqrt(n)`` Fourier frequencies, read at frequency zero.  A
    non-positive intercept falls back to the mean of those ordinates.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    d = x - x.mean()
    if not np.any(d):
        return 0.0
    k = max(int(0.5 * math.sqrt(n)), 3)
    per = np.abs(np.fft.rfft(d)[1:k + 1]) ** 2 / n
    f = np.arange(1, per.size + 1) / n
    coef, *_ = np.linalg.lstsq(np.vander(f, 2, increasing=True), per, rcond=None)
    return float(coef[0]) if coef[0] > 0 else float(per.mean())


def pcramer(q: float) -> float:
    """Asymptotic Cramer-von Mises distribution function.

    Sums the Bessel-function series until the terms vanish; truncating at a
    fixed number of terms makes the function decrease for large ``q``.
    """
    if q <= 0:
        return 0.0
    if q > 1e4:
        return 1.0
    total = 0.0
    k = 0
    while True:
        u = (4 * k + 1) ** 2 / (16.0 * q)
        if u > 40.0:
            break
        z = math.exp(gammaln(k + 0.5) - gammaln(k + 1.0)) * math.sqrt(4 * k + 1) / (
            math.pi ** 1.5 * math.sqrt(q))
        total += z * math.exp(-u) * kv(0.25, u)
        k += 1
    return min(total, 1.0)


@dataclass(frozen=True)
class HWResult:
    stationary: bool
    kept_fraction: float
    pvalue: float
    halfwidth_ok: bool
    mean: float
    halfwidth: float

    def to_dict(self) -> dict:
        return asdict(self)


def heidelberger_welch(series, alpha: float = 0.05, eps: float = 0.1) -> HWResult:
    """Heidelberger-Welch stationarity and halfwidth tests.

    The Cramer-von Mises statistic of the scaled cumulative-sum bridge is
    tested at level ``alpha`` on the whole series, then after discarding
    the first 10%, 20%, ... up to 50%.  The variance scale comes from the
    spectral density at zero of the second half.  When a segment passes,
    the halfwidth of the 95% interval for its mean must be at most ``eps``
    times the absolute mean.

    Raises
    ------
    TooShort
        For fewer than 100 values.
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < 100:
        raise TooShort("Heidelberger-Welch needs at least 100 values")
    if np.ptp(x) == 0:
        return HWResult(True, 1.0, 1.0, True, float(x[0]), 0.0)
    s0 = spectrum0(x[n // 2:])
    pvalue = math.nan
    kept = 0.0
    seg = x
    for drop in range(6):
        seg = x[drop * n // 10:]
        m = seg.size
        bridge = np.cumsum(seg) - seg.mean() * np.arange(1, m + 1)
        stat = float(np.sum(bridge * bridge) / (m * m * s0))
        pvalue = 1.0 - pcramer(stat)
        if pvalue > alpha:
            kept = m / n
            break
    else:
        return HWResult(False, 0.0, pvalue, False, math.nan, math.nan)
    mean = float(seg.mean())
    hw = 1.96 * math.sqrt(spectrum0(seg) / seg.size)
    return HWResult(True, kept, pvalue, bool(abs(hw) <= eps * abs(mean)), mean, hw)


# ---------------------------------------------------------------------------
# Effective sample size


def ess(series) -> float:
    """Effective sample size from Geyer's initial positive sequence.

    Clamped to ``(0, n]``; a constant series counts as ``n``.
    """
    x = np.asarray(series, dtype=float).ravel()
    n = x.size
    if n < 10:
        raise TooShort("ess needs at least 10 values")
    d = x - x.mean()
    var = float(d @ d) / n
    if var == 0:
        return float(n)
    size = 1 << (2 * n - 1).bit_length()
    spec = np.fft.rfft(d, size)
    acov = np.fft.irfft(spec * np.conj(spec), size)[:n] / n
    rho = acov / acov[0]
    tau = -1.0
    for k in range(0, n - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    if tau <= 0:
        return float(n)
    return float(min(n, n / tau))


def acceptance_report(trace) -> dict:
    """Overall acceptance rate plus a rate per block or move type."""
    if hasattr(trace, "move"):
        acc = np.asarray(trace.accepted, dtype=bool)
        moves = np.asarray(trace.move).astype(str)
        by = {mv: float(acc[moves == mv].mean()) for mv in sorted(set(moves))}
        cross = (moves == "birth") | (moves == "death")
        if cross.any():
            by["cross"] = float(acc[cross].mean())
        return {"overall": float(acc.mean()) if acc.size else math.nan, "by_move_type": by}
    acc = np.asarray(trace.accepted, dtype=bool)
    by = {k: (v[0] / v[1] if v[1] else math.nan)
          for k, v in getattr(trace, "acceptance_counts", {}).items()}
    return {"overall": float(acc.mean()) if acc.size else math.nan, "by_move_type": by}
