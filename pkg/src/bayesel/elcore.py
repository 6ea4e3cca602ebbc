"""Empirical likelihood for a matrix of estimating-function values.

Given an ``(n, m)`` array ``c`` whose row ``i`` stacks the estimating
functions evaluated at observation ``i``, the empirical likelihood is

    L = max { prod_i w_i : w in simplex, sum_i w_i c_i = 0 }

and ``L = 0`` when no such ``w`` exists.  The maximiser has the form
``w_i = 1 / (n (1 + lam' c_i))`` where ``lam`` maximises the concave dual
``sum_i log(1 + lam' c_i)``.  The dual is solved by damped Newton on Owen's
pseudo-logarithm, which is quadratic below ``1/n`` and therefore defined
everywhere.  When the origin is not interior to the convex hull of the
rows, the dual is unbounded and the multipliers diverge; that is how
infeasibility is detected.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DimensionError, NonFiniteError

__all__ = [
    "SolverOptions",
    "ELSolution",
    "as_constraint_matrix",
    "solve_el",
    "solve_el_reference",
    "check_feasibility",
    "log_star",
    "solve_el_grouped",
    "solve_el_separate",
]


@dataclass(frozen=True)
class SolverOptions:
    """Tuning knobs for the dual Newton iteration."""

    tol: float = 1e-8
    max_iter: int = 200
    max_halvings: int = 30
    lambda_cap: float = 1e8


DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class ELSolution:
    """Result of :func:`solve_el`.

    ``weights`` is ``None`` and ``log_el`` is ``-inf`` when the problem is
    infeasible.  ``multipliers`` always holds the last dual iterate.
    """

    feasible: bool
    weights: np.ndarray | None
    log_el: float
    multipliers: np.ndarray
    iterations: int
    grad_norm: float


def as_constraint_matrix(values) -> np.ndarray:
    """Validate and return ``values`` as a float64 ``(n, m)`` array.

    A 1-d input is treated as a single constraint column.
    """
    c = np.asarray(values, dtype=np.float64)
    if c.ndim == 1:
        c = c[:, None]
    if c.ndim != 2:
        raise DimensionError(f"constraint matrix must be 2-d, got shape {c.shape}")
    n, m = c.shape
    if n < 1:
        raise DimensionError("constraint matrix has no observations")
    if m >= n:
        raise DimensionError(f"need fewer constraints than observations (m={m}, n={n})")
    if not np.all(np.isfinite(c)):
        raise NonFiniteError("constraint matrix contains NaN or Inf")
    return c


def log_star(z: np.ndarray, eps: float) -> np.ndarray:
    """Owen's pseudo-log: ``log z`` above ``eps``, a matching quadratic below."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    hi = z >= eps
    out[hi] = np.log(z[hi])
    zl = z[~hi] / eps
    out[~hi] = np.log(eps) - 1.5 + 2.0 * zl - 0.5 * zl * zl
    return out


def _log_star_derivs(z: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    hi = z >= eps
    if hi.all():
        inv = 1.0 / z
        return inv, -inv * inv
    d1 = np.where(hi, 1.0 / np.where(hi, z, 1.0), 2.0 / eps - z / (eps * eps))
    d2 = np.where(hi, -1.0 / np.where(hi, z, 1.0) ** 2, -1.0 / (eps * eps))
    return d1, d2


def _objective(z: np.ndarray, eps: float) -> float:
    if z.min() >= eps:
        return float(np.log(z).sum())
    return float(log_star(z, eps).sum())


def _uniform(n: int, m: int) -> ELSolution:
    w = np.full(n, 1.0 / n)
    return ELSolution(True, w, -n * np.log(n), np.zeros(m), 0, 0.0)


def _infeasible(lam: np.ndarray, it: int, gnorm: float) -> ELSolution:
    return ELSolution(False, None, -np.inf, lam, it, gnorm)


def _polish(c, lam, z, grad, d2, gnorm):
    # One extra full Newton step once the tolerance is met.  The weights are
    # renormalised afterwards, which perturbs log_el at first order in the
    # residual gradient, so squeezing it to rounding level matters.
    neg_hess = (c * (-d2)[:, None]).T @ c
    try:
        step = np.linalg.solve(neg_hess, grad)
    except np.linalg.LinAlgError:
        return lam, z, gnorm
    lam_new = lam + step
    z_new = 1.0 + c @ lam_new
    if z_new.min() <= 0.0:
        return lam, z, gnorm
    gnorm_new = float(np.abs(c.T @ (1.0 / z_new)).max())
    if gnorm_new < gnorm:
        return lam_new, z_new, gnorm_new
    return lam, z, gnorm


def solve_el_reference(c, opts: SolverOptions | None = None) -> ELSolution:
    """Pure numpy version of :func:`solve_el`.

    Same iteration in interpreted code; kept as the fallback for singular
    Newton systems and as an independent check of the compiled path.

    Parameters
    ----------
    c : array_like, shape (n, m)
        Row ``i`` holds the estimating functions at observation ``i``.
        Requires ``m < n`` and finite entries.
    opts : SolverOptions, optional

    Returns
    -------
    ELSolution
        Infeasibility is reported through ``feasible=False``, never raised.

    Raises
    ------
    DimensionError
        If ``m >= n`` or the matrix is empty.
    NonFiniteError
        If any entry is NaN or infinite.
    """
    c = as_constraint_matrix(c)
    opts = opts or DEFAULT_OPTIONS
    n, m = c.shape
    if m == 0:
        return _uniform(n, m)

    eps = 1.0 / n
    lam = np.zeros(m)
    z = np.ones(n)
    val = 0.0
    gnorm = np.inf
    it = 0
    converged = False
    for it in range(1, opts.max_iter + 1):
        d1, d2 = _log_star_derivs(z, eps)
        grad = c.T @ d1
        gnorm = float(np.abs(grad).max())
        if gnorm <= opts.tol:
            converged = True
            break
        neg_hess = (c * (-d2)[:, None]).T @ c
        try:
            step = np.linalg.solve(neg_hess, grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(neg_hess, grad, rcond=None)[0]
        decrement = float(grad @ step)
        t = 1.0
        for _ in range(opts.max_halvings + 1):
            lam_new = lam + t * step
            z_new = 1.0 + c @ lam_new
            val_new = _objective(z_new, eps)
            # inside the quadratic-convergence region the full step is safe;
            # comparing objectives there only measures rounding noise
            if val_new >= val or (t == 1.0 and decrement < 1e-8):
                break
            t *= 0.5
        else:
            break
        lam, z, val = lam_new, z_new, val_new
        if not np.isfinite(val) or np.linalg.norm(lam) > opts.lambda_cap:
            return _infeasible(lam, it, gnorm)

    if not converged:
        return _infeasible(lam, it, gnorm)
    if z.min() < eps:
        return _infeasible(lam, it, gnorm)
    lam, z, gnorm = _polish(c, lam, z, grad, d2, gnorm)
    w = 1.0 / (n * z)
    w /= w.sum()
    return ELSolution(True, w, float(np.log(w).sum()), lam, it, gnorm)


def solve_el(c, opts: SolverOptions | None = None) -> ELSolution:
    """Compute the empirical likelihood of a constraint matrix.

    Parameters
    ----------
    c : array_like, shape (n, m)
        Row ``i`` holds the estimating functions at observation ``i``.
        Requires ``m < n`` and finite entries.
    opts : SolverOptions, optional

    Returns
    -------
    ELSolution
        Infeasibility is reported through ``feasible=False``, never raised.

    Raises
    ------
    DimensionError
        If ``m >= n`` or the matrix is empty.
    NonFiniteError
        If any entry is NaN or infinite.
    """
    c = as_constraint_matrix(c)
    opts = opts or DEFAULT_OPTIONS
    n, m = c.shape
    if m == 0:
        return _uniform(n, m)
    # a dense problem is the block problem with one group and no local columns
    lam = np.zeros((1, 0))
    eta = np.zeros(m)
    z, it, gnorm, status = _grouped_kernel(np.zeros((1, n, 0)), c.reshape(1, n, m), lam, eta,
                                           opts.tol, opts.max_iter, opts.max_halvings,
                                           opts.lambda_cap)
    if status == 2:
        return solve_el_reference(c, opts)
    if status == 1:
        return _infeasible(eta, it, gnorm)
    w = 1.0 / (n * z[0])
    w /= w.sum()
    return ELSolution(True, w, float(np.log(w).sum()), eta, it, gnorm)


def check_feasibility(c) -> bool:
    """Return ``True`` iff the origin is interior to the hull of the rows.

    Exact for one constraint (a sign change); otherwise decided by whether
    the dual iteration converges.
    """
    c = as_constraint_matrix(c)
    m = c.shape[1]
    if m == 0:
        return True
    if m == 1:
        return bool(c.min() < 0.0 < c.max())
    return solve_el(c).feasible


def _batched_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.solve(a, b[..., None])[..., 0]
    except np.linalg.LinAlgError:
        return np.einsum("gij,gj->gi", np.linalg.pinv(a), b)


def _solve_el_grouped_numpy(local, shared=None, opts: SolverOptions | None = None) -> ELSolution:
    """Empirical likelihood for a block-structured constraint matrix.

    Observations come in ``G`` equal groups of ``r`` rows.  ``local`` has
    shape ``(G, r, b)``: group ``g``'s ``b`` columns are zero outside its own
    rows.  ``shared`` has shape ``(G, r, s)`` and holds columns that touch
    every row.  The result equals :func:`solve_el` on the assembled
    ``(G*r, G*b + s)`` matrix (local columns group by group, then shared),
    but each Newton step costs ``O(G r)`` rather than ``O(n m^2)``.
    Weights are returned in group-major row order.
    """
    opts = opts or DEFAULT_OPTIONS
    a = np.asarray(local, dtype=np.float64)
    if a.ndim != 3:
        raise DimensionError(f"local block must be (G, r, b), got {a.shape}")
    G, r, b = a.shape
    d = np.zeros((G, r, 0)) if shared is None else np.asarray(shared, dtype=np.float64)
    if d.shape[:2] != (G, r):
        raise DimensionError("shared block must share the (G, r) layout of local")
    s = d.shape[2]
    n, m = G * r, G * b + s
    if m >= n:
        raise DimensionError(f"need fewer constraints than observations (m={m}, n={n})")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(d))):
        raise NonFiniteError("constraint blocks contain NaN or Inf")
    if m == 0:
        return _uniform(n, 0)

    eps = 1.0 / n
    lam = np.zeros((G, b))
    eta = np.zeros(s)
    z = np.ones((G, r))
    val = 0.0
    gnorm = np.inf
    it = 0
    converged = False
    polished = False

    def newton_direction(d1, d2):
        w2 = -d2
        g_loc = np.einsum("grb,gr->gb", a, d1)
        g_sh = np.einsum("grs,gr->s", d, d1)
        A = np.einsum("grb,gr,grc->gbc", a, w2, a)
        if s == 0:
            return g_loc, g_sh, _batched_solve(A, g_loc), g_sh
        B = np.einsum("grb,gr,grs->gbs", a, w2, d)
        C = np.einsum("grs,gr,grt->st", d, w2, d)
        try:
            Ainv_B = np.linalg.solve(A, B)
        except np.linalg.LinAlgError:
            Ainv_B = np.linalg.pinv(A) @ B
        Ainv_g = _batched_solve(A, g_loc)
        schur = C - np.einsum("gbs,gbt->st", B, Ainv_B)
        rhs = g_sh - np.einsum("gbs,gb->s", B, Ainv_g)
        try:
            dy = np.linalg.solve(schur, rhs)
        except np.linalg.LinAlgError:
            dy = np.linalg.lstsq(schur, rhs, rcond=None)[0]
        dx = Ainv_g - np.einsum("gbs,s->gb", Ainv_B, dy)
        return g_loc, g_sh, dx, dy

    def z_of(lam_, eta_):
        zz = 1.0 + np.einsum("grb,gb->gr", a, lam_)
        if s:
            zz += d @ eta_
        return zz

    for it in range(1, opts.max_iter + 2):
        d1, d2 = _log_star_derivs(z, eps)
        g_loc, g_sh, dx, dy = newton_direction(d1, d2)
        gnorm = float(max(np.abs(g_loc).max(), np.abs(g_sh).max() if s else 0.0))
        if gnorm <= opts.tol:
            converged = True
            if polished or z.min() < eps:
                break
            # one polishing step, as in solve_el
            lam_p, eta_p = lam + dx, eta + dy
            z_p = z_of(lam_p, eta_p)
            polished = True
            if z_p.min() > 0.0:
                g_p = max(np.abs(np.einsum("grb,gr->gb", a, 1.0 / z_p)).max(),
                          np.abs(np.einsum("grs,gr->s", d, 1.0 / z_p)).max() if s else 0.0)
                if g_p < gnorm:
                    lam, eta, z, gnorm = lam_p, eta_p, z_p, float(g_p)
            break
        if it > opts.max_iter:
            break
        decrement = float(np.sum(g_loc * dx) + (g_sh @ dy if s else 0.0))
        t = 1.0
        for _ in range(opts.max_halvings + 1):
            lam_new, eta_new = lam + t * dx, eta + t * dy
            z_new = z_of(lam_new, eta_new)
            val_new = _objective(z_new.ravel(), eps)
            if val_new >= val or (t == 1.0 and decrement < 1e-8):
                break
            t *= 0.5
        else:
            break
        lam, eta, z, val = lam_new, eta_new, z_new, val_new
        if not np.isfinite(val) or np.sqrt(np.sum(lam * lam) + eta @ eta) > opts.lambda_cap:
            return _infeasible(np.concatenate([lam.ravel(), eta]), it, gnorm)

    multipliers = np.concatenate([lam.ravel(), eta])
    if not converged or z.min() < eps:
        return _infeasible(multipliers, it, gnorm)
    w = (1.0 / (n * z)).ravel()
    w /= w.sum()
    return ELSolution(True, w, float(np.log(w).sum()), multipliers, it, gnorm)


# ---------------------------------------------------------------------------
# Compiled kernel for the block-structured dual


@njit(cache=True)
def _small_solve(a, x, k):
    # in-place Gaussian elimination with partial pivoting on a[:k, :k];
    # the solution overwrites x[:k], a is destroyed; False on a zero pivot
    for c in range(k):
        p = c
        best = abs(a[c, c])
        for i in range(c + 1, k):
            if abs(a[i, c]) > best:
                best = abs(a[i, c])
                p = i
        if best <= 1e-300:
            return False
        if p != c:
            for j in range(k):
                tmp = a[c, j]
                a[c, j] = a[p, j]
                a[p, j] = tmp
            tmp = x[c]
            x[c] = x[p]
            x[p] = tmp
        for i in range(c + 1, k):
            f = a[i, c] / a[c, c]
            if f != 0.0:
                for j in range(c, k):
                    a[i, j] -= f * a[c, j]
                x[i] -= f * x[c]
    for c in range(k - 1, -1, -1):
        acc = x[c]
        for j in range(c + 1, k):
            acc -= a[c, j] * x[j]
        x[c] = acc / a[c, c]
    return True


@njit(cache=True)
def _grouped_z(a, d, lam, eta, z):
    G, r, b = a.shape
    s = d.shape[2]
    for g in range(G):
        for j in range(r):
            acc = 1.0
            for k in range(b):
                acc += a[g, j, k] * lam[g, k]
            for k in range(s):
                acc += d[g, j, k] * eta[k]
            z[g, j] = acc


@njit(cache=True)
def _grouped_objective(z, eps):
    G, r = z.shape
    le = np.log(eps)
    out = 0.0
    for g in range(G):
        for j in range(r):
            v = z[g, j]
            if v >= eps:
                out += np.log(v)
            else:
                u = v / eps
                out += le - 1.5 + 2.0 * u - 0.5 * u * u
    return out


@njit(cache=True)
def _newton_pair(a, d, z, eps, g_loc, g_sh, dx, dy, ainv_b):
    # b == 2 and s <= 1 with scalar accumulators; the generic loop below
    # keeps its small blocks in memory and runs several times slower
    G, r, _ = a.shape
    s = d.shape[2]
    sh = 0.0
    C = 0.0
    rhs = 0.0
    for g in range(G):
        A00 = 0.0
        A01 = 0.0
        A11 = 0.0
        B0 = 0.0
        B1 = 0.0
        g0 = 0.0
        g1 = 0.0
        for j in range(r):
            v = z[g, j]
            if v >= eps:
                d1 = 1.0 / v
                w2 = d1 * d1
            else:
                d1 = 2.0 / eps - v / (eps * eps)
                w2 = 1.0 / (eps * eps)
            a0 = a[g, j, 0]
            a1 = a[g, j, 1]
            g0 += a0 * d1
            g1 += a1 * d1
            A00 += a0 * a0 * w2
            A01 += a0 * a1 * w2
            A11 += a1 * a1 * w2
            if s == 1:
                dd = d[g, j, 0]
                sh += dd * d1
                B0 += a0 * dd * w2
                B1 += a1 * dd * w2
                C += dd * dd * w2
        det = A00 * A11 - A01 * A01
        if not abs(det) > 1e-300:
            return False
        x0 = (A11 * g0 - A01 * g1) / det
        x1 = (A00 * g1 - A01 * g0) / det
        g_loc[g, 0] = g0
        g_loc[g, 1] = g1
        dx[g, 0] = x0
        dx[g, 1] = x1
        if s == 1:
            y0 = (A11 * B0 - A01 * B1) / det
            y1 = (A00 * B1 - A01 * B0) / det
            ainv_b[g, 0, 0] = y0
            ainv_b[g, 1, 0] = y1
            C -= B0 * y0 + B1 * y1
            rhs -= B0 * x0 + B1 * x1
    if s == 1:
        if not abs(C) > 1e-300:
            return False
        g_sh[0] = sh
        dy[0] = (rhs + sh) / C
        for g in range(G):
            dx[g, 0] -= ainv_b[g, 0, 0] * dy[0]
            dx[g, 1] -= ainv_b[g, 1, 0] * dy[0]
    return True


@njit(cache=True)
def _grouped_newton(a, d, z, eps, g_loc, g_sh, dx, dy, ainv_b, schur, A, B, col, x):
    """Fill the gradient and Newton direction; False on a singular block."""
    # plain index loops throughout: slicing inside the group loop costs
    # more than the arithmetic
    G, r, b = a.shape
    s = d.shape[2]
    if b == 2 and s <= 1:
        return _newton_pair(a, d, z, eps, g_loc, g_sh, dx, dy, ainv_b)
    for k in range(s):
        g_sh[k] = 0.0
        dy[k] = 0.0
        for l in range(s):
            schur[k, l] = 0.0
    for g in range(G):
        for k in range(b):
            g_loc[g, k] = 0.0
            for l in range(b):
                A[k, l] = 0.0
            for l in range(s):
                B[k, l] = 0.0
        for j in range(r):
            v = z[g, j]
            if v >= eps:
                d1 = 1.0 / v
                w2 = d1 * d1
            else:
                d1 = 2.0 / eps - v / (eps * eps)
                w2 = 1.0 / (eps * eps)
            for k in range(b):
                akj = a[g, j, k]
                g_loc[g, k] += akj * d1
                for l in range(b):
                    A[k, l] += akj * w2 * a[g, j, l]
                for l in range(s):
                    B[k, l] += akj * w2 * d[g, j, l]
            for k in range(s):
                dk = d[g, j, k]
                g_sh[k] += dk * d1
                for l in range(s):
                    schur[k, l] += dk * w2 * d[g, j, l]
        # one elimination per right-hand side; the last one is the gradient
        for l in range(s + 1):
            for k in range(b):
                for m in range(b):
                    col[k, m] = A[k, m]
                x[k] = B[k, l] if l < s else g_loc[g, k]
            if not _small_solve(col, x, b):
                return False
            for k in range(b):
                if l < s:
                    ainv_b[g, k, l] = x[k]
                else:
                    dx[g, k] = x[k]
        for k in range(s):
            for l in range(s):
                acc = 0.0
                for m in range(b):
                    acc += B[m, k] * ainv_b[g, m, l]
                schur[k, l] -= acc
            acc = 0.0
            for m in range(b):
                acc += B[m, k] * dx[g, m]
            dy[k] -= acc
    if s > 0:
        for k in range(s):
            dy[k] += g_sh[k]
        if not _small_solve(schur, dy, s):
            return False
        for g in range(G):
            for k in range(b):
                acc = dx[g, k]
                for l in range(s):
                    acc -= ainv_b[g, k, l] * dy[l]
                dx[g, k] = acc
    return True


@njit(cache=True)
def _max_abs_grad(a, d, z):
    G, r, b = a.shape
    s = d.shape[2]
    out = 0.0
    for g in range(G):
        for k in range(b):
            acc = 0.0
            for j in range(r):
                acc += a[g, j, k] / z[g, j]
            out = max(out, abs(acc))
    for k in range(s):
        acc = 0.0
        for g in range(G):
            for j in range(r):
                acc += d[g, j, k] / z[g, j]
        out = max(out, abs(acc))
    return out


@njit(cache=True)
def _grouped_kernel(a, d, lam, eta, tol, max_iter, max_halvings, cap):
    """Damped Newton on the block-structured dual.

    Status: 0 converged, 1 infeasible, 2 singular block (caller falls back).
    Starts from ``lam``, ``eta``, which are overwritten in place.
    """
    G, r, b = a.shape
    s = d.shape[2]
    n = G * r
    eps = 1.0 / n
    z = np.empty((G, r))
    z_new = np.empty((G, r))
    g_loc = np.empty((G, b))
    g_sh = np.empty(s)
    dx = np.empty((G, b))
    dy = np.empty(s)
    ainv_b = np.empty((G, b, s))
    schur = np.empty((s, s))
    A = np.empty((b, b))
    B = np.empty((b, s))
    col = np.empty((b, b))
    x = np.empty(b)
    lam_t = np.empty((G, b))
    eta_t = np.empty(s)
    _grouped_z(a, d, lam, eta, z)
    val = _grouped_objective(z, eps)
    gnorm = np.inf
    it = 0
    for it in range(1, max_iter + 2):
        if not _grouped_newton(a, d, z, eps, g_loc, g_sh, dx, dy, ainv_b, schur, A, B, col, x):
            return z, it, gnorm, 2
        gnorm = 0.0
        decrement = 0.0
        for g in range(G):
            for k in range(b):
                gnorm = max(gnorm, abs(g_loc[g, k]))
                decrement += g_loc[g, k] * dx[g, k]
        for k in range(s):
            gnorm = max(gnorm, abs(g_sh[k]))
            decrement += g_sh[k] * dy[k]
        if gnorm <= tol:
            if z.min() < eps:
                return z, it, gnorm, 1
            # polishing step, kept only if it shrinks the gradient
            for g in range(G):
                for k in range(b):
                    lam_t[g, k] = lam[g, k] + dx[g, k]
            for k in range(s):
                eta_t[k] = eta[k] + dy[k]
            _grouped_z(a, d, lam_t, eta_t, z_new)
            if z_new.min() > 0.0:
                g_p = _max_abs_grad(a, d, z_new)
                if g_p < gnorm:
                    lam[:, :] = lam_t
                    eta[:] = eta_t
                    z, z_new = z_new, z
                    gnorm = g_p
            return z, it, gnorm, 0
        if it > max_iter:
            break
        t = 1.0
        accepted = False
        val_new = val
        for _ in range(max_halvings + 1):
            for g in range(G):
                for k in range(b):
                    lam_t[g, k] = lam[g, k] + t * dx[g, k]
            for k in range(s):
                eta_t[k] = eta[k] + t * dy[k]
            _grouped_z(a, d, lam_t, eta_t, z_new)
            val_new = _grouped_objective(z_new, eps)
            if val_new >= val or (t == 1.0 and decrement < 1e-8):
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        lam[:, :] = lam_t
        eta[:] = eta_t
        z, z_new = z_new, z
        val = val_new
        norm2 = 0.0
        for g in range(G):
            for k in range(b):
                norm2 += lam[g, k] * lam[g, k]
        for k in range(s):
            norm2 += eta[k] * eta[k]
        if not np.isfinite(val) or np.sqrt(norm2) > cap:
            return z, it, gnorm, 1
    return z, it, gnorm, 1

@njit(cache=True)
def _separate_kernel(a, lam, tol, max_iter, max_halvings, cap):
    # each group solved as its own problem; returns per-group z and status
    G, r, b = a.shape
    d = np.zeros((1, r, 0))
    eta = np.zeros(0)
    z = np.empty((G, r))
    status = np.empty(G, dtype=np.int64)
    for g in range(G):
        zg, _, _, st = _grouped_kernel(a[g:g + 1], d, lam[g:g + 1], eta,
                                       tol, max_iter, max_halvings, cap)
        status[g] = st
        for j in range(r):
            z[g, j] = zg[0, j]
    return z, status


def _validate_blocks(local, shared):
    a = np.ascontiguousarray(local, dtype=np.float64)
    if a.ndim != 3:
        raise DimensionError(f"local block must be (G, r, b), got {a.shape}")
    G, r, b = a.shape
    d = (np.zeros((G, r, 0)) if shared is None
         else np.ascontiguousarray(shared, dtype=np.float64))
    if d.ndim != 3 or d.shape[:2] != (G, r):
        raise DimensionError("shared block must share the (G, r) layout of local")
    if G * b + d.shape[2] >= G * r:
        raise DimensionError(
            f"need fewer constraints than observations (m={G * b + d.shape[2]}, n={G * r})")
    if not (np.isfinite(a).all() and np.isfinite(d).all()):
        raise NonFiniteError("constraint blocks contain NaN or Inf")
    return a, d


def solve_el_grouped(local, shared=None, opts: SolverOptions | None = None,
                     start=None) -> ELSolution:
    """Empirical likelihood for a block-structured constraint matrix.

    Observations come in ``G`` equal groups of ``r`` rows.  ``local`` has
    shape ``(G, r, b)``: group ``g``'s ``b`` columns are zero outside its own
    rows.  ``shared`` has shape ``(G, r, s)`` and holds columns that touch
    every row.  The result equals :func:`solve_el` on the assembled
    ``(G*r, G*b + s)`` matrix (local columns group by group, then shared),
    but each Newton step costs ``O(G r)`` rather than ``O(n m^2)``.
    Weights are returned in group-major row order.

    ``start`` optionally seeds the dual iteration with multipliers in the
    layout of ``ELSolution.multipliers``; the optimum does not depend on it.
    """
    opts = opts or DEFAULT_OPTIONS
    a, d = _validate_blocks(local, shared)
    G, r, b = a.shape
    s = d.shape[2]
    n, m = G * r, G * b + s
    if m == 0:
        return _uniform(n, 0)
    if start is None:
        lam = np.zeros((G, b))
        eta = np.zeros(s)
    else:
        start = np.asarray(start, dtype=np.float64)
        if start.shape != (m,):
            raise DimensionError(f"start must have length {m}")
        lam = start[:G * b].reshape(G, b).copy()
        eta = start[G * b:].copy()
    z, it, gnorm, status = _grouped_kernel(a, d, lam, eta, opts.tol, opts.max_iter,
                                           opts.max_halvings, opts.lambda_cap)
    if status == 2:
        return _solve_el_grouped_numpy(a, d, opts)
    multipliers = np.concatenate([lam.ravel(), eta])
    if status == 1:
        return _infeasible(multipliers, it, gnorm)
    w = (1.0 / (n * z)).ravel()
    w /= w.sum()
    return ELSolution(True, w, float(np.log(w).sum()), multipliers, it, gnorm)


def solve_el_separate(local, opts: SolverOptions | None = None):
    """Solve each group of a purely local block problem on its own.

    With no shared columns the problem factorises: the joint optimum puts
    mass ``1/G`` on every group and, within a group, the weights solve that
    group's own problem.  Returns ``(feasible, u, log_el, multipliers)``
    per group, where ``u`` has shape ``(G, r)`` and each feasible row sums
    to one.
    """
    opts = opts or DEFAULT_OPTIONS
    a, _ = _validate_blocks(local, None)
    G, r, b = a.shape
    if b == 0:
        return (np.ones(G, dtype=bool), np.full((G, r), 1.0 / r),
                np.full(G, -r * np.log(r)), np.zeros((G, 0)))
    lam = np.zeros((G, b))
    z, status = _separate_kernel(a, lam, opts.tol, opts.max_iter,
                                 opts.max_halvings, opts.lambda_cap)
    feasible = status == 0
    for g in np.flatnonzero(status == 2):
        sol = _solve_el_grouped_numpy(a[g:g + 1], None, opts)
        feasible[g] = sol.feasible
        lam[g] = sol.multipliers
        if sol.feasible:
            z[g] = 1.0 / (r * sol.weights)
    u = 1.0 / (r * z)
    u /= u.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        log_el = np.where(feasible, np.log(np.where(u > 0, u, 1.0)).sum(axis=1), -np.inf)
    return feasible, u, log_el, lam
