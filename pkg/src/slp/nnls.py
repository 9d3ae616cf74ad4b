"""Nonnegative least squares by the Lawson-Hanson active-set method.

Solves ``min ||C @ delta - d||_2`` subject to ``delta >= 0``. The outer
loop moves the most violated dual coordinate into the passive set; each
inner least-squares subproblem is solved from a fresh QR factorization
of the passive columns (the problems here are small, at most a few
dozen columns, so factorization updates would buy nothing). The
standard step-length rule keeps iterates feasible and guarantees finite
termination; a returned solution always satisfies the KKT conditions of
the convex problem within the dual tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .validation import as_real_matrix, as_real_vector, check_positive


class NnlsConvergenceError(RuntimeError):
    """Iteration limit reached; ``best`` carries the last iterate."""

    def __init__(self, message: str, best: "NnlsSolution"):
        super().__init__(message)
        self.best = best


@dataclass
class NnlsSolution:
    """Certified solution of a nonnegative least-squares instance.

    Attributes
    ----------
    delta : (n,) float array
        Entrywise nonnegative minimizer.
    residual_norm : float
        ``||C @ delta - d||_2`` at the solution.
    iterations : int
        Outer-loop count (number of passive-set insertions).
    passive_set : int array
        Indices of the strictly positive entries of ``delta``.
    residuals : tuple of float
        Residual norm after each outer iteration, starting from the
        all-zero iterate; non-increasing.
    """

    delta: np.ndarray
    residual_norm: float
    iterations: int
    passive_set: np.ndarray
    residuals: tuple = field(default_factory=tuple)


def _ls_on(columns: np.ndarray, d: np.ndarray) -> np.ndarray:
    q, r = np.linalg.qr(columns)
    try:
        return np.linalg.solve(r, q.T @ d)
    except np.linalg.LinAlgError:
        return np.linalg.lstsq(columns, d, rcond=None)[0]


def solve_active_set(C, d, tol: float = 1e-10, max_iter: int | None = None) -> NnlsSolution:
    """Solve ``min_{delta >= 0} ||C @ delta - d||_2``.

    Parameters
    ----------
    C : (m, n) array_like
        Design matrix; ``n == 0`` is allowed and yields an empty solution.
    d : (m,) array_like
        Right-hand side.
    tol : float
        Dual feasibility tolerance; a coordinate enters the passive set
        only while its dual value exceeds ``tol``.
    max_iter : int, optional
        Outer-iteration limit, default ``10 * n``.

    Raises
    ------
    NnlsConvergenceError
        If the iteration limit is exceeded; the best iterate is attached.
    ValueError
        For non-finite inputs or mismatched shapes.
    """
    C = as_real_matrix(C, "C")
    d = as_real_vector(d, "d")
    m, n = C.shape
    if m < 1 or d.shape[0] != m:
        raise ValueError(f"C has shape {C.shape} but d has length {d.shape[0]}")
    tol = check_positive(tol, "tol")
    if n == 0:
        return NnlsSolution(
            np.zeros(0), float(np.linalg.norm(d)), 0, np.zeros(0, dtype=np.int64),
            (float(np.linalg.norm(d)),),
        )
    if max_iter is None:
        max_iter = 10 * n

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    history = [float(np.linalg.norm(d))]
    outer = 0

    while True:
        w = C.T @ (d - C @ x)
        w_free = np.where(passive, -np.inf, w)
        j = int(np.argmax(w_free))
        if w_free[j] <= tol:
            break
        if outer >= max_iter:
            best = _finalize(C, d, x, outer, history)
            raise NnlsConvergenceError(
                f"active-set iteration limit {max_iter} exceeded", best
            )
        passive[j] = True
        outer += 1

        while True:
            idx = np.flatnonzero(passive)
            z = _ls_on(C[:, idx], d)
            if np.all(z > 0.0):
                x[:] = 0.0
                x[idx] = z
                break
            # step toward z, stopping at the first coordinate hitting zero
            xp = x[idx]
            neg = z <= 0.0
            denom = xp - z
            ratios = np.where(neg & (denom > 0.0), xp / np.where(denom > 0.0, denom, 1.0), np.inf)
            ratios = np.where(neg & (denom <= 0.0), 0.0, ratios)
            alpha = float(np.min(ratios))
            x[idx] = xp + alpha * (z - xp)
            dropped = idx[x[idx] <= tol]
            x[dropped] = 0.0
            passive[dropped] = False
            if not passive.any():
                x[:] = 0.0
                break
        history.append(float(np.linalg.norm(d - C @ x)))

    return _finalize(C, d, x, outer, history)


def _finalize(C, d, x, outer, history) -> NnlsSolution:
    delta = np.where(x > 0.0, x, 0.0)
    return NnlsSolution(
        delta=delta,
        residual_norm=float(np.linalg.norm(d - C @ delta)),
        iterations=outer,
        passive_set=np.flatnonzero(delta > 0.0),
        residuals=tuple(history),
    )


def verify_kkt(C, d, solution, tol: float = 1e-10) -> bool:
    """Check stationarity, primal feasibility, and complementary slackness.

    ``solution`` may be an :class:`NnlsSolution` or a plain vector. The
    gradient ``g = C.T @ (C @ delta - d)`` must satisfy ``g >= -tol``
    everywhere and ``|g| <= tol`` on coordinates with ``delta > tol``.
    """
    C = as_real_matrix(C, "C")
    d = as_real_vector(d, "d")
    delta = solution.delta if isinstance(solution, NnlsSolution) else np.asarray(solution, dtype=np.float64)
    if delta.ndim != 1 or delta.shape[0] != C.shape[1]:
        raise ValueError(f"delta has length {delta.shape}, expected {C.shape[1]}")
    if np.any(delta < -tol):
        return False
    g = C.T @ (C @ delta - d)
    if np.any(g < -tol):
        return False
    active = delta > tol
    return bool(np.all(np.abs(g[active]) <= tol))
