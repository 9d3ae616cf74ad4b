"""Symbol-level precoders built around weighted-MSE optimization toward
constructive-interference regions.

The family shares one pipeline. A channel-level factorization (``fit``)
prepares everything that depends only on ``(H, sigma2, power, a, omega)``
and is reused for every symbol vector in a coherence block; per-symbol
work (``design`` / ``precode`` / ``transform``) is then a small solve.

For the CIR-aware precoders the per-symbol problem is: choose the
unconstrained transmit vector ``x`` and CIR offsets ``delta >= 0``
minimizing

    || W^(1/2) (A H x - (s + CIR offset)) ||^2  +  (sigma2 * rho / P) ||x||^2

in the stacked real domain, where ``rho`` is the trace weight of the
noise term. Eliminating ``x`` in closed form leaves a nonnegative
least-squares problem ``min ||B Lam delta - d||`` over the offsets,
where ``B`` is an upper-triangular factor with ``B.T @ B`` equal to the
inverse of the regularized channel Gram matrix, and ``d = -B @ s_bar``.
Zero columns of ``Lam`` (QAM symbols without a free direction) are
dropped before the solve, shrinking the problem from ``2K`` variables
to the support size ``K_T``.

Degenerate members: ``delta = 0`` gives symbol-level-power WMMSE, which
with unit weights is MMSE (regularized channel inversion); removing the
noise regularizer gives the minimum-power CIR-constrained precoder
(CI-ZF), which with singleton CIRs collapses to plain ZF.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator

from .constellation import Constellation
from .embedding import complexify_vector, realify_matrix, realify_vector
from .nnls import solve_active_set
from .validation import (
    as_complex_matrix,
    as_complex_vectors,
    check_choice,
    check_nonnegative,
    check_positive,
)

RHO_CONVENTIONS = ("complex", "real-literal")


class FactorizationError(RuntimeError):
    """Raised when a channel factorization is not positive definite."""


@dataclass
class FactorCache:
    """Channel-level factors reused across a coherence block.

    Attributes
    ----------
    rho : float
        Trace weight of the noise regularizer.
    c : float
        Effective ridge weight ``sigma2 * rho / power``.
    h_breve : (2K, 2N) float array
        Real embedding of ``A @ H``.
    b_factor : (2K, 2K) float array
        Upper triangular with ``b_factor.T @ b_factor`` equal to
        ``inv(h_breve @ h_breve.T + c * inv(W_bar))``.
    recovery : (2N, 2K) float array
        Maps a stacked target ``s_bar + Lam @ delta`` to the optimal
        stacked ``x``.
    omega_bar : (2K,) float array
        Stacked per-user weights.
    """

    rho: float
    c: float
    h_breve: np.ndarray
    b_factor: np.ndarray
    recovery: np.ndarray
    omega_bar: np.ndarray


@dataclass
class PrecodeResult:
    """Full output of precoding one symbol vector (per-symbol scaling)."""

    u: np.ndarray
    x: np.ndarray
    gamma: float
    delta: np.ndarray
    objective: float
    kind: str


def regularizer_weight(omega: np.ndarray, a: np.ndarray, convention: str) -> float:
    """Trace weight of the noise term: ``sum(omega * |a|^2)``, doubled
    under the ``"real-literal"`` convention (the stacked embedding doubles
    every trace)."""
    check_choice(convention, RHO_CONVENTIONS, "rho_convention")
    rho = float(np.sum(omega * np.abs(a) ** 2))
    return 2.0 * rho if convention == "real-literal" else rho


def build_factor_cache(H, sigma2: float, power: float, a, omega,
                       rho_convention: str = "complex") -> FactorCache:
    """Factorize the channel for the weighted-MSE pipeline.

    Requires ``h_breve @ h_breve.T + c * inv(W_bar)`` positive definite,
    which holds for ``sigma2 > 0`` and otherwise needs ``H`` of full row
    rank.
    """
    H = as_complex_matrix(H, "H")
    k = H.shape[0]
    a = np.asarray(a, dtype=np.complex128).reshape(k)
    omega = np.asarray(omega, dtype=np.float64).reshape(k)
    if np.any(np.abs(a) == 0.0):
        raise ValueError("receiver coefficients a must be nonzero")
    if np.any(omega <= 0.0):
        raise ValueError("weights omega must be positive")
    sigma2 = check_nonnegative(sigma2, "sigma2")
    power = check_positive(power, "power")

    rho = regularizer_weight(omega, a, rho_convention)
    c = sigma2 * rho / power
    if c == 0.0 and H.shape[0] > H.shape[1]:
        raise FactorizationError(
            f"unregularized factorization needs full row rank: {H.shape[0]} users "
            f"exceed {H.shape[1]} antennas"
        )
    h_breve = realify_matrix(np.diag(a)) @ realify_matrix(H)
    omega_bar = np.concatenate([omega, omega])
    gram = h_breve @ h_breve.T
    penalized = gram + c * np.diag(1.0 / omega_bar)
    try:
        cho = scipy.linalg.cho_factor(penalized, lower=True)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError(
            "regularized channel Gram matrix is not positive definite "
            f"(sigma2={sigma2:g}; H rank deficient?)"
        ) from exc
    q = scipy.linalg.cho_solve(cho, np.eye(2 * k))
    q = 0.5 * (q + q.T)
    try:
        b_factor = scipy.linalg.cholesky(q, lower=False)
    except np.linalg.LinAlgError as exc:
        raise FactorizationError("inverse Gram factorization failed") from exc
    lhs = omega_bar[:, None] * gram + c * np.eye(2 * k)
    recovery = np.linalg.solve(lhs, omega_bar[:, None] * h_breve).T
    return FactorCache(rho, c, h_breve, b_factor, recovery, omega_bar)


def objective_value(h_breve, omega_bar, c, s_bar, x_bar, lam=None, delta=None) -> float:
    """Weighted-MSE cost at a stacked point ``(x_bar, delta)``."""
    target = s_bar if lam is None else s_bar + lam @ delta
    r = h_breve @ x_bar - target
    return float(np.sum(omega_bar * r**2) + c * np.sum(x_bar**2))


def objective_gradient_x(h_breve, omega_bar, c, s_bar, x_bar, lam=None, delta=None) -> np.ndarray:
    """Analytic gradient of :func:`objective_value` with respect to ``x_bar``."""
    target = s_bar if lam is None else s_bar + lam @ delta
    r = h_breve @ x_bar - target
    return 2.0 * (h_breve.T @ (omega_bar * r)) + 2.0 * c * x_bar


def block_gamma(x_list, power: float) -> float:
    """Common scaling for a block: ``sum ||gamma x_l||^2 = L * power``."""
    power = check_positive(power, "power")
    x_arr = np.asarray(x_list, dtype=np.complex128)
    if x_arr.ndim == 1:
        x_arr = x_arr[None, :]
    if x_arr.ndim != 2 or x_arr.shape[0] < 1:
        raise ValueError("block must contain at least one vector")
    total = float(np.sum(np.abs(x_arr) ** 2))
    if total == 0.0:
        raise ValueError("cannot scale an all-zero block")
    return float(np.sqrt(x_arr.shape[0] * power / total))


class BasePrecoder(BaseEstimator):
    """Shared fit/design/transform machinery of the precoder family."""

    kind = ""
    _uses_cir = False

    # subclasses define __init__ with their own parameters

    def _resolved(self, name, default):
        value = getattr(self, name, None)
        return default if value is None else value

    def fit(self, H, y=None):
        """Factorize a channel realization ``H`` of shape (users, antennas)."""
        H = as_complex_matrix(H, "H")
        k, n = H.shape
        self.n_users_ = k
        self.n_tx_ = n
        self.H_ = H
        self.power_ = check_positive(self._resolved("power", 1.0), "power")
        a = np.asarray(self._resolved("a", np.ones(k)), dtype=np.complex128).reshape(k)
        omega = np.asarray(self._resolved("omega", np.ones(k)), dtype=np.float64).reshape(k)
        self.a_vec_ = a
        self.omega_vec_ = omega
        if self._uses_cir:
            scheme = getattr(self, "scheme", None)
            self.constellation_ = (
                scheme if isinstance(scheme, Constellation) else Constellation.from_name(scheme)
            )
        self._factorize(H)
        return self

    def _factorize(self, H):  # pragma: no cover - abstract
        raise NotImplementedError

    def _design_bar(self, s_bar, idx):  # pragma: no cover - abstract
        """Return (x_bar, delta) for one stacked symbol vector."""
        raise NotImplementedError

    def _check_fitted(self):
        if not hasattr(self, "H_"):
            raise RuntimeError(f"{type(self).__name__} must be fitted before use")

    def design(self, S, indices=None) -> np.ndarray:
        """Unconstrained transmit vectors for symbol vectors ``S``.

        ``S`` is one length-K vector or an (L, K) array of rows; the
        result has matching shape with N columns. ``indices`` may carry
        the constellation indices of ``S`` (same shape) to skip the
        membership lookup.
        """
        self._check_fitted()
        S, single = as_complex_vectors(S, self.n_users_, "S")
        idx = None
        if self._uses_cir:
            if indices is None:
                idx = self.constellation_.index_of(S)
            else:
                idx = np.asarray(indices, dtype=np.int64).reshape(S.shape)
        X = np.empty((S.shape[0], self.n_tx_), dtype=np.complex128)
        for row in range(S.shape[0]):
            s_bar = realify_vector(S[row])
            x_bar, _ = self._design_bar(s_bar, None if idx is None else idx[row])
            X[row] = complexify_vector(x_bar)
        return X[0] if single else X

    def transform(self, S) -> np.ndarray:
        """Power-feasible transmit vectors, scaled per symbol vector."""
        X = self.design(S)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        norms = np.linalg.norm(X, axis=1)
        if np.any(norms == 0.0):
            raise ValueError("cannot scale a zero design vector")
        U = X * (np.sqrt(self.power_) / norms)[:, None]
        return U[0] if single else U

    def precode(self, s) -> PrecodeResult:
        """Precode one symbol vector, returning full diagnostics."""
        self._check_fitted()
        S, single = as_complex_vectors(s, self.n_users_, "s")
        if not single:
            raise ValueError("precode expects a single symbol vector")
        idx = self.constellation_.index_of(S)[0] if self._uses_cir else None
        s_bar = realify_vector(S[0])
        x_bar, delta = self._design_bar(s_bar, idx)
        x = complexify_vector(x_bar)
        norm = float(np.linalg.norm(x))
        if norm == 0.0:
            raise ValueError("cannot scale a zero design vector")
        gamma = float(np.sqrt(self.power_ / norm**2))
        lam = self.constellation_.build_lambda(np.atleast_1d(idx)).matrix if self._uses_cir else None
        value = objective_value(
            self._objective_h_breve(), self._objective_omega_bar(), self._objective_c(),
            s_bar, x_bar, lam, delta if lam is not None else None,
        )
        return PrecodeResult(gamma * x, x, gamma, delta, value, self.kind)

    def objective(self, s, x, delta=None) -> float:
        """Weighted-MSE cost of a candidate ``(x, delta)`` for symbols ``s``."""
        self._check_fitted()
        S, _ = as_complex_vectors(s, self.n_users_, "s")
        X, _ = as_complex_vectors(x, self.n_tx_, "x")
        s_bar = realify_vector(S[0])
        x_bar = realify_vector(X[0])
        lam = None
        if delta is not None:
            idx = self.constellation_.index_of(S)[0]
            lam = self.constellation_.build_lambda(idx).matrix
            delta = np.asarray(delta, dtype=np.float64)
        return objective_value(
            self._objective_h_breve(), self._objective_omega_bar(), self._objective_c(),
            s_bar, x_bar, lam, delta,
        )

    def _objective_h_breve(self):
        return self.cache_.h_breve

    def _objective_omega_bar(self):
        return self.cache_.omega_bar

    def _objective_c(self):
        return self.cache_.c


class WMMSEPrecoder(BasePrecoder):
    """Symbol-level-power WMMSE precoder (offsets pinned to zero)."""

    kind = "wmmse"

    def __init__(self, sigma2=1.0, power=1.0, a=None, omega=None, rho_convention="complex"):
        self.sigma2 = sigma2
        self.power = power
        self.a = a
        self.omega = omega
        self.rho_convention = rho_convention

    def _factorize(self, H):
        self.cache_ = build_factor_cache(
            H, self.sigma2, self.power_, self.a_vec_, self.omega_vec_, self.rho_convention
        )

    def _design_bar(self, s_bar, idx):
        return self.cache_.recovery @ s_bar, np.zeros(2 * self.n_users_)

    def design(self, S, indices=None):
        # delta is identically zero, so the whole batch is one matmul
        self._check_fitted()
        S, single = as_complex_vectors(S, self.n_users_, "S")
        s_bars = np.concatenate([S.real, S.imag], axis=1)
        X = s_bars @ self.cache_.recovery.T
        X = X[:, : self.n_tx_] + 1j * X[:, self.n_tx_:]
        return X[0] if single else X


class MMSEPrecoder(WMMSEPrecoder):
    """WMMSE with unit weights: regularized channel inversion."""

    kind = "mmse"

    def __init__(self, sigma2=1.0, power=1.0, a=None, rho_convention="complex"):
        super().__init__(sigma2=sigma2, power=power, a=a, omega=None,
                         rho_convention=rho_convention)


class CIWMMSEPrecoder(BasePrecoder):
    """Weighted-MSE precoder optimizing jointly over CIR offsets."""

    kind = "ci-wmmse"
    _uses_cir = True

    def __init__(self, scheme="16qam", sigma2=1.0, power=1.0, a=None, omega=None,
                 rho_convention="complex", nnls_tol=1e-10, nnls_max_iter=None):
        self.scheme = scheme
        self.sigma2 = sigma2
        self.power = power
        self.a = a
        self.omega = omega
        self.rho_convention = rho_convention
        self.nnls_tol = nnls_tol
        self.nnls_max_iter = nnls_max_iter

    def _factorize(self, H):
        self.cache_ = build_factor_cache(
            H, self.sigma2, self.power_, self.a_vec_, self.omega_vec_, self.rho_convention
        )

    def _design_bar(self, s_bar, idx):
        cache = self.cache_
        lam = self.constellation_.build_lambda(np.atleast_1d(idx))
        delta = np.zeros(2 * self.n_users_)
        target = s_bar
        if lam.k_t:
            cols = cache.b_factor @ lam.matrix[:, lam.support]
            d = -(cache.b_factor @ s_bar)
            sol = solve_active_set(cols, d, tol=self.nnls_tol, max_iter=self.nnls_max_iter)
            delta[lam.support] = sol.delta
            target = s_bar + lam.matrix @ delta
        return cache.recovery @ target, delta


class CIZFPrecoder(CIWMMSEPrecoder):
    """Minimum-power precoder constraining noise-free received signals
    to the CIRs; the zero-noise member of the family."""

    kind = "ci-zf"

    def __init__(self, scheme="16qam", power=1.0, a=None, nnls_tol=1e-10, nnls_max_iter=None):
        super().__init__(scheme=scheme, sigma2=0.0, power=power, a=a, omega=None,
                         nnls_tol=nnls_tol, nnls_max_iter=nnls_max_iter)

    def _factorize(self, H):
        try:
            self.cache_ = build_factor_cache(H, 0.0, self.power_, self.a_vec_,
                                             self.omega_vec_, "complex")
        except FactorizationError as exc:
            raise FactorizationError(
                "CI-ZF requires a channel of full row rank"
            ) from exc


class ZFPrecoder(BasePrecoder):
    """Plain channel inversion; requires full row rank."""

    kind = "zf"

    def __init__(self, power=1.0):
        self.power = power

    def _factorize(self, H):
        if H.shape[0] > H.shape[1]:
            raise FactorizationError(
                f"ZF needs full row rank: {H.shape[0]} users exceed "
                f"{H.shape[1]} antennas"
            )
        gram = H @ H.conj().T
        try:
            cho = scipy.linalg.cho_factor(gram, lower=True)
        except np.linalg.LinAlgError as exc:
            raise FactorizationError("ZF requires a channel of full row rank") from exc
        self.pinv_ = scipy.linalg.cho_solve(cho, H).conj().T

    def _design_bar(self, s_bar, idx):
        x = self.pinv_ @ complexify_vector(s_bar)
        return realify_vector(x), np.zeros(2 * self.n_users_)

    def design(self, S, indices=None):
        self._check_fitted()
        S, single = as_complex_vectors(S, self.n_users_, "S")
        X = S @ self.pinv_.T
        return X[0] if single else X

    def _objective_h_breve(self):
        return realify_matrix(self.H_)

    def _objective_omega_bar(self):
        return np.ones(2 * self.n_users_)

    def _objective_c(self):
        return 0.0


PRECODER_CLASSES = {
    "zf": ZFPrecoder,
    "mmse": MMSEPrecoder,
    "wmmse": WMMSEPrecoder,
    "ci-zf": CIZFPrecoder,
    "ci-mmse": CIWMMSEPrecoder,
    "ci-wmmse": CIWMMSEPrecoder,
}


def make_precoder(kind: str, *, scheme="16qam", sigma2=1.0, power=1.0,
                  rho_convention="complex", nnls_tol=1e-10, nnls_max_iter=None):
    """Instantiate a precoder by its configuration name.

    ``"ci-mmse"`` and ``"ci-wmmse"`` both map to the weighted estimator
    with default (unit) weights and receiver coefficients, matching the
    simulated special case.
    """
    kind = check_choice(str(kind).lower(), PRECODER_CLASSES, "precoder kind")
    if kind == "zf":
        return ZFPrecoder(power=power)
    if kind in ("mmse", "wmmse"):
        cls = PRECODER_CLASSES[kind]
        return cls(sigma2=sigma2, power=power, rho_convention=rho_convention)
    if kind == "ci-zf":
        return CIZFPrecoder(scheme=scheme, power=power, nnls_tol=nnls_tol,
                            nnls_max_iter=nnls_max_iter)
    return CIWMMSEPrecoder(scheme=scheme, sigma2=sigma2, power=power,
                           rho_convention=rho_convention, nnls_tol=nnls_tol,
                           nnls_max_iter=nnls_max_iter)
