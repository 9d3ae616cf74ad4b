"""Built-in consistency suites runnable from the CLI.

Each suite exercises one family of invariants with seeded random draws
and returns ``(name, passed, detail)``. They are intentionally cheap --
seconds, not minutes -- and use only library code.
"""

from __future__ import annotations

import numpy as np

from .constellation import Constellation
from .nnls import solve_active_set, verify_kkt
from .precoding import (
    CIWMMSEPrecoder,
    CIZFPrecoder,
    MMSEPrecoder,
    ZFPrecoder,
    objective_gradient_x,
    objective_value,
)
from .simulation import generate_rayleigh


def _rng(seed):
    return np.random.default_rng(seed)


def suite_degeneracy_chain(seed: int = 7) -> tuple:
    """Pinned offsets give WMMSE; zero noise gives CI-ZF; singleton CIRs
    give plain ZF."""
    rng = _rng(seed)
    const = Constellation.from_name("16qam")
    inner = np.flatnonzero(const.free_count == 0)
    k = n = 4
    worst = 0.0
    for _ in range(10):
        H = generate_rayleigh(k, n, rng)
        s_inner = const.points[rng.choice(inner, size=k)]
        ci = CIWMMSEPrecoder(scheme="16qam", sigma2=0.3).fit(H)
        mm = MMSEPrecoder(sigma2=0.3).fit(H)
        worst = max(worst, np.linalg.norm(ci.design(s_inner) - mm.design(s_inner)))

        s_any = const.points[rng.integers(0, 16, size=k)]
        ci0 = CIWMMSEPrecoder(scheme="16qam", sigma2=1e-14).fit(H)
        cz = CIZFPrecoder(scheme="16qam").fit(H)
        x_ci0, x_cz = ci0.design(s_any), cz.design(s_any)
        worst = max(worst, np.linalg.norm(x_ci0 - x_cz) / np.linalg.norm(x_cz))

        zf = ZFPrecoder().fit(H)
        worst = max(worst, np.linalg.norm(cz.design(s_inner) - zf.design(s_inner)))
    return "degeneracy-chain", worst <= 1e-5, f"worst deviation {worst:.3e}"


def suite_nnls_kkt(seed: int = 11) -> tuple:
    """Solver outputs satisfy the optimality conditions."""
    rng = _rng(seed)
    bad = 0
    for _ in range(200):
        m = int(rng.integers(1, 13))
        n = int(rng.integers(1, 13))
        C = rng.standard_normal((m, n))
        d = rng.standard_normal(m)
        sol = solve_active_set(C, d, tol=1e-10)
        if not verify_kkt(C, d, sol, tol=1e-7):
            bad += 1
    return "nnls-kkt", bad == 0, f"{bad} of 200 instances failed certification"


def suite_gradient_stationarity(seed: int = 13) -> tuple:
    """Analytic gradient matches central differences; closed-form
    solutions are stationary."""
    rng = _rng(seed)
    const = Constellation.from_name("16qam")
    k, n = 3, 5
    worst_grad, worst_stat = 0.0, 0.0
    for _ in range(20):
        H = generate_rayleigh(k, n, rng)
        prec = CIWMMSEPrecoder(scheme="16qam", sigma2=0.2).fit(H)
        cache = prec.cache_
        idx = rng.integers(0, 16, size=k)
        s_bar = np.concatenate([const.points[idx].real, const.points[idx].imag])
        lam = const.build_lambda(idx)
        delta = np.abs(rng.standard_normal(2 * k))
        delta[np.setdiff1d(np.arange(2 * k), lam.support)] = 0.0
        x_bar = rng.standard_normal(2 * n)

        grad = objective_gradient_x(cache.h_breve, cache.omega_bar, cache.c,
                                    s_bar, x_bar, lam.matrix, delta)
        fd = np.empty_like(grad)
        h = 1e-6
        for i in range(grad.size):
            e = np.zeros_like(x_bar)
            e[i] = h
            fp = objective_value(cache.h_breve, cache.omega_bar, cache.c,
                                 s_bar, x_bar + e, lam.matrix, delta)
            fm = objective_value(cache.h_breve, cache.omega_bar, cache.c,
                                 s_bar, x_bar - e, lam.matrix, delta)
            fd[i] = (fp - fm) / (2 * h)
        scale = max(1.0, np.linalg.norm(grad))
        worst_grad = max(worst_grad, np.linalg.norm(grad - fd) / scale)

        x_opt = cache.recovery @ (s_bar + lam.matrix @ delta)
        g_opt = objective_gradient_x(cache.h_breve, cache.omega_bar, cache.c,
                                     s_bar, x_opt, lam.matrix, delta)
        worst_stat = max(worst_stat, np.linalg.norm(g_opt) / scale)
    ok = worst_grad <= 1e-5 and worst_stat <= 1e-8
    return ("gradient-stationarity", ok,
            f"gradient mismatch {worst_grad:.3e}, stationarity {worst_stat:.3e}")


def suite_support_reduction(seed: int = 17) -> tuple:
    """Solving over the support columns only matches the full problem."""
    rng = _rng(seed)
    const = Constellation.from_name("16qam")
    k, n = 4, 6
    worst = 0.0
    for _ in range(30):
        H = generate_rayleigh(k, n, rng)
        prec = CIWMMSEPrecoder(scheme="16qam", sigma2=0.1).fit(H)
        b = prec.cache_.b_factor
        idx = rng.integers(0, 16, size=k)
        s_bar = np.concatenate([const.points[idx].real, const.points[idx].imag])
        lam = const.build_lambda(idx)
        d = -(b @ s_bar)
        full = solve_active_set(b @ lam.matrix, d).delta
        reduced = np.zeros(2 * k)
        if lam.k_t:
            reduced[lam.support] = solve_active_set(b @ lam.matrix[:, lam.support], d).delta
        worst = max(worst, float(np.max(np.abs(full - reduced), initial=0.0)))
    return "support-reduction", worst <= 1e-10, f"worst coordinate gap {worst:.3e}"


def suite_cir_membership(seed: int = 19) -> tuple:
    """Noise-free CI-ZF received signals land inside each user's CIR."""
    rng = _rng(seed)
    const = Constellation.from_name("16qam")
    k = n = 6
    violations = 0
    for _ in range(25):
        H = generate_rayleigh(k, n, rng)
        prec = CIZFPrecoder(scheme="16qam").fit(H)
        idx = rng.integers(0, 16, size=k)
        s = const.points[idx]
        x = prec.design(s)
        z = H @ x
        for user in range(k):
            if not const.cir_contains(int(idx[user]), complex(z[user]), tol=1e-7):
                violations += 1
    return "cir-membership", violations == 0, f"{violations} membership violations"


ALL_SUITES = (
    suite_degeneracy_chain,
    suite_nnls_kkt,
    suite_gradient_stationarity,
    suite_support_reduction,
    suite_cir_membership,
)


def run_all(seed: int = 0) -> list:
    results = []
    for offset, suite in enumerate(ALL_SUITES):
        results.append(suite(seed * 1000 + offset + 7))
    return results
