"""Multiplication-count model of the precoding pipelines.

The models count real multiplications of the closed-form recovery plus
the active-set solve, as a function of antennas ``N``, users ``K``, the
CIR support size ``K_T``, and the measured mean number of active-set
outer loops ``N_L``. Counts are normalized by the cost of one
(2N x 2K) @ (2K x 2K) real matrix product, ``8 N K^2``.

The empirical side draws random channels and symbol vectors across an
SNR grid and records the support sizes and the outer-loop counts the
solver actually needs, so the models can be evaluated at measured
operating points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation
from .nnls import solve_active_set
from .precoding import build_factor_cache
from .simulation import generate_rayleigh


def matmul_unit(n_tx: int, n_users: int) -> float:
    """Multiplications in a (2N x 2K) @ (2K x 2K) real product."""
    return 8.0 * n_tx * n_users**2


def mults_ci_wmmse_reduced(n_tx: int, n_users: int, k_t: float, loops: float) -> float:
    """Weighted pipeline with support reduction."""
    n, k = n_tx, n_users
    return (8 * n + 4 * k_t + 4 * k_t * loops) * k + (12 + 16 * n + 40.0 / 3.0 * k) * k**2


def mults_ci_zf_full(n_tx: int, n_users: int, loops: float) -> float:
    """Minimum-power pipeline solved over all 2K offset coordinates."""
    n, k = n_tx, n_users
    return (20 * k + 8 * k * loops) * n + (4 + 24 * n + 4 * k) * k**2


def mults_ci_zf_reduced(n_tx: int, n_users: int, k_t: float, loops: float) -> float:
    """Minimum-power pipeline with support reduction."""
    n, k = n_tx, n_users
    return (4 * k_t + 12 * k + 4 * k_t * loops) * n + (4 + 24 * n + 4 * k) * k**2


def measure_mean_support(constellation: Constellation, n_draws: int,
                         rng: np.random.Generator) -> float:
    """Mean free-direction count per symbol over uniform draws."""
    idx = rng.integers(0, constellation.order, size=int(n_draws))
    return float(constellation.free_count[idx].mean())


@dataclass
class OpCountReport:
    """Measured operating point and evaluated cost models."""

    n_tx: int
    n_users: int
    scheme: str
    snr_db: tuple
    samples_per_snr: int
    mean_kt: float
    mean_loops: dict          # pipeline -> mean outer-loop count
    ratios: dict              # pipeline -> model at means / matmul unit
    mean_ratios: dict         # pipeline -> mean of per-draw model / unit
    unit: float

    def summary_lines(self) -> list:
        k = self.n_users
        lines = [
            f"scheme={self.scheme} N={self.n_tx} K={k} "
            f"snr={','.join(str(s) for s in self.snr_db)} samples/snr={self.samples_per_snr}",
            f"mean support K_T = {self.mean_kt:.4f} (K_T/K = {self.mean_kt / k:.4f})",
        ]
        for name in self.ratios:
            lines.append(
                f"{name}: mean loops = {self.mean_loops[name]:.3f}, "
                f"cost = {self.ratios[name]:.3f} units "
                f"(per-draw mean {self.mean_ratios[name]:.3f})"
            )
        return lines


PIPELINES = ("ci-wmmse-lc", "ci-zf", "ci-zf-lc")


def complexity_report(n_tx: int, n_users: int, scheme: str, snr_db,
                      samples: int = 200, seed: int = 0, power: float = 1.0,
                      rho_convention: str = "complex") -> OpCountReport:
    """Measure support sizes and solver loop counts, then evaluate the
    cost models at the measured means."""
    const = Constellation.from_name(scheme)
    snr_db = tuple(float(s) for s in snr_db)
    ones = np.ones(n_users)
    kts = []
    loops = {name: [] for name in PIPELINES}
    per_draw = {name: [] for name in PIPELINES}
    unit = matmul_unit(n_tx, n_users)

    for p, snr in enumerate(snr_db):
        sigma2 = power / 10.0 ** (snr / 10.0)
        for draw in range(int(samples)):
            rng = np.random.default_rng(np.random.SeedSequence((int(seed), p, draw)))
            H = generate_rayleigh(n_users, n_tx, rng)
            idx = rng.integers(0, const.order, size=n_users)
            s_bar = np.concatenate([const.points[idx].real, const.points[idx].imag])
            lam = const.build_lambda(idx)
            kts.append(lam.k_t)

            cache_w = build_factor_cache(H, sigma2, power, ones.astype(complex), ones,
                                         rho_convention)
            cache_z = build_factor_cache(H, 0.0, power, ones.astype(complex), ones)
            runs = {
                "ci-wmmse-lc": (cache_w.b_factor @ lam.matrix[:, lam.support],
                                -(cache_w.b_factor @ s_bar)),
                "ci-zf": (cache_z.b_factor @ lam.matrix,
                          -(cache_z.b_factor @ s_bar)),
                "ci-zf-lc": (cache_z.b_factor @ lam.matrix[:, lam.support],
                             -(cache_z.b_factor @ s_bar)),
            }
            for name, (cols, d) in runs.items():
                count = 0
                if cols.shape[1]:
                    count = solve_active_set(cols, d).iterations
                loops[name].append(count)
                if name == "ci-wmmse-lc":
                    m = mults_ci_wmmse_reduced(n_tx, n_users, lam.k_t, count)
                elif name == "ci-zf":
                    m = mults_ci_zf_full(n_tx, n_users, count)
                else:
                    m = mults_ci_zf_reduced(n_tx, n_users, lam.k_t, count)
                per_draw[name].append(m / unit)

    mean_kt = float(np.mean(kts))
    mean_loops = {name: float(np.mean(loops[name])) for name in PIPELINES}
    ratios = {
        "ci-wmmse-lc": mults_ci_wmmse_reduced(n_tx, n_users, mean_kt,
                                              mean_loops["ci-wmmse-lc"]) / unit,
        "ci-zf": mults_ci_zf_full(n_tx, n_users, mean_loops["ci-zf"]) / unit,
        "ci-zf-lc": mults_ci_zf_reduced(n_tx, n_users, mean_kt,
                                        mean_loops["ci-zf-lc"]) / unit,
    }
    mean_ratios = {name: float(np.mean(per_draw[name])) for name in PIPELINES}
    return OpCountReport(n_tx, n_users, scheme, snr_db, int(samples), mean_kt,
                         mean_loops, ratios, mean_ratios, unit)
