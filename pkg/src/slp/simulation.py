"""Monte Carlo link-level simulation over Rayleigh fading.

One run sweeps an SNR grid (``SNR = power / sigma2``). Per grid point,
channels are drawn block by block; every precoder under test sees the
same channel, the same symbol draws, and the same noise realization
(paired comparison), and the point stops once every precoder has
collected the target error count or the symbol budget is exhausted.

Each (point, block) pair owns a dedicated RNG substream derived from
``(seed, point index, block index)``, so results are bit-identical
regardless of how points are distributed over workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .constellation import Constellation
from .nnls import NnlsConvergenceError
from .precoding import FactorizationError, block_gamma, make_precoder
from .validation import check_positive

DEFAULT_PRECODERS = ("mmse", "ci-zf", "ci-mmse")


@dataclass(frozen=True)
class SimConfig:
    """Configuration of one SER sweep."""

    n_tx: int = 12
    n_users: int = 12
    scheme: str = "16qam"
    precoders: tuple = DEFAULT_PRECODERS
    snr_db: tuple = tuple(range(0, 41, 5))
    block_length: int = 1
    min_errors: int = 400
    max_symbols: int = 2_000_000
    min_blocks: int = 1
    seed: int = 0
    power: float = 1.0
    rho_convention: str = "complex"

    def validate(self) -> "SimConfig":
        if self.n_tx < 1 or self.n_users < 1:
            raise ValueError("n_tx and n_users must be >= 1")
        if self.block_length < 1 or self.min_blocks < 1:
            raise ValueError("block_length and min_blocks must be >= 1")
        if not self.snr_db:
            raise ValueError("snr_db grid must be nonempty")
        if not self.precoders:
            raise ValueError("precoders list must be nonempty")
        if self.min_errors < 1 or self.max_symbols < 1:
            raise ValueError("min_errors and max_symbols must be >= 1")
        check_positive(self.power, "power")
        Constellation.from_name(self.scheme)
        for kind in self.precoders:
            make_precoder(kind, scheme=self.scheme, sigma2=1.0, power=self.power)
        return self


@dataclass
class SerPoint:
    snr_db: float
    symbols: int
    errors: int
    ser: float
    ci_halfwidth: float
    bit_errors: int = 0
    failures: int = 0


@dataclass
class SerCurve:
    kind: str
    points: list = field(default_factory=list)

    def sers(self) -> np.ndarray:
        return np.array([p.ser for p in self.points])

    def snrs(self) -> np.ndarray:
        return np.array([p.snr_db for p in self.points])


def generate_rayleigh(n_users: int, n_tx: int, rng: np.random.Generator) -> np.ndarray:
    """(n_users, n_tx) i.i.d. zero-mean unit-variance complex Gaussian."""
    return (rng.standard_normal((n_users, n_tx))
            + 1j * rng.standard_normal((n_users, n_tx))) / np.sqrt(2.0)


def draw_noise(shape, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Complex Gaussian noise with variance ``sigma2`` per entry."""
    scale = np.sqrt(sigma2 / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def receive(U, H, noise, gamma, a=None) -> np.ndarray:
    """Scaled received signals ``a_k/gamma * (h_k^T u + n_k)`` per row."""
    U = np.atleast_2d(np.asarray(U, dtype=np.complex128))
    Z = U @ H.T
    g = np.asarray(gamma, dtype=np.float64)
    g = g[:, None] if g.ndim == 1 else g
    Y = (Z + noise) / g
    if a is not None:
        Y = Y * np.asarray(a, dtype=np.complex128)[None, :]
    return Y


def transmit_receive(u, H, sigma2, gamma, a=None, rng=None) -> np.ndarray:
    """One-shot transmission of a single transmit vector ``u``."""
    if rng is None:
        rng = np.random.default_rng()
    u = np.asarray(u, dtype=np.complex128)
    noise = draw_noise((1, H.shape[0]), sigma2, rng)
    return receive(u[None, :], H, noise, float(gamma), a)[0]


def _point_rng(seed: int, point_index: int, block_index: int) -> np.random.Generator:
    return np.random.default_rng(
        np.random.SeedSequence((int(seed), int(point_index), int(block_index)))
    )


def _simulate_point(config: SimConfig, point_index: int) -> dict:
    const = Constellation.from_name(config.scheme)
    snr_db = float(config.snr_db[point_index])
    sigma2 = config.power / 10.0 ** (snr_db / 10.0)
    precs = {
        kind: make_precoder(kind, scheme=config.scheme, sigma2=sigma2,
                            power=config.power, rho_convention=config.rho_convention)
        for kind in config.precoders
    }
    L, K = config.block_length, config.n_users
    block_errors = {kind: [] for kind in precs}
    bit_errors = {kind: 0 for kind in precs}
    failures = {kind: 0 for kind in precs}
    symbols = 0
    block = 0
    consecutive_failures = 0
    while True:
        rng = _point_rng(config.seed, point_index, block)
        block += 1
        H = generate_rayleigh(K, config.n_tx, rng)
        idx = rng.integers(0, const.order, size=(L, K))
        S = const.points[idx]
        noise = draw_noise((L, K), sigma2, rng)

        designs = {}
        failed = None
        for kind, prec in precs.items():
            try:
                designs[kind] = prec.fit(H).design(S, indices=idx)
            except (FactorizationError, NnlsConvergenceError):
                failed = kind
                break
        if failed is not None:
            # drop the whole block so all precoders keep identical tallies
            failures[failed] += 1
            consecutive_failures += 1
            if consecutive_failures >= 50:
                raise RuntimeError(
                    f"precoder {failed!r} failed on 50 consecutive channel draws "
                    f"at {snr_db:g} dB (e.g. rank-deficient configuration)"
                )
            continue
        consecutive_failures = 0

        for kind, X in designs.items():
            gamma = block_gamma(X, config.power)
            Y = receive(gamma * X, H, noise, gamma)
            det = const.detect(Y)
            wrong = det != idx
            block_errors[kind].append(int(np.count_nonzero(wrong)))
            bit_errors[kind] += int(np.bitwise_count(det ^ idx).sum())
        symbols += L * K
        if symbols >= config.max_symbols:
            break
        if len(block_errors[next(iter(precs))]) >= config.min_blocks and all(
                sum(block_errors[kind]) >= config.min_errors for kind in precs):
            break

    out = {}
    for kind in precs:
        counts = np.array(block_errors[kind], dtype=np.float64)
        n_blocks = counts.size
        total = int(counts.sum())
        ser = total / symbols
        if n_blocks >= 2:
            # channels are drawn per block, so blocks are the sampling
            # unit: use the cluster-corrected standard error
            per_block = counts / (L * K)
            se = np.sqrt(np.sum((per_block - ser) ** 2) / (n_blocks * (n_blocks - 1)))
        else:
            se = np.sqrt(max(ser * (1.0 - ser), 0.0) / symbols)
        out[kind] = SerPoint(snr_db, symbols, total, ser, float(1.96 * se),
                             bit_errors[kind], failures[kind])
    return out


def simulate_ser(config: SimConfig, threads: int = 1) -> dict:
    """Run the sweep; returns ``{precoder kind: SerCurve}``.

    ``threads`` bounds worker processes across SNR points; results do
    not depend on it.
    """
    config.validate()
    indices = range(len(config.snr_db))
    if threads > 1 and len(config.snr_db) > 1:
        with ProcessPoolExecutor(max_workers=int(threads)) as pool:
            results = list(pool.map(_simulate_point, [config] * len(config.snr_db), indices))
    else:
        results = [_simulate_point(config, i) for i in indices]
    curves = {kind: SerCurve(kind) for kind in config.precoders}
    for point in results:
        for kind, record in point.items():
            curves[kind].points.append(record)
    return curves


def snr_at_ser(curve: SerCurve, target: float) -> float:
    """SNR (dB) where the curve crosses ``target``, interpolating
    linearly in log10(SER); NaN when the curve never crosses."""
    snr = curve.snrs()
    ser = curve.sers()
    order = np.argsort(snr)
    snr, ser = snr[order], ser[order]
    for i in range(len(snr) - 1):
        lo, hi = ser[i + 1], ser[i]
        if hi >= target >= lo and lo > 0.0 and hi > 0.0:
            if hi == lo:
                return float(snr[i])
            frac = (np.log10(hi) - np.log10(target)) / (np.log10(hi) - np.log10(lo))
            return float(snr[i] + frac * (snr[i + 1] - snr[i]))
    return float("nan")
