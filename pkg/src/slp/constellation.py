"""PSK and QAM constellations with constructive-interference geometry.

Every constellation is normalized to unit average symbol energy and
carries Gray-coded bit labels: the point at table index ``i`` has bit
label ``i`` (most-significant bit first), and the labels of adjacent
decision regions differ in exactly one bit.

Each point additionally exposes two boundary direction vectors
``(mu, nu)``.  The constructive-interference region (CIR) of a point
``s`` is the set ``{s + d_mu * mu + d_nu * nu : d_mu, d_nu >= 0}``, a
closed cone with apex ``s`` bounded by lines parallel to the
maximum-likelihood decision boundaries and opening away from them:

* PSK (order >= 4): ``mu`` and ``nu`` are the unit vectors at angles
  ``phi +/- pi/M`` around the symbol phase ``phi``, so the cone is the
  symbol's angular decision sector translated to ``s``.
* QAM: directions are axis-aligned outward unit vectors, present only
  on axes where the point sits at the outermost amplitude level.
  Inner points have no free direction (their CIR is the singleton
  ``{s}``), edge points one, corner points two.

Stacking the per-symbol directions of a length-K symbol vector yields
the real 2K-by-2K matrix

    Lambda = [[ diag(Re mu_k), diag(Re nu_k) ],
              [ diag(Im mu_k), diag(Im nu_k) ]]

so that the stacked CIR constraint reads ``t = s_bar + Lambda @ delta``
with ``delta >= 0``; columns of ``Lambda`` that are identically zero
(QAM points without the corresponding free direction) form the
complement of the support set used for dimension reduction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class ConfigurationError(ValueError):
    """Raised for unsupported modulation configurations."""


#: scheme name -> (kind, order)
SCHEME_NAMES = {
    "bpsk": ("psk", 2),
    "qpsk": ("psk", 4),
    "8psk": ("psk", 8),
    "16psk": ("psk", 16),
    "4qam": ("qam", 4),
    "16qam": ("qam", 16),
    "64qam": ("qam", 64),
}

_QAM_ORDERS = (4, 16, 64)


@dataclass(frozen=True)
class ConstellationPoint:
    value: complex
    index: int
    bit_label: str


@dataclass(frozen=True)
class CirBoundary:
    """Boundary direction vectors of one symbol's CIR cone."""

    mu: complex
    nu: complex
    free_count: int


@dataclass(frozen=True)
class CirLambda:
    """Stacked CIR direction matrix for a symbol vector.

    Attributes
    ----------
    matrix : (2K, 2K) float array
        Block-of-diagonals direction matrix.
    support : int array
        Sorted indices of the nonzero columns of ``matrix``.
    k_t : int
        Cardinality of ``support``; equals the summed free direction
        count of the symbol vector.
    """

    matrix: np.ndarray
    support: np.ndarray
    k_t: int


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _gray_inverse(g: int) -> int:
    n = 0
    while g:
        n ^= g
        g >>= 1
    return n


class Constellation:
    """Unit-energy PSK or QAM constellation with Gray labeling.

    Parameters
    ----------
    kind : {"psk", "qam"}
    order : int
        Number of points. PSK requires a power of two >= 2; QAM one of
        {4, 16, 64}.
    phase_offset : float, optional
        PSK phase of the zeroth physical point. Defaults to ``pi/M`` so
        QPSK is ``{(+-1 +-1j)/sqrt(2)}``. Ignored for QAM.
    """

    def __init__(self, kind: str, order: int, phase_offset: float | None = None):
        if kind not in ("psk", "qam"):
            raise ConfigurationError(f"unknown constellation kind {kind!r}")
        order = int(order)
        if kind == "psk":
            if order < 2 or order & (order - 1):
                raise ConfigurationError(f"PSK order must be a power of two >= 2, got {order}")
        elif order not in _QAM_ORDERS:
            raise ConfigurationError(f"QAM order must be one of {_QAM_ORDERS}, got {order}")
        self.kind = kind
        self.order = order
        self.bits_per_symbol = order.bit_length() - 1
        if kind == "psk":
            self.phase_offset = np.pi / order if phase_offset is None else float(phase_offset)
            self._build_psk()
        else:
            self.phase_offset = 0.0
            self._build_qam()

    @classmethod
    def from_name(cls, name: str) -> "Constellation":
        key = str(name).strip().lower()
        if key not in SCHEME_NAMES:
            raise ConfigurationError(
                f"unknown scheme {name!r}; known schemes: {sorted(SCHEME_NAMES)}"
            )
        kind, order = SCHEME_NAMES[key]
        return cls(kind, order)

    @classmethod
    def psk(cls, order: int, phase_offset: float | None = None) -> "Constellation":
        return cls("psk", order, phase_offset)

    @classmethod
    def qam(cls, order: int) -> "Constellation":
        return cls("qam", order)

    def _build_psk(self) -> None:
        m = self.order
        # table index i is the Gray label; physical position on the circle
        # is gray_inverse(i), so neighboring points differ in one label bit.
        positions = np.array([_gray_inverse(i) for i in range(m)])
        phases = 2.0 * np.pi * positions / m + self.phase_offset
        self.points = np.exp(1j * phases)
        if m >= 4:
            half = np.pi / m
            self.mu = np.exp(1j * (phases + half))
            self.nu = np.exp(1j * (phases - half))
            self.free_count = np.full(m, 2, dtype=np.int64)
            self._cir_supported = True
        else:
            # a BPSK decision region has a single boundary; its CIR (a half
            # plane) is not expressible with two cone directions
            self.mu = np.zeros(m, dtype=np.complex128)
            self.nu = np.zeros(m, dtype=np.complex128)
            self.free_count = np.zeros(m, dtype=np.int64)
            self._cir_supported = False

    def _build_qam(self) -> None:
        m = self.order
        bits_axis = self.bits_per_symbol // 2
        levels = 1 << bits_axis
        peak = levels - 1
        scale = 1.0 / np.sqrt(2.0 * (levels**2 - 1) / 3.0)
        amp_i = np.empty(m, dtype=np.int64)
        amp_q = np.empty(m, dtype=np.int64)
        for i in range(m):
            label_i = i >> bits_axis
            label_q = i & (levels - 1)
            amp_i[i] = 2 * _gray_inverse(label_i) - peak
            amp_q[i] = 2 * _gray_inverse(label_q) - peak
        self.points = (amp_i + 1j * amp_q) * scale
        self.mu = np.where(np.abs(amp_i) == peak, np.sign(amp_i) + 0j, 0j)
        self.nu = np.where(np.abs(amp_q) == peak, 1j * np.sign(amp_q), 0j)
        self.free_count = (self.mu != 0).astype(np.int64) + (self.nu != 0).astype(np.int64)
        self._cir_supported = True

    # -- table access ---------------------------------------------------

    def table(self) -> list[ConstellationPoint]:
        """All points ordered by index, with their Gray bit labels."""
        width = self.bits_per_symbol
        return [
            ConstellationPoint(complex(self.points[i]), i, format(i, f"0{width}b"))
            for i in range(self.order)
        ]

    def _require_cir(self) -> None:
        if not self._cir_supported:
            raise ConfigurationError(
                "CIR boundary directions require PSK order >= 4 or QAM"
            )

    def boundary(self, index: int) -> CirBoundary:
        """Boundary direction vectors of the point at ``index``."""
        self._require_cir()
        index = int(index)
        if not 0 <= index < self.order:
            raise ValueError(f"index {index} out of range for order {self.order}")
        return CirBoundary(
            complex(self.mu[index]), complex(self.nu[index]), int(self.free_count[index])
        )

    # -- CIR geometry ---------------------------------------------------

    def build_lambda(self, indices) -> CirLambda:
        """Stacked direction matrix for a vector of point indices."""
        self._require_cir()
        idx = np.asarray(indices, dtype=np.int64)
        if idx.ndim != 1 or idx.size < 1:
            raise ValueError("indices must be a nonempty 1-D sequence")
        k = idx.size
        mu = self.mu[idx]
        nu = self.nu[idx]
        lam = np.zeros((2 * k, 2 * k))
        rng = np.arange(k)
        lam[rng, rng] = mu.real
        lam[rng, k + rng] = nu.real
        lam[k + rng, rng] = mu.imag
        lam[k + rng, k + rng] = nu.imag
        support = np.concatenate([rng[mu != 0], k + rng[nu != 0]])
        support.sort()
        return CirLambda(lam, support, int(support.size))

    def cir_contains(self, index: int, candidate: complex, tol: float = 1e-9) -> bool:
        """Whether ``candidate`` lies in the closed CIR cone of a point.

        Solves ``candidate = s + d_mu*mu + d_nu*nu`` for the free
        coefficients and accepts coefficients down to ``-tol``; fixed
        coordinates must match within ``tol``.
        """
        self._require_cir()
        b = self.boundary(index)
        w = complex(candidate) - complex(self.points[index])
        if b.free_count == 0:
            return abs(w) <= tol
        if b.free_count == 1:
            direction = b.mu if b.mu != 0 else b.nu
            coeff = (w * np.conj(direction)).real
            resid = w - coeff * direction
            return abs(resid) <= tol and coeff >= -tol
        mat = np.array([[b.mu.real, b.nu.real], [b.mu.imag, b.nu.imag]])
        coeffs = np.linalg.solve(mat, np.array([w.real, w.imag]))
        return bool(np.all(coeffs >= -tol))

    # -- detection and bit mapping ---------------------------------------

    def detect(self, y) -> np.ndarray:
        """ML (minimum-distance) detection; ties break to the lowest index."""
        y = np.asarray(y, dtype=np.complex128)
        return np.argmin(np.abs(y[..., None] - self.points), axis=-1)

    def index_of(self, symbols, tol: float = 1e-8) -> np.ndarray:
        """Indices of exact constellation symbols; rejects foreign values."""
        symbols = np.asarray(symbols, dtype=np.complex128)
        idx = self.detect(symbols)
        err = np.abs(symbols - self.points[idx])
        if np.any(err > tol):
            raise ValueError(
                f"symbols deviate from the constellation by up to {err.max():.3g}"
            )
        return idx

    def map_bits(self, bits) -> np.ndarray:
        """Gray-map a bit sequence (MSB first) to symbols."""
        bits = np.asarray(bits, dtype=np.int64).ravel()
        b = self.bits_per_symbol
        if bits.size % b:
            raise ValueError(f"bit count {bits.size} not divisible by {b}")
        if bits.size == 0:
            return np.zeros(0, dtype=np.complex128)
        if np.any((bits != 0) & (bits != 1)):
            raise ValueError("bits must be 0 or 1")
        weights = 1 << np.arange(b - 1, -1, -1)
        idx = bits.reshape(-1, b) @ weights
        return self.points[idx]

    def demap_symbols(self, symbols) -> np.ndarray:
        """Hard-decision detection to the Gray bit sequence (MSB first)."""
        idx = self.detect(np.asarray(symbols, dtype=np.complex128).ravel())
        b = self.bits_per_symbol
        shifts = np.arange(b - 1, -1, -1)
        return ((idx[:, None] >> shifts) & 1).astype(np.int64).ravel()

    def __repr__(self) -> str:  # pragma: no cover
        return f"Constellation(kind={self.kind!r}, order={self.order})"
