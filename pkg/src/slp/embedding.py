"""Real-valued stacking of the complex signal model.

Vectors stack as ``[Re(v); Im(v)]``; matrices use the block pattern

    M = M_R + i M_I  -->  [[ M_R, -M_I ],
                          [ M_I,  M_R ]]

so that complex products map to real products of the stacked forms:
``realify_vector(M @ v) == realify_matrix(M) @ realify_vector(v)``.
"""

from __future__ import annotations

import numpy as np


def realify_vector(v) -> np.ndarray:
    """Stack a complex vector of length K into a real vector of length 2K."""
    v = np.asarray(v, dtype=np.complex128)
    return np.concatenate([v.real, v.imag])


def realify_matrix(m) -> np.ndarray:
    """Embed a complex K-by-N matrix into its real 2K-by-2N block form."""
    m = np.asarray(m, dtype=np.complex128)
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def complexify_vector(v) -> np.ndarray:
    """Invert :func:`realify_vector`. Requires even length."""
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1 or v.shape[0] % 2:
        raise ValueError(f"expected an even-length real vector, got shape {v.shape}")
    n = v.shape[0] // 2
    return v[:n] + 1j * v[n:]


def complexify_matrix(m) -> np.ndarray:
    """Invert :func:`realify_matrix`, reading the top block row."""
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] % 2 or m.shape[1] % 2:
        raise ValueError(f"expected even dimensions, got shape {m.shape}")
    rows, cols = m.shape[0] // 2, m.shape[1] // 2
    return m[:rows, :cols] - 1j * m[:rows, cols:]
