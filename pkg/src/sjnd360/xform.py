"""Orthonormal 2-D type-II DCT on square blocks.

Scaling uses the orthonormal convention sqrt(1/N) / sqrt(2/N), so the DC
coefficient of an N x N block equals N times its mean and the transform is an
isometry (Parseval holds exactly up to float error).

``forward_dct``/``inverse_dct`` go through scipy's separable fast path; the
``*_reference`` variants evaluate the defining double sum per coefficient and
exist as an independent oracle.
"""

from __future__ import annotations

import numpy as np
import scipy.fft

from . import parallel


def scale_factors(n: int) -> np.ndarray:
    """Orthonormal normalization factors: sqrt(1/N) for index 0, sqrt(2/N) above."""
    phi = np.full(n, np.sqrt(2.0 / n))
    phi[0] = np.sqrt(1.0 / n)
    return phi


def _cos_table(n: int) -> np.ndarray:
    # table[u, x] = cos((2x+1) u pi / 2N)
    u = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    return np.cos((2 * x + 1) * u * np.pi / (2.0 * n))


def forward_dct(pixels: np.ndarray) -> np.ndarray:
    """N x N spatial block -> orthonormal DCT coefficients."""
    return scipy.fft.dctn(np.asarray(pixels, dtype=np.float64), type=2, norm="ortho")


def inverse_dct(coeffs: np.ndarray) -> np.ndarray:
    """DCT coefficients -> spatial samples (floating, unclamped)."""
    return scipy.fft.idctn(np.asarray(coeffs, dtype=np.float64), type=2, norm="ortho")


def forward_dct_grid(blocks: np.ndarray, threads: int = 1) -> np.ndarray:
    """Transform a (by, bx, N, N) stack of blocks."""
    out = np.empty_like(blocks, dtype=np.float64)

    def work(start, stop):
        out[start:stop] = scipy.fft.dctn(
            blocks[start:stop], type=2, norm="ortho", axes=(-2, -1)
        )

    parallel.run_chunked(work, blocks.shape[0], threads)
    return out


def inverse_dct_grid(coeffs: np.ndarray, threads: int = 1) -> np.ndarray:
    out = np.empty_like(coeffs, dtype=np.float64)

    def work(start, stop):
        out[start:stop] = scipy.fft.idctn(
            coeffs[start:stop], type=2, norm="ortho", axes=(-2, -1)
        )

    parallel.run_chunked(work, coeffs.shape[0], threads)
    return out


def forward_dct_reference(pixels: np.ndarray) -> np.ndarray:
    """Direct per-coefficient double sum; O(N^4), oracle only."""
    p = np.asarray(pixels, dtype=np.float64)
    n = p.shape[0]
    phi = scale_factors(n)
    cos = _cos_table(n)
    out = np.empty((n, n))
    for u in range(n):
        for v in range(n):
            out[u, v] = phi[u] * phi[v] * np.sum(p * np.outer(cos[u], cos[v]))
    return out


def inverse_dct_reference(coeffs: np.ndarray) -> np.ndarray:
    """Direct inverse double sum; O(N^4), oracle only."""
    c = np.asarray(coeffs, dtype=np.float64)
    n = c.shape[0]
    phi = scale_factors(n)
    cos = _cos_table(n)
    weighted = c * np.outer(phi, phi)
    out = np.empty((n, n))
    for x in range(n):
        for y in range(n):
            out[x, y] = np.sum(weighted * np.outer(cos[:, x], cos[:, y]))
    return out
