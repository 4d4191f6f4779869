"""Ordinary derivatives on a grid: spectral on periodic domains, fourth-order
finite differences otherwise."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .grid import Domain


def stencil_weights(offsets, order: int) -> np.ndarray:
    """Finite-difference weights for the ``order``-th derivative at offset 0."""
    s = np.asarray(offsets, dtype=float)
    p = np.arange(len(s))
    vander = s[None, :] ** p[:, None]
    rhs = np.zeros(len(s))
    rhs[order] = float(np.prod(np.arange(1, order + 1)))
    return np.linalg.solve(vander, rhs)


@lru_cache(maxsize=64)
def _fd_matrix(n: int, h: float, order: int) -> sp.csr_matrix:
    width = 5 if order == 1 else 6
    half = 2
    rows, cols, vals = [], [], []
    for i in range(n):
        if half <= i < n - half:
            offs = np.arange(-half, half + 1)
        elif i < half:
            offs = np.arange(width) - i
        else:
            offs = np.arange(-width + 1, 1) + (n - 1 - i)
        w = stencil_weights(offs, order) / h**order
        rows.extend([i] * len(offs))
        cols.extend(i + offs)
        vals.extend(w)
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def spectral_apply(d: Domain, arr: np.ndarray, mult: np.ndarray) -> np.ndarray:
    """Multiply the FFT of ``arr`` (along axis 0) by ``mult``."""
    spec = np.fft.fft(arr, axis=0)
    spec *= np.reshape(mult, (-1,) + (1,) * (arr.ndim - 1))
    return np.fft.ifft(spec, axis=0)


def symmetrize_nyquist(mult: np.ndarray, mult_at_plus_nyquist: complex) -> np.ndarray:
    """Average the Nyquist entry over +k_N and -k_N so real inputs stay real."""
    n = len(mult)
    if n % 2 == 0:
        mult = mult.copy()
        mult[n // 2] = 0.5 * (mult[n // 2] + mult_at_plus_nyquist)
    return mult


def derivative(d: Domain, arr: np.ndarray, order: int = 1) -> np.ndarray:
    """Ordinary derivative of order 1 or 2 along axis 0."""
    if order not in (1, 2):
        raise ValueError("only first and second derivatives are supported")
    arr = np.asarray(arr, dtype=complex)
    if d.periodic:
        k = d.wavenumbers()
        mult = (1j * k) ** order
        if order == 1:
            mult[d.n // 2] = 0.0
        return spectral_apply(d, arr, mult)
    return np.asarray(_fd_matrix(d.n, d.h, order) @ arr)
