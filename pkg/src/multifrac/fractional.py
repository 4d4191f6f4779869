"""Liouville and Weyl derivatives and their linear combinations.

Three interchangeable backends:

* :class:`Spectral` multiplies Fourier coefficients by ``(+-ik)**alpha``
  (principal branch, zero at k = 0); periodic domains only.
* :class:`GrunwaldLetnikov` is the classical first-order shifted-sample sum
  truncated after ``truncation`` terms.
* :class:`SingularQuadrature` integrates the defining kernel against a cubic
  spline of the m-th ordinary derivative on graded panels.

The Weyl derivative carries the factor (-1)**m, so that alpha = 1 gives -d/dx.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.special import gamma

from . import quadrature
from .calculus import derivative, spectral_apply, symmetrize_nyquist
from .errors import BackendDomainMismatch, OrderOutOfRange
from .grid import Domain, GridFunction

__all__ = [
    "Spectral",
    "GrunwaldLetnikov",
    "SingularQuadrature",
    "FracBackend",
    "FracOrder",
    "frac_multiplier",
    "combo_multiplier",
    "symmetric_m2_multiplier",
    "gl_weights",
    "liouville",
    "weyl",
    "combo",
    "dtilde",
    "symmetric_m2",
    "fractional_power",
]


@dataclass(frozen=True)
class Spectral:
    name = "spectral"


@dataclass(frozen=True)
class GrunwaldLetnikov:
    truncation: int = 1 << 16

    name = "gl"

    def __post_init__(self) -> None:
        if self.truncation < 1:
            raise ValueError("GL truncation must be a positive integer")


@dataclass(frozen=True)
class SingularQuadrature:
    panels: int = 64
    grading: float = 2.0
    points: int = 8

    name = "quadrature"

    def __post_init__(self) -> None:
        if self.panels < 16:
            raise ValueError("quadrature needs at least 16 panels")
        if self.grading < 1.0:
            raise ValueError("panel grading exponent must be >= 1")
        if self.points < 2:
            raise ValueError("need at least two Gauss points per panel")


FracBackend = Union[Spectral, GrunwaldLetnikov, SingularQuadrature]
SPECTRAL = Spectral()


@dataclass(frozen=True)
class FracOrder:
    """Order alpha with m - 1 <= alpha < m, m in {1, 2}."""

    alpha: float
    m: int

    def __post_init__(self) -> None:
        if self.m not in (1, 2):
            raise OrderOutOfRange("only m = 1 and m = 2 are supported")
        if not self.m - 1 <= self.alpha < self.m:
            raise OrderOutOfRange(f"alpha = {self.alpha} is outside [{self.m - 1}, {self.m})")

    @classmethod
    def of(cls, alpha: "float | FracOrder") -> "FracOrder":
        if isinstance(alpha, FracOrder):
            return alpha
        alpha = float(alpha)
        return cls(alpha, math.floor(alpha) + 1)


def frac_multiplier(k: np.ndarray, alpha: float, side: int = 1) -> np.ndarray:
    """Symbol (i*side*k)**alpha on the principal branch; 0 at k = 0 unless alpha = 0."""
    k = np.asarray(k, dtype=float)
    sk = side * k
    if alpha == 0.0:
        return np.ones(k.shape, dtype=complex)
    if float(alpha).is_integer() and alpha > 0:
        return (1j * sk) ** int(alpha)
    with np.errstate(divide="ignore"):
        mag = np.where(k == 0.0, 0.0, np.abs(k) ** alpha)
    return mag * np.exp(0.5j * np.pi * alpha * np.sign(sk))


def combo_multiplier(k, alpha: float, c: complex = 0.5, cbar: complex = -0.5) -> np.ndarray:
    return c * frac_multiplier(k, alpha, 1) + cbar * frac_multiplier(k, alpha, -1)


def symmetric_m2_multiplier(k, alpha: float) -> np.ndarray:
    """Symbol of Liouville + Weyl at order 2*alpha: 2 cos(pi alpha) |k|**(2 alpha)."""
    return frac_multiplier(k, 2 * alpha, 1) + frac_multiplier(k, 2 * alpha, -1)


def _spectral_symbol(d: Domain, symbol) -> np.ndarray:
    if not d.periodic:
        raise BackendDomainMismatch("the spectral backend needs a periodic domain")
    k = d.wavenumbers()
    mult = symbol(k)
    return symmetrize_nyquist(mult, complex(symbol(np.array([-k[d.n // 2]]))[0]))


def fractional_power(d: Domain, arr: np.ndarray, order: float, side: int = 1) -> np.ndarray:
    """Spectral (i*side*k)**order for any real order; negative orders integrate
    and drop the mean."""
    return spectral_apply(d, arr, _spectral_symbol(d, lambda k: frac_multiplier(k, order, side)))


def gl_weights(alpha: float, count: int) -> np.ndarray:
    """(-1)**j binom(alpha, j) for j < count."""
    j = np.arange(1, count, dtype=float)
    return np.concatenate([[1.0], np.cumprod((j - 1.0 - alpha) / j)])


@lru_cache(maxsize=64)
def _gl_circular_kernel(alpha: float, truncation: int, n: int) -> np.ndarray:
    """Weights j = 0..truncation folded modulo n (periodic extension)."""
    kernel = np.zeros(n)
    chunk = 1 << 20
    last = 1.0
    start = 0
    while start <= truncation:
        stop = min(start + chunk, truncation + 1)
        j = np.arange(max(start, 1), stop, dtype=float)
        w = last * np.cumprod((j - 1.0 - alpha) / j)
        if start == 0:
            w = np.concatenate([[1.0], w])
        kernel += np.bincount(np.arange(start, stop) % n, weights=w, minlength=n)
        last = w[-1]
        start = stop
    kernel.flags.writeable = False
    return kernel


def _gl_array(d: Domain, arr: np.ndarray, alpha: float, side: int, truncation: int) -> np.ndarray:
    n = d.n
    scale = d.h ** (-alpha)
    if d.periodic:
        c = _gl_circular_kernel(alpha, truncation, n)
        if side < 0:
            c = np.roll(c[::-1], 1)
        return scale * spectral_apply(d, arr, np.fft.fft(c))
    count = min(truncation, n - 1) + 1
    w = gl_weights(alpha, count)
    size = 1 << int(math.ceil(math.log2(n + count)))
    src = arr if side > 0 else arr[::-1]
    pad = np.zeros((size,) + arr.shape[1:], dtype=complex)
    pad[:n] = src
    wk = np.zeros(size)
    wk[:count] = w
    conv = np.fft.ifft(np.fft.fft(pad, axis=0) * np.reshape(np.fft.fft(wk), (-1,) + (1,) * (arr.ndim - 1)), axis=0)[:n]
    return scale * (conv if side > 0 else conv[::-1])


def _quadrature_array(d: Domain, arr: np.ndarray, order: FracOrder, side: int, b: SingularQuadrature) -> np.ndarray:
    m = order.m
    beta = order.alpha + 1.0 - m
    rule = quadrature.power_rule(d.length, beta, b.panels, b.grading, b.points, d.periodic)
    g = derivative(d, arr, m)
    out = quadrature.apply_rule(rule, d, g, direction=side) / gamma(m - order.alpha)
    return out if side > 0 or m % 2 == 0 else -out


def one_sided(d: Domain, arr: np.ndarray, alpha: "float | FracOrder", side: int, b: FracBackend = SPECTRAL) -> np.ndarray:
    """Array-level Liouville (side=+1) or Weyl (side=-1) derivative along axis 0."""
    order = FracOrder.of(alpha)
    a = order.alpha
    arr = np.asarray(arr, dtype=complex)
    if a == 0.0:
        return arr.copy()
    if a == 1.0:
        return side * derivative(d, arr, 1)
    if isinstance(b, Spectral):
        return fractional_power(d, arr, a, side)
    if isinstance(b, GrunwaldLetnikov):
        return _gl_array(d, arr, a, side, b.truncation)
    if isinstance(b, SingularQuadrature):
        return _quadrature_array(d, arr, order, side, b)
    raise TypeError(f"unknown backend {b!r}")


def combo_array(d: Domain, arr, alpha, c: complex = 0.5, cbar: complex = -0.5, b: FracBackend = SPECTRAL) -> np.ndarray:
    if isinstance(b, Spectral):
        a = FracOrder.of(alpha).alpha
        return spectral_apply(d, np.asarray(arr, dtype=complex), _spectral_symbol(d, lambda k: combo_multiplier(k, a, c, cbar)))
    return c * one_sided(d, arr, alpha, 1, b) + cbar * one_sided(d, arr, alpha, -1, b)


def symmetric_m2_array(d: Domain, arr, alpha: float, b: FracBackend = SPECTRAL) -> np.ndarray:
    if not 0.5 < alpha < 1.0:
        raise OrderOutOfRange(f"symmetric m=2 kernel needs 1/2 < alpha < 1, got {alpha}")
    arr = np.asarray(arr, dtype=complex)
    if isinstance(b, Spectral):
        return spectral_apply(d, arr, _spectral_symbol(d, lambda k: symmetric_m2_multiplier(k, alpha)))
    if isinstance(b, SingularQuadrature):
        # single kernel |x - x'|**(1 - 2 alpha) against f''
        beta = 2.0 * alpha - 1.0
        rule = quadrature.power_rule(d.length, beta, b.panels, b.grading, b.points, d.periodic)
        g = derivative(d, arr, 2)
        both = quadrature.apply_rule(rule, d, g, 1) + quadrature.apply_rule(rule, d, g, -1)
        return both / gamma(2.0 - 2.0 * alpha)
    return one_sided(d, arr, 2 * alpha, 1, b) + one_sided(d, arr, 2 * alpha, -1, b)


def liouville(f: GridFunction, order: "float | FracOrder", b: FracBackend = SPECTRAL) -> GridFunction:
    """Left-sided derivative with lower limit -infinity."""
    return f.with_values(one_sided(f.domain, f.values, order, 1, b))


def weyl(f: GridFunction, order: "float | FracOrder", b: FracBackend = SPECTRAL) -> GridFunction:
    """Right-sided derivative with upper limit +infinity."""
    return f.with_values(one_sided(f.domain, f.values, order, -1, b))


def combo(
    f: GridFunction,
    order: "float | FracOrder",
    c: complex = 0.5,
    cbar: complex = -0.5,
    b: FracBackend = SPECTRAL,
) -> GridFunction:
    """c * Liouville + cbar * Weyl; the defaults give the antisymmetric combination."""
    return f.with_values(combo_array(f.domain, f.values, order, c, cbar, b))


def dtilde(f: GridFunction, order: "float | FracOrder", b: FracBackend = SPECTRAL) -> GridFunction:
    return combo(f, order, 0.5, -0.5, b)


def symmetric_m2(f: GridFunction, alpha: float, b: FracBackend = SPECTRAL) -> GridFunction:
    """Liouville + Weyl at order 2*alpha (m = 2), for 1/2 < alpha < 1."""
    return f.with_values(symmetric_m2_array(f.domain, f.values, alpha, b))
