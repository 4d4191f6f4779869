"""Multiscale geometric coordinate q(x), its weight v(x) = q'(x) and the
local scaling exponent.

Each term of the profile contributes

    (ell / alpha) * sgn(x) * |x / ell|**alpha * F(x),
    F(x) = u + A cos(omega ln|x/ell_inf|) + B sin(omega ln|x/ell_inf|),

on top of the linear part ``x``; ``u`` is 1 when ``keep_unit_offset`` is set
and 0 otherwise. Lengths carry whatever unit the caller uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import SingularPoint

__all__ = [
    "MeasureTerm",
    "MeasureProfile",
    "binomial",
    "trivial_profile",
    "eval_q",
    "eval_weight",
    "eval_weight_derivative",
    "local_scaling_exponent",
]


@dataclass(frozen=True)
class MeasureTerm:
    alpha: float
    ell: float = 1.0
    amp_cos: float = 0.0
    amp_sin: float = 0.0
    omega: float = 0.0
    ell_inf: float = 1.0
    keep_unit_offset: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.ell > 0.0:
            raise ValueError(f"ell must be positive, got {self.ell}")
        if not self.ell_inf > 0.0:
            raise ValueError(f"ell_inf must be positive, got {self.ell_inf}")
        for name in ("amp_cos", "amp_sin", "omega"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def oscillatory(self) -> bool:
        return self.omega != 0.0 and (self.amp_cos != 0.0 or self.amp_sin != 0.0)

    @property
    def vanishing(self) -> bool:
        """True when the modulation is identically zero, so the term drops out."""
        return not self.keep_unit_offset and self.amp_cos == 0.0 and self.amp_sin == 0.0


@dataclass(frozen=True)
class MeasureProfile:
    """Ordered scale hierarchy. ``mode="binomial"`` keeps only the first term."""

    terms: tuple[MeasureTerm, ...]
    mode: Literal["full", "binomial"] = "full"

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("a profile needs at least one term")
        if self.mode not in ("full", "binomial"):
            raise ValueError(f"unknown profile mode {self.mode!r}")
        if self.mode == "full":
            ells = [t.ell for t in self.terms]
            if any(b >= a for a, b in zip(ells, ells[1:])):
                raise ValueError("ell values must be strictly decreasing in full mode")

    @property
    def active_terms(self) -> tuple[MeasureTerm, ...]:
        return self.terms[:1] if self.mode == "binomial" else self.terms

    @property
    def alphas(self) -> tuple[float, ...]:
        return tuple(t.alpha for t in self.active_terms if not t.vanishing)

    @property
    def oscillatory(self) -> bool:
        return any(t.oscillatory for t in self.active_terms)

    @property
    def is_flat(self) -> bool:
        """v(x) == 1 identically (every term has a vanishing modulation)."""
        return all(t.vanishing for t in self.active_terms)

    @property
    def smallest_alpha(self) -> float:
        alphas = self.alphas
        return min(alphas) if alphas else 1.0


def binomial(alpha: float, ell: float = 1.0, **kwargs) -> MeasureProfile:
    """Single-scale profile x + (ell/alpha) sgn(x) |x/ell|^alpha F(x)."""
    return MeasureProfile((MeasureTerm(alpha, ell, **kwargs),), mode="binomial")


def trivial_profile() -> MeasureProfile:
    """q(x) = x, hence v(x) = 1."""
    return MeasureProfile((MeasureTerm(1.0, keep_unit_offset=False),), mode="binomial")


def _phases(t: MeasureTerm, ax: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    arg = t.omega * np.log(ax / t.ell_inf)
    return np.cos(arg), np.sin(arg)


def _as_array(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _ret(out: np.ndarray, scalar: bool):
    return float(out[0]) if scalar else out


def eval_q(p: MeasureProfile, x):
    """Geometric coordinate q(x); q(0) = 0 exactly."""
    xs, scalar = _as_array(x)
    out = xs.copy()
    nz = xs != 0.0
    xn = xs[nz]
    ax = np.abs(xn)
    for t in p.active_terms:
        if t.vanishing:
            continue
        f = np.full_like(ax, 1.0 if t.keep_unit_offset else 0.0)
        if t.oscillatory:
            c, s = _phases(t, ax)
            f = f + t.amp_cos * c + t.amp_sin * s
        out[nz] += (t.ell / t.alpha) * np.sign(xn) * (ax / t.ell) ** t.alpha * f
    return _ret(out, scalar)


def _check_origin(p: MeasureProfile, xs: np.ndarray) -> None:
    if not np.any(xs == 0.0):
        return
    for t in p.active_terms:
        if t.vanishing:
            continue
        if t.alpha < 1.0 or t.oscillatory:
            raise SingularPoint("measure weight diverges at x = 0")


def eval_weight(p: MeasureProfile, x):
    """Weight v(x) = q'(x) in closed form."""
    xs, scalar = _as_array(x)
    _check_origin(p, xs)
    out = np.ones_like(xs)
    ax = np.abs(xs)
    for t in p.active_terms:
        if t.vanishing:
            continue
        g = np.full_like(ax, 1.0 if t.keep_unit_offset else 0.0)
        if t.oscillatory:
            with np.errstate(divide="ignore"):
                c, s = _phases(t, ax)
            g = g + t.amp_cos * c + t.amp_sin * s
            g = g + (t.omega / t.alpha) * (t.amp_sin * c - t.amp_cos * s)
        if t.alpha == 1.0:
            out += g
        else:
            out += (ax / t.ell) ** (t.alpha - 1.0) * g
    return _ret(out, scalar)


def eval_weight_derivative(p: MeasureProfile, x):
    """v'(x), needed by the composition law of the q-derivative."""
    xs, scalar = _as_array(x)
    if np.any(xs == 0.0):
        raise SingularPoint("v'(x) is undefined at x = 0")
    out = np.zeros_like(xs)
    ax = np.abs(xs)
    for t in p.active_terms:
        if t.vanishing:
            continue
        u = 1.0 if t.keep_unit_offset else 0.0
        c, s = _phases(t, ax)
        a, b, w, al = t.amp_cos, t.amp_sin, t.omega, t.alpha
        g = u + a * c + b * s + (w / al) * (b * c - a * s)
        bracket = (al - 1.0) * g + w * (b * c - a * s) - (w * w / al) * (a * c + b * s)
        out += (ax / t.ell) ** (al - 1.0) / xs * bracket
    return _ret(out, scalar)


def local_scaling_exponent(p: MeasureProfile, x):
    """Effective exponent x v(x) / q(x): alpha deep in the UV, 1 in the IR."""
    xs, scalar = _as_array(x)
    if np.any(xs == 0.0):
        raise SingularPoint("local scaling exponent is undefined at x = 0")
    out = xs * eval_weight(p, xs) / eval_q(p, xs)
    return _ret(out, scalar)
