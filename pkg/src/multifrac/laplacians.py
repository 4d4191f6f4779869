"""Multiscale derivative and kinetic operators built on a measure profile.

Weighted operators conjugate with sqrt(v): D f = v**-0.5 * A(sqrt(v) * f) for a
flat-space operator A. Squares are always formed by applying an operator
twice, never by expanding into fractional pieces.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import integrate

from . import quadrature
from .calculus import derivative
from .errors import (
    ConfigError,
    NegativeWeight,
    OrderOutOfRange,
    OscillatoryProfileRejected,
    QuadratureFailure,
)
from .fractional import SPECTRAL, FracBackend, combo_array, symmetric_m2_array
from .grid import Domain, GridFunction, columnwise, weight_values
from .measure import MeasureProfile, eval_q, eval_weight, eval_weight_derivative

Terms = Sequence[tuple[float, float]]


def _weights(d: Domain, p: MeasureProfile | None) -> np.ndarray:
    v = weight_values(d, p)
    if np.any(v <= 0.0):
        raise NegativeWeight("measure weight v(x) must be strictly positive on the grid")
    return v


def _conjugate(d: Domain, arr: np.ndarray, p: MeasureProfile | None, inner) -> np.ndarray:
    """v**-0.5 * inner(sqrt(v) * arr)."""
    if p is None or p.is_flat:
        return inner(np.asarray(arr, dtype=complex))
    sv = np.sqrt(_weights(d, p))
    return inner(columnwise(sv, arr) * arr) / columnwise(sv, arr)


# q-derivatives


def q_derivative_array(d: Domain, arr: np.ndarray, p: MeasureProfile | None) -> np.ndarray:
    v = weight_values(d, p)
    return derivative(d, arr, 1) / columnwise(v, arr)


def q_derivative(f: GridFunction, p: MeasureProfile | None) -> GridFunction:
    """(1/v) d/dx, spectral on periodic grids and fourth-order otherwise."""
    return f.with_values(q_derivative_array(f.domain, f.values, p))


def q_laplacian(f: GridFunction, p: MeasureProfile | None) -> GridFunction:
    return q_derivative(q_derivative(f, p), p)


def q_laplacian_composition(f: GridFunction, p: MeasureProfile) -> GridFunction:
    """Right-hand side f''/v**2 - (v'/v**3) f' of the composition law."""
    d = f.domain
    v = eval_weight(p, d.x)
    dv = eval_weight_derivative(p, d.x)
    f1 = derivative(d, f.values, 1)
    f2 = derivative(d, f.values, 2)
    return f.with_values(f2 / v**2 - dv / v**3 * f1)


# weighted fractional and explicit multiscaling


def weighted_frac_array(d, arr, alpha: float, p, b: FracBackend = SPECTRAL) -> np.ndarray:
    return _conjugate(d, arr, p, lambda a: combo_array(d, a, alpha, 0.5, -0.5, b))


def weighted_frac(f: GridFunction, alpha: float, p: MeasureProfile | None, b: FracBackend = SPECTRAL) -> GridFunction:
    """v**-0.5 Dtilde^alpha (sqrt(v) f) with Dtilde = (Liouville - Weyl)/2."""
    return f.with_values(weighted_frac_array(f.domain, f.values, alpha, p, b))


def k_alpha(f: GridFunction, alpha: float, p: MeasureProfile | None, b: FracBackend = SPECTRAL) -> GridFunction:
    """Weighted fractional derivative applied twice; self-adjoint under dq."""
    return weighted_frac(weighted_frac(f, alpha, p, b), alpha, p, b)


def check_terms(terms: Terms, p: MeasureProfile | None, consistency: bool = True) -> tuple[tuple[float, float], ...]:
    terms = tuple((float(g), float(a)) for g, a in terms)
    if not terms:
        raise ConfigError("explicit multiscale operators need at least one term")
    for _, a in terms:
        if not 0.0 < a <= 1.0:
            raise OrderOutOfRange(f"explicit multiscale exponents must lie in (0, 1], got {a}")
    if consistency and p is not None and not p.is_flat:
        ours = sorted(a for _, a in terms if a < 1.0)
        theirs = sorted(a for a in p.alphas if a < 1.0)
        if ours != theirs:
            raise ConfigError(
                f"operator exponents {ours} differ from the profile exponents {theirs}; "
                "disable cross-consistency to mix them"
            )
    return terms


def explicit_multiscale_array(d, arr, terms: Terms, p, b: FracBackend = SPECTRAL, consistency: bool = True) -> np.ndarray:
    terms = check_terms(terms, p, consistency)

    def inner(a):
        out = np.zeros_like(a)
        for g, alpha in terms:
            if g != 0.0:
                out = out + g * combo_array(d, a, alpha, 0.5, -0.5, b)
        return out

    return _conjugate(d, arr, p, inner)


def explicit_multiscale(f: GridFunction, terms: Terms, p, b: FracBackend = SPECTRAL, consistency: bool = True) -> GridFunction:
    """sum_n g_n D^{alpha_n}; an alpha = 1 term is the weighted ordinary derivative."""
    return f.with_values(explicit_multiscale_array(f.domain, f.values, terms, p, b, consistency))


def explicit_kinetic(f: GridFunction, terms: Terms, p, b: FracBackend = SPECTRAL, consistency: bool = True) -> GridFunction:
    once = explicit_multiscale(f, terms, p, b, consistency)
    return explicit_multiscale(once, terms, p, b, consistency)


def bar_kinetic_array(d, arr, terms: Terms, p, b: FracBackend = SPECTRAL) -> np.ndarray:
    terms = tuple((float(g), float(a)) for g, a in terms)
    for _, a in terms:
        if not (0.5 < a < 1.0 or a == 1.0):
            raise OrderOutOfRange(f"bar kinetic exponents must lie in (1/2, 1) or equal 1, got {a}")

    def inner(a):
        out = np.zeros_like(a)
        for g, alpha in terms:
            if g == 0.0:
                continue
            if alpha == 1.0:
                out = out + g * derivative(d, a, 2)
            else:
                out = out + 0.5 * g * symmetric_m2_array(d, a, alpha, b)
        return out

    return _conjugate(d, arr, p, inner)


def bar_kinetic(f: GridFunction, terms: Terms, p, b: FracBackend = SPECTRAL) -> GridFunction:
    """sum_n g_n v**-0.5 (Liouville + Weyl)^{2 alpha_n} / 2 (sqrt(v) .)"""
    return f.with_values(bar_kinetic_array(f.domain, f.values, terms, p, b))


def plateau_differential(f: GridFunction, alpha: float, b: FracBackend = SPECTRAL) -> GridFunction:
    """Fixed-order limit of the multiscale derivative on a plateau of the flow."""
    return f.with_values(combo_array(f.domain, f.values, alpha, 0.5, -0.5, b))


# implicit multiscaling: kernel 1/q(x - x')


def small_scale_constant(alpha: float, ell: float) -> float:
    """c with 1/q(u) ~ c u**-alpha / Gamma(1 - alpha) as u -> 0 (single-term profile)."""
    from scipy.special import gamma

    return alpha * ell ** (alpha - 1.0) * gamma(1.0 - alpha)


def _inverse_q_moment(p: MeasureProfile, upper: float) -> float:
    """int_0^upper du / q(u) via s = u**(1 - a1), which removes the endpoint
    singularity u**-a1 and the u**(1 - a1) cusp of the remaining factor."""
    a1 = p.smallest_alpha
    if a1 >= 1.0:
        raise QuadratureFailure("1/q(u) is not integrable at u = 0 when every exponent is 1")
    e = 1.0 - a1

    def integrand(s):
        if s == 0.0:
            return 1.0 / sum(t.ell ** (1.0 - t.alpha) / t.alpha * _unit(t) for t in _terms_at(p, a1))
        lnu = np.log(s) / e
        # q(u) / u**a1 assembled in log space so tiny u never underflows
        total = np.exp(e * lnu)
        for t in p.active_terms:
            if t.vanishing:
                continue
            mod = _unit(t)
            if t.oscillatory:
                arg = t.omega * (lnu - np.log(t.ell_inf))
                mod = mod + t.amp_cos * np.cos(arg) + t.amp_sin * np.sin(arg)
            total += t.ell ** (1.0 - t.alpha) / t.alpha * np.exp((t.alpha - a1) * lnu) * mod
        return 1.0 / total

    val, _ = integrate.quad(integrand, 0.0, upper**e, limit=200, epsabs=0.0, epsrel=1e-12)
    return val / e


def unit_scale_moment(p: MeasureProfile) -> float:
    """N = int_0^ell du / q(u) for the largest active scale ell; it normalizes
    the implicit operators in the alpha_1 -> 1 limit."""
    return _inverse_q_moment(p, max(t.ell for t in p.active_terms))


def _unit(t) -> float:
    return 1.0 if t.keep_unit_offset else 0.0


def _terms_at(p: MeasureProfile, alpha: float):
    return [t for t in p.active_terms if not t.vanishing and t.alpha == alpha]


@lru_cache(maxsize=32)
def _implicit_rule(p: MeasureProfile, length: float, panels: int, grading: float, points: int) -> quadrature.Rule:
    def kernel(u):
        return 1.0 / eval_q(p, u)

    return quadrature.build_rule(
        length, kernel, kernel, lambda u1: _inverse_q_moment(p, u1), panels, grading, points
    )


def _require_implicit_profile(p: MeasureProfile, allow_oscillatory: bool) -> None:
    if p is None:
        raise ConfigError("implicit operators need a measure profile")
    if p.oscillatory and not allow_oscillatory:
        raise OscillatoryProfileRejected("oscillatory profile rejected for implicit operators")


def _implicit_once(d: Domain, df: np.ndarray, p: MeasureProfile, direction: int, panels, grading, points) -> np.ndarray:
    rule = _implicit_rule(p, d.length, panels, grading, points)
    return quadrature.apply_rule(rule, d, df, direction)


def implicit_array(
    d: Domain,
    arr: np.ndarray,
    p: MeasureProfile,
    side: int = 1,
    panels: int = 128,
    grading: float = 3.0,
    points: int = 8,
    rtol: float | None = 1e-4,
    allow_oscillatory: bool = False,
    noise: float | None = None,
) -> np.ndarray:
    """Left (side=+1) or right (side=-1) derivative with kernel 1/q(x - x').

    ``noise`` is the absolute rounding level of f'; the refinement test
    ignores differences below what that noise can produce.
    """
    _require_implicit_profile(p, allow_oscillatory)
    df = derivative(d, np.asarray(arr, dtype=complex), 1)
    out = _implicit_once(d, df, p, side, panels, grading, points)
    if rtol is not None:
        fine = _implicit_once(d, df, p, side, 2 * panels, grading, points)
        rule = _implicit_rule(p, d.length, 2 * panels, grading, points)
        if noise is None:
            noise = _derivative_noise(d, arr)
        floor = noise * _rule_mass(rule)
        if np.max(np.abs(fine - out)) > rtol * np.max(np.abs(fine)) + floor:
            raise QuadratureFailure(
                f"panel refinement changed the result by more than {rtol:g} (relative)"
            )
        out = fine
    # q is odd, so the right kernel 1/q(x - x') is negative for x' > x
    return out if side > 0 else -out


def _derivative_noise(d: Domain, arr: np.ndarray) -> float:
    """Rounding noise of f' of size eps |f| / h, which no panel count resolves."""
    return 1e2 * np.finfo(float).eps * float(np.max(np.abs(arr))) / d.h


def _rule_mass(rule: quadrature.Rule) -> float:
    return float(np.sum(np.abs(rule.weights)) + abs(rule.center_weight))


def implicit_left(f: GridFunction, p: MeasureProfile, **kw) -> GridFunction:
    return f.with_values(implicit_array(f.domain, f.values, p, 1, **kw))


def implicit_right(f: GridFunction, p: MeasureProfile, **kw) -> GridFunction:
    return f.with_values(implicit_array(f.domain, f.values, p, -1, **kw))


def implicit_kinetic_array(d: Domain, arr: np.ndarray, p: MeasureProfile, **kw) -> np.ndarray:
    def half_difference(a, noise):
        return 0.5 * (
            implicit_array(d, a, p, 1, noise=noise, **kw) - implicit_array(d, a, p, -1, noise=noise, **kw)
        )

    def inner(a):
        # the second pass inherits the rounding noise of the first
        noise = _derivative_noise(d, a)
        mass = _rule_mass(_implicit_rule(p, d.length, 2 * kw.get("panels", 128), kw.get("grading", 3.0), kw.get("points", 8)))
        once = half_difference(a, noise)
        return half_difference(once, max(_derivative_noise(d, once), noise * mass / d.h))

    return _conjugate(d, arr, p, inner)


def implicit_kinetic(f: GridFunction, p: MeasureProfile, **kw) -> GridFunction:
    """v**-0.5 [(left - right)/2]**2 (sqrt(v) .)"""
    return f.with_values(implicit_kinetic_array(f.domain, f.values, p, **kw))
