"""Graded-panel quadrature for one-sided convolutions with a weakly singular
kernel,

    I(x) = int_0^L K(u) g(x - s*u) du,    s = +1 (left) or -1 (right),

where K(u) ~ u**(-beta) as u -> 0 and g is a cubic spline through nodal
samples. Panels are graded towards u = 0 as ``L * (k / panels)**grading``.
On the first panel the singular part of K is integrated exactly against
g(x) and Gauss-Legendre handles the bounded remainder K * (g(x - s*u) - g(x)).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import mpmath
import numpy as np
from scipy.interpolate import CubicSpline

from .grid import Domain


@dataclass(frozen=True)
class Rule:
    nodes: np.ndarray
    weights: np.ndarray
    center_weight: float


def build_rule(
    length: float,
    kernel: Callable[[np.ndarray], np.ndarray],
    singular: Callable[[np.ndarray], np.ndarray],
    singular_moment: float | Callable[[float], float],
    panels: int,
    grading: float,
    points: int,
) -> Rule:
    """``kernel`` is the full K; ``singular`` its part whose integral over the
    first panel is ``singular_moment`` (a number or a function of the panel end)."""
    edges = length * (np.arange(panels + 1) / panels) ** grading
    x, w = np.polynomial.legendre.leggauss(points)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)).ravel()
    base = (0.5 * (hi - lo) * w[None, :]).ravel()
    weights = base * kernel(nodes)
    head = slice(0, points)
    moment = singular_moment(edges[1]) if callable(singular_moment) else singular_moment
    center = moment - float(np.sum(base[head] * singular(nodes[head])))
    return Rule(nodes, weights, center)


@lru_cache(maxsize=32)
def power_rule(
    length: float, beta: float, panels: int, grading: float, points: int, periodic: bool
) -> Rule:
    """Rule for K(u) = u**(-beta), plus all periodic images when ``periodic``.

    The sum over images sum_{m>=1} (u + m L)**(-beta) diverges for beta < 1;
    it is replaced by its Hurwitz-zeta continuation L**(-beta) zeta(beta, 1 + u/L),
    which differs from any partial sum by a u-independent constant and so
    gives the same result on zero-mean periodic integrands.
    """

    def singular(u):
        return u ** (-beta)

    if periodic:
        zeta = np.frompyfunc(lambda a: float(mpmath.zeta(beta, a)), 1, 1)

        def kernel(u):
            return u ** (-beta) + length ** (-beta) * zeta(1.0 + u / length).astype(float)
    else:
        kernel = singular

    return build_rule(
        length,
        kernel,
        singular,
        lambda u1: u1 ** (1.0 - beta) / (1.0 - beta),
        panels,
        grading,
        points,
    )


def nodal_spline(d: Domain, values: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Cubic spline through grid samples (axis 0); periodic or zero-extended."""
    x = d.x
    if d.periodic:
        xs = np.append(x, x[0] + d.length)
        ys = np.concatenate([values, values[:1]], axis=0)
        spline = CubicSpline(xs, ys, axis=0, bc_type="periodic")

        def ev(t):
            return spline(x[0] + np.mod(t - x[0], d.length))

        return ev

    spline = CubicSpline(x, values, axis=0, bc_type="not-a-knot", extrapolate=False)

    def ev(t):
        out = spline(t)
        return np.nan_to_num(out, nan=0.0)

    return ev


def apply_rule(rule: Rule, d: Domain, g: np.ndarray, direction: int = 1) -> np.ndarray:
    """sum_q w_q g(x - direction*u_q) + c * g(x) on every grid node."""
    ev = nodal_spline(d, g)
    x = d.x
    out = rule.center_weight * np.asarray(g, dtype=complex)
    if g.ndim == 1:
        chunk = max(1, 2**21 // max(d.n, 1))
        for start in range(0, len(rule.nodes), chunk):
            u = rule.nodes[start : start + chunk]
            vals = ev(x[:, None] - direction * u[None, :])
            out = out + vals @ rule.weights[start : start + chunk]
        return out
    for uq, wq in zip(rule.nodes, rule.weights):
        out = out + wq * ev(x - direction * uq)
    return out
