"""Property checks for the operator zoo and the suite that runs them.

Every check is a small function returning a non-negative residual; a check
passes when that residual does not exceed its tolerance. Tolerances live in
:data:`DEFAULT_TOLERANCES` and may be overridden per check from the config.
"""

from __future__ import annotations

import fnmatch
import io
import math
import os
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np
from scipy.special import binom

from . import laplacians as lap
from .calculus import derivative
from .errors import ConfigError, MultifracError
from .fractional import (
    SPECTRAL,
    GrunwaldLetnikov,
    SingularQuadrature,
    fractional_power,
    one_sided,
)
from .grid import (
    Domain,
    GridFunction,
    _same_domain,
    adjoint_defect,
    forward_coefficients,
    inverse_coefficients,
    relative_max_error,
    sample,
    to_matrix,
    weighted_inner,
)
from .measure import (
    MeasureProfile,
    MeasureTerm,
    binomial,
    eval_q,
    eval_weight,
    local_scaling_exponent,
)
from .operators import OperatorSpec
from .solver import PotentialSpec, dispersion, solve_linear, solve_nonlinear
from .symbolic import seven_piece_count

# operators


def leibniz_defect(op: OperatorSpec, f: GridFunction, g: GridFunction) -> GridFunction:
    """X = D(fg) - (Df) g - f (Dg)."""
    _same_domain(f, g)
    if not op.first_order:
        raise ConfigError(f"{op.variant} is not a first-order-type operator")
    d = f.domain
    fv, gv = f.values, g.values
    x = op.apply_array(d, fv * gv) - op.apply_array(d, fv) * gv - fv * op.apply_array(d, gv)
    return f.with_values(x, "leibniz defect")


def bilinear_concomitant(op: OperatorSpec, f: GridFunction, h: GridFunction) -> GridFunction:
    """Y = f D^2 h - (D^2 f) h with D^2 applied as D twice."""
    _same_domain(f, h)
    d = f.domain

    def twice(a):
        return op.apply_array(d, op.apply_array(d, a))

    return f.with_values(f.values * twice(h.values) - twice(f.values) * h.values, "concomitant")


def leibniz_series(f_wavenumber: float, g: GridFunction, alpha: float, terms: int, side: int = 1) -> np.ndarray:
    """Truncated sum_{j<=J} C(alpha, j) (d^j f)(D^{alpha-j} g) for f = exp(i kappa x).

    ``side=+1`` gives the Liouville series, ``side=-1`` the Weyl series
    (with d replaced by -d). Negative orders act as the multiplier (+-ik)**(alpha - j).
    """
    d = g.domain
    f = np.exp(1j * f_wavenumber * d.x)
    out = np.zeros(d.n, dtype=complex)
    for j in range(terms + 1):
        dj = (1j * side * f_wavenumber) ** j * f
        out += binom(alpha, j) * dj * fractional_power(d, g.values, alpha - j, side)
    return out


# report types


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    anchor: str
    residual: float
    tolerance: float
    operator: OperatorSpec | None = None
    inputs: tuple[str, ...] = ()
    note: str = ""

    def __post_init__(self) -> None:
        r = float(self.residual)
        if not r >= 0.0 and not math.isnan(r):
            raise ValueError("residuals are non-negative")
        object.__setattr__(self, "residual", r)

    @property
    def passed(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self.tolerance


@dataclass(frozen=True)
class VerificationReport:
    checks: tuple[PropertyCheck, ...]
    environment: tuple[tuple[str, str], ...] = ()

    @property
    def n_passed(self) -> int:
        return sum(c.passed for c in self.checks)

    @property
    def all_passed(self) -> bool:
        return self.n_passed == len(self.checks)

    @property
    def summary(self) -> str:
        return f"{self.n_passed}/{len(self.checks)} checks passed"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("check_name,paper_anchor,residual,tolerance,passed\n")
        for c in self.checks:
            buf.write(f"{c.name},\"{c.anchor}\",{c.residual:.6e},{c.tolerance:.6e},{str(c.passed).lower()}\n")
        return buf.getvalue()

    def to_text(self) -> str:
        width = max([len(c.name) for c in self.checks] + [10])
        lines = [f"{'check':<{width}}  {'residual':>13}  {'tolerance':>13}  result  anchor"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{c.name:<{width}}  {c.residual:13.6e}  {c.tolerance:13.6e}  {status:<6}  {c.anchor}")
            if c.note:
                lines.append(f"{'':<{width}}  note: {c.note}")
        lines.append("")
        for key, value in self.environment:
            lines.append(f"{key}: {value}")
        lines.append(self.summary)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    n: int = 256
    adjoint_n: int = 512
    gl_truncation: int = GrunwaldLetnikov.truncation
    quadrature: SingularQuadrature = field(default_factory=SingularQuadrature)
    checks: tuple[str, ...] = ("*",)
    tolerances: tuple[tuple[str, float], ...] = ()
    threads: int | None = None

    def __post_init__(self) -> None:
        if self.n < 64 or self.n & (self.n - 1):
            raise ConfigError("suite.n: needs a power of two >= 64")
        if self.adjoint_n < 64 or self.adjoint_n & (self.adjoint_n - 1) or self.adjoint_n > 4096:
            raise ConfigError("suite.adjoint_n: needs a power of two in [64, 4096]")
        if self.gl_truncation < 1:
            raise ConfigError("suite.gl_truncation: must be positive")
        unknown = [k for k, _ in self.tolerances if k not in DEFAULT_TOLERANCES]
        if unknown:
            raise ConfigError(f"suite.tolerances.{unknown[0]}: unknown check name")

    def tolerance(self, name: str) -> float:
        return dict(self.tolerances).get(name, DEFAULT_TOLERANCES[name])

    @property
    def gl(self) -> GrunwaldLetnikov:
        return GrunwaldLetnikov(self.gl_truncation)

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, zlib.crc32(name.encode())])


# test data


BIN = binomial(0.5, 1.0)
OSC = binomial(0.5, 1.0, amp_cos=0.05, omega=3.0)
OFF_ORIGIN = (1.0, 1.0 + 2.0 * np.pi)


def band_limited(d: Domain, rng: np.random.Generator, real: bool = False) -> GridFunction:
    """Seeded Fourier sum with frequencies up to n/8."""
    kmax = d.n // 8
    m = np.arange(-kmax, kmax + 1)
    coef = (rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size)) / np.sqrt(m.size)
    if real:
        coef = 0.5 * (coef + np.conj(coef[::-1]))
    k = 2.0 * np.pi * m / d.length
    vals = np.exp(1j * np.outer(d.x - d.a, k)) @ coef
    return GridFunction(d, vals.real if real else vals, "band-limited")


def _off_origin(n: int) -> Domain:
    return Domain(*OFF_ORIGIN, n)


def _rel(a, b) -> float:
    return relative_max_error(a, b)


# checks: measure


def _measure_oddness(cfg: SuiteConfig):
    x = cfg.rng("measure_oddness").uniform(-50.0, 50.0, 1000)
    worst = 0.0
    for p in (BIN, OSC):
        q = eval_q(p, x)
        worst = max(worst, float(np.max(np.abs(eval_q(p, -x) + q)) / np.max(np.abs(q))))
    return worst


def _measure_weight_fd(cfg: SuiteConfig):
    x = np.geomspace(0.05, 50.0, 200)
    h = 1e-6
    worst = 0.0
    for p in (BIN, OSC):
        fd = (eval_q(p, x + h) - eval_q(p, x - h)) / (2 * h)
        worst = max(worst, _rel(fd, eval_weight(p, x)))
    return worst


def _measure_monotone_flow(cfg: SuiteConfig):
    x = np.geomspace(1e-6, 1e6, 600)
    worst = 0.0
    for p in (BIN, binomial(0.3, 2.0), MeasureProfile((MeasureTerm(0.7, 10.0), MeasureTerm(0.3, 0.1)))):
        a = local_scaling_exponent(p, x)
        worst = max(worst, float(np.max(np.maximum(-np.diff(a), 0.0))))
        worst = max(worst, max(p.smallest_alpha - a.min(), 0.0), max(a.max() - 1.0, 0.0))
    return worst


def _measure_binomial_bitwise(cfg: SuiteConfig):
    x = cfg.rng("measure_binomial_bitwise").uniform(-20.0, 20.0, 500)
    t = MeasureTerm(0.4, 1.5, amp_cos=0.1, amp_sin=0.05, omega=2.0)
    a = MeasureProfile((t,), mode="binomial")
    b = MeasureProfile((t,), mode="full")
    return float(np.max(np.abs(eval_q(a, x) - eval_q(b, x))) + np.max(np.abs(eval_weight(a, x) - eval_weight(b, x))))


# checks: grid


def _grid_roundtrip(cfg: SuiteConfig):
    d = Domain(-3.0, 5.0, cfg.n)
    rng = cfg.rng("grid_roundtrip")
    f = GridFunction(d, rng.standard_normal(d.n) + 1j * rng.standard_normal(d.n))
    return _rel(inverse_coefficients(forward_coefficients(f), d).values, f.values)


def _grid_inner_conjugate(cfg: SuiteConfig):
    d = _off_origin(cfg.n)
    rng = cfg.rng("grid_inner_conjugate")
    f, g = band_limited(d, rng), band_limited(d, rng)
    a, b = weighted_inner(f, g, BIN), weighted_inner(g, f, BIN)
    return abs(a - np.conj(b)) / abs(a)


def _grid_to_matrix(cfg: SuiteConfig):
    d = _off_origin(cfg.n)
    op = OperatorSpec("KAlpha", alpha=0.5, profile=BIN)
    m = to_matrix(op, d).entries
    rng = cfg.rng("grid_to_matrix")
    vecs = rng.standard_normal((d.n, 100)) + 1j * rng.standard_normal((d.n, 100))
    return _rel(m @ vecs, op.apply_array(d, vecs))


# checks: fractional operators


def _backend_checks(backend_name: str):
    def linearity(cfg: SuiteConfig):
        b = {"spectral": SPECTRAL, "gl": cfg.gl, "quadrature": cfg.quadrature}[backend_name]
        d = Domain(-np.pi, np.pi, cfg.n)
        rng = cfg.rng(f"frac_linearity_{backend_name}")
        f, g = band_limited(d, rng).values, band_limited(d, rng).values
        a, c = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        worst = 0.0
        for side in (1, -1):
            lhs = one_sided(d, a * f + c * g, 0.5, side, b)
            rhs = a * one_sided(d, f, 0.5, side, b) + c * one_sided(d, g, 0.5, side, b)
            worst = max(worst, _rel(lhs, rhs))
        return worst

    return linearity


def _frac_kernel_spectral(cfg: SuiteConfig):
    d = Domain(-np.pi, np.pi, cfg.n)
    one = np.ones(d.n, dtype=complex)
    return max(float(np.max(np.abs(one_sided(d, one, a, s)))) for a in (0.3, 0.5, 0.9) for s in (1, -1))


def _frac_kernel_quadrature(cfg: SuiteConfig):
    d = Domain(-np.pi, np.pi, cfg.n)
    one = np.ones(d.n, dtype=complex)
    return max(float(np.max(np.abs(one_sided(d, one, 0.5, s, cfg.quadrature)))) for s in (1, -1))


GL_KERNEL_ALPHA = 0.5
GL_REFERENCE_TRUNCATION = GrunwaldLetnikov.truncation


def gl_kernel_fit(d: Domain, alpha: float = GL_KERNEL_ALPHA) -> float:
    """Constant c in |GL(1)| ~ c J**-alpha, fitted over J = 2**8 .. 2**12."""
    one = np.ones(d.n, dtype=complex)
    js = 2 ** np.arange(8, 13)
    r = [float(np.max(np.abs(one_sided(d, one, alpha, 1, GrunwaldLetnikov(int(j)))))) for j in js]
    return float(np.exp(np.mean(np.log(r) + alpha * np.log(js))))


def _frac_kernel_gl(cfg: SuiteConfig):
    d = Domain(-np.pi, np.pi, cfg.n)
    one = np.ones(d.n, dtype=complex)
    res = max(float(np.max(np.abs(one_sided(d, one, GL_KERNEL_ALPHA, s, cfg.gl)))) for s in (1, -1))
    c = gl_kernel_fit(d)
    tol = 2.0 * c * GL_REFERENCE_TRUNCATION ** (-GL_KERNEL_ALPHA)
    return res, tol, f"fitted c = {c:.6e}, J = {cfg.gl_truncation}"


def _frac_semigroup(side: int):
    def check(cfg: SuiteConfig):
        d = Domain(-np.pi, np.pi, cfg.n)
        worst = 0.0
        for k in (1, 2, 4):
            f = np.exp(1j * k * d.x)
            for a, b in ((0.3, 0.5), (0.6, 0.7), (0.9, 0.9)):
                lhs = one_sided(d, one_sided(d, f, a, side), b, side)
                worst = max(worst, _rel(lhs, one_sided(d, f, a + b, side)))
        return worst

    return check


def _frac_duality(cfg: SuiteConfig):
    d = Domain(-20.0, 20.0, 2 * cfg.n)
    worst = 0.0
    for c1, s1, c2, s2 in ((-1.0, 1.5, 2.0, 1.0), (0.5, 0.8, -0.5, 2.0), (3.0, 1.2, 3.5, 1.7)):
        f = sample(f"gaussian:center={c1},sigma={s1}", d)
        g = sample(f"gaussian:center={c2},sigma={s2}", d)
        for a in (0.3, 0.5, 0.9):
            lhs = weighted_inner(f, f.with_values(one_sided(d, g.values, a, 1)))
            rhs = weighted_inner(f.with_values(one_sided(d, f.values, a, -1)), g)
            worst = max(worst, abs(lhs - rhs) / abs(lhs))
    return worst


def _frac_antisymmetry(cfg: SuiteConfig):
    d = Domain(-np.pi, np.pi, cfg.n)
    worst = 0.0
    for a in (0.3, 0.5, 0.9):
        m = to_matrix(OperatorSpec("PlateauDiff", alpha=a), d)
        worst = max(worst, float(np.max(np.abs(m.entries + m.H)) / np.max(np.abs(m.entries))))
    return worst


LEIBNIZ_CASE = dict(kappa=0.25, k=1.0, alpha=0.5)
LEIBNIZ_FLOOR = 1e-13


def leibniz_series_residuals(n: int, terms: Iterable[int], side: int = 1) -> list[float]:
    d = Domain(-4.0 * np.pi, 4.0 * np.pi, n)
    kappa, k, a = LEIBNIZ_CASE["kappa"], LEIBNIZ_CASE["k"], LEIBNIZ_CASE["alpha"]
    g = sample(f"plane_wave:k={k}", d)
    exact = one_sided(d, np.exp(1j * kappa * d.x) * g.values, a, side)
    return [_rel(leibniz_series(kappa, g, a, j, side), exact) for j in terms]


def _frac_leibniz_series(cfg: SuiteConfig):
    return max(leibniz_series_residuals(cfg.n, [40], s)[0] for s in (1, -1))


def _frac_leibniz_monotone(cfg: SuiteConfig):
    """Largest increase of the series residual for J >= 2 above the rounding floor."""
    r = np.array(leibniz_series_residuals(cfg.n, range(2, 41)))
    live = r[:-1] > LEIBNIZ_FLOOR
    return float(np.max(np.maximum(np.diff(r)[live], 0.0), initial=0.0))


def _frac_gl_order(cfg: SuiteConfig):
    order, _ = gl_convergence(cfg.gl)
    return abs(order - 1.0), 0.3, f"order = {order:.4f}"


def gl_convergence(b: GrunwaldLetnikov, sizes=(256, 512, 1024), alpha: float = 0.5):
    """Least-squares order of the GL error against the spectral result on a Gaussian."""
    errs = []
    for n in sizes:
        d = Domain(-20.0, 20.0, n)
        f = sample("gaussian:sigma=1", d).values
        errs.append(float(np.max(np.abs(one_sided(d, f, alpha, 1, b) - one_sided(d, f, alpha, 1)))))
    slope = np.polyfit(np.log(sizes), np.log(errs), 1)[0]
    return float(-slope), errs


def _frac_quadrature_vs_spectral(cfg: SuiteConfig):
    d = Domain(-20.0, 20.0, cfg.n)
    f = sample("gaussian:sigma=1", d).values
    worst = 0.0
    for a in (0.3, 0.5, 0.9, 1.5):
        for s in (1, -1):
            diff = one_sided(d, f, a, s, cfg.quadrature) - one_sided(d, f, a, s)
            worst = max(worst, float(np.max(np.abs(diff))))
    return worst


# checks: q-derivative


def _qderiv_trivial(cfg: SuiteConfig):
    d = Domain(-np.pi, np.pi, cfg.n)
    f = band_limited(d, cfg.rng("qderiv_trivial"))
    from .measure import trivial_profile

    return _rel(lap.q_derivative(f, trivial_profile()).values, derivative(d, f.values, 1))


def _qderiv_leibniz(cfg: SuiteConfig):
    d = _off_origin(cfg.n)
    rng = cfg.rng("qderiv_leibniz")
    f, g = band_limited(d, rng), band_limited(d, rng)
    return float(np.max(np.abs(leibniz_defect(OperatorSpec("QDeriv", profile=BIN), f, g).values)))


def _qderiv_ibp(cfg: SuiteConfig):
    d = _off_origin(cfg.n)
    rng = cfg.rng("qderiv_ibp")
    worst = 0.0
    for p in (BIN, OSC):
        f, g = band_limited(d, rng), band_limited(d, rng)
        worst = max(worst, abs(weighted_inner(f, lap.q_derivative(g, p), p) + weighted_inner(lap.q_derivative(f, p), g, p)))
    return worst


COMPOSITION_DOMAIN = (2.0, 42.0)


def _qderiv_composition(cfg: SuiteConfig):
    d = Domain(*COMPOSITION_DOMAIN, 2 * cfg.n)
    worst = 0.0
    for p in (BIN, OSC):
        for spec in ("gaussian:center=22,sigma=2.5", "windowed_wave:k=1.3,center=22,sigma=2.5"):
            f = sample(spec, d)
            worst = max(worst, _rel(lap.q_laplacian(f, p).values, lap.q_laplacian_composition(f, p).values))
    return worst


def _qderiv_of_q(cfg: SuiteConfig):
    d = Domain(0.5, 2.5, 1024, periodic=False)
    bulk = slice(d.n // 10, d.n - d.n // 10)
    worst = 0.0
    for p in (BIN, OSC):
        f = GridFunction(d, eval_q(p, d.x))
        worst = max(worst, float(np.max(np.abs(lap.q_derivative(f, p).values[bulk] - 1.0))))
    return worst


# checks: K_alpha and explicit multiscaling


def _kalpha_selfadjoint(profile: MeasureProfile | None):
    def check(cfg: SuiteConfig):
        d = _off_origin(cfg.adjoint_n)
        worst = 0.0
        for a in (0.3, 0.5, 0.8):
            m = to_matrix(OperatorSpec("KAlpha", alpha=a, profile=profile), d)
            worst = max(worst, adjoint_defect(m, profile))
        return worst

    return check


TWO_TERMS = ((1.0, 1.0), (0.5, 0.5))


def _explicit_kinetic_selfadjoint(cfg: SuiteConfig):
    d = _off_origin(cfg.n)
    m = to_matrix(OperatorSpec("ExplicitKinetic", terms=TWO_TERMS, profile=BIN), d)
    return adjoint_defect(m, BIN)


def _explicit_multiplier(cfg: SuiteConfig):
    d = Domain(-np.pi, np.pi, cfg.n)
    g, a = 0.7, 0.5
    op = OperatorSpec("ExplicitD", terms=((1.0, 1.0), (g, a)))
    worst = 0.0
    for k in (-4, -1, 1, 2, 4):
        f = np.exp(1j * k * d.x)
        mu = 1j * k + g * 1j * np.sin(np.pi * a / 2) * np.sign(k) * abs(k) ** a
        worst = max(worst, _rel(op.apply_array(d, f), mu * f))
    return worst


def _explicit_seven_pieces(cfg: SuiteConfig):
    return abs(seven_piece_count() - 7)


def _bar_kinetic_multiplier(cfg: SuiteConfig):
    d = Domain(-np.pi, np.pi, cfg.n)
    f = np.exp(1j * d.x)
    out = OperatorSpec("BarKinetic", terms=((1.0, 0.75),)).apply_array(d, f)
    return _rel(out, np.cos(0.75 * np.pi) * f)


NONQUADRATIC_GAP = 0.1


def nonquadratic_gap(alpha: float = 0.75, k: float = 1.0) -> float:
    bar = dispersion(OperatorSpec("BarKinetic", terms=((1.0, alpha),)), k)
    sq = dispersion(OperatorSpec("KAlpha", alpha=alpha), k)
    return abs(bar - sq)


def _explicit_bar_nonquadratic(cfg: SuiteConfig):
    gap = nonquadratic_gap()
    return max(NONQUADRATIC_GAP - gap, 0.0), 0.0, f"gap = {gap:.6f}"


def dispersion_square_residual(ks=None, terms=((1.0, 1.0), (0.7, 0.5))) -> float:
    ks = np.linspace(-5.0, 5.0, 20) if ks is None else np.asarray(ks)
    mu_k = dispersion(OperatorSpec("ExplicitKinetic", terms=terms), ks)
    mu_d = dispersion(OperatorSpec("ExplicitD", terms=terms), ks)
    return _rel(mu_k, mu_d**2)


def _plateau_limit(cfg: SuiteConfig):
    d = Domain(-np.pi, np.pi, cfg.n)
    f = band_limited(d, cfg.rng("plateau_limit")).values
    r1 = _rel(OperatorSpec("PlateauDiff", alpha=1.0).apply_array(d, f), derivative(d, f, 1))
    e = np.exp(1j * d.x)
    r2 = _rel(OperatorSpec("PlateauDiff", alpha=0.5).apply_array(d, e), 1j * np.sin(np.pi / 4) * e)
    return max(r1, r2)


def _laplacian_constants(cfg: SuiteConfig):
    """Operators whose kernel contains constants, on flat and non-flat weights."""
    d = _off_origin(cfg.n)
    one = np.ones(d.n, dtype=complex)
    ops = [
        OperatorSpec("QDeriv", profile=BIN),
        OperatorSpec("QLaplacian", profile=OSC),
        OperatorSpec("WeightedFrac", alpha=0.5),
        OperatorSpec("KAlpha", alpha=0.5),
        OperatorSpec("ExplicitD", terms=TWO_TERMS),
        OperatorSpec("ExplicitKinetic", terms=TWO_TERMS),
        OperatorSpec("BarKinetic", terms=((1.0, 1.0), (0.3, 0.75))),
        OperatorSpec("PlateauDiff", alpha=0.5),
    ]
    return max(float(np.max(np.abs(op.apply_array(d, one)))) for op in ops)


# checks: implicit multiscaling


def _implicit_constant(cfg: SuiteConfig):
    d = Domain(-8.0, 8.0, cfg.n, periodic=False)
    one = np.ones(d.n, dtype=complex)
    worst = 0.0
    for side in (1, -1):
        worst = max(worst, float(np.max(np.abs(lap.implicit_array(d, one, BIN, side)))))
    # the conjugated kinetic operator annihilates v**-0.5, a constant when v is flat
    dk = Domain(2.0, 10.0, cfg.n, periodic=False)
    kernel = 1.0 / np.sqrt(eval_weight(BIN, dk.x))
    return max(worst, float(np.max(np.abs(lap.implicit_kinetic_array(dk, kernel, BIN)))))


def alpha_one_errors(alphas=(0.9, 0.99), sigma: float = 1.0, n: int = 1024) -> dict[float, float]:
    """Relative error of left/right implicit derivatives, normalized by the
    unit-scale moment of 1/q, against +-d on a Gaussian."""
    d = Domain(-8.0 * sigma, 8.0 * sigma, n, periodic=False)
    f = sample(f"gaussian:sigma={sigma}", d).values
    df = derivative(d, f, 1)
    out = {}
    for a in alphas:
        p = binomial(a, 1.0)
        norm = lap.unit_scale_moment(p)
        err = 0.0
        for side in (1, -1):
            out_side = lap.implicit_array(d, f, p, side) / norm
            err = max(err, _rel(out_side, side * df))
        out[a] = err
    return out


def _implicit_alpha_to_one(cfg: SuiteConfig):
    e = alpha_one_errors()
    slope = math.log10(e[0.9] / e[0.99])
    return abs(slope - 1.0), 0.25, f"errors {e[0.9]:.4e} at 0.9, {e[0.99]:.4e} at 0.99"


def small_scale_error(alpha: float, sigma: float = 1e-3, n: int = 1024, quad: SingularQuadrature | None = None) -> float:
    """implicit_left against alpha ell**(alpha-1) Gamma(1-alpha) times Liouville."""
    p = binomial(alpha, 1.0)
    d = Domain(-40.0 * sigma, 40.0 * sigma, n, periodic=False)
    f = sample(f"gaussian:sigma={sigma}", d).values
    left = lap.implicit_array(d, f, p, 1)
    ref = lap.small_scale_constant(alpha, 1.0) * one_sided(d, f, alpha, 1, quad or SingularQuadrature())
    return _rel(left, ref)


def _implicit_small_scale(cfg: SuiteConfig):
    return small_scale_error(0.3, quad=cfg.quadrature)


def kinetic_small_scale_error(alpha: float, sigma: float = 1e-3, n: int = 1024, quad: SingularQuadrature | None = None) -> float:
    """implicit_kinetic against c**2 K_alpha on a Gaussian centred at 50 sigma."""
    p = binomial(alpha, 1.0)
    c0 = 50.0 * sigma
    d = Domain(c0 - 40.0 * sigma, c0 + 40.0 * sigma, n, periodic=False)
    f = sample(f"gaussian:center={c0},sigma={sigma}", d).values
    kin = lap.implicit_kinetic_array(d, f, p)
    ka = OperatorSpec("KAlpha", alpha=alpha, profile=p, backend=quad or SingularQuadrature()).apply_array(d, f)
    return _rel(kin, lap.small_scale_constant(alpha, 1.0) ** 2 * ka)


def _implicit_kinetic_small_scale(cfg: SuiteConfig):
    return kinetic_small_scale_error(0.3, quad=cfg.quadrature)


def large_scale_fit(sigma: float, which: str = "left", alpha: float = 0.5, n: int = 1024) -> tuple[float, float]:
    """Best-fit constant and bulk relative deviation of an implicit operator
    from the ordinary derivative (``left``, ``anti``) or f'' (``kinetic``).

    The Gaussian sits at 20 sigma so that v is close to 1 across its support.
    """
    p = binomial(alpha, 1.0)
    c0 = 20.0 * sigma
    d = Domain(c0 - 8.0 * sigma, c0 + 8.0 * sigma, n, periodic=False)
    f = sample(f"gaussian:center={c0},sigma={sigma}", d).values
    if which == "kinetic":
        out = lap.implicit_kinetic_array(d, f, p)
        ref = derivative(d, f, 2)
    else:
        out = lap.implicit_array(d, f, p, 1)
        if which == "anti":
            out = 0.5 * (out - lap.implicit_array(d, f, p, -1))
        ref = derivative(d, f, 1)
    bulk = np.abs(d.x - c0) <= 2.0 * sigma
    lam = float(np.vdot(ref[bulk], out[bulk]).real / np.vdot(ref[bulk], ref[bulk]).real)
    dev = float(np.max(np.abs(out - lam * ref)[bulk]) / np.max(np.abs(lam * ref)[bulk]))
    return lam, dev


def _implicit_large_scale_trend(cfg: SuiteConfig):
    _, r2 = large_scale_fit(1e2)
    _, r3 = large_scale_fit(1e3)
    return r3 / r2, 1.0, f"bulk deviation {r2:.4f} at 100 ell, {r3:.4f} at 1000 ell"


# checks: Leibniz defect and concomitant


def _leibniz_ordinary(cfg: SuiteConfig):
    d = Domain(-np.pi, np.pi, cfg.n)
    rng = cfg.rng("leibniz_ordinary")
    f, g = band_limited(d, rng), band_limited(d, rng)
    x = leibniz_defect(OperatorSpec("Deriv"), f, g).values
    return float(np.max(np.abs(x)) / np.max(np.abs(derivative(d, f.values * g.values, 1))))


def _leibniz_dtilde_series(cfg: SuiteConfig):
    d = Domain(-4.0 * np.pi, 4.0 * np.pi, cfg.n)
    kappa, k, a = LEIBNIZ_CASE["kappa"], LEIBNIZ_CASE["k"], LEIBNIZ_CASE["alpha"]
    f, g = sample(f"plane_wave:k={kappa}", d), sample(f"plane_wave:k={k}", d)
    x = leibniz_defect(OperatorSpec("PlateauDiff", alpha=a), f, g).values
    fv, gv = f.values, g.values
    pieces = []
    for side in (1, -1):
        series = leibniz_series(kappa, g, a, 40, side)
        pieces.append(series - one_sided(d, fv, a, side) * gv - fv * one_sided(d, gv, a, side))
    return _rel(0.5 * (pieces[0] - pieces[1]), x)


def _leibniz_constant(cfg: SuiteConfig):
    d = _off_origin(cfg.n)
    f = band_limited(d, cfg.rng("leibniz_constant"))
    one = f.with_values(np.ones(d.n))
    worst = 0.0
    for op in (
        OperatorSpec("QDeriv", profile=BIN),
        OperatorSpec("Deriv"),
        OperatorSpec("PlateauDiff", alpha=0.5),
        OperatorSpec("Combo", alpha=0.4, c=0.3, cbar=0.9),
        OperatorSpec("ExplicitD", terms=TWO_TERMS),
    ):
        scale = float(np.max(np.abs(op.apply_array(d, f.values))))
        for a, b in ((f, one), (one, f)):
            worst = max(worst, float(np.max(np.abs(leibniz_defect(op, a, b).values))) / scale)
    return worst


def _concomitant_kalpha(cfg: SuiteConfig):
    d = _off_origin(cfg.n)
    rng = cfg.rng("concomitant_kalpha")
    worst = 0.0
    for p in (BIN, OSC):
        f, h = band_limited(d, rng), band_limited(d, rng)
        y = bilinear_concomitant(OperatorSpec("WeightedFrac", alpha=0.5, profile=p), f, h)
        worst = max(worst, abs(weighted_inner(y.with_values(np.ones(d.n)), y, p)))
    return worst


def _concomitant_self(cfg: SuiteConfig):
    d = _off_origin(cfg.n)
    f = band_limited(d, cfg.rng("concomitant_self"))
    op = OperatorSpec("WeightedFrac", alpha=0.5, profile=BIN)
    y = bilinear_concomitant(op, f, f)
    scale = np.max(np.abs(f.values * op.apply_array(d, op.apply_array(d, f.values))))
    return float(np.max(np.abs(y.values)) / scale)


def _concomitant_green(cfg: SuiteConfig):
    d = Domain(-np.pi, np.pi, cfg.n)
    rng = cfg.rng("concomitant_green")
    f, h = band_limited(d, rng), band_limited(d, rng)
    y = bilinear_concomitant(OperatorSpec("Deriv"), f, h)
    return abs(weighted_inner(f.with_values(np.ones(d.n)), y))


# checks: field solver


KINK = dict(a=-20.0, b=20.0, n=512, mass2=-1.0, quartic=1.0, guess_slope=0.9, tol=1e-10)


def kink_problem(n: int | None = None):
    """phi'' + phi - phi**3 = 0 on a wide non-periodic interval, tanh guess."""
    d = Domain(KINK["a"], KINK["b"], n or KINK["n"], periodic=False)
    op = OperatorSpec("Deriv", order=2)
    pot = PotentialSpec(KINK["mass2"], KINK["quartic"])
    guess = GridFunction(d, np.tanh(KINK["guess_slope"] * d.x), "guess")
    return op, pot, guess


def _solver_newton_kink(cfg: SuiteConfig):
    op, pot, guess = kink_problem()
    r = solve_nonlinear(op, pot, guess, tol=KINK["tol"], max_iter=50)
    res = r.residual_norm if r.iterations <= 8 and r.converged else math.inf
    return res, 1e-9, f"{r.iterations} iterations"


def newton_quadratic_ratio(history, floor: float = 1e-10) -> float:
    """max r_{i+1} / r_i**2 over steps whose result is above the rounding floor."""
    h = list(history)
    ratios = [b / a**2 for a, b in zip(h, h[1:]) if b > floor and a > 0]
    return max(ratios, default=0.0)


def _solver_newton_quadratic(cfg: SuiteConfig):
    op, pot, guess = kink_problem()
    r = solve_nonlinear(op, pot, guess, tol=KINK["tol"])
    return newton_quadratic_ratio(r.history)


def _linear_case(n: int, rng: np.random.Generator):
    d = Domain(-np.pi, np.pi, n)
    src = band_limited(d, rng, real=True)
    op = OperatorSpec("ExplicitKinetic", terms=((1.0, 1.0), (0.7, 0.5)))
    return d, op, PotentialSpec(1.0, 0.0, src)


def _solver_linear_residual(cfg: SuiteConfig):
    d, op, pot = _linear_case(cfg.n, cfg.rng("solver_linear_residual"))
    worst = solve_linear(op, pot, path="spectral").residual_norm
    j = sample("plane_wave:k=1", d)
    r = solve_linear(OperatorSpec("Deriv", order=2), PotentialSpec(1.0, 0.0, j), path="spectral")
    return max(worst, r.residual_norm, _rel(r.phi.values, 0.5 * j.values))


def _solver_dual_path(cfg: SuiteConfig):
    d, op, pot = _linear_case(cfg.n, cfg.rng("solver_dual_path"))
    a = solve_linear(op, pot, path="spectral").phi.values
    b = solve_linear(op, pot, path="dense").phi.values
    return _rel(a, b)


def _solver_linear_newton(cfg: SuiteConfig):
    d, op, pot = _linear_case(cfg.n, cfg.rng("solver_linear_newton"))
    lin = solve_linear(op, pot, path="spectral")
    r = solve_nonlinear(op, pot, GridFunction(d, np.zeros(d.n)), tol=1e-9, max_iter=1)
    return _rel(r.phi.values, lin.phi.values)


def _solver_perturbative(cfg: SuiteConfig):
    lam = 1e-3
    d = Domain(-np.pi, np.pi, cfg.n)
    op = OperatorSpec("ExplicitKinetic", terms=((1.0, 1.0), (0.7, 0.5)))
    src = sample("plane_wave:k=2", d) * 0.5
    lin = solve_linear(op, PotentialSpec(1.0, 0.0, src), path="spectral")
    nl = solve_nonlinear(op, PotentialSpec(1.0, lam, src), GridFunction(d, np.zeros(d.n)), tol=1e-12)
    return _rel(nl.phi.values, lin.phi.values), 10.0 * lam, f"{nl.iterations} iterations"


def _solver_dispersion_square(cfg: SuiteConfig):
    return dispersion_square_residual()


# catalog

CheckFn = Callable[[SuiteConfig], "float | tuple"]


@dataclass(frozen=True)
class CheckDef:
    name: str
    anchor: str
    fn: CheckFn
    inputs: tuple[str, ...] = ()


CATALOG: tuple[CheckDef, ...] = (
    CheckDef("measure_oddness", "measure profile: geometric coordinate is odd", _measure_oddness, ("1000 random x",)),
    CheckDef("measure_weight_fd", "measure profile: weight is the derivative of the coordinate", _measure_weight_fd),
    CheckDef("measure_monotone_flow", "measure profile: local exponent flows monotonically from alpha to 1", _measure_monotone_flow),
    CheckDef("measure_binomial_bitwise", "measure profile: binomial mode equals the single-term full mode", _measure_binomial_bitwise),
    CheckDef("grid_roundtrip", "grid: Fourier coefficient round trip", _grid_roundtrip),
    CheckDef("grid_inner_conjugate", "grid: measure pairing is conjugate symmetric", _grid_inner_conjugate),
    CheckDef("grid_to_matrix", "grid: dense matrix reproduces operator application", _grid_to_matrix),
    CheckDef("frac_linearity_spectral", "fractional derivatives: linearity", _backend_checks("spectral")),
    CheckDef("frac_linearity_gl", "fractional derivatives: linearity", _backend_checks("gl")),
    CheckDef("frac_linearity_quadrature", "fractional derivatives: linearity", _backend_checks("quadrature")),
    CheckDef("frac_kernel_spectral", "fractional derivatives: constants lie in the kernel", _frac_kernel_spectral),
    CheckDef("frac_kernel_gl", "fractional derivatives: constants lie in the kernel (truncated sum)", _frac_kernel_gl),
    CheckDef("frac_kernel_quadrature", "fractional derivatives: constants lie in the kernel", _frac_kernel_quadrature),
    CheckDef("frac_semigroup_liouville", "fractional derivatives: left-sided derivatives commute and compose", _frac_semigroup(1)),
    CheckDef("frac_semigroup_weyl", "fractional derivatives: right-sided derivatives commute and compose", _frac_semigroup(-1)),
    CheckDef("frac_duality", "fractional derivatives: integration by parts swaps left and right", _frac_duality),
    CheckDef("frac_antisymmetry", "fractional derivatives: antisymmetric combination is anti-self-adjoint", _frac_antisymmetry),
    CheckDef("frac_leibniz_series", "fractional derivatives: binomial Leibniz series", _frac_leibniz_series, ("kappa=0.25", "k=1", "alpha=0.5")),
    CheckDef("frac_leibniz_monotone", "fractional derivatives: Leibniz series residual decreases with J", _frac_leibniz_monotone),
    CheckDef("frac_gl_order", "fractional derivatives: first-order accuracy of the shifted-sample sum", _frac_gl_order),
    CheckDef("frac_quadrature_vs_spectral", "fractional derivatives: singular-kernel quadrature matches the symbol", _frac_quadrature_vs_spectral),
    CheckDef("qderiv_trivial", "q-derivative: flat weight gives the ordinary derivative", _qderiv_trivial),
    CheckDef("qderiv_leibniz", "q-derivative: exact product rule", _qderiv_leibniz),
    CheckDef("qderiv_ibp", "q-derivative: integration by parts under dq", _qderiv_ibp),
    CheckDef("qderiv_composition", "q-derivative: composition law for the second q-derivative", _qderiv_composition),
    CheckDef("qderiv_of_q", "q-derivative: the coordinate q has unit q-derivative", _qderiv_of_q),
    CheckDef("kalpha_selfadjoint_flat", "weighted kinetic operator: self-adjoint under dq", _kalpha_selfadjoint(None)),
    CheckDef("kalpha_selfadjoint_binomial", "weighted kinetic operator: self-adjoint under dq", _kalpha_selfadjoint(BIN)),
    CheckDef("kalpha_selfadjoint_oscillatory", "weighted kinetic operator: self-adjoint under dq", _kalpha_selfadjoint(OSC)),
    CheckDef("explicit_kinetic_selfadjoint", "explicit multiscaling: squared operator is self-adjoint under dq", _explicit_kinetic_selfadjoint),
    CheckDef("explicit_multiplier", "explicit multiscaling: sum of weighted derivatives", _explicit_multiplier),
    CheckDef("explicit_seven_pieces", "explicit multiscaling: two-term square has seven pieces", _explicit_seven_pieces),
    CheckDef("explicit_bar_multiplier", "explicit multiscaling: symmetric second-order kernel operator", _bar_kinetic_multiplier),
    CheckDef("explicit_bar_nonquadratic", "explicit multiscaling: the symmetric kernel operator is not a square", _explicit_bar_nonquadratic),
    CheckDef("plateau_limit", "plateau: multiscale differential reduces to the fixed-order derivative", _plateau_limit),
    CheckDef("laplacian_constants", "multiscale operators annihilate constants", _laplacian_constants),
    CheckDef("implicit_constant", "implicit multiscaling: constants lie in the kernel", _implicit_constant),
    CheckDef("implicit_alpha_to_one", "implicit multiscaling: ordinary derivative as alpha_1 -> 1", _implicit_alpha_to_one),
    CheckDef("implicit_small_scale", "implicit multiscaling: Liouville limit at small scales", _implicit_small_scale),
    CheckDef("implicit_kinetic_small_scale", "implicit multiscaling: kinetic operator at small scales", _implicit_kinetic_small_scale),
    CheckDef("implicit_large_scale_trend", "implicit multiscaling: approach to the ordinary derivative at large scales", _implicit_large_scale_trend),
    CheckDef("leibniz_qderiv", "Leibniz defect: vanishes for the q-derivative", _qderiv_leibniz),
    CheckDef("leibniz_ordinary", "Leibniz defect: vanishes for the ordinary derivative", _leibniz_ordinary),
    CheckDef("leibniz_dtilde_series", "Leibniz defect: fractional defect matches the binomial series", _leibniz_dtilde_series),
    CheckDef("leibniz_constant", "Leibniz defect: vanishes against constants for trivial-kernel operators", _leibniz_constant),
    CheckDef("concomitant_kalpha", "bilinear concomitant: integrates to zero for a self-adjoint square", _concomitant_kalpha),
    CheckDef("concomitant_self", "bilinear concomitant: antisymmetric in its arguments", _concomitant_self),
    CheckDef("concomitant_green", "bilinear concomitant: Green identity on a periodic domain", _concomitant_green),
    CheckDef("solver_linear_residual", "field equation: linear solve residual", _solver_linear_residual),
    CheckDef("solver_dual_path", "field equation: spectral and dense linear solves agree", _solver_dual_path),
    CheckDef("solver_linear_newton", "field equation: one Newton step solves the linear problem", _solver_linear_newton),
    CheckDef("solver_newton_kink", "field equation: quartic kink converges", _solver_newton_kink),
    CheckDef("solver_newton_quadratic", "field equation: quadratic Newton convergence", _solver_newton_quadratic),
    CheckDef("solver_perturbative", "field equation: weak quartic coupling is perturbative", _solver_perturbative),
    CheckDef("solver_dispersion_square", "field equation: explicit kinetic dispersion is an exact square", _solver_dispersion_square),
)

# Tolerances are calibration outputs of the oracles: spectral identities sit
# a few orders above rounding, truncated or interpolated backends at their
# measured discretization error with headroom.
DEFAULT_TOLERANCES: dict[str, float] = {
    "measure_oddness": 1e-14,
    "measure_weight_fd": 1e-6,
    "measure_monotone_flow": 0.0,
    "measure_binomial_bitwise": 0.0,
    "grid_roundtrip": 1e-12,
    "grid_inner_conjugate": 1e-13,
    "grid_to_matrix": 1e-10,
    "frac_linearity_spectral": 1e-12,
    "frac_linearity_gl": 1e-12,
    "frac_linearity_quadrature": 1e-12,
    "frac_kernel_spectral": 1e-12,
    "frac_kernel_gl": math.nan,
    "frac_kernel_quadrature": 1e-12,
    "frac_semigroup_liouville": 1e-10,
    "frac_semigroup_weyl": 1e-10,
    "frac_duality": 1e-6,
    "frac_antisymmetry": 1e-8,
    "frac_leibniz_series": 1e-6,
    "frac_leibniz_monotone": 0.0,
    "frac_gl_order": math.nan,
    "frac_quadrature_vs_spectral": 1e-4,
    "qderiv_trivial": 1e-10,
    "qderiv_leibniz": 1e-10,
    "qderiv_ibp": 1e-8,
    "qderiv_composition": 1e-8,
    "qderiv_of_q": 1e-8,
    "kalpha_selfadjoint_flat": 1e-8,
    "kalpha_selfadjoint_binomial": 1e-8,
    "kalpha_selfadjoint_oscillatory": 1e-8,
    "explicit_kinetic_selfadjoint": 1e-6,
    "explicit_multiplier": 1e-10,
    "explicit_seven_pieces": 0.0,
    "explicit_bar_multiplier": 1e-10,
    "explicit_bar_nonquadratic": math.nan,
    "plateau_limit": 1e-10,
    "laplacian_constants": 1e-10,
    "implicit_constant": 1e-10,
    "implicit_alpha_to_one": math.nan,
    "implicit_small_scale": 1e-2,
    "implicit_kinetic_small_scale": 3e-2,
    "implicit_large_scale_trend": math.nan,
    "leibniz_qderiv": 1e-10,
    "leibniz_ordinary": 1e-12,
    "leibniz_dtilde_series": 1e-6,
    "leibniz_constant": 1e-12,
    "concomitant_kalpha": 1e-7,
    "concomitant_self": 1e-14,
    "concomitant_green": 1e-10,
    "solver_linear_residual": 1e-9,
    "solver_dual_path": 1e-10,
    "solver_linear_newton": 1e-10,
    "solver_newton_kink": math.nan,
    "solver_newton_quadratic": 10.0,
    "solver_perturbative": math.nan,
    "solver_dispersion_square": 1e-12,
}
# nan marks checks whose function returns its own calibrated tolerance.

CHECK_NAMES = tuple(c.name for c in CATALOG)


def select_checks(patterns: Iterable[str]) -> tuple[CheckDef, ...]:
    patterns = tuple(patterns)
    return tuple(c for c in CATALOG if any(fnmatch.fnmatchcase(c.name, pat) for pat in patterns))


def run_check(check: CheckDef, cfg: SuiteConfig) -> PropertyCheck:
    tol = cfg.tolerance(check.name)
    note = ""
    try:
        out = check.fn(cfg)
        if isinstance(out, tuple):
            res, own_tol = out[0], out[1]
            note = out[2] if len(out) > 2 else ""
            if math.isnan(tol):
                tol = own_tol
        else:
            res = out
        res = float(res)
        if math.isnan(res):
            res = math.inf
    except (MultifracError, ArithmeticError, ValueError) as exc:
        res, note = math.inf, f"{type(exc).__name__}: {exc}"
    return PropertyCheck(check.name, check.anchor, abs(res), float(tol), None, check.inputs, note)


def _thread_count(cfg: SuiteConfig) -> int:
    if cfg.threads is not None:
        return max(1, int(cfg.threads))
    env = os.environ.get("MULTIFRAC_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError("MULTIFRAC_THREADS must be an integer") from exc
    return min(4, os.cpu_count() or 1)


def run_suite(cfg: SuiteConfig) -> VerificationReport:
    """Run the selected checks (concurrently when allowed) in catalog order."""
    selected = select_checks(cfg.checks)
    threads = _thread_count(cfg)
    if threads == 1 or len(selected) < 2:
        results = [run_check(c, cfg) for c in selected]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: run_check(c, cfg), selected))
    env = (
        ("seed", str(cfg.seed)),
        ("grid size", str(cfg.n)),
        ("adjoint grid size", str(cfg.adjoint_n)),
        ("gl truncation", str(cfg.gl_truncation)),
        ("quadrature", f"panels={cfg.quadrature.panels} grading={cfg.quadrature.grading:g} points={cfg.quadrature.points}"),
    )
    return VerificationReport(tuple(results), env)
