"""Uniform 1-d grids, sampled functions, weighted pairings and dense
materialisation of linear operators."""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import DomainMismatch, TooLarge, UnknownSpec
from .measure import MeasureProfile, eval_weight

MAX_DENSE = 4096


@dataclass(frozen=True)
class Domain:
    a: float
    b: float
    n: int
    periodic: bool = True
    offset: float = 0.5

    def __post_init__(self) -> None:
        if not self.b > self.a:
            raise ValueError("domain needs b > a")
        if self.n < 8:
            raise ValueError("domain needs at least 8 samples")
        if self.periodic and self.n & (self.n - 1):
            raise ValueError("periodic domains need a power-of-two sample count")

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def x(self) -> np.ndarray:
        return self.a + (np.arange(self.n) + self.offset) * self.h

    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.h)

    def quadrature_weights(self) -> np.ndarray:
        """Rectangle weights for periodic or cell-centred grids, trapezoid otherwise."""
        w = np.full(self.n, self.h)
        if not self.periodic and self.offset != 0.5:
            w[0] *= 0.5
            w[-1] *= 0.5
        return w


@dataclass(frozen=True, eq=False)
class GridFunction:
    domain: Domain
    values: np.ndarray
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.domain.n,):
            raise ValueError(f"expected {self.domain.n} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid function values must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def x(self) -> np.ndarray:
        return self.domain.x

    def with_values(self, values, label: str | None = None) -> "GridFunction":
        return GridFunction(self.domain, values, self.label if label is None else label)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        _same_domain(self, other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        _same_domain(self, other)
        return self.with_values(self.values - other.values)

    def __mul__(self, other) -> "GridFunction":
        if isinstance(other, GridFunction):
            _same_domain(self, other)
            return self.with_values(self.values * other.values)
        return self.with_values(self.values * other)

    __rmul__ = __mul__

    def to_csv(self, path: str | Path | None = None) -> str:
        """CSV with columns x, re, im and a '#' header naming the generating spec."""
        buf = io.StringIO()
        buf.write(f"# {self.label or 'grid function'}\n")
        buf.write("x,re,im\n")
        for xj, vj in zip(self.x, self.values):
            buf.write(f"{xj:.17g},{vj.real:.17g},{vj.imag:.17g}\n")
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, path: str | Path, domain: Domain) -> "GridFunction":
        label = ""
        rows = []
        for line in Path(path).read_text().splitlines():
            if line.startswith("#"):
                label = label or line[1:].strip()
                continue
            if not line or line.startswith("x,"):
                continue
            _, re, im = line.split(",")
            rows.append(complex(float(re), float(im)))
        return cls(domain, np.array(rows), label)


def _same_domain(f: GridFunction, g: GridFunction) -> None:
    if f.domain != g.domain:
        raise DomainMismatch("grid functions live on different domains")


@dataclass(frozen=True)
class FunctionSpec:
    """Declarative test function: plane_wave, gaussian, constant, polynomial,
    windowed_wave, tanh or table."""

    kind: str
    params: tuple[tuple[str, object], ...] = ()

    @classmethod
    def make(cls, kind: str, **params) -> "FunctionSpec":
        return cls(kind, tuple(sorted(params.items())))

    def get(self, key: str, default=None):
        return dict(self.params).get(key, default)

    def __str__(self) -> str:
        inner = ",".join(f"{k}={_fmt_param(v)}" for k, v in self.params if k != "values")
        return f"{self.kind}:{inner}" if inner else self.kind


def _fmt_param(v) -> str:
    if isinstance(v, (tuple, list)):
        return ";".join(str(x) for x in v)
    return str(v)


def parse_function_spec(text: str) -> FunctionSpec:
    """Parse ``kind:key=value,...``; polynomial coefficients are ';'-separated."""
    kind, _, rest = text.strip().partition(":")
    params: dict[str, object] = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise UnknownSpec(f"malformed parameter {item!r} in function spec {text!r}")
        if key == "coeffs":
            params[key] = tuple(float(c) for c in value.split(";"))
        else:
            params[key] = float(value)
    return FunctionSpec.make(kind, **params)


def _evaluate(spec: FunctionSpec, x: np.ndarray) -> np.ndarray:
    k = spec.kind
    if k == "plane_wave":
        return np.exp(1j * float(spec.get("k", 1.0)) * x)
    if k == "gaussian":
        c = float(spec.get("center", 0.0))
        s = float(spec.get("sigma", 1.0))
        return np.exp(-((x - c) ** 2) / (2.0 * s * s)).astype(complex)
    if k == "constant":
        return np.full(x.shape, complex(spec.get("c", 1.0)))
    if k == "polynomial":
        coeffs = spec.get("coeffs", (1.0,))
        return np.polynomial.polynomial.polyval(x, coeffs).astype(complex)
    if k == "windowed_wave":
        kk = float(spec.get("k", 1.0))
        c = float(spec.get("center", 0.0))
        s = float(spec.get("sigma", 1.0))
        return np.exp(1j * kk * (x - c) - ((x - c) ** 2) / (2.0 * s * s))
    if k == "tanh":
        c = float(spec.get("center", 0.0))
        return float(spec.get("amp", 1.0)) * np.tanh(float(spec.get("slope", 1.0)) * (x - c)).astype(complex)
    if k == "table":
        vals = np.asarray(spec.get("values"), dtype=complex)
        if vals.shape != x.shape:
            raise UnknownSpec("table length does not match the domain")
        return vals
    raise UnknownSpec(f"unknown function spec kind {k!r}")


def sample(spec: FunctionSpec | str, d: Domain) -> GridFunction:
    if isinstance(spec, str):
        spec = parse_function_spec(spec)
    return GridFunction(d, _evaluate(spec, d.x), str(spec))


def weight_values(d: Domain, p: MeasureProfile | None) -> np.ndarray:
    """v(x_j) on the grid; ones for the flat pairing (``p is None``)."""
    if p is None:
        return np.ones(d.n)
    return np.asarray(eval_weight(p, d.x), dtype=float)


def weighted_inner(f: GridFunction, g: GridFunction, p: MeasureProfile | None = None) -> complex:
    """Discrete sum h * sum_j v_j conj(f_j) g_j approximating the dq pairing."""
    _same_domain(f, g)
    d = f.domain
    w = d.quadrature_weights() * weight_values(d, p)
    return complex(np.sum(w * np.conj(f.values) * g.values))


def forward_coefficients(f: GridFunction) -> np.ndarray:
    """Fourier coefficients c_k with f_j = sum_k c_k exp(i k x_j)."""
    d = f.domain
    phase = np.exp(-1j * d.wavenumbers() * (d.a + d.offset * d.h))
    return np.fft.fft(f.values) / d.n * phase


def inverse_coefficients(c: np.ndarray, d: Domain) -> GridFunction:
    phase = np.exp(1j * d.wavenumbers() * (d.a + d.offset * d.h))
    return GridFunction(d, np.fft.ifft(np.asarray(c) * phase) * d.n)


def columnwise(w: np.ndarray, arr: np.ndarray) -> np.ndarray:
    """Reshape a per-node vector so it broadcasts against (n,) or (n, m) arrays."""
    return np.reshape(w, (-1,) + (1,) * (arr.ndim - 1))


ArrayOperator = Callable[[Domain, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class DenseOperator:
    domain: Domain
    entries: np.ndarray

    def __post_init__(self) -> None:
        if self.entries.shape != (self.domain.n, self.domain.n):
            raise ValueError("operator matrix does not match the domain size")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("operator matrix has non-finite entries")

    def apply(self, f: GridFunction) -> GridFunction:
        _same_domain_op(self.domain, f)
        return f.with_values(self.entries @ f.values)

    @property
    def H(self) -> np.ndarray:
        return self.entries.conj().T


def _same_domain_op(d: Domain, f: GridFunction) -> None:
    if f.domain != d:
        raise DomainMismatch("operator and function live on different domains")


def to_matrix(op, d: Domain) -> DenseOperator:
    """Materialise ``op`` column by column on the coordinate basis.

    ``op`` is anything with an ``apply_array(domain, array)`` method acting
    along axis 0, or a plain callable with that signature.
    """
    if d.n > MAX_DENSE:
        raise TooLarge(f"dense materialisation is capped at n = {MAX_DENSE}")
    fn = op.apply_array if hasattr(op, "apply_array") else op
    eye = np.eye(d.n, dtype=complex)
    return DenseOperator(d, np.asarray(fn(d, eye), dtype=complex))


def adjoint_defect(m: DenseOperator, p: MeasureProfile | None = None) -> float:
    """||W M - M^H W||_max / ||W M||_max with W = diag(v); zero iff self-adjoint."""
    v = weight_values(m.domain, p)
    wm = v[:, None] * m.entries
    scale = np.max(np.abs(wm))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(wm - m.H * v[None, :])) / scale)


def relative_max_error(approx: np.ndarray, exact: np.ndarray) -> float:
    scale = np.max(np.abs(exact))
    err = np.max(np.abs(np.asarray(approx) - np.asarray(exact)))
    return float(err / scale) if scale > 0 else float(err)
