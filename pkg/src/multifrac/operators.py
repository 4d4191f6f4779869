"""Declarative operator selection: one :class:`OperatorSpec` per operator in
the zoo, with array-level application, dense materialisation support and the
plane-wave multiplier of every diagonal variant."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import numpy as np

from . import laplacians as lap
from .calculus import derivative
from .errors import ConfigError, NotDiagonalizable, UnknownSpec
from .fractional import (
    SPECTRAL,
    FracBackend,
    GrunwaldLetnikov,
    SingularQuadrature,
    Spectral,
    combo_array,
    combo_multiplier,
    frac_multiplier,
    one_sided,
    symmetric_m2_array,
    symmetric_m2_multiplier,
)
from .grid import Domain, GridFunction
from .measure import MeasureProfile

VARIANTS = (
    "Identity",
    "Deriv",
    "Liouville",
    "Weyl",
    "Combo",
    "SymmetricM2",
    "QDeriv",
    "QLaplacian",
    "WeightedFrac",
    "KAlpha",
    "ExplicitD",
    "ExplicitKinetic",
    "BarKinetic",
    "ImplicitLeft",
    "ImplicitRight",
    "ImplicitKinetic",
    "PlateauDiff",
)

FIRST_ORDER = {
    "Deriv",
    "Liouville",
    "Weyl",
    "Combo",
    "QDeriv",
    "WeightedFrac",
    "ExplicitD",
    "ImplicitLeft",
    "ImplicitRight",
    "PlateauDiff",
}
IMPLICIT = {"ImplicitLeft", "ImplicitRight", "ImplicitKinetic"}
_NEEDS_ALPHA = {"Liouville", "Weyl", "Combo", "SymmetricM2", "WeightedFrac", "KAlpha", "PlateauDiff"}
_NEEDS_TERMS = {"ExplicitD", "ExplicitKinetic", "BarKinetic"}


@dataclass(frozen=True)
class OperatorSpec:
    variant: str
    alpha: float | None = None
    terms: tuple[tuple[float, float], ...] = ()
    c: complex = 0.5
    cbar: complex = -0.5
    order: int = 1
    profile: MeasureProfile | None = None
    backend: FracBackend = field(default=SPECTRAL)
    consistency: bool = True
    quad: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise UnknownSpec(f"unknown operator variant {self.variant!r}")
        if self.variant in _NEEDS_ALPHA and self.alpha is None:
            raise ConfigError(f"{self.variant} needs an order alpha")
        if self.variant in _NEEDS_TERMS and not self.terms:
            raise ConfigError(f"{self.variant} needs a non-empty term list")
        object.__setattr__(self, "terms", tuple((float(g), float(a)) for g, a in self.terms))
        if self.variant in IMPLICIT and self.profile is None:
            raise ConfigError(f"{self.variant} needs a measure profile")

    @property
    def first_order(self) -> bool:
        return self.variant in FIRST_ORDER and not (self.variant == "Deriv" and self.order != 1)

    @property
    def implicit(self) -> bool:
        return self.variant in IMPLICIT

    def with_profile(self, p: MeasureProfile | None) -> "OperatorSpec":
        return replace(self, profile=p)

    # application

    def apply_array(self, d: Domain, arr: np.ndarray) -> np.ndarray:
        arr = np.asarray(arr, dtype=complex)
        v, p, b = self.variant, self.profile, self.backend
        if v == "Identity":
            return arr.copy()
        if v == "Deriv":
            return derivative(d, arr, self.order)
        if v == "Liouville":
            return one_sided(d, arr, self.alpha, 1, b)
        if v == "Weyl":
            return one_sided(d, arr, self.alpha, -1, b)
        if v == "Combo":
            return combo_array(d, arr, self.alpha, self.c, self.cbar, b)
        if v == "SymmetricM2":
            return symmetric_m2_array(d, arr, self.alpha, b)
        if v == "PlateauDiff":
            return combo_array(d, arr, self.alpha, 0.5, -0.5, b)
        if v == "QDeriv":
            return lap.q_derivative_array(d, arr, p)
        if v == "QLaplacian":
            return lap.q_derivative_array(d, lap.q_derivative_array(d, arr, p), p)
        if v == "WeightedFrac":
            return lap.weighted_frac_array(d, arr, self.alpha, p, b)
        if v == "KAlpha":
            once = lap.weighted_frac_array(d, arr, self.alpha, p, b)
            return lap.weighted_frac_array(d, once, self.alpha, p, b)
        if v == "ExplicitD":
            return lap.explicit_multiscale_array(d, arr, self.terms, p, b, self.consistency)
        if v == "ExplicitKinetic":
            once = lap.explicit_multiscale_array(d, arr, self.terms, p, b, self.consistency)
            return lap.explicit_multiscale_array(d, once, self.terms, p, b, self.consistency)
        if v == "BarKinetic":
            return lap.bar_kinetic_array(d, arr, self.terms, p, b)
        kw = dict(self.quad)
        if v == "ImplicitLeft":
            return lap.implicit_array(d, arr, p, 1, **kw)
        if v == "ImplicitRight":
            return lap.implicit_array(d, arr, p, -1, **kw)
        if v == "ImplicitKinetic":
            return lap.implicit_kinetic_array(d, arr, p, **kw)
        raise UnknownSpec(v)

    def apply(self, f: GridFunction) -> GridFunction:
        return f.with_values(self.apply_array(f.domain, f.values))

    def __call__(self, f: GridFunction) -> GridFunction:
        return self.apply(f)

    # plane-wave symbol

    def multiplier(self, k) -> np.ndarray:
        """mu(k) with K exp(ikx) = mu(k) exp(ikx); flat weight, spectral backend only."""
        if self.implicit or not isinstance(self.backend, Spectral):
            raise NotDiagonalizable(f"{self.variant} with backend {self.backend.name} is not diagonal on plane waves")
        if self.profile is not None and not self.profile.is_flat:
            raise NotDiagonalizable("plane waves are eigenfunctions only for a flat weight")
        k = np.asarray(k, dtype=float)
        v, a = self.variant, self.alpha
        if v == "Identity":
            return np.ones(k.shape, dtype=complex)
        if v == "Deriv":
            return (1j * k) ** self.order
        if v == "Liouville":
            return frac_multiplier(k, a, 1)
        if v == "Weyl":
            return frac_multiplier(k, a, -1)
        if v == "Combo":
            return combo_multiplier(k, a, self.c, self.cbar)
        if v == "SymmetricM2":
            return symmetric_m2_multiplier(k, a)
        if v in ("WeightedFrac", "PlateauDiff"):
            return combo_multiplier(k, a)
        if v == "KAlpha":
            return combo_multiplier(k, a) ** 2
        if v == "QDeriv":
            return 1j * k
        if v == "QLaplacian":
            return -(k**2) + 0j
        if v in ("ExplicitD", "ExplicitKinetic"):
            mu = sum(g * combo_multiplier(k, al) for g, al in self.terms)
            return mu if v == "ExplicitD" else mu * mu
        if v == "BarKinetic":
            return sum(
                g * (-(k**2) + 0j if al == 1.0 else 0.5 * symmetric_m2_multiplier(k, al))
                for g, al in self.terms
            )
        raise NotDiagonalizable(v)

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"variant": self.variant}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.terms:
            out["terms"] = [list(t) for t in self.terms]
        if self.variant == "Combo":
            out["c"] = _num(self.c)
            out["cbar"] = _num(self.cbar)
        if self.variant == "Deriv":
            out["order"] = self.order
        out["backend"] = backend_to_dict(self.backend)
        if not self.consistency:
            out["consistency"] = False
        if self.quad:
            out["quadrature"] = dict(self.quad)
        return out


def _num(z: complex):
    z = complex(z)
    return z.real if z.imag == 0 else [z.real, z.imag]


def backend_to_dict(b: FracBackend) -> dict:
    if isinstance(b, Spectral):
        return {"kind": "spectral"}
    if isinstance(b, GrunwaldLetnikov):
        return {"kind": "gl", "truncation": b.truncation}
    return {"kind": "quadrature", "panels": b.panels, "grading": b.grading, "points": b.points}


def backend_from_dict(block: Mapping | str | None) -> FracBackend:
    if block is None:
        return SPECTRAL
    if isinstance(block, str):
        block = {"kind": block}
    kind = str(block.get("kind", "spectral")).lower()
    try:
        if kind == "spectral":
            return SPECTRAL
        if kind in ("gl", "grunwald_letnikov", "grunwaldletnikov"):
            return GrunwaldLetnikov(int(block.get("truncation", GrunwaldLetnikov.truncation)))
        if kind in ("quadrature", "singular_quadrature", "singularquadrature"):
            return SingularQuadrature(
                int(block.get("panels", SingularQuadrature.panels)),
                float(block.get("grading", SingularQuadrature.grading)),
                int(block.get("points", SingularQuadrature.points)),
            )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"backend: {exc}") from exc
    raise ConfigError(f"backend.kind: unknown backend {kind!r}")


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(float(value[0]), float(value[1]))
    return complex(value)


_QUAD_KEYS = {"panels": int, "grading": float, "points": int, "rtol": float, "allow_oscillatory": bool}


def operator_from_dict(block: Mapping, profile: MeasureProfile | None, name: str = "operator") -> OperatorSpec:
    """Build an OperatorSpec from a config block. ``profile`` is used unless the
    block sets ``flat: true``."""
    if not isinstance(block, Mapping) or "variant" not in block:
        raise ConfigError(f"{name}.variant: missing operator variant")
    known = {"variant", "alpha", "terms", "c", "cbar", "order", "backend", "consistency", "flat", "quadrature"}
    for key in block:
        if key not in known:
            raise ConfigError(f"{name}.{key}: unknown operator key")
    quad = block.get("quadrature") or {}
    for key in quad:
        if key not in _QUAD_KEYS:
            raise ConfigError(f"{name}.quadrature.{key}: unknown quadrature key")
    try:
        return OperatorSpec(
            variant=str(block["variant"]),
            alpha=None if block.get("alpha") is None else float(block["alpha"]),
            terms=tuple(tuple(t) for t in block.get("terms", ())),
            c=_complex(block.get("c", 0.5)),
            cbar=_complex(block.get("cbar", -0.5)),
            order=int(block.get("order", 1)),
            profile=None if block.get("flat", False) else profile,
            backend=backend_from_dict(block.get("backend")),
            consistency=bool(block.get("consistency", True)),
            quad=tuple(sorted((k, _QUAD_KEYS[k](v)) for k, v in quad.items())),
        )
    except ConfigError as exc:
        raise ConfigError(f"{name}: {exc}") from exc
    except UnknownSpec as exc:
        raise ConfigError(f"{name}.variant: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from exc
