"""Dispersion relations and static solutions of K phi - V'(phi) + J = 0 with
V = m2/2 phi**2 + lam/4 phi**4."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import (
    ConfigError,
    NonConvergence,
    NotDiagonalizable,
    ResonantMode,
    SingularJacobian,
    TooLarge,
)
from .grid import Domain, GridFunction, to_matrix
from .operators import OperatorSpec

MAX_DENSE_LINEAR = 2048
MAX_DENSE_NEWTON = 1024
RESONANCE = 1e-12


@dataclass(frozen=True)
class PotentialSpec:
    mass2: float = 0.0
    quartic: float = 0.0
    source: GridFunction | None = None

    def __post_init__(self) -> None:
        if not (np.isfinite(self.mass2) and np.isfinite(self.quartic)):
            raise ValueError("potential coefficients must be finite")

    def dV(self, phi: np.ndarray) -> np.ndarray:
        return self.mass2 * phi + self.quartic * phi**3

    def source_values(self, d: Domain) -> np.ndarray:
        if self.source is None:
            return np.zeros(d.n, dtype=complex)
        if self.source.domain != d:
            raise ConfigError("source and solution domains differ")
        return np.asarray(self.source.values, dtype=complex)


@dataclass(frozen=True)
class SolveResult:
    phi: GridFunction
    residual_norm: float
    iterations: int
    converged: bool
    path: str = "dense"
    history: tuple[float, ...] = field(default=())

    def summary(self, op: OperatorSpec | None = None) -> dict:
        out = {
            "residual_norm": self.residual_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "path": self.path,
            "residual_history": list(self.history),
        }
        if op is not None:
            out["operator"] = op.to_dict()
        return out


def _reject_implicit(op: OperatorSpec) -> None:
    if op.implicit:
        raise ConfigError("no variational solve path for implicit operators")


def dispersion(op: OperatorSpec, k):
    """Plane-wave eigenvalue mu(k) of a flat-weight, spectrally backed operator."""
    mu = op.multiplier(np.asarray(k, dtype=float))
    return complex(mu) if np.ndim(mu) == 0 else mu


def grid_symbol(op: OperatorSpec, d: Domain) -> np.ndarray:
    """Discrete eigenvalues of a translation-invariant operator on a periodic
    grid, ordered like ``d.wavenumbers()``; they equal mu(k) away from Nyquist."""
    if not d.periodic:
        raise NotDiagonalizable("plane waves diagonalize operators only on periodic grids")
    op.multiplier(np.zeros(1))  # raises for non-diagonal variants
    impulse = np.zeros(d.n, dtype=complex)
    impulse[0] = 1.0
    return np.fft.fft(op.apply_array(d, impulse))


def residual(op: OperatorSpec, pot: PotentialSpec, phi: GridFunction) -> np.ndarray:
    d = phi.domain
    return op.apply_array(d, phi.values) - pot.dV(phi.values) + pot.source_values(d)


def _factor(a: np.ndarray, err: type[ArithmeticError], what: str):
    lu, piv = sla.lu_factor(a, check_finite=True)
    diag = np.abs(np.diag(lu))
    if diag.max() == 0.0 or diag.min() < 1e-14 * diag.max():
        raise err(f"{what} is numerically singular")
    return lu, piv


def solve_linear(op: OperatorSpec, pot: PotentialSpec, domain: Domain | None = None, path: str = "auto") -> SolveResult:
    """Solve (K - m2) phi = -J on the spectral or the dense path."""
    _reject_implicit(op)
    if pot.quartic != 0.0:
        raise ConfigError("solve_linear needs quartic = 0")
    d = domain if domain is not None else (pot.source.domain if pot.source is not None else None)
    if d is None:
        raise ConfigError("solve_linear needs a source or an explicit domain")
    rhs = -pot.source_values(d)
    if path not in ("auto", "spectral", "dense"):
        raise ConfigError(f"unknown solve path {path!r}")
    if path == "auto":
        try:
            mu = grid_symbol(op, d)
            path = "spectral"
        except NotDiagonalizable:
            path = "dense"
    if path == "spectral":
        mu = grid_symbol(op, d)
        coef = np.fft.fft(rhs)
        denom = mu - pot.mass2
        occupied = np.abs(coef) > 1e-10 * max(np.max(np.abs(coef)), 1e-300)
        if np.any(occupied & (np.abs(denom) < RESONANCE)):
            raise ResonantMode("the source occupies a mode with mu(k) = m2")
        safe = np.where(occupied, denom, 1.0)
        phi = np.fft.ifft(np.where(occupied, coef / safe, 0.0))
    else:
        if d.n > MAX_DENSE_LINEAR:
            raise TooLarge(f"dense linear solve is capped at n = {MAX_DENSE_LINEAR}")
        a = to_matrix(op, d).entries - pot.mass2 * np.eye(d.n)
        if not np.any(rhs):
            phi = np.zeros(d.n, dtype=complex)
        else:
            phi = sla.lu_solve(_factor(a, ResonantMode, "K - m2"), rhs)
    sol = GridFunction(d, phi, "phi")
    res = float(np.max(np.abs(residual(op, pot, sol))))
    return SolveResult(sol, res, 0, True, path, (res,))


def solve_nonlinear(
    op: OperatorSpec,
    pot: PotentialSpec,
    guess: GridFunction,
    tol: float = 1e-10,
    max_iter: int = 50,
) -> SolveResult:
    """Newton iteration on R = K phi - m2 phi - lam phi**3 + J with a dense Jacobian."""
    _reject_implicit(op)
    if tol <= 0:
        raise ConfigError("tol must be positive")
    d = guess.domain
    if d.n > MAX_DENSE_NEWTON:
        raise TooLarge(f"Newton solves are capped at n = {MAX_DENSE_NEWTON}")
    k = to_matrix(op, d).entries
    src = pot.source_values(d)
    phi = np.asarray(guess.values, dtype=complex).copy()

    def res(ph):
        return k @ ph - pot.dV(ph) + src

    r = res(phi)
    history = [float(np.max(np.abs(r)))]
    steps = 0
    while history[-1] > tol and steps < max_iter:
        jac = k - np.diag(pot.mass2 + 3.0 * pot.quartic * phi**2)
        phi = phi - sla.lu_solve(_factor(jac, SingularJacobian, "Newton Jacobian"), r)
        steps += 1
        r = res(phi)
        history.append(float(np.max(np.abs(r))))
        if not np.isfinite(history[-1]):
            raise NonConvergence(f"Newton iteration diverged after {steps} steps")
    return SolveResult(
        GridFunction(d, phi, "phi"), history[-1], steps, history[-1] <= tol, "dense", tuple(history)
    )
