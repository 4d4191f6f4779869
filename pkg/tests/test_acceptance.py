"""Acceptance criteria, each run at its stated tolerance.

Every criterion prints one ``PASS``/``FAIL`` line. Run standalone with
``python3 -m tests.test_acceptance`` or through pytest.
"""

import math
import time

import numpy as np
import pytest

from multifrac import Domain, GrunwaldLetnikov, SingularQuadrature, SuiteConfig, sample
from multifrac.cli import main
from multifrac.fractional import one_sided
from multifrac.symbolic import seven_piece_count
from multifrac.verify import (
    KINK,
    alpha_one_errors,
    dispersion_square_residual,
    gl_convergence,
    kink_problem,
    large_scale_fit,
    nonquadratic_gap,
    run_check,
    select_checks,
    small_scale_error,
)
from multifrac.solver import solve_nonlinear

from . import oracles


def _check(name, **cfg):
    (c,) = select_checks([name])
    return run_check(c, SuiteConfig(**cfg))


def criterion_1():
    t0 = time.perf_counter()
    d = Domain(-np.pi, np.pi, 256)
    worst = 0.0
    for (k, alpha), mult in oracles.LIOUVILLE_MULT.items():
        f = np.exp(1j * k * d.x)
        for side, mu in ((1, mult), (-1, np.conj(mult))):
            out = one_sided(d, f, alpha, side)
            worst = max(worst, float(np.max(np.abs(out - mu * f)) / abs(mu)))
    dt = time.perf_counter() - t0
    return worst < 1e-10 and dt < 1.0, f"max rel error {worst:.2e} (< 1e-10), {dt:.2f} s (< 1 s)"


def criterion_2():
    t0 = time.perf_counter()
    order, _ = gl_convergence(GrunwaldLetnikov())
    d = Domain(-20.0, 20.0, 256)
    f = sample("gaussian:sigma=1", d).values
    quad = 0.0
    for a in (0.3, 0.5, 0.9):
        for s in (1, -1):
            diff = one_sided(d, f, a, s, SingularQuadrature()) - one_sided(d, f, a, s)
            quad = max(quad, float(np.max(np.abs(diff))))
    dt = time.perf_counter() - t0
    ok = abs(order - 1.0) <= 0.3 and quad < 1e-4 and dt < 30.0
    return ok, f"GL order {order:.3f} (1.0 +- 0.3), quadrature max abs {quad:.2e} (< 1e-4), {dt:.1f} s (< 30 s)"


def criterion_3():
    leib = _check("qderiv_leibniz").residual
    ibp = _check("qderiv_ibp").residual
    comp = _check("qderiv_composition").residual
    unit = _check("qderiv_of_q").residual
    ok = leib < 1e-10 and ibp < 1e-8 and comp < 1e-8 and unit < 1e-8
    return ok, f"Leibniz {leib:.2e}, parts {ibp:.2e}, composition {comp:.2e}, d_q q - 1 {unit:.2e}"


def criterion_4():
    spectral = _check("frac_kernel_spectral").residual
    gl = _check("frac_kernel_gl")
    semi = max(_check("frac_semigroup_liouville").residual, _check("frac_semigroup_weyl").residual)
    dual = _check("frac_duality").residual
    series = _check("frac_leibniz_series").residual
    ok = spectral == 0.0 and gl.residual <= gl.tolerance and semi < 1e-10 and dual < 1e-6 and series < 1e-6
    return ok, (
        f"spectral kernel {spectral:.1e}, GL kernel {gl.residual:.2e} (bound {gl.tolerance:.2e}), "
        f"semigroup {semi:.2e}, duality {dual:.2e}, series J=40 {series:.2e}"
    )


def criterion_5():
    t0 = time.perf_counter()
    names = ("kalpha_selfadjoint_flat", "kalpha_selfadjoint_binomial", "kalpha_selfadjoint_oscillatory")
    worst = max(_check(n, adjoint_n=512).residual for n in names)
    dt = time.perf_counter() - t0
    return worst < 1e-8 and dt < 60.0, f"max adjoint defect {worst:.2e} (< 1e-8), {dt:.1f} s (< 60 s)"


def criterion_6():
    sq = dispersion_square_residual()
    gap = nonquadratic_gap()
    pieces = seven_piece_count()
    ok = sq < 1e-12 and gap > 0.1 and pieces == oracles.SEVEN_PIECES
    return ok, f"square residual {sq:.2e} (< 1e-12), gap {gap:.4f} (> 0.1), pieces {pieces} (= 7)"


def criterion_7():
    t0 = time.perf_counter()
    small = small_scale_error(0.3)
    _, large = large_scale_fit(100.0, "left")
    e = alpha_one_errors()
    slope = math.log10(e[0.9] / e[0.99])
    dt = time.perf_counter() - t0
    ok = small < 0.01 and large < 0.05 and abs(slope - 1.0) <= 0.25 and dt < 120.0
    return ok, (
        f"small scale {small:.2e} (< 1e-2), large scale {large:.3f} at 100 ell (< 0.05), "
        f"alpha_1 -> 1 slope {slope:.3f} (errors {e[0.9]:.3e}, {e[0.99]:.3e}), {dt:.1f} s (< 120 s)"
    )


def criterion_8():
    dual = _check("solver_dual_path").residual
    op, pot, guess = kink_problem()
    r = solve_nonlinear(op, pot, guess, tol=KINK["tol"])
    ok = dual < 1e-10 and r.converged and r.iterations <= 8 and r.residual_norm < 1e-9
    return ok, f"dual path {dual:.2e} (< 1e-10), Newton {r.iterations} iterations (<= 8), residual {r.residual_norm:.2e} (< 1e-9)"


def criterion_9(tmp):
    runs = []
    for name in ("first", "second"):
        out = tmp / name
        t0 = time.perf_counter()
        code = main(["-q", "verify", "--output-dir", str(out)])
        runs.append((code, time.perf_counter() - t0, (out / "verify_report.csv").read_bytes(), (out / "verify_report.txt").read_bytes()))
    same = runs[0][2:] == runs[1][2:]
    dt = max(r[1] for r in runs)
    ok = all(r[0] == 0 for r in runs) and dt < 300.0 and same
    return ok, f"exit codes {runs[0][0]}, {runs[1][0]}, {dt:.1f} s (< 300 s), reports identical: {same}"


CRITERIA = {
    1: ("fractional-operator correctness", criterion_1),
    2: ("backend convergence", criterion_2),
    3: ("q-derivative suite", criterion_3),
    4: ("one-sided derivative suite", criterion_4),
    5: ("weighted kinetic self-adjointness", criterion_5),
    6: ("explicit multiscaling suite", criterion_6),
    7: ("implicit multiscaling limits", criterion_7),
    8: ("field solver", criterion_8),
    9: ("default verification suite", criterion_9),
}


def _run(number, tmp=None):
    title, fn = CRITERIA[number]
    ok, detail = fn(tmp) if number == 9 else fn()
    return ok, f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {detail}"


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, tmp_path, capsys):
    ok, line = _run(number, tmp_path)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    import sys
    import tempfile
    from pathlib import Path

    failed = 0
    with tempfile.TemporaryDirectory() as tmp:
        for number in sorted(CRITERIA):
            ok, line = _run(number, Path(tmp))
            print(line, flush=True)
            failed += not ok
    sys.exit(1 if failed else 0)
