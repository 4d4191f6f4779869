import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multifrac import (
    DomainMismatch,
    Domain,
    GridFunction,
    OperatorSpec,
    TooLarge,
    UnknownSpec,
    adjoint_defect,
    parse_function_spec,
    sample,
    to_matrix,
    weighted_inner,
)
from multifrac.grid import forward_coefficients, inverse_coefficients

from . import oracles

PERIODIC = Domain(-np.pi, np.pi, 64)


def test_domain_validation():
    with pytest.raises(ValueError):
        Domain(1.0, 0.0, 16)
    with pytest.raises(ValueError):
        Domain(0.0, 1.0, 4)
    with pytest.raises(ValueError):
        Domain(0.0, 1.0, 24)
    Domain(0.0, 1.0, 24, periodic=False)


def test_default_offset_keeps_origin_off_grid():
    for n in (8, 64, 1024):
        assert not np.any(Domain(-np.pi, np.pi, n).x == 0.0)


def test_sample_kinds():
    d = Domain(-np.pi, np.pi, 8)
    np.testing.assert_array_equal(sample("constant", d).values, 1.0)
    np.testing.assert_allclose(sample("plane_wave:k=1", d).values, np.exp(1j * d.x), rtol=1e-15)
    np.testing.assert_allclose(sample("gaussian:sigma=1", d).values, np.exp(-d.x**2 / 2), rtol=1e-15)
    np.testing.assert_allclose(sample("polynomial:coeffs=1;0;2", d).values, 1 + 2 * d.x**2, rtol=1e-15)
    with pytest.raises(UnknownSpec):
        sample("sawtooth", d)
    with pytest.raises(UnknownSpec):
        parse_function_spec("gaussian:sigma")


def test_grid_function_validation():
    with pytest.raises(ValueError):
        GridFunction(PERIODIC, np.ones(3))
    with pytest.raises(ValueError):
        GridFunction(PERIODIC, np.full(64, np.nan))
    f = sample("constant", PERIODIC)
    with pytest.raises(DomainMismatch):
        f + sample("constant", Domain(-np.pi, np.pi, 32))


def test_inner_products():
    # nodes at a + j h: the trapezoid rule spans [a, b - h]
    d = Domain(0.0, 1.0, 4096, periodic=False, offset=0.0)
    one = sample("constant", d)
    assert abs(weighted_inner(one, one) - (1.0 - d.h)) < 1e-12
    f1, f2 = sample("plane_wave:k=1", PERIODIC), sample("plane_wave:k=2", PERIODIC)
    assert abs(weighted_inner(f1, f2)) < 1e-12
    dg = Domain(-20.0, 20.0, 1024, periodic=False)
    g = sample("gaussian:sigma=1", dg)
    # e**(-x**2/2) squared integrates to sqrt(pi)
    assert abs(weighted_inner(g, g) - oracles.SQRT_PI) < 1e-10


def test_unit_interval_measure_cell_centred():
    d = Domain(0.0, 1.0, 1000, periodic=False)
    one = sample("constant", d)
    assert abs(weighted_inner(one, one) - 1.0) < 1e-10


def test_csv_roundtrip(tmp_path):
    f = sample("windowed_wave:k=3,sigma=0.5", PERIODIC)
    text = f.to_csv(tmp_path / "f.csv")
    assert text.startswith("# windowed_wave")
    g = GridFunction.from_csv(tmp_path / "f.csv", PERIODIC)
    np.testing.assert_array_equal(f.values, g.values)


def test_to_matrix_examples():
    d = Domain(-np.pi, np.pi, 8)
    m = to_matrix(OperatorSpec("Deriv"), d)
    w = sample("plane_wave:k=1", d).values
    np.testing.assert_allclose(m.entries @ w, 1j * w, atol=1e-13)
    np.testing.assert_allclose(to_matrix(OperatorSpec("Identity"), d).entries, np.eye(8))
    assert adjoint_defect(to_matrix(OperatorSpec("Identity"), d)) == 0.0
    with pytest.raises(TooLarge):
        to_matrix(OperatorSpec("Identity"), Domain(0.0, 1.0, 8192))


def test_dtilde_matrix_is_anti_hermitian():
    m = to_matrix(OperatorSpec("PlateauDiff", alpha=0.5), Domain(-np.pi, np.pi, 128))
    assert np.max(np.abs(m.entries + m.H)) < 1e-10


def test_derivative_adjoint_defect_is_two():
    m = to_matrix(OperatorSpec("Deriv"), Domain(-np.pi, np.pi, 64))
    assert adjoint_defect(m) == pytest.approx(2.0, rel=1e-12)


def test_kalpha_flat_self_adjoint():
    m = to_matrix(OperatorSpec("KAlpha", alpha=0.5), Domain(-np.pi, np.pi, 128))
    assert adjoint_defect(m) < 1e-8


def test_to_matrix_matches_direct_application():
    d = Domain(-np.pi, np.pi, 64)
    op = OperatorSpec("Combo", alpha=0.7, c=0.3, cbar=0.9)
    m = to_matrix(op, d)
    rng = np.random.default_rng(3)
    for _ in range(100):
        v = rng.normal(size=64) + 1j * rng.normal(size=64)
        direct = op.apply_array(d, v)
        assert np.max(np.abs(m.entries @ v - direct)) <= 1e-10 * np.max(np.abs(direct))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([8, 64, 512]))
def test_transform_roundtrip(seed, n):
    d = Domain(-1.0, 2.5, n)
    rng = np.random.default_rng(seed)
    f = GridFunction(d, rng.normal(size=n) + 1j * rng.normal(size=n))
    back = inverse_coefficients(forward_coefficients(f), d)
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * np.max(np.abs(f.values))


def test_coefficients_of_plane_wave():
    c = forward_coefficients(sample("plane_wave:k=3", Domain(1.0, 1.0 + 2 * np.pi, 32)))
    k = Domain(1.0, 1.0 + 2 * np.pi, 32).wavenumbers()
    assert abs(c[np.argmin(np.abs(k - 3))] - 1.0) < 1e-13
    assert np.sum(np.abs(c)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_inner_conjugate_symmetric(seed):
    rng = np.random.default_rng(seed)
    f = GridFunction(PERIODIC, rng.normal(size=64) + 1j * rng.normal(size=64))
    g = GridFunction(PERIODIC, rng.normal(size=64) + 1j * rng.normal(size=64))
    a, b = weighted_inner(f, g), weighted_inner(g, f)
    assert abs(a - np.conj(b)) <= 1e-13 * max(1.0, abs(a))
