import math

import numpy as np
import pytest

from multifrac import (
    ConfigError,
    Domain,
    DomainMismatch,
    OperatorSpec,
    PropertyCheck,
    SuiteConfig,
    VerificationReport,
    adjoint_defect,
    bilinear_concomitant,
    binomial,
    leibniz_defect,
    run_suite,
    sample,
    to_matrix,
    weighted_inner,
)
from multifrac.fractional import one_sided
from multifrac.verify import CATALOG, CHECK_NAMES, DEFAULT_TOLERANCES, leibniz_series, select_checks

BIN = binomial(0.5, 1.0)
OFF = Domain(1.0, 1.0 + 2 * np.pi, 256)


def _wave(d, k):
    return sample(f"plane_wave:k={k}", d)


# Leibniz defect


def test_q_derivative_has_no_leibniz_defect():
    f, g = _wave(OFF, 2) + _wave(OFF, -1), _wave(OFF, 3)
    x = leibniz_defect(OperatorSpec("QDeriv", profile=BIN), f, g)
    assert np.max(np.abs(x.values)) < 1e-10 * 10


def test_ordinary_derivative_has_no_leibniz_defect():
    d = Domain(-np.pi, np.pi, 128)
    x = leibniz_defect(OperatorSpec("Deriv"), _wave(d, 2), _wave(d, 5))
    assert np.max(np.abs(x.values)) < 1e-12


def test_dtilde_defect_matches_series():
    d = Domain(-4 * np.pi, 4 * np.pi, 256)
    f, g = _wave(d, 0.25), _wave(d, 1)
    x = leibniz_defect(OperatorSpec("PlateauDiff", alpha=0.5), f, g).values
    parts = []
    for side in (1, -1):
        s = leibniz_series(0.25, g, 0.5, 40, side)
        parts.append(s - one_sided(d, f.values, 0.5, side) * g.values - f.values * one_sided(d, g.values, 0.5, side))
    assert np.max(np.abs(0.5 * (parts[0] - parts[1]) - x)) < 1e-6
    # genuine fractional derivatives break the product rule
    assert np.max(np.abs(x)) > 1e-2


def test_defect_vanishes_against_constants():
    f = _wave(OFF, 2)
    one = sample("constant", OFF)
    for op in (OperatorSpec("PlateauDiff", alpha=0.5), OperatorSpec("Combo", alpha=0.3, c=1.0, cbar=2.0)):
        assert np.max(np.abs(leibniz_defect(op, f, one).values)) < 1e-12
        assert np.max(np.abs(leibniz_defect(op, one, f).values)) < 1e-12


def test_defect_requires_first_order_and_same_domain():
    f = _wave(OFF, 1)
    with pytest.raises(ConfigError):
        leibniz_defect(OperatorSpec("KAlpha", alpha=0.5), f, f)
    with pytest.raises(DomainMismatch):
        leibniz_defect(OperatorSpec("Deriv"), f, _wave(Domain(-np.pi, np.pi, 256), 1))


# bilinear concomitant


def test_concomitant_examples():
    op = OperatorSpec("WeightedFrac", alpha=0.5, profile=BIN)
    f, h = _wave(OFF, 2) + _wave(OFF, -3), _wave(OFF, 1) * 0.5 + _wave(OFF, 4)
    y = bilinear_concomitant(op, f, h)
    one = sample("constant", OFF)
    assert abs(weighted_inner(one, y, BIN)) < 1e-7
    assert adjoint_defect(to_matrix(OperatorSpec("KAlpha", alpha=0.5, profile=BIN), OFF), BIN) < 1e-8
    assert np.max(np.abs(bilinear_concomitant(op, f, f).values)) < 1e-12 * 100
    d = Domain(-np.pi, np.pi, 128)
    y = bilinear_concomitant(OperatorSpec("Deriv"), _wave(d, 2), _wave(d, -2))
    assert abs(weighted_inner(sample("constant", d), y)) < 1e-10


# report plumbing


def test_property_check_pass_rule():
    assert PropertyCheck("a", "x", 1e-9, 1e-8).passed
    assert not PropertyCheck("a", "x", 1e-7, 1e-8).passed
    assert not PropertyCheck("a", "x", math.inf, 1e-8).passed
    with pytest.raises(ValueError):
        PropertyCheck("a", "x", -1.0, 1.0)


def test_report_csv_format():
    r = VerificationReport((PropertyCheck("c1", "anchor, with comma", 1.5e-12, 1e-10),))
    lines = r.to_csv().splitlines()
    assert lines[0] == "check_name,paper_anchor,residual,tolerance,passed"
    assert lines[1] == 'c1,"anchor, with comma",1.500000e-12,1.000000e-10,true'
    assert r.summary == "1/1 checks passed"


def test_empty_selection():
    r = run_suite(SuiteConfig(checks=()))
    assert r.checks == ()
    assert r.summary == "0/0 checks passed"
    assert r.all_passed


def test_catalog_is_consistent():
    assert len(set(CHECK_NAMES)) == len(CHECK_NAMES)
    assert set(CHECK_NAMES) == set(DEFAULT_TOLERANCES)
    assert all(c.anchor for c in CATALOG)
    assert {c.name for c in select_checks(["leibniz*"])} == {n for n in CHECK_NAMES if n.startswith("leibniz")}


def test_config_validation():
    with pytest.raises(ConfigError):
        SuiteConfig(n=100)
    with pytest.raises(ConfigError):
        SuiteConfig(tolerances=(("nope", 1.0),))


def test_gl_truncation_eight_fails_kernel_check():
    r = run_suite(SuiteConfig(gl_truncation=8, checks=("frac_kernel_gl",)))
    (check,) = r.checks
    assert not check.passed
    # the residual sits at the J**-alpha scale of the truncated sum
    assert 0.1 < check.residual * 8**0.5 < 10.0


def test_tolerance_override_changes_verdict():
    r = run_suite(SuiteConfig(checks=("grid_roundtrip",), tolerances=(("grid_roundtrip", 0.0),)))
    assert not r.checks[0].passed


@pytest.fixture(scope="module")
def full_reports():
    one = run_suite(SuiteConfig(threads=1))
    many = run_suite(SuiteConfig(threads=4))
    return one, many


def test_full_suite_passes(full_reports):
    report, _ = full_reports
    failed = [(c.name, c.residual, c.tolerance, c.note) for c in report.checks if not c.passed]
    assert not failed
    assert all(math.isfinite(c.residual) and c.residual >= 0 for c in report.checks)


def test_report_independent_of_worker_count(full_reports):
    one, many = full_reports
    assert one.to_csv() == many.to_csv()
    assert one.to_text() == many.to_text()
