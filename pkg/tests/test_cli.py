import csv
import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from multifrac import ConfigError
from multifrac.cli import main, observed_orders
from multifrac.config import load_config, parse_sizes


def _write(tmp_path, data, name="run.yaml"):
    path = tmp_path / name
    path.write_text(yaml.safe_dump(data))
    return str(path)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# config


def test_default_config_loads():
    cfg = load_config()
    assert cfg.profile.alphas == (0.5,)
    assert "dtilde" in cfg.operators
    assert cfg.solve.operator == "d2"


@pytest.mark.parametrize(
    "data,key",
    [
        ({"profile": {"terms": [{"alpah": 0.5}]}}, "profile.terms[0].alpah"),
        ({"domain": {"a": 0, "b": 1, "n": 100}}, "domain"),
        ({"suite": {"seed": "x"}}, "suite.seed"),
        ({"colour": 1}, "colour"),
        ({"operators": {"bad": {"variant": "Liouville"}}}, "operators.bad"),
        ({"bench": {"sizes": [100]}}, "bench.sizes"),
    ],
)
def test_config_errors_name_the_key(tmp_path, data, key):
    with pytest.raises(ConfigError, match=key.replace("[", r"\[").replace("]", r"\]")):
        load_config(_write(tmp_path, data))


def test_parse_sizes():
    assert parse_sizes("256,512") == (256, 512)
    with pytest.raises(ConfigError):
        parse_sizes([2**21])


# measure


def test_measure_flow(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["-q", "measure", "--x-min", "0.01", "--x-max", "100", "--points", "50", "-o", str(out)]) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["x", "q", "v", "alpha_eff"]
    a = np.array([float(r["alpha_eff"]) for r in rows])
    assert np.all(np.diff(a) > 0)
    assert 0.5 < a[0] < 0.6 and 0.9 < a[-1] < 1.0


def test_measure_alpha_one_profile(tmp_path):
    cfg = _write(tmp_path, {"profile": {"mode": "binomial", "terms": [{"alpha": 1.0}]}})
    out = tmp_path / "m.csv"
    assert main(["-c", cfg, "measure", "--x-min", "-3", "--x-max", "5", "--points", "8", "-o", str(out)]) == 0
    for r in _rows(out):
        assert float(r["q"]) == 2.0 * float(r["x"])
    # a grid through the origin is a usage error
    assert main(["-c", cfg, "measure", "--x-min", "-3", "--x-max", "5", "--points", "9", "-o", str(out)]) == 2


def test_malformed_config_exit_two(tmp_path, capsys):
    cfg = _write(tmp_path, {"profile": {"terms": [{"alpha": 0.5, "elll": 1}]}})
    assert main(["-c", cfg, "measure"]) == 2
    assert "profile.terms[0].elll" in capsys.readouterr().err


def test_unreadable_config_exit_two(tmp_path):
    assert main(["-c", str(tmp_path / "missing.yaml"), "measure"]) == 2
    bad = tmp_path / "bad.yaml"
    bad.write_text("profile: [unclosed")
    assert main(["-c", str(bad), "measure"]) == 2


def test_usage_error_exit_two():
    assert main(["frobnicate"]) == 2
    assert main(["measure", "--points", "many"]) == 2


# deriv


def test_deriv_dtilde(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["deriv", "--operator", "dtilde", "--function", "plane_wave:k=1", "-o", str(out)]) == 0
    rows = _rows(out)
    assert list(rows[0]) == ["x", "re_in", "im_in", "re_out", "im_out"]
    fin = np.array([complex(float(r["re_in"]), float(r["im_in"])) for r in rows])
    fout = np.array([complex(float(r["re_out"]), float(r["im_out"])) for r in rows])
    assert np.max(np.abs(fout - 1j * np.sin(np.pi / 4) * fin)) < 1e-10


def test_deriv_qderiv_constant(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["deriv", "--operator", "qderiv", "--function", "constant:c=3", "-o", str(out)]) == 0
    assert max(abs(float(r["re_out"])) + abs(float(r["im_out"])) for r in _rows(out)) < 1e-10


def test_deriv_unknown_operator(tmp_path):
    assert main(["deriv", "--operator", "nope", "--function", "constant", "-o", str(tmp_path / "x.csv")]) == 2
    assert main(["deriv", "--operator", "d", "--function", "zigzag", "-o", str(tmp_path / "x.csv")]) == 2


def test_deriv_implicit_oscillatory_exit_three(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        {
            "profile": {"mode": "binomial", "terms": [{"alpha": 0.5, "amp_cos": 0.05, "omega": 3.0}]},
            "domain": {"a": -8.0, "b": 8.0, "n": 128, "periodic": False},
        },
    )
    code = main(["-c", cfg, "deriv", "--operator", "left", "--function", "gaussian", "-o", str(tmp_path / "x.csv")])
    assert code == 3
    assert "oscillatory profile rejected for implicit operators" in capsys.readouterr().err


# verify


def test_verify_filter_and_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["-q", "verify", "--checks", "leibniz*", "--seed", "7", "--output-dir", str(a)]) == 0
    assert main(["-q", "verify", "--checks", "leibniz*", "--seed", "7", "--threads", "1", "--output-dir", str(b)]) == 0
    rows = _rows(a / "verify_report.csv")
    assert rows and all(r["check_name"].startswith("leibniz") for r in rows)
    assert (a / "verify_report.csv").read_bytes() == (b / "verify_report.csv").read_bytes()
    assert (a / "verify_report.txt").read_bytes() == (b / "verify_report.txt").read_bytes()
    assert (a / "verify.log").exists()


def test_verify_failure_exit_one(tmp_path):
    cfg = _write(tmp_path, {"suite": {"gl_truncation": 8, "checks": ["frac_kernel_gl"]}})
    assert main(["-q", "-c", cfg, "verify", "--output-dir", str(tmp_path)]) == 1


def test_verify_bad_thread_env(tmp_path, monkeypatch):
    monkeypatch.setenv("MULTIFRAC_THREADS", "lots")
    assert main(["-q", "verify", "--checks", "grid_*", "--output-dir", str(tmp_path)]) == 2


# solve


def test_solve_default_kink(tmp_path):
    assert main(["-q", "solve", "--output-dir", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "solve_summary.json").read_text())
    assert summary["converged"] and summary["iterations"] <= 8
    assert summary["residual_norm"] < 1e-9
    assert summary["operator"]["variant"] == "Deriv"
    assert (tmp_path / "solution.csv").read_text().startswith("#")


def test_solve_zero_source_linear(tmp_path):
    cfg = _write(tmp_path, {"solve": {"operator": "kinetic", "mode": "linear", "potential": {"mass2": 1.0}}})
    assert main(["-q", "-c", cfg, "solve", "--output-dir", str(tmp_path)]) == 0
    lines = (tmp_path / "solution.csv").read_text().splitlines()[2:]
    assert all(float(l.split(",")[1]) == 0.0 and float(l.split(",")[2]) == 0.0 for l in lines)


def test_solve_implicit_rejected(tmp_path, capsys):
    assert main(["solve", "--operator", "implicit_kinetic", "--output-dir", str(tmp_path)]) == 2
    assert "no variational solve path for implicit operators" in capsys.readouterr().err


def test_solve_non_convergence_exit_one(tmp_path):
    cfg = _write(
        tmp_path,
        {
            "solve": {
                "operator": "d2",
                "domain": {"a": -20.0, "b": 20.0, "n": 512, "periodic": False},
                "potential": {"mass2": -1.0, "quartic": 1.0},
                "guess": "tanh:slope=0.9",
                "max_iter": 1,
            }
        },
    )
    assert main(["-q", "-c", cfg, "solve", "--output-dir", str(tmp_path)]) == 1


def test_solve_resonance_exit_three(tmp_path):
    cfg = _write(
        tmp_path,
        {"solve": {"operator": "d2", "mode": "linear", "potential": {"mass2": -1.0, "source": "plane_wave:k=1"}}},
    )
    assert main(["-q", "-c", cfg, "solve", "--output-dir", str(tmp_path)]) == 3


# bench


def test_bench(tmp_path):
    assert main(["-q", "bench", "--sizes", "256,512,1024", "--repeats", "1", "--output-dir", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "bench.csv")
    assert list(rows[0]) == ["backend", "n", "wall_time", "max_error_vs_spectral"]
    assert all(float(r["max_error_vs_spectral"]) == 0.0 for r in rows if r["backend"] == "spectral")
    orders = json.loads((tmp_path / "bench_orders.json").read_text())
    assert abs(orders["gl"] - 1.0) <= 0.3
    # error columns do not depend on the repeat count
    again = tmp_path / "again"
    assert main(["-q", "bench", "--sizes", "256,512,1024", "--repeats", "3", "--output-dir", str(again)]) == 0
    errs = [r["max_error_vs_spectral"] for r in rows]
    assert errs == [r["max_error_vs_spectral"] for r in _rows(again / "bench.csv")]


def test_bench_rejects_bad_sizes(tmp_path):
    assert main(["bench", "--sizes", "300", "--output-dir", str(tmp_path)]) == 2
    assert main(["bench", "--sizes", str(2**21), "--output-dir", str(tmp_path)]) == 2


def test_observed_orders():
    rows = [("gl", 100, 0.0, 1e-2), ("gl", 200, 0.0, 5e-3), ("gl", 400, 0.0, 2.5e-3)]
    assert observed_orders(rows)["gl"] == pytest.approx(1.0)


def test_module_entry_point(tmp_path):
    r = subprocess.run(
        [sys.executable, "-m", "multifrac", "measure", "--points", "3", "-o", "-"],
        capture_output=True,
        text=True,
        cwd=tmp_path,
    )
    assert r.returncode == 0
    assert r.stdout.splitlines()[0] == "x,q,v,alpha_eff"
