"""Run configuration: YAML file merged block-wise over the packaged defaults
and validated before anything is computed."""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from .errors import ConfigError, UnknownSpec
from .fractional import SingularQuadrature
from .grid import Domain, FunctionSpec, parse_function_spec
from .measure import MeasureProfile, MeasureTerm
from .operators import OperatorSpec, operator_from_dict
from .verify import SuiteConfig

BLOCKS = ("profile", "domain", "operators", "suite", "solve", "bench", "output")
TERM_KEYS = ("alpha", "ell", "amp_cos", "amp_sin", "omega", "ell_inf", "keep_unit_offset")
DOMAIN_KEYS = ("a", "b", "n", "periodic", "offset")


def default_text() -> str:
    return resources.files("multifrac").joinpath("default_config.yaml").read_text()


@dataclass(frozen=True)
class SolveBlock:
    operator: str
    mode: str
    domain: Domain
    mass2: float
    quartic: float
    source: FunctionSpec | None
    source_scale: float
    guess: FunctionSpec | None
    tol: float
    max_iter: int
    path: str


@dataclass(frozen=True)
class BenchBlock:
    backends: tuple[str, ...]
    alpha: float
    function: FunctionSpec
    a: float
    b: float
    sizes: tuple[int, ...]
    repeats: int


@dataclass(frozen=True)
class RunConfig:
    profile: MeasureProfile | None
    domain: Domain
    operators: Mapping[str, OperatorSpec]
    suite: SuiteConfig
    solve: SolveBlock
    bench: BenchBlock
    output_dir: Path
    raw: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def operator(self, name: str) -> OperatorSpec:
        try:
            return self.operators[name]
        except KeyError:
            raise ConfigError(f"operators.{name}: no operator with that name") from None


# parsing helpers


def _mapping(value, key: str) -> Mapping:
    if not isinstance(value, Mapping):
        raise ConfigError(f"{key}: expected a mapping")
    return value


def _check_keys(block: Mapping, allowed, key: str) -> None:
    for k in block:
        if k not in allowed:
            raise ConfigError(f"{key}.{k}: unknown key")


def _num(block: Mapping, name: str, key: str, kind=float, default=None):
    if name not in block:
        if default is None:
            raise ConfigError(f"{key}.{name}: missing")
        return default
    value = block[name]
    if kind is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{key}.{name}: expected true or false")
        return value
    if isinstance(value, bool):
        raise ConfigError(f"{key}.{name}: expected a number")
    try:
        out = kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}.{name}: expected a number, got {value!r}") from None
    if kind is int and out != value:
        raise ConfigError(f"{key}.{name}: expected an integer, got {value!r}")
    return out


def parse_profile(block) -> MeasureProfile | None:
    if block is None or block == "flat":
        return None
    block = _mapping(block, "profile")
    _check_keys(block, ("mode", "terms"), "profile")
    terms = block.get("terms")
    if not isinstance(terms, list) or not terms:
        raise ConfigError("profile.terms: expected a non-empty list")
    parsed = []
    for i, t in enumerate(terms):
        key = f"profile.terms[{i}]"
        t = _mapping(t, key)
        _check_keys(t, TERM_KEYS, key)
        kw = {k: _num(t, k, key, bool if k == "keep_unit_offset" else float) for k in TERM_KEYS if k in t}
        if "alpha" not in kw:
            raise ConfigError(f"{key}.alpha: missing")
        try:
            parsed.append(MeasureTerm(**kw))
        except ValueError as exc:
            raise ConfigError(f"{key}: {exc}") from None
    try:
        return MeasureProfile(tuple(parsed), mode=str(block.get("mode", "full")))
    except ValueError as exc:
        raise ConfigError(f"profile: {exc}") from None


def parse_domain(block, key: str = "domain", defaults: Mapping | None = None) -> Domain:
    block = dict(defaults or {}) | dict(_mapping(block, key))
    _check_keys(block, DOMAIN_KEYS, key)
    try:
        return Domain(
            _num(block, "a", key),
            _num(block, "b", key),
            _num(block, "n", key, int),
            _num(block, "periodic", key, bool, True),
            _num(block, "offset", key, float, 0.5),
        )
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None


def _function(value, key: str) -> FunctionSpec | None:
    if value is None:
        return None
    try:
        return parse_function_spec(str(value))
    except (UnknownSpec, ValueError) as exc:
        raise ConfigError(f"{key}: {exc}") from None


def parse_suite(block) -> SuiteConfig:
    block = _mapping(block, "suite")
    _check_keys(block, ("seed", "n", "adjoint_n", "gl_truncation", "quadrature", "checks", "tolerances", "threads"), "suite")
    quad = _mapping(block.get("quadrature", {}), "suite.quadrature")
    _check_keys(quad, ("panels", "grading", "points"), "suite.quadrature")
    try:
        q = SingularQuadrature(
            _num(quad, "panels", "suite.quadrature", int, SingularQuadrature.panels),
            _num(quad, "grading", "suite.quadrature", float, SingularQuadrature.grading),
            _num(quad, "points", "suite.quadrature", int, SingularQuadrature.points),
        )
    except ValueError as exc:
        raise ConfigError(f"suite.quadrature: {exc}") from None
    checks = block.get("checks", ["*"])
    if isinstance(checks, str):
        checks = [checks]
    if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
        raise ConfigError("suite.checks: expected a list of glob patterns")
    tols = _mapping(block.get("tolerances") or {}, "suite.tolerances")
    tol_items = tuple(sorted((str(k), _num(tols, k, "suite.tolerances")) for k in tols))
    threads = block.get("threads")
    return SuiteConfig(
        seed=_num(block, "seed", "suite", int, 0),
        n=_num(block, "n", "suite", int, 256),
        adjoint_n=_num(block, "adjoint_n", "suite", int, 512),
        gl_truncation=_num(block, "gl_truncation", "suite", int, 1 << 16),
        quadrature=q,
        checks=tuple(checks),
        tolerances=tol_items,
        threads=None if threads is None else _num(block, "threads", "suite", int),
    )


def parse_solve(block, domain: Domain) -> SolveBlock:
    block = _mapping(block, "solve")
    _check_keys(block, ("operator", "mode", "domain", "potential", "guess", "tol", "max_iter", "path"), "solve")
    mode = str(block.get("mode", "nonlinear"))
    if mode not in ("linear", "nonlinear"):
        raise ConfigError(f"solve.mode: expected linear or nonlinear, got {mode!r}")
    path = str(block.get("path", "auto"))
    if path not in ("auto", "spectral", "dense"):
        raise ConfigError(f"solve.path: expected auto, spectral or dense, got {path!r}")
    pot = _mapping(block.get("potential", {}), "solve.potential")
    _check_keys(pot, ("mass2", "quartic", "source", "source_scale"), "solve.potential")
    d = parse_domain(block["domain"], "solve.domain") if "domain" in block else domain
    tol = _num(block, "tol", "solve", float, 1e-10)
    if not tol > 0:
        raise ConfigError("solve.tol: must be positive")
    if "operator" not in block:
        raise ConfigError("solve.operator: missing")
    return SolveBlock(
        operator=str(block["operator"]),
        mode=mode,
        domain=d,
        mass2=_num(pot, "mass2", "solve.potential", float, 0.0),
        quartic=_num(pot, "quartic", "solve.potential", float, 0.0),
        source=_function(pot.get("source"), "solve.potential.source"),
        source_scale=_num(pot, "source_scale", "solve.potential", float, 1.0),
        guess=_function(block.get("guess"), "solve.guess"),
        tol=tol,
        max_iter=_num(block, "max_iter", "solve", int, 50),
        path=path,
    )


def parse_bench(block) -> BenchBlock:
    block = _mapping(block, "bench")
    _check_keys(block, ("backends", "alpha", "function", "domain", "sizes", "repeats"), "bench")
    backends = block.get("backends", ["spectral", "gl", "quadrature"])
    if not isinstance(backends, list) or not backends:
        raise ConfigError("bench.backends: expected a non-empty list")
    for b in backends:
        if b not in ("spectral", "gl", "quadrature"):
            raise ConfigError(f"bench.backends: unknown backend {b!r}")
    dom = _mapping(block.get("domain", {"a": -20.0, "b": 20.0}), "bench.domain")
    _check_keys(dom, ("a", "b"), "bench.domain")
    sizes = block.get("sizes", [256, 512, 1024])
    return BenchBlock(
        backends=tuple(backends),
        alpha=_num(block, "alpha", "bench", float, 0.5),
        function=_function(block.get("function", "gaussian:sigma=1"), "bench.function"),
        a=_num(dom, "a", "bench.domain"),
        b=_num(dom, "b", "bench.domain"),
        sizes=parse_sizes(sizes, "bench.sizes"),
        repeats=_num(block, "repeats", "bench", int, 3),
    )


def parse_sizes(sizes, key: str = "--sizes") -> tuple[int, ...]:
    if isinstance(sizes, str):
        try:
            sizes = [int(s) for s in sizes.split(",") if s.strip()]
        except ValueError:
            raise ConfigError(f"{key}: expected comma-separated integers") from None
    if not isinstance(sizes, list) or not sizes:
        raise ConfigError(f"{key}: expected a non-empty list of sizes")
    out = []
    for s in sizes:
        if isinstance(s, bool) or not isinstance(s, int) or s < 8 or s & (s - 1) or s > 1 << 20:
            raise ConfigError(f"{key}: sizes must be powers of two in [8, 2**20], got {s!r}")
        out.append(s)
    return tuple(out)


def build(raw: Mapping[str, Any]) -> RunConfig:
    profile = parse_profile(raw["profile"])
    domain = parse_domain(raw["domain"])
    ops_block = _mapping(raw["operators"], "operators")
    operators = {}
    for name, block in ops_block.items():
        key = f"operators.{name}"
        operators[str(name)] = operator_from_dict(_mapping(block, key), profile, key)
    suite = parse_suite(raw["suite"])
    solve = parse_solve(raw["solve"], domain)
    bench = parse_bench(raw["bench"])
    out = _mapping(raw["output"], "output")
    _check_keys(out, ("directory",), "output")
    return RunConfig(profile, domain, operators, suite, solve, bench, Path(str(out.get("directory", "out"))), raw)


def load_config(path: str | Path | None = None) -> RunConfig:
    """Read ``path`` (or only the defaults) and validate every block."""
    raw = dict(yaml.safe_load(default_text()))
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            user = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"config is not valid YAML: {exc}") from None
        if user is None:
            user = {}
        user = _mapping(user, "config")
        for key in user:
            if key not in BLOCKS:
                raise ConfigError(f"{key}: unknown top-level block")
        raw.update(user)
    return build(raw)
