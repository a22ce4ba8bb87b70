"""Run configuration: an INI file with one section per pipeline stage.

Every default reproduces the perturbed-linear-map experiment (operator ``f5``,
250 uniform seeds, 50 survivors, 5 refinement steps, tau = 5, PCA basis,
alpha = 0.1, box [-5, 5]^2).

Example::

    [run]
    seed = 0

    [operator]
    key = R
    r = 3

    [search]
    n = 500
    n0 = 100
    steps = 10
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from typing import Optional

from .eigensearch import SearchConfig
from .errors import ConfigError

BASIS_MODES = ("direct", "pca", "octant", "user")
CENTERS = ("mean", "origin")


def _matrix(text: str) -> tuple:
    """Parse ``"1 1; 1 -1"`` into ((1.0, 1.0), (1.0, -1.0))."""
    rows = [r.split() for r in text.replace(",", " ").split(";") if r.strip()]
    try:
        return tuple(tuple(float(v) for v in row) for row in rows)
    except ValueError:
        raise ConfigError(f"cannot parse matrix {text!r}") from None


def _fmt_matrix(m) -> str:
    return "; ".join(" ".join(repr(float(v)) for v in row) for row in m)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class RunConfig:
    operator: str = "f5"
    operator_params: dict = field(default_factory=dict)
    seed: int = 0
    N: int = 250
    N0: int = 50
    N1: int = 10
    tau: float = 5.0
    steps: int = 5
    box: Optional[tuple] = None
    variance_mode: str = "code"
    distribution: str = "uniform"
    basis_mode: str = "pca"
    center: str = "mean"
    tol_angle: float = 0.1
    sigmas: Optional[tuple] = None
    vectors: Optional[tuple] = None
    alpha: float = 0.1
    grid: int = 51
    mc_points: int = 10000
    audit_grid: int = 101
    oracle: bool = False

    def __post_init__(self):
        try:
            params = {str(k): float(v) for k, v in self.operator_params.items()}
        except (TypeError, ValueError):
            raise ConfigError(f"operator parameters must be numbers: {self.operator_params}") from None
        object.__setattr__(self, "operator_params", params)
        if self.basis_mode not in BASIS_MODES:
            raise ConfigError(f"basis mode must be one of {BASIS_MODES}")
        if self.center not in CENTERS:
            raise ConfigError(f"center must be one of {CENTERS}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError("alpha must lie in [0, 1]")
        if self.basis_mode == "octant" and not self.sigmas:
            raise ConfigError("basis mode 'octant' needs sigmas")
        if self.basis_mode == "user" and not self.vectors:
            raise ConfigError("basis mode 'user' needs vectors")
        if not self.tol_angle > 0:
            raise ConfigError("tol_angle must be positive")
        if self.grid < 2 or self.audit_grid < 2:
            raise ConfigError("grid sizes must be at least 2")
        if self.mc_points < 1:
            raise ConfigError("mc_points must be positive")
        self.search_config()  # validates the search fields

    def search_config(self) -> SearchConfig:
        return SearchConfig(
            N=self.N,
            N0=self.N0,
            N1=self.N1,
            tau=self.tau,
            steps=self.steps,
            box=self.box,
            rng_seed=self.seed,
            variance_mode=self.variance_mode,
            distribution=self.distribution,
        )

    def with_seed(self, seed: Optional[int]) -> "RunConfig":
        return self if seed is None else replace(self, seed=seed)


# (section, ini key, field name, parser, formatter)
_SCHEMA = [
    ("run", "seed", "seed", int, str),
    ("search", "n", "N", int, str),
    ("search", "n0", "N0", int, str),
    ("search", "n1", "N1", int, str),
    ("search", "tau", "tau", float, repr),
    ("search", "steps", "steps", int, str),
    ("search", "box", "box", _matrix, _fmt_matrix),
    ("search", "variance_mode", "variance_mode", str, str),
    ("search", "distribution", "distribution", str, str),
    ("basis", "mode", "basis_mode", str, str),
    ("basis", "center", "center", str, str),
    ("basis", "tol_angle", "tol_angle", float, repr),
    ("basis", "sigmas", "sigmas", _matrix, _fmt_matrix),
    ("basis", "vectors", "vectors", _matrix, _fmt_matrix),
    ("extension", "alpha", "alpha", float, repr),
    ("evaluate", "grid", "grid", int, str),
    ("benchmark", "mc_points", "mc_points", int, str),
    ("benchmark", "audit_grid", "audit_grid", int, str),
    ("benchmark", "oracle", "oracle", _bool, lambda b: "true" if b else "false"),
]
_SECTIONS = {"run", "operator", "search", "basis", "extension", "evaluate", "benchmark"}


def parse_config(text: str) -> RunConfig:
    """Parse INI text. Unknown sections or keys are errors.

    ``#`` starts a comment anywhere on a line (``;`` separates matrix rows).
    """
    cp = configparser.ConfigParser(
        interpolation=None, default_section="__none__", comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    unknown = set(cp.sections()) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections {sorted(unknown)}")
    kwargs = {}
    known = {(s, k) for s, k, *_ in _SCHEMA}
    for section in cp.sections():
        if section == "operator":
            continue
        for key in cp[section]:
            if (section, key) not in known:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    for section, key, name, parse, _ in _SCHEMA:
        if cp.has_option(section, key):
            raw = cp.get(section, key)
            try:
                kwargs[name] = parse(raw)
            except ValueError:
                raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from None
    if cp.has_section("operator"):
        op = dict(cp["operator"])
        kwargs["operator"] = op.pop("key", "f5")
        kwargs["operator_params"] = op
    return RunConfig(**kwargs)


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None


def format_config(cfg: RunConfig) -> str:
    """Effective config as INI text; ``parse_config`` of the result equals ``cfg``."""
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.add_section("run")
    cp.add_section("operator")
    cp.set("operator", "key", cfg.operator)
    for k in sorted(cfg.operator_params):
        cp.set("operator", k, repr(cfg.operator_params[k]))
    for section, key, name, _, fmt in _SCHEMA:
        value = getattr(cfg, name)
        if value is None:
            continue
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, fmt(value))
    lines = []
    for section in cp.sections():
        lines.append(f"[{section}]")
        lines.extend(f"{k} = {v}" for k, v in cp[section].items())
        lines.append("")
    return "\n".join(lines)
