"""Experiment configuration: a YAML mapping with every default made explicit.

A configuration names the dimension, the discretization, the perturbation
direction and the tolerances of one experiment.  ``ExperimentConfig.to_dict``
echoes all resolved values so that an emitted config reruns byte-identically.

Perturbation directions (``f``)::

    f: {type: zonal, params: {degree: 2, amplitude: 1.0}}
    f: {type: zonal, params: {modes: [[1, 0.3], [2, 1.0]]}}
    f: {type: harmonic, params: {modes: [[2, 1, 3.0]]}}     # (l, m, amplitude), n = 2
    f: {type: expression, params: {expr: "x0*x2 + 0.5"}}
    f: {type: random, params: {band: 4, seed: 3}}
"""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field, fields

import numpy as np
import yaml

from .fields import ExpressionFunction, LinearCombination, Polynomial, solid_harmonic, zonal_polynomial

__all__ = ["ConfigError", "ExperimentConfig", "FieldSpec", "build_field", "load_config", "parse_config"]

DEFAULT_TOLERANCES = {
    "lemma_rel": 1e-7,
    "willmore_floor": 1e-8,
    "spectral_rel": 1e-4,
    "first_variation": 1e-6,
    "eigen": 1e-3,
    "sphere_eigen": 1e-2,
    "zero_eigen": 2e-2,
    "scan": 1e-10,
}


class ConfigError(ValueError):
    """Invalid configuration, with the source line when known."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None, text: str | None = None):
        self.path, self.line, self.message = path, line, message
        where = f"{path or '<config>'}" + (f":{line}" if line is not None else "")
        msg = f"{where}: {message}"
        if text is not None:
            msg += f"\n    {line} | {text.rstrip()}"
        super().__init__(msg)


@dataclass
class FieldSpec:
    type: str = "zonal"
    params: dict = field(default_factory=lambda: {"degree": 2, "amplitude": 1.0})


@dataclass
class ExperimentConfig:
    n: int = 2
    resolution: int = 32
    depth: int = 5
    zonal_resolution: int = 512
    seed: int = 0
    threads: int = 1
    t_max: float | None = None
    t_grid: list = field(default_factory=lambda: [-0.08, -0.05, -0.02, 0.0, 0.02, 0.05, 0.08])
    f: FieldSpec = field(default_factory=FieldSpec)
    points: int = 100
    random_fields: int = 4
    samples: int = 100
    amplitude: float = 0.2
    band: int = 4
    k_max: int = 12
    operator: str = "mean"
    surfaces: list = field(default_factory=list)
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    def validate(self) -> None:
        if self.n < 2:
            raise ConfigError("n must be >= 2")
        if self.resolution < 4:
            raise ConfigError("resolution must be >= 4")
        if self.depth < 3:
            raise ConfigError("depth must be >= 3")
        if self.zonal_resolution < 64:
            raise ConfigError("zonal_resolution must be >= 64")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.operator not in ("mean", "jacobi"):
            raise ConfigError("operator must be 'mean' or 'jacobi'")
        if self.f.type not in ("zonal", "harmonic", "expression", "random"):
            raise ConfigError(f"unknown f type {self.f.type!r}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys {sorted(unknown)}")


_SIMPLE = {f.name: f for f in fields(ExperimentConfig)}


def _coerce(name: str, value, default):
    if name == "t_max":
        return None if value is None else float(value)
    if name in ("t_grid",):
        if not isinstance(value, list):
            raise TypeError("expected a list of numbers")
        return [float(v) for v in value]
    if name == "surfaces":
        if not isinstance(value, list) or not all(isinstance(s, dict) for s in value):
            raise TypeError("expected a list of mappings")
        return value
    if name == "tolerances":
        if not isinstance(value, dict):
            raise TypeError("expected a mapping")
        merged = dict(DEFAULT_TOLERANCES)
        merged.update({k: float(v) for k, v in value.items()})
        return merged
    if name == "f":
        if not isinstance(value, dict) or "type" not in value:
            raise TypeError("expected a mapping with a 'type' key")
        extra = set(value) - {"type", "params"}
        if extra:
            raise TypeError(f"unexpected keys {sorted(extra)}")
        return FieldSpec(str(value["type"]), dict(value.get("params") or {}))
    if isinstance(default, bool):
        return bool(value)
    if isinstance(default, int):
        if isinstance(value, bool) or not float(value).is_integer():
            raise TypeError("expected an integer")
        return int(value)
    if isinstance(default, float):
        return float(value)
    if isinstance(default, str):
        return str(value)
    return value


def parse_config(text: str, path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Parse YAML text into a validated :class:`ExperimentConfig`."""
    lines = text.splitlines()
    try:
        root = yaml.compose(text)
        data = yaml.safe_load(text) if root is not None else {}
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark is not None else None
        src = lines[line - 1] if line is not None and 0 < line <= len(lines) else None
        raise ConfigError(f"YAML syntax error: {exc.problem}", path, line, src) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", path, 1, lines[0] if lines else None)
    key_lines = {}
    if root is not None and isinstance(root, yaml.MappingNode):
        for knode, _ in root.value:
            key_lines[knode.value] = knode.start_mark.line + 1
    cfg = ExperimentConfig()
    defaults = ExperimentConfig()
    for key, value in data.items():
        line = key_lines.get(key)
        src = lines[line - 1] if line is not None else None
        if key not in _SIMPLE:
            raise ConfigError(f"unknown key {key!r}", path, line, src)
        try:
            setattr(cfg, key, _coerce(key, value, getattr(defaults, key)))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", path, line, src) from exc
    for key, value in (overrides or {}).items():
        if value is not None:
            setattr(cfg, key, _coerce(key, value, getattr(defaults, key)))
    try:
        cfg.validate()
    except ConfigError as exc:
        raise ConfigError(exc.message, path) from exc
    return cfg


def load_config(path: str | None, overrides: dict | None = None) -> ExperimentConfig:
    if path is None:
        return parse_config("", None, overrides)
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from exc
    return parse_config(text, path, overrides)


def build_field(spec: FieldSpec, n: int, seed: int = 0):
    """Ambient function for the configured perturbation direction."""
    p = spec.params
    try:
        if spec.type == "zonal":
            modes = p.get("modes") or [[p.get("degree", 2), p.get("amplitude", 1.0)]]
            terms = tuple((float(a), zonal_polynomial(n, int(k))) for k, a in modes)
            return LinearCombination(terms, offset=float(p.get("offset", 0.0)))
        if spec.type == "harmonic":
            if n != 2:
                raise ConfigError("harmonic fields with an azimuthal order need n = 2; use type 'zonal'")
            terms = tuple((float(a), solid_harmonic(int(l), int(m))) for l, m, a in p["modes"])
            return LinearCombination(terms, offset=float(p.get("offset", 0.0)))
        if spec.type == "expression":
            return ExpressionFunction(str(p["expr"]), n + 1)
        if spec.type == "random":
            return random_field(n, int(p.get("band", 4)), int(p.get("seed", seed)), bool(p.get("zonal", n > 2)))
    except KeyError as exc:
        raise ConfigError(f"f.params is missing {exc.args[0]!r}") from exc
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid f.params: {exc}") from exc
    raise ConfigError(f"unknown f type {spec.type!r}")


def random_field(n: int, band: int, seed: int, zonal: bool):
    """Gaussian combination of harmonics of degree ``0..band`` (zonal ones when asked)."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, n, band]))
    if zonal:
        basis = [zonal_polynomial(n, k) for k in range(band + 1)]
    else:
        if n != 2:
            raise ConfigError("non-zonal random fields need n = 2")
        basis = [solid_harmonic(l, m) for l in range(band + 1) for m in range(-l, l + 1)]
    coeffs = rng.standard_normal(len(basis))
    return LinearCombination(tuple((float(c), b) for c, b in zip(coeffs, basis)))


def constant_field(n: int, value: float = 0.0) -> Polynomial:
    return Polynomial.constant(n + 1, value)


def copy_config(cfg: ExperimentConfig, **changes) -> ExperimentConfig:
    out = copy.deepcopy(cfg)
    for k, v in changes.items():
        setattr(out, k, v)
    return out
