"""Experiment configuration: flat key = value files plus CLI overrides.

The file format is one ``key = value`` pair per line with ``#`` comments;
see docs/FORMATS.md for the full schema.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path


class ConfigError(ValueError):
    """Invalid configuration key or value."""


def _to_bool(text: str) -> bool:
    val = text.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


@dataclass
class ExperimentConfig:
    dimension: int = 2
    n: int = 64
    image: str = "shapes"          # builtin name (shapes, step, bump) or PGM path
    y_true: float = 3.0
    noise_level: float = 0.05
    seed: int = 7
    lam: float = 1.5               # config key "lambda"
    l_operator: str = "auto"       # identity | laplacian | auto
    reg: str = "quadratic"         # none | quadratic | log
    mu: float = 3.8
    anchor: float = 5.0
    solver: str = "exact"          # exact | inexact
    schedule: str = "ab"           # s | ab | lb | b
    eps0: float = 1e-3
    lsqr_cap: int = 300
    y_init: float = 5.0
    max_iterations: int = 30
    step_tol: float = 1e-8
    grad_tol: float = 1e-10
    outdir: str = "out"
    figures: bool = True


# config key -> (attribute, parser)
_SCHEMA = {
    "dimension": ("dimension", int),
    "n": ("n", int),
    "image": ("image", str),
    "y_true": ("y_true", float),
    "noise_level": ("noise_level", float),
    "seed": ("seed", int),
    "lambda": ("lam", float),
    "l": ("l_operator", str),
    "reg": ("reg", str),
    "mu": ("mu", float),
    "anchor": ("anchor", float),
    "solver": ("solver", str),
    "schedule": ("schedule", str),
    "eps0": ("eps0", float),
    "lsqr_cap": ("lsqr_cap", int),
    "y_init": ("y_init", float),
    "max_iterations": ("max_iterations", int),
    "step_tol": ("step_tol", float),
    "grad_tol": ("grad_tol", float),
    "outdir": ("outdir", str),
    "figures": ("figures", _to_bool),
}

_ATTR_TO_KEY = {attr: key for key, (attr, _) in _SCHEMA.items()}


def parse_config_text(text: str) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        pairs[key] = value
    return pairs


def apply_pairs(cfg: ExperimentConfig, pairs: dict[str, str]) -> ExperimentConfig:
    for key, value in pairs.items():
        if key not in _SCHEMA:
            raise ConfigError(f"unknown configuration key {key!r}")
        attr, parse = _SCHEMA[key]
        try:
            setattr(cfg, attr, parse(value))
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}") from exc
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return apply_pairs(ExperimentConfig(), parse_config_text(text))


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    if cfg.dimension not in (1, 2):
        raise ConfigError(f"dimension must be 1 or 2, got {cfg.dimension}")
    if cfg.dimension == 2:
        if cfg.n < 16 or cfg.n > 512 or (cfg.n & (cfg.n - 1)) != 0:
            raise ConfigError(
                f"2-D image side must be a power of two in 16..512, got {cfg.n}"
            )
    elif cfg.n < 2:
        raise ConfigError(f"signal length must be at least 2, got {cfg.n}")
    if cfg.noise_level < 0.0:
        raise ConfigError("noise_level must be nonnegative")
    if cfg.lam <= 0.0:
        raise ConfigError("lambda must be positive")
    if cfg.reg not in ("none", "quadratic", "log"):
        raise ConfigError(f"reg must be none, quadratic, or log, got {cfg.reg!r}")
    if cfg.reg != "none" and cfg.mu <= 0.0:
        raise ConfigError("mu must be positive")
    if cfg.l_operator not in ("auto", "identity", "laplacian"):
        raise ConfigError(f"l must be auto, identity, or laplacian, got {cfg.l_operator!r}")
    if cfg.l_operator == "laplacian" and cfg.dimension != 2:
        raise ConfigError("the laplacian operator needs a 2-D problem")
    if cfg.solver not in ("exact", "inexact"):
        raise ConfigError(f"solver must be exact or inexact, got {cfg.solver!r}")
    if cfg.schedule not in ("s", "ab", "lb", "b"):
        raise ConfigError(f"schedule must be one of s, ab, lb, b, got {cfg.schedule!r}")
    if cfg.eps0 <= 0.0:
        raise ConfigError("eps0 must be positive")
    if cfg.lsqr_cap < 1:
        raise ConfigError("lsqr_cap must be at least 1")
    if cfg.max_iterations < 1:
        raise ConfigError("max_iterations must be at least 1")
    if cfg.dimension == 2 and cfg.y_true <= 0.0:
        raise ConfigError("2-D blur width y_true must be positive")
    if cfg.dimension == 2 and cfg.y_init <= 0.0:
        raise ConfigError("2-D blur width y_init must be positive")
    return cfg


def config_text(cfg: ExperimentConfig) -> str:
    """Render the configuration back to the flat file format."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{_ATTR_TO_KEY[f.name]} = {value}")
    return "\n".join(lines) + "\n"
