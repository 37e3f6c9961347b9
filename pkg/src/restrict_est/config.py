"""Flat ``key = value`` run configuration shared by all CLI subcommands."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, fields, replace

from .errors import ConfigError, ParameterError
from .loss import LossSpec, squared_error_location, squared_error_scale
from .models import BivariateModel, NormalSpec, Orientation, cr_gamma_model, normal_model

SEED_ENV_VAR = "RESTRICT_EST_SEED"

_MODELS = ("normal", "cr-gamma")


@dataclass(frozen=True)
class RunConfig:
    model: str = "normal"
    sigma1: float = 1.0
    sigma2: float = 1.0
    rho: float = 0.0
    component: int = 1
    loss: str = "squared-error"
    replications: int = 10000
    seed: int = 12345
    lambda_max: float = math.nan  # nan means "derive from the model"
    grid_points: int = 21
    base_theta1: float = math.nan
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    root_tol: float = 1e-8
    agreement_tol: float = 1e-6


_INT_KEYS = {"component", "replications", "seed", "grid_points"}
_FLOAT_KEYS = {
    "sigma1",
    "sigma2",
    "rho",
    "lambda_max",
    "base_theta1",
    "abs_tol",
    "rel_tol",
    "root_tol",
    "agreement_tol",
}
_STR_KEYS = {"model", "loss"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS


def orientation_of(config: RunConfig) -> Orientation:
    return Orientation.LOCATION if config.model == "normal" else Orientation.SCALE


def parse_config_text(text: str, source: str = "<config>") -> RunConfig:
    """Parse the flat format: one ``key = value`` per line, ``#`` comments."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line.rstrip()!r}")
        key, _, value = stripped.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{source}:{lineno}: key {key!r} has no value")
        raw[key] = (lineno, value)

    kwargs = {}
    for key, (lineno, value) in raw.items():
        if key in _INT_KEYS:
            try:
                kwargs[key] = int(value)
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: {key} must be an integer, got {value!r}")
        elif key in _FLOAT_KEYS:
            try:
                kwargs[key] = float(value)
            except ValueError:
                raise ConfigError(f"{source}:{lineno}: {key} must be a number, got {value!r}")
        else:
            kwargs[key] = value
    return _validate(RunConfig(**kwargs), source)


def _validate(config: RunConfig, source: str) -> RunConfig:
    if config.model not in _MODELS:
        raise ConfigError(f"{source}: model must be one of {_MODELS}, got {config.model!r}")
    if config.loss != "squared-error":
        raise ConfigError(f"{source}: unsupported loss {config.loss!r} (use 'squared-error')")
    if config.component not in (1, 2):
        raise ConfigError(f"{source}: component must be 1 or 2")
    if config.replications < 100:
        raise ConfigError(f"{source}: replications must be at least 100")
    if config.seed < 0:
        raise ConfigError(f"{source}: seed must be non-negative")
    if config.grid_points < 2:
        raise ConfigError(f"{source}: grid_points must be at least 2")
    for key in ("abs_tol", "rel_tol", "root_tol", "agreement_tol"):
        if not getattr(config, key) > 0.0:
            raise ConfigError(f"{source}: {key} must be positive")
    if config.model == "normal":
        try:
            NormalSpec(config.sigma1, config.sigma2, config.rho)
        except ParameterError as exc:
            raise ConfigError(f"{source}: {exc}") from exc
    return config


def load_config(path) -> RunConfig:
    """Read, validate, apply the seed environment override, resolve derived keys."""
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    config = parse_config_text(text, source=str(path))
    return resolve(_apply_env_seed(config))


def default_config() -> RunConfig:
    return resolve(_apply_env_seed(RunConfig()))


def _apply_env_seed(config: RunConfig) -> RunConfig:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return config
    try:
        seed = int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")
    if seed < 0:
        raise ConfigError(f"{SEED_ENV_VAR} must be non-negative")
    return replace(config, seed=seed)


def resolve(config: RunConfig) -> RunConfig:
    """Fill the model-dependent defaults so the config is fully explicit."""
    orientation = orientation_of(config)
    lambda_max = config.lambda_max
    if math.isnan(lambda_max):
        if orientation is Orientation.LOCATION:
            lambda_max = 5.0 * NormalSpec(config.sigma1, config.sigma2, config.rho).tau
        else:
            lambda_max = 20.0
    base = config.base_theta1
    if math.isnan(base):
        base = 0.0 if orientation is Orientation.LOCATION else 1.0
    if orientation is Orientation.LOCATION and not lambda_max > 0.0:
        raise ConfigError("lambda_max must be positive for location models")
    if orientation is Orientation.SCALE and not lambda_max > 1.0:
        raise ConfigError("lambda_max must exceed 1 for scale models")
    if orientation is Orientation.SCALE and not base > 0.0:
        raise ConfigError("base_theta1 must be positive for scale models")
    return replace(config, lambda_max=lambda_max, base_theta1=base)


def effective_config_text(config: RunConfig) -> str:
    """Serialize so that parsing the output reproduces the run exactly."""
    lines = []
    for f in fields(RunConfig):
        value = getattr(config, f.name)
        if isinstance(value, float):
            lines.append(f"{f.name} = {value!r}")
        else:
            lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def build_model(config: RunConfig) -> BivariateModel:
    if config.model == "normal":
        return normal_model(NormalSpec(config.sigma1, config.sigma2, config.rho))
    return cr_gamma_model()


def build_loss(config: RunConfig) -> LossSpec:
    if orientation_of(config) is Orientation.LOCATION:
        return squared_error_location()
    return squared_error_scale()
