"""Run configuration: flat key-value files with dotted section keys.

Unknown keys are hard errors: a silently ignored model key changes the
mathematical meaning of a run. Values are plain scalars; booleans and nesting
are deliberately absent.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .grid import SCHEMES, UNIFORM, Grid, build_grid
from .model import (
    COMPOSITE,
    CONSTANT,
    COUNTEREXAMPLE,
    HIERARCHICAL,
    VARIANTS,
    CompositeRate,
    ModelSpec,
    composite_model,
    constant_model,
    counterexample_model,
    default_x_max,
    hierarchical_model,
)
from .solver import SolverConfig

_MODEL_KEYS = {
    CONSTANT: {"model.mu0": True, "model.g0": True, "model.beta0": True},
    COUNTEREXAMPLE: {"model.g": False},
    HIERARCHICAL: {
        "model.g_low": True,
        "model.g_high": True,
        "model.mu0": True,
        "model.b0": True,
    },
}

_COMPOSITE_SUBKEYS = {
    "const": True,
    "x_amp": False,
    "x_rate": False,
    "u_sat": False,
    "u_inv": False,
    "functional": False,
    "tail_from": False,
    "weight_decay": False,
}

_GRID_KEYS = ("grid.n", "grid.x_max", "grid.scheme")

_SOLVER_KEYS = {
    "solver.picard_tol": ("picard_tol", float),
    "solver.picard_max_iter": ("picard_max_iter", int),
    "solver.picard_damping": ("picard_damping", float),
    "solver.lambda_min": ("lambda_min", float),
    "solver.lambda_max": ("lambda_max", float),
    "solver.scan_points": ("scan_points", int),
    "solver.root_tol": ("root_tol", float),
    "solver.map_a_max_iter": ("map_A_max_iter", int),
    "solver.seed": ("seed", int),
}


@dataclass(frozen=True)
class RunConfig:
    model: ModelSpec
    grid: Grid
    solver: SolverConfig
    out_dir: str


def _parse_pairs(text: str) -> dict:
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("line %d is not 'key = value': %r" % (lineno, raw.strip()))
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError("line %d has an empty key or value" % lineno, key=key or None)
        if key in pairs:
            raise ConfigError("duplicate key %r" % key, key=key)
        pairs[key] = value
    return pairs


def _take_float(pairs: dict, key: str, default=None):
    if key not in pairs:
        if default is None:
            raise ConfigError("missing required key %r" % key, key=key)
        return default
    raw = pairs.pop(key)
    try:
        return float(raw)
    except ValueError:
        raise ConfigError("key %r expects a number, got %r" % (key, raw), key=key) from None


def _take_int(pairs: dict, key: str, default=None):
    if key not in pairs:
        if default is None:
            raise ConfigError("missing required key %r" % key, key=key)
        return default
    raw = pairs.pop(key)
    try:
        return int(raw)
    except ValueError:
        raise ConfigError("key %r expects an integer, got %r" % (key, raw), key=key) from None


def _build_composite_rate(pairs: dict, rate: str) -> CompositeRate:
    prefix = "model.%s." % rate
    kwargs = {}
    for sub, required in _COMPOSITE_SUBKEYS.items():
        key = prefix + sub
        if sub == "functional":
            if key in pairs:
                kwargs["functional"] = pairs.pop(key)
            continue
        if required:
            kwargs[sub] = _take_float(pairs, key)
        elif key in pairs:
            kwargs[sub] = _take_float(pairs, key, default=0.0)
    try:
        return CompositeRate(**kwargs)
    except ValueError as exc:
        raise ConfigError("invalid composite rate %r: %s" % (rate, exc), key=prefix + "const")


def _build_model(pairs: dict) -> ModelSpec:
    if "model.variant" not in pairs:
        raise ConfigError("missing required key 'model.variant'", key="model.variant")
    variant = pairs.pop("model.variant")
    if variant not in VARIANTS:
        raise ConfigError(
            "key 'model.variant' must be one of %s, got %r" % (list(VARIANTS), variant),
            key="model.variant",
        )
    try:
        if variant == CONSTANT:
            return constant_model(
                mu0=_take_float(pairs, "model.mu0"),
                g0=_take_float(pairs, "model.g0"),
                beta0=_take_float(pairs, "model.beta0"),
            )
        if variant == COUNTEREXAMPLE:
            return counterexample_model(g=_take_float(pairs, "model.g", default=1.0))
        if variant == HIERARCHICAL:
            return hierarchical_model(
                g_low=_take_float(pairs, "model.g_low"),
                g_high=_take_float(pairs, "model.g_high"),
                mu0=_take_float(pairs, "model.mu0"),
                b0=_take_float(pairs, "model.b0"),
            )
        return composite_model(
            g=_build_composite_rate(pairs, "g"),
            mu=_build_composite_rate(pairs, "mu"),
            beta=_build_composite_rate(pairs, "beta"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("invalid model parameters: %s" % exc, key="model.variant")


def load_config(path: str, out_dir: str | None = None) -> RunConfig:
    """Parse a config file into validated model, grid and solver objects."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError("cannot read config file %s: %s" % (path, exc))
    pairs = _parse_pairs(text)

    model = _build_model(pairs)

    n = _take_int(pairs, "grid.n", default=4001)
    scheme = pairs.pop("grid.scheme", UNIFORM)
    if scheme not in SCHEMES:
        raise ConfigError(
            "key 'grid.scheme' must be one of %s, got %r" % (list(SCHEMES), scheme),
            key="grid.scheme",
        )
    if "grid.x_max" in pairs:
        x_max = _take_float(pairs, "grid.x_max")
        if x_max <= 0:
            raise ConfigError("key 'grid.x_max' must be positive", key="grid.x_max")
    else:
        x_max = default_x_max(model.bounds)
    try:
        grid = build_grid(x_max=x_max, n=n, scheme=scheme)
    except ValueError as exc:
        raise ConfigError("invalid grid parameters: %s" % exc, key="grid.n")

    solver_kwargs = {}
    for key, (attr, cast) in _SOLVER_KEYS.items():
        if key in pairs:
            raw = pairs.pop(key)
            try:
                solver_kwargs[attr] = cast(float(raw)) if cast is int else cast(raw)
            except ValueError:
                raise ConfigError("key %r expects a number, got %r" % (key, raw), key=key)
    try:
        solver = SolverConfig(**solver_kwargs)
    except ValueError as exc:
        raise ConfigError("invalid solver parameters: %s" % exc, key="solver.picard_tol")

    cfg_out = pairs.pop("output.dir", "steadypop_out")
    if pairs:
        key = sorted(pairs)[0]
        raise ConfigError("unknown key %r" % key, key=key)
    return RunConfig(model=model, grid=grid, solver=solver,
                     out_dir=out_dir if out_dir is not None else cfg_out)
