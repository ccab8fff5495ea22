"""Flat dotted-key run configuration.

A config file is a JSON object whose keys are dotted names such as
``"grid.n"`` or ``"converge.epsilons"``.  Nested objects are flattened on load,
so ``{"grid": {"n": 256}}`` is equivalent.  Unknown keys are rejected; missing
keys take the command's default, except the ones marked :data:`REQUIRED`.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

REQUIRED = object()

COMMON = {
    "model": "GfCH",
    "p": 1,
    "nu": 1.0,
    "eps": 0.1,
    "delta": 0.1,
    "seed": 0,
    "grid.n": 256,
    "grid.length": 40.0,
    "stepper.scheme": "RK4-IntegratingFactor",
    "stepper.dt": None,
    "stepper.dt_factor": 0.2,
    "stepper.t_end": 1.0,
    "stepper.snapshot_every": 0,
    "stepper.cfl_guard": 0.5,
    "output.dir": "out",
}

COMMANDS = {
    "solve": {
        "initial.profile": "gaussian",
        "initial.center": None,
        "initial.sigma": 2.0,
        "initial.amplitude": 1.0,
        "initial.kmax": 8,
        "initial.velocity": "zero",
    },
    "validate": {
        "validate.n_fields": 50,
        "validate.horizon": 10.0,
        "validate.hierarchy_n": 192,
        "validate.hierarchy_length": 48.0,
        "validate.sigma": 2.0,
    },
    "converge": {
        "converge.reduced": "GfCH",
        "converge.epsilons": REQUIRED,
        "converge.deltas": REQUIRED,
        "converge.eps_fixed": 1e-3,
        "converge.delta_fixed": None,
        "converge.sigma": 2.0,
        "converge.S_end": 1.0,
        "converge.min_slope_eps": None,
        "converge.min_slope_delta": None,
    },
}

PRESETS = ("solve_gfch", "solve_boussinesq", "validate", "converge_p1nu1")


class ConfigError(ValueError):
    pass


def flatten(tree: dict, prefix: str = "") -> dict:
    out = {}
    for key, value in tree.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(flatten(value, name + "."))
        else:
            out[name] = value
    return out


def _check_type(key, value, default):
    if default is None or default is REQUIRED or value is None:
        return value
    if isinstance(default, bool):
        ok = isinstance(value, bool)
    elif isinstance(default, int):
        ok = isinstance(value, int) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        value = float(value) if ok else value
    else:
        ok = isinstance(value, type(default))
    if not ok:
        raise ConfigError(f"config key {key!r} has the wrong type: expected {type(default).__name__}, got {value!r}")
    return value


def resolve(command: str, raw: dict | None = None, overrides: dict | None = None) -> dict:
    """Merge ``raw`` and ``overrides`` over the defaults of ``command``."""
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    schema = {**COMMON, **COMMANDS[command]}
    given = {**flatten(raw or {}), **(overrides or {})}
    unknown = sorted(set(given) - set(schema))
    if unknown:
        raise ConfigError(f"unknown config key(s) for {command!r}: {', '.join(unknown)}")
    out = {}
    for key, default in schema.items():
        if key in given:
            out[key] = _check_type(key, given[key], default)
        elif default is REQUIRED:
            raise ConfigError(f"missing required config key {key!r}")
        else:
            out[key] = default
    return out


def load_file(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def load_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}")
    text = resources.files("gfch").joinpath("presets", f"{name}.json").read_text()
    return json.loads(text)


def preset_command(name: str) -> str:
    return name.split("_", 1)[0]
