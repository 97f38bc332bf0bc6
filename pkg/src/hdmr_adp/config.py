"""Experiment configuration: JSON loading, schema validation and defaults.

Arm coordinates in config files are 1-based; everything returned here is
0-based.
"""
from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .errors import ConfigError

DEFAULT_PHI = [round(0.1 * i, 1) for i in range(11)]

DEFAULTS: dict[str, dict[str, Any]] = {
    "randmin": {
        "axes": [150, 150, 150],
        "seeds": list(range(20)),
        "phi": DEFAULT_PHI,
        "first_order": True,
        "budget": 10**8,
        "timing_repeats": 3,
        "output": {"dir": "results/randmin"},
    },
    "bandit": {
        "arms": [3, 3],
        "horizon": 8,
        "prior": [{"outcome": 0, "arm": [1, 1], "count": 1}],
        "pinned": [{"arm": [1, 1], "p": 0.1}],
        "plays": 20000,
        "seed": 0,
        "phi": DEFAULT_PHI,
        "budget": 10**8,
        "output": {"dir": "results/bandit", "traces": False, "save_tables": False},
    },
}


def schema(kind: str) -> dict:
    try:
        text = resources.files("hdmr_adp").joinpath("schemas", f"{kind}.schema.json").read_text()
    except FileNotFoundError:
        raise ConfigError(f"unknown experiment kind {kind!r}") from None
    return json.loads(text)


def validate(raw: dict) -> dict:
    """Validate a raw config and fill in defaults; returns a new dict."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    kind = raw.get("kind")
    if kind not in DEFAULTS:
        raise ConfigError(f"config 'kind' must be one of {sorted(DEFAULTS)}, got {kind!r}")
    try:
        jsonschema.validate(raw, schema(kind))
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    cfg = copy.deepcopy(DEFAULTS[kind])
    for key, value in raw.items():
        if key == "output":
            cfg["output"].update(value)
        else:
            cfg[key] = copy.deepcopy(value)
    cfg["kind"] = kind
    if kind == "bandit":
        _check_arms(cfg)
    return cfg


def _check_arms(cfg: dict) -> None:
    arms = cfg["arms"]
    entries = [e["arm"] for e in cfg["prior"]] + [e["arm"] for e in cfg["pinned"]]
    for a in entries:
        if len(a) != len(arms) or any(v > n for v, n in zip(a, arms)):
            raise ConfigError(f"arm {a} outside the {arms} arm grid")


def load(path) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    return validate(raw)


def game_config(cfg: dict):
    """:class:`~hdmr_adp.bandit.GameConfig` from a validated bandit config."""
    from .bandit import GameConfig

    zb = lambda a: tuple(int(v) - 1 for v in a)  # noqa: E731
    return GameConfig(
        arms=tuple(cfg["arms"]),
        horizon=cfg["horizon"],
        prior=tuple((e["outcome"], zb(e["arm"]), e["count"]) for e in cfg["prior"]),
        plays=cfg["plays"],
        seed=cfg["seed"],
        pinned=tuple((zb(e["arm"]), float(e["p"])) for e in cfg["pinned"]),
    )
