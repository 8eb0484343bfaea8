"""Flat ``key = value`` config files.

Blank lines and text after ``#`` are ignored.  Keys are case-insensitive.
Recognised keys::

    family      gl1 | gl2 | custom
    alpha       positive real
    beta        positive real (gl1)
    gamma_poly  coefficients, lowest degree first (custom)
    L, G, c, d  loss, attacker gain, attack cost, defense cost
    v           initial vulnerability
    variable    v | R | s            (sweeps)
    lo, hi, n   sweep range
    outputs     comma list of attacker, defender, fixed_points, baseline
    workers     threads used to evaluate sweep points
    title       chart title
"""

from __future__ import annotations

from pathlib import Path

from .defender import Scenario
from .model import model_from_config

ALIASES = {
    "loss": "l", "gain": "g", "attack_cost": "c", "defense_cost": "d",
    "a": "alpha", "b": "beta", "gamma": "gamma_poly",
}
KNOWN = {"family", "alpha", "beta", "gamma_poly", "l", "g", "c", "d", "v",
         "variable", "lo", "hi", "n", "outputs", "workers", "title"}


class ConfigError(ValueError):
    pass


def parse_config(text: str, source: str = "<config>") -> dict[str, str]:
    cfg: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        key = ALIASES.get(key, key)
        if key not in KNOWN:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in cfg:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"{source}:{lineno}: empty value for {key!r}")
        cfg[key] = value
    return cfg


def load_config(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_config(text, str(path))


def _number(cfg, key, default=None) -> float:
    if key not in cfg:
        if default is None:
            raise ConfigError(f"missing key {key!r}")
        return default
    try:
        return float(cfg[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {cfg[key]!r}") from None


def scenario_from_config(cfg: dict) -> Scenario:
    try:
        model = model_from_config(cfg)
        return Scenario.build(model, _number(cfg, "l"), _number(cfg, "g"),
                              _number(cfg, "c"), _number(cfg, "d", 1.0))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def optional_number(cfg: dict, key: str):
    return _number(cfg, key) if key in cfg else None


def parse_range(text: str) -> tuple[float, float, int]:
    """``lo:hi:n`` as used by the --v-sweep options."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"expected lo:hi:n, got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ConfigError(f"bad range {text!r}") from None
    if not (0.0 < lo < hi < 1.0) or n < 2:
        raise ConfigError(f"need 0 < lo < hi < 1 and n >= 2, got {text!r}")
    return lo, hi, n
