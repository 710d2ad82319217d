"""Run configuration: defaults < config file < command-line overrides.

Config files are flat ``key = value`` text; ``#`` starts a comment.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .background import BackgroundParams
from .enhance import GAMMA_MAX, GAMMA_MIN
from .segment import DamageRule, FcmParams

ENV_VAR = "LEAFSEV_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    gamma_override: float | None = None
    gamma_min: float = GAMMA_MIN
    gamma_max: float = GAMMA_MAX
    background: BackgroundParams = field(default_factory=BackgroundParams)
    fcm: FcmParams = field(default_factory=FcmParams)
    damage: DamageRule = field(default_factory=DamageRule)
    overlay_opacity: float = 0.5

    def __post_init__(self):
        if not 0 < self.gamma_min <= self.gamma_max:
            raise ConfigError("need 0 < gamma.min <= gamma.max")
        if self.gamma_override is not None and not self.gamma_override > 0:
            raise ConfigError("gamma.override must be positive")
        if not 0 <= self.overlay_opacity <= 1:
            raise ConfigError("overlay.opacity must lie in [0, 1]")


def _opt_float(s: str) -> float | None:
    return None if s.strip().lower() in ("", "none", "auto") else float(s)


# key -> (section, attribute, parser); section None means PipelineConfig itself
KEYS = {
    "gamma.override": (None, "gamma_override", _opt_float),
    "gamma.min": (None, "gamma_min", float),
    "gamma.max": (None, "gamma_max", float),
    "overlay.opacity": (None, "overlay_opacity", float),
    "fcm.m": ("fcm", "m", float),
    "fcm.tolerance": ("fcm", "tolerance", float),
    "fcm.max_iters": ("fcm", "max_iters", int),
    "damage.cluster": ("damage", "cluster", str),
    "damage.min_separation": ("damage", "min_separation", float),
    "damage.v_reference": ("damage", "v_reference", float),
}
KEYS.update({
    f"background.{f.name}": ("background", f.name, int if f.type in ("int", int) else float)
    for f in fields(BackgroundParams)
})


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def read_config_file(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text, str(path))


def build_config(*layers: dict, base: PipelineConfig | None = None) -> PipelineConfig:
    """Apply string-valued key layers in order, later layers winning."""
    merged: dict[str, str] = {}
    for layer in layers:
        merged.update({k: v for k, v in layer.items() if v is not None})
    top: dict = {}
    sections: dict[str, dict] = {"background": {}, "fcm": {}, "damage": {}}
    for key, raw in merged.items():
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
        section, attr, parse = KEYS[key]
        try:
            value = parse(raw) if isinstance(raw, str) else raw
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {raw!r}") from exc
        (top if section is None else sections[section])[attr] = value
    cfg = base or PipelineConfig()
    try:
        for name, changes in sections.items():
            if changes:
                top[name] = replace(getattr(cfg, name), **changes)
        return replace(cfg, **top)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(config_path=None, overrides: dict | None = None) -> PipelineConfig:
    """Resolve defaults, then the config file (or $LEAFSEV_CONFIG), then overrides."""
    layers = []
    if config_path is None:
        config_path = os.environ.get(ENV_VAR) or None
    if config_path is not None:
        layers.append(read_config_file(config_path))
    layers.append(overrides or {})
    return build_config(*layers)
