"""Flat key=value configuration with section prefixes.

Every model constant lives in one of the parameter dataclasses; a config file
overrides defaults, and CLI flags override the config. Example:

    jnd2d.eps_texture=2.25
    sphere.x_max=1024
    fovea.s_thresh=0.5
    qp.base_qp=36
    pipeline.fovea_enabled=false
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .assess import InjectionConfig
from .errors import InputError, ValidationError
from .fovea import FoveaParams
from .jnd2d import Jnd2dParams
from .qpexport import QpMapConfig
from .sphere import SphereParams

ENV_CONFIG_VAR = "SJND_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    jnd2d: Jnd2dParams = field(default_factory=Jnd2dParams)
    sphere: SphereParams = field(default_factory=SphereParams)
    fovea: FoveaParams = field(default_factory=FoveaParams)
    inject: InjectionConfig = field(default_factory=InjectionConfig)
    qp: QpMapConfig = field(default_factory=QpMapConfig)
    fovea_enabled: bool = True
    stat_bands: int = 10
    threads: int = 1

    def validate(self) -> None:
        self.jnd2d.validate()
        self.sphere.validate()
        self.fovea.validate()
        self.inject.validate()
        self.qp.validate()
        if self.stat_bands < 1:
            raise ValidationError("pipeline.stat_bands must be >= 1")
        if self.threads < 1:
            raise ValidationError("run.threads must be >= 1")


# section name -> (config attribute holding a dataclass, or None for RunConfig fields)
_SECTIONS = {
    "jnd2d": "jnd2d",
    "sphere": "sphere",
    "fovea": "fovea",
    "inject": "inject",
    "qp": "qp",
}
_TOP_LEVEL = {
    "pipeline.fovea_enabled": "fovea_enabled",
    "pipeline.stat_bands": "stat_bands",
    "run.threads": "threads",
}


def _coerce(raw: str, target_type, key: str):
    raw = raw.strip()
    if target_type is bool:
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ValidationError(f"config {key}: expected a boolean, got {raw!r}")
    try:
        if target_type is int:
            return int(raw)
        if target_type is float:
            return float(raw)
    except ValueError:
        raise ValidationError(f"config {key}: cannot parse {raw!r}") from None
    return raw  # str field


def apply_settings(cfg: RunConfig, settings: dict[str, str]) -> RunConfig:
    """Return a new config with dotted key=value overrides applied."""
    group_updates: dict[str, dict] = {}
    top_updates: dict = {}
    for key, raw in settings.items():
        if key in _TOP_LEVEL:
            attr = _TOP_LEVEL[key]
            top_updates[attr] = _coerce(raw, type(getattr(cfg, attr)), key)
            continue
        if "." not in key:
            raise ValidationError(f"config key {key!r} must be section.name")
        section, name = key.split(".", 1)
        if section not in _SECTIONS:
            raise ValidationError(f"unknown config section {section!r} in {key!r}")
        group = getattr(cfg, _SECTIONS[section])
        match = {f.name: f for f in fields(group)}.get(name)
        if match is None:
            raise ValidationError(f"unknown config key {key!r}")
        value = _coerce(raw, type(getattr(group, name)), key)
        group_updates.setdefault(section, {})[name] = value
    kwargs = dict(top_updates)
    for section, upd in group_updates.items():
        attr = _SECTIONS[section]
        kwargs[attr] = replace(getattr(cfg, attr), **upd)
    return replace(cfg, **kwargs) if kwargs else cfg


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    settings: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValidationError(f"config line {lineno}: expected key=value, got {stripped!r}")
        key, raw = stripped.split("=", 1)
        settings[key.strip()] = raw
    cfg = apply_settings(base or RunConfig(), settings)
    cfg.validate()
    return cfg


def load_config(path=None, base: RunConfig | None = None) -> RunConfig:
    """Load config from a path, falling back to $SJND_CONFIG, then defaults."""
    if path is None:
        path = os.environ.get(ENV_CONFIG_VAR) or None
    if path is None:
        cfg = base or RunConfig()
        cfg.validate()
        return cfg
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {p}")
    return parse_config(p.read_text(), base)


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def dump_config(cfg: RunConfig) -> str:
    """Serialize every setting; parse_config(dump_config(c)) == c."""
    lines = []
    for section, attr in _SECTIONS.items():
        group = getattr(cfg, attr)
        for f in fields(group):
            lines.append(f"{section}.{f.name}={_format_value(getattr(group, f.name))}")
    for key, attr in _TOP_LEVEL.items():
        lines.append(f"{key}={_format_value(getattr(cfg, attr))}")
    return "\n".join(lines) + "\n"
