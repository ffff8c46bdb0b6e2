"""Flat key=value configuration file support.

One file configures every tunable component, keys namespaced by a dotted
prefix, e.g.::

    provider.base_url = http://127.0.0.1:8000
    provider.model = gpt-3.5-turbo
    sim.dt = 0.01
    controller.yaw_tolerance = 0.01
    defaults.linear_speed = 0.2
    segmenter.frame = 0.03

Blank lines and `#` comments are ignored. Unknown keys are an error so a
typo cannot silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .controller import ControllerConfig
from .core import RobotPose
from .interpreter import DefaultsConfig
from .llm_gateway import ProviderConfig
from .simulator import SimConfig
from .speech import SegmenterConfig


class ConfigError(ValueError):
    """Malformed config file or unknown key."""


@dataclass(frozen=True)
class AppConfig:
    provider: ProviderConfig = field(
        default_factory=lambda: ProviderConfig(base_url="http://127.0.0.1:8000")
    )
    sim: SimConfig = field(default_factory=SimConfig)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    defaults: DefaultsConfig = field(default_factory=DefaultsConfig)
    segmenter: SegmenterConfig = field(default_factory=SegmenterConfig)


_SECTIONS = {
    "provider": ProviderConfig,
    "sim": SimConfig,
    "controller": ControllerConfig,
    "defaults": DefaultsConfig,
    "segmenter": SegmenterConfig,
}


def _coerce(raw: str, target_type: type) -> object:
    if target_type is float:
        return float(raw)
    if target_type is int:
        return int(raw)
    if target_type is bool:
        if raw.lower() in ("true", "1", "yes"):
            return True
        if raw.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return raw


def parse_config_text(text: str) -> AppConfig:
    sections: dict[str, dict[str, object]] = {name: {} for name in _SECTIONS}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if "." not in key:
            raise ConfigError(f"line {lineno}: key {key!r} has no section prefix")
        section, _, option = key.partition(".")
        cls = _SECTIONS.get(section)
        if cls is None:
            raise ConfigError(f"line {lineno}: unknown section {section!r}")
        fields = {f.name: f for f in dataclasses.fields(cls)}
        if option not in fields:
            raise ConfigError(f"line {lineno}: unknown option {key!r}")
        if option == "initial_pose":
            raise ConfigError(f"line {lineno}: {key!r} is not settable from a file")
        target_type = fields[option].type
        type_map = {"float": float, "int": int, "bool": bool, "str": str}
        py_type = type_map.get(str(target_type).replace(" | None", ""), str)
        try:
            sections[section][option] = _coerce(value, py_type)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None

    provider_kwargs = dict(sections["provider"])
    provider_kwargs.setdefault("base_url", "http://127.0.0.1:8000")
    try:
        return AppConfig(
            provider=ProviderConfig(**provider_kwargs),
            sim=SimConfig(initial_pose=RobotPose(), **sections["sim"]),
            controller=ControllerConfig(**sections["controller"]),
            defaults=DefaultsConfig(**sections["defaults"]),
            segmenter=SegmenterConfig(**sections["segmenter"]),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def load_config(path: str | Path) -> AppConfig:
    return parse_config_text(Path(path).read_text())
