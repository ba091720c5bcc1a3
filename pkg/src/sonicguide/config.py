"""Line-oriented ``key = value`` configuration, merged with CLI flags.

Precedence: flags > config file > built-in defaults.  Unknown keys are
errors so typos cannot silently fall back to defaults.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .mapping import MappingConfig
from .synth import SynthConfig

__all__ = ["ConfigError", "ServiceOptions", "AppConfig", "load_config"]


class ConfigError(ValueError):
    """Bad configuration file or value."""


@dataclass(frozen=True)
class ServiceOptions:
    addr: str | None = None        # None: resolve env var / default at serve time
    dwell_time: float = 0.5
    trial_timeout: float = 60.0
    log_dir: str | None = None
    mode: str = "3d"

    def __post_init__(self) -> None:
        if self.mode not in ("2d", "3d"):
            raise ConfigError(f"mode must be '2d' or '3d', got {self.mode!r}")
        if self.dwell_time <= 0.0 or self.trial_timeout <= 0.0:
            raise ConfigError("dwell_time and trial_timeout must be positive")


@dataclass(frozen=True)
class AppConfig:
    mapping: MappingConfig = MappingConfig()
    synth: SynthConfig = SynthConfig()
    service: ServiceOptions = ServiceOptions()


_SECTIONS = {
    "mapping": (MappingConfig, {f.name: f for f in dataclasses.fields(MappingConfig)}),
    "synth": (SynthConfig, {f.name: f for f in dataclasses.fields(SynthConfig)}),
    "service": (ServiceOptions, {f.name: f for f in dataclasses.fields(ServiceOptions)}),
}


def known_keys() -> list[str]:
    keys: list[str] = []
    for _, fields in _SECTIONS.values():
        keys.extend(fields)
    return sorted(keys)


def _coerce(key: str, value: str, target_type) -> object:
    try:
        if target_type is int:
            return int(value)
        if target_type is float:
            return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a {target_type.__name__}, got {value!r}") from None
    if value.lower() in ("none", ""):
        return None
    return value


def _field_type(field: dataclasses.Field):
    if field.type in ("int",):
        return int
    if field.type in ("float",):
        return float
    if isinstance(field.default, bool):
        return bool
    if isinstance(field.default, int):
        return int
    if isinstance(field.default, float):
        return float
    return str


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        values[key] = value
    return values


def load_config(path: str | Path | None = None, overrides: dict[str, object] | None = None) -> AppConfig:
    """Build the merged configuration.

    ``overrides`` maps flat keys (e.g. from CLI flags) to already-typed
    values; they win over the file, which wins over defaults.
    """
    raw: dict[str, object] = {}
    if path is not None:
        text = Path(path).read_text()
        for key, value in parse_config_text(text, str(path)).items():
            raw[key] = value
    if overrides:
        for key, value in overrides.items():
            if value is not None:
                raw[key] = value

    per_section: dict[str, dict[str, object]] = {name: {} for name in _SECTIONS}
    for key, value in raw.items():
        for name, (_, fields) in _SECTIONS.items():
            if key in fields:
                if isinstance(value, str):
                    value = _coerce(key, value, _field_type(fields[key]))
                per_section[name][key] = value
                break
        else:
            raise ConfigError(f"unknown configuration key {key!r} (known: {', '.join(known_keys())})")

    try:
        return AppConfig(
            mapping=MappingConfig(**per_section["mapping"]),
            synth=SynthConfig(**per_section["synth"]),
            service=ServiceOptions(**per_section["service"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
