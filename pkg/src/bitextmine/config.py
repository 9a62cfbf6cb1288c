"""Run configuration: a JSON file with one flat section per component."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from .alignment import AlignmentParams
from .embedding.providers import ProviderConfig
from .embedding.schedule import RateLimiterConfig
from .errors import ConfigError

DEFAULT_SEED = 42


@dataclass(frozen=True)
class RunConfig:
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    rate: RateLimiterConfig = field(default_factory=RateLimiterConfig)
    align: AlignmentParams = field(default_factory=AlignmentParams)
    cache_path: str = "embeddings.cache"
    seed: int = DEFAULT_SEED
    threads: int = 1

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _build(cls, section: dict | None, name: str):
    section = dict(section or {})
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown keys in [{name}]: {sorted(unknown)}")
    try:
        return cls(**section)
    except TypeError as exc:
        raise ConfigError(f"bad [{name}] section: {exc}") from None


def config_from_dict(raw: dict, overrides: dict | None = None) -> RunConfig:
    """Build a RunConfig; ``overrides`` has the same shape and wins over ``raw``."""
    raw = json.loads(json.dumps(raw))  # deep copy
    for key, val in (overrides or {}).items():
        if isinstance(val, dict):
            raw.setdefault(key, {}).update({k: v for k, v in val.items() if v is not None})
        elif val is not None:
            raw[key] = val
    unknown = set(raw) - {"provider", "rate", "align", "cache_path", "seed", "threads"}
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    return RunConfig(
        provider=_build(ProviderConfig, raw.get("provider"), "provider"),
        rate=_build(RateLimiterConfig, raw.get("rate"), "rate"),
        align=_build(AlignmentParams, raw.get("align"), "align"),
        cache_path=str(raw.get("cache_path", "embeddings.cache")),
        seed=int(raw.get("seed", DEFAULT_SEED)),
        threads=int(raw.get("threads", 1)),
    )


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    raw = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: top level must be an object")
    return config_from_dict(raw, overrides)
