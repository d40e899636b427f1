# -*- coding: utf-8 -*-
import os
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Type, TypeVar

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from walkfield.errors import ConfigError

load_dotenv()


def _env(key: str, default: str) -> str:
    return os.getenv(key, default).strip()


class Settings(BaseModel):
    log_level: str = Field(default_factory=lambda: _env("WALKFIELD_LOG_LEVEL", "INFO").upper())
    log_dir: str = Field(default_factory=lambda: _env("WALKFIELD_LOG_DIR", "logs"))
    out_dir: str = Field(default_factory=lambda: _env("WALKFIELD_OUT_DIR", "out"))
    max_events: str = Field(default_factory=lambda: _env("WALKFIELD_MAX_EVENTS", "50000000"))
    dense_limit: str = Field(default_factory=lambda: _env("WALKFIELD_DENSE_LIMIT", "2000"))
    workers: str = Field(default_factory=lambda: _env("WALKFIELD_WORKERS", "1"))
    columbus_gal: str = Field(default_factory=lambda: _env("WALKFIELD_COLUMBUS_GAL", ""))

    def checked(self) -> "Settings":
        bad = []
        if self.log_level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            bad.append("WALKFIELD_LOG_LEVEL")
        for key, value in (
            ("WALKFIELD_MAX_EVENTS", self.max_events),
            ("WALKFIELD_DENSE_LIMIT", self.dense_limit),
            ("WALKFIELD_WORKERS", self.workers),
        ):
            if not value.isdigit() or int(value) < 1:
                bad.append(key)
        if bad:
            raise ConfigError(f"invalid environment values: {', '.join(bad)}")
        return self

    @property
    def event_cap(self) -> int:
        return int(self.max_events)

    @property
    def dense_max(self) -> int:
        return int(self.dense_limit)

    @property
    def pool_size(self) -> int:
        return int(self.workers)


settings = Settings().checked()


# ---------- run configuration files ----------

class RunConfig(BaseModel):
    """Base for per-command configs; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    seed: Optional[int] = Field(default=None, ge=0, lt=2**64)


RawConfig = Dict[str, Tuple[str, int]]
C = TypeVar("C", bound=RunConfig)


def read_run_config(path: Path) -> RawConfig:
    """Parse flat ``key = value`` text into {key: (value, line)}."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    raw: RawConfig = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in body.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in raw:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        raw[key] = (value, lineno)
    return raw


def bind_config(model: Type[C], raw: RawConfig, overrides: Optional[Dict[str, Any]] = None,
                source: str = "config") -> C:
    values: Dict[str, Any] = {key: value for key, (value, _) in raw.items()}
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    try:
        return model(**values)
    except ValidationError as e:
        err = e.errors()[0]
        key = str(err["loc"][0]) if err.get("loc") else "?"
        where = f"{source}:{raw[key][1]}" if key in raw else source
        if err.get("type") == "extra_forbidden":
            raise ConfigError(f"{where}: unknown key {key!r}") from None
        raise ConfigError(f"{where}: {key}: {err['msg']}") from None


def write_run_config(cfg: RunConfig, path: Path) -> None:
    """Write the resolved config back as flat text (sorted keys)."""
    lines = []
    for key, value in sorted(cfg.model_dump().items()):
        if value is None:
            continue
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key} = {value}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
