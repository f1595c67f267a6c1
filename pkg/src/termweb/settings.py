"""
Configuration for termweb.

Settings are read from the shipped ``config/defaults.yaml``, then from an
optional YAML file named by ``TERMWEB_CONFIG``, then from ``TERMWEB_<FIELD>``
environment variables (a local ``.env`` file is loaded first).
"""

import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, Field, PositiveInt

ENV_PREFIX = "TERMWEB_"
DEFAULTS_FILE = Path(__file__).parent / "config" / "defaults.yaml"


class Settings(BaseModel):
    """Runtime knobs shared by every termweb module."""

    http_timeout: PositiveInt = Field(default=60, description="Seconds to wait for an HTTP response when no timeout option is given")
    user_agent: str = Field(default="termweb/1.0", description="User-Agent sent unless a user_agent option overrides it")
    max_response_bytes: PositiveInt = Field(default=16 * 1024 * 1024, description="Largest response body fetch() accepts")

    link_check_timeout: PositiveInt = Field(default=20, description="HEAD probe timeout used by the link checker")
    link_check_workers: PositiveInt = Field(default=8, description="Parallel probes issued by the link checker")

    expansion_depth: PositiveInt = Field(default=64, description="Maximum chain of sugar rewrites before giving up")
    pr_logo: str = Field(default="/images/termweb.gif", description="Image used by the pr structure")
    pr_manual_url: str = Field(default="/termweb/manual.html", description="Link target of the pr structure")
    bullet_image: str = Field(default="/images/bullet.gif", description="Bullet image for nice_itemize/1")

    addr_directory: str = Field(default=".", description="Directory holding <module>.addr files")
    nameserver_host: str = Field(default="127.0.0.1", description="Well-known host of the name server")
    nameserver_port: PositiveInt = Field(default=6500, description="Well-known port of the name server")
    rpc_bind_host: str = Field(default="127.0.0.1", description="Interface active modules listen on")
    rpc_timeout: PositiveInt = Field(default=30, description="Seconds a remote call may take")
    rpc_max_frame: PositiveInt = Field(default=1024 * 1024, description="Largest frame accepted on the active-module wire")
    rpc_idle_timeout: PositiveInt = Field(default=60, description="Seconds an idle connection is kept open by a server")
    phone_db_backend: str = Field(default="", description="Discovery spec of the phone_db module used by the CGI program; empty looks up in-process")

    log_level: str = Field(default="WARNING", description="Level used by setup_logging() when none is given")


def _load_yaml(path: Path) -> Dict[str, Any]:
    """Load a YAML mapping, treating an empty file as no overrides."""
    if not path.exists():
        raise FileNotFoundError(f"Config file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        data = yaml.safe_load(f) or {}
    if not isinstance(data, dict):
        raise ValueError(f"Config file {path} must hold a mapping")
    return data


def _env_overrides() -> Dict[str, str]:
    overrides = {}
    for name in Settings.model_fields:
        value = os.getenv(ENV_PREFIX + name.upper())
        if value is not None:
            overrides[name] = value
    return overrides


def load_settings(config_file: Optional[Path] = None) -> Settings:
    """
    Build a Settings instance from every configuration source.

    Args:
        config_file: Extra YAML file; defaults to $TERMWEB_CONFIG when set

    Returns:
        Validated Settings
    """
    load_dotenv()
    values = _load_yaml(DEFAULTS_FILE)
    extra = config_file or os.getenv(ENV_PREFIX + "CONFIG")
    if extra:
        values.update(_load_yaml(Path(extra)))
    values.update(_env_overrides())
    return Settings.model_validate(values)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return load_settings()


def reset_settings() -> None:
    get_settings.cache_clear()
