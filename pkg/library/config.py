#!/usr/bin/env python3
"""
Cairn-Check Configuration
Typed settings loaded from an optional YAML file. Keys mirror the CLI flags;
flags always win over the file, and CAIRN_CHECK_OUTPUT_DIR only redirects
where output files are written.
"""

import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import structlog
import yaml

from library.errors import ConfigError

logger = structlog.get_logger(__name__)

OUTPUT_DIR_ENV = "CAIRN_CHECK_OUTPUT_DIR"
OUTPUT_FORMATS = ("json", "csv", "text")


@dataclass(frozen=True)
class Caps:
    """Upper bounds that keep exhaustive sweeps within memory"""
    interval_rank: int = 14
    ball_radius: int = 14
    spectral_radius: int = 12
    ambient_dim: int = 4096
    measure_coords: int = 12


@dataclass(frozen=True)
class Tolerances:
    construction: float = 1e-10
    relation: float = 1e-9
    # Overlap between distinct blocks of a level decomposition
    orthogonality: float = 1e-9
    decomposition: float = 1e-8
    # 2√3 - λ_max(A_10); the radial oracle gives 0.10232
    max_gap_at_10: float = 0.11


@dataclass(frozen=True)
class Config:
    caps: Caps = field(default_factory=Caps)
    tolerances: Tolerances = field(default_factory=Tolerances)
    seed: int = 0
    format: Optional[str] = None
    output: Optional[str] = None
    output_dir: Optional[str] = None
    max_consecutive_failures: int = 25
    workers: int = 1

    def validate(self) -> "Config":
        for item in fields(self.caps):
            value = getattr(self.caps, item.name)
            if not isinstance(value, int) or value <= 0:
                raise ConfigError(f"caps.{item.name} must be a positive integer, got {value!r}")
        tol = self.tolerances
        for name in ("construction", "relation", "orthogonality", "decomposition", "max_gap_at_10"):
            if getattr(tol, name) <= 0:
                raise ConfigError(f"tolerances.{name} must be positive")
        if not tol.construction <= tol.relation <= tol.decomposition:
            raise ConfigError(
                "tolerances must be ordered construction <= relation <= decomposition, got "
                f"{tol.construction} / {tol.relation} / {tol.decomposition}"
            )
        if self.format is not None and self.format not in OUTPUT_FORMATS:
            raise ConfigError(f"format must be one of {', '.join(OUTPUT_FORMATS)}, got {self.format!r}")
        if self.max_consecutive_failures <= 0:
            raise ConfigError("max_consecutive_failures must be positive")
        if self.workers <= 0:
            raise ConfigError("workers must be positive")
        return self

    def output_path(self) -> Optional[Path]:
        """Resolved output file, or None for stdout"""
        if not self.output:
            return None
        path = Path(self.output)
        if self.output_dir and not path.is_absolute():
            path = Path(self.output_dir) / path
        return path

    def to_dict(self) -> Dict[str, Any]:
        return {
            "caps": {item.name: getattr(self.caps, item.name) for item in fields(self.caps)},
            "tolerances": {item.name: getattr(self.tolerances, item.name) for item in fields(self.tolerances)},
            "seed": self.seed,
            "format": self.format,
            "output": self.output,
            "output_dir": self.output_dir,
            "max_consecutive_failures": self.max_consecutive_failures,
            "workers": self.workers,
        }


def _section(raw: Mapping[str, Any], name: str, cls):
    section = raw.get(name) or {}
    if not isinstance(section, Mapping):
        raise ConfigError(f"'{name}' must be a mapping")
    known = {item.name for item in fields(cls)}
    unknown = set(section) - known
    if unknown:
        raise ConfigError(f"unknown {name} keys: {', '.join(sorted(unknown))}")
    try:
        return cls(**section)
    except TypeError as e:
        raise ConfigError(f"invalid {name} section: {e}") from e


def load_config(path: Optional[str] = None,
                overrides: Optional[Mapping[str, Any]] = None,
                environ: Optional[Mapping[str, str]] = None) -> Config:
    """Build the effective configuration: defaults, then file, then flags, then env"""
    raw: Dict[str, Any] = {}
    if path:
        try:
            with open(path, "r") as f:
                raw = yaml.safe_load(f) or {}
        except OSError as e:
            raise ConfigError(f"cannot read config file {path}: {e}") from e
        except yaml.YAMLError as e:
            raise ConfigError(f"invalid YAML in {path}: {e}") from e
        if not isinstance(raw, Mapping):
            raise ConfigError(f"config file {path} must contain a mapping")
        logger.debug("Loaded config file", file=path, keys=sorted(raw))

    top_level = {item.name for item in fields(Config)} - {"caps", "tolerances"}
    unknown = set(raw) - top_level - {"caps", "tolerances"}
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")

    config = Config(
        caps=_section(raw, "caps", Caps),
        tolerances=_section(raw, "tolerances", Tolerances),
        **{key: raw[key] for key in top_level if key in raw},
    )

    # Flags win over the file; None means "not given on the command line"
    changes = {key: value for key, value in (overrides or {}).items()
               if value is not None and key in top_level}
    if changes:
        config = replace(config, **changes)

    env = os.environ if environ is None else environ
    if env.get(OUTPUT_DIR_ENV):
        config = replace(config, output_dir=env[OUTPUT_DIR_ENV])

    return config.validate()
