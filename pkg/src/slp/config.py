"""Experiment configuration: INI files, CLI overrides, run manifests.

Config files are flat ``key = value`` INI text. The ``[experiment]``
section configures sweeps; ``[complexity]`` adds sampling options.
Resolution order for every field: CLI flag, then config file, then
(for the seed only) the ``SLP_SEED`` environment variable, then the
built-in default.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone

from .constellation import SCHEME_NAMES
from .precoding import PRECODER_CLASSES, RHO_CONVENTIONS


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class RunSettings:
    n_tx: int = 12
    n_users: int = 12
    scheme: str = "16qam"
    precoders: tuple = ("mmse", "ci-zf", "ci-mmse")
    snr_db: tuple = tuple(float(s) for s in range(0, 41, 5))
    block_length: int = 1
    min_errors: int = 400
    max_symbols: int = 2_000_000
    min_blocks: int = 1
    seed: int = 0
    power: float = 1.0
    rho_convention: str = "complex"
    samples: int = 200
    threads: int = 1
    out_dir: str = "slp-out"


_INT_FIELDS = ("n_tx", "n_users", "block_length", "min_errors", "max_symbols",
               "min_blocks", "seed", "samples", "threads")
_FLOAT_FIELDS = ("power",)


def parse_snr_spec(text: str) -> tuple:
    """Parse ``"start:stop:step"`` (stop inclusive) or a comma list."""
    text = str(text).strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ValueError
            start, stop, step = parts
            count = int(round((stop - start) / step))
            grid = tuple(start + i * step for i in range(count + 1))
            return tuple(g for g in grid if g <= stop + 1e-9)
        return tuple(float(p) for p in text.split(",") if p.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"snr_db: cannot parse {text!r}") from exc


def parse_precoders(text: str) -> tuple:
    kinds = tuple(p.strip().lower() for p in str(text).split(",") if p.strip())
    for kind in kinds:
        if kind not in PRECODER_CLASSES:
            raise ConfigError(
                f"precoders: unknown kind {kind!r}; known: {sorted(PRECODER_CLASSES)}"
            )
    if not kinds:
        raise ConfigError("precoders: empty list")
    return kinds


def read_config_file(path: str) -> dict:
    """Read ``[experiment]``/``[complexity]`` keys into a flat dict."""
    parser = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"config: parse error in {path}: {exc}") from exc
    values = {}
    known = {f.name for f in dataclasses.fields(RunSettings)}
    for section in parser.sections():
        if section not in ("experiment", "complexity"):
            raise ConfigError(f"config: unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in known:
                raise ConfigError(f"config: unknown field {key!r} in [{section}]")
            values[key] = value
    return values


def resolve_settings(file_values: dict | None = None, overrides: dict | None = None) -> RunSettings:
    """Merge defaults, config file values, ``SLP_SEED``, and overrides."""
    merged = {}
    seed_given = False
    for source in (file_values or {}, overrides or {}):
        for key, value in source.items():
            if value is None:
                continue
            merged[key] = value
            if key == "seed":
                seed_given = True
    if not seed_given and os.environ.get("SLP_SEED"):
        merged["seed"] = os.environ["SLP_SEED"]

    settings = RunSettings()
    for key, raw in merged.items():
        try:
            if key in _INT_FIELDS:
                value = int(raw)
            elif key in _FLOAT_FIELDS:
                value = float(raw)
            elif key == "snr_db":
                value = raw if isinstance(raw, tuple) else parse_snr_spec(raw)
            elif key == "precoders":
                value = raw if isinstance(raw, tuple) else parse_precoders(raw)
            elif key in ("scheme", "rho_convention"):
                value = str(raw).strip().lower()
            else:
                value = str(raw).strip()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{key}: cannot parse {raw!r}") from exc
        setattr(settings, key, value)

    if settings.scheme not in SCHEME_NAMES:
        raise ConfigError(f"scheme: unknown {settings.scheme!r}; known: {sorted(SCHEME_NAMES)}")
    if settings.rho_convention not in RHO_CONVENTIONS:
        raise ConfigError(f"rho_convention: must be one of {RHO_CONVENTIONS}")
    for field, low in (("n_tx", 1), ("n_users", 1), ("block_length", 1),
                       ("min_errors", 1), ("max_symbols", 1), ("min_blocks", 1), ("samples", 1),
                       ("threads", 1)):
        if getattr(settings, field) < low:
            raise ConfigError(f"{field}: must be >= {low}")
    if settings.power <= 0:
        raise ConfigError("power: must be positive")
    if not settings.snr_db:
        raise ConfigError("snr_db: empty grid")
    return settings


def settings_digest(settings: RunSettings) -> str:
    payload = json.dumps(dataclasses.asdict(settings), sort_keys=True, default=str)
    return hashlib.sha1(payload.encode()).hexdigest()[:7]


def build_manifest(settings: RunSettings, command: str, outputs: list) -> dict:
    from . import __version__

    return {
        "artifact": f"slp-{__version__}+cfg.{settings_digest(settings)}",
        "command": command,
        "seed": settings.seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": dataclasses.asdict(settings),
        "outputs": list(outputs),
    }


def write_manifest(manifest: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")
