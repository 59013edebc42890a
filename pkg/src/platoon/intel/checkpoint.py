"""
Artifact IO: JSON checkpoints and reports, CSV metrics, YAML/JSON configs.

Every artifact carries a ``meta`` block with the tool name, its version, the
fully resolved configuration and the seed. Nothing time-dependent is written
except the ``seconds`` column of training metrics.
"""
from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import pandas as pd
import yaml

from .auction import MonotonicNet
from .commnet import CommNetPolicy
from .config.exceptions import CheckpointError, ConfigError

__all__ = [
    "artifact_meta",
    "dumps_json",
    "write_json",
    "read_json",
    "write_metrics",
    "read_metrics",
    "load_config",
    "load_checkpoint",
    "save_checkpoint",
]

_logger = logging.getLogger(__name__)

TOOL = "platoon_intel"


def artifact_meta(config: Mapping[str, Any] | None = None, seed=None) -> dict:
    from . import __version__

    return {"tool": TOOL, "version": __version__, "config": config, "seed": seed}


def _plain(obj):
    match obj:
        case np.ndarray():
            return obj.tolist()
        case np.integer():
            return int(obj)
        case np.floating():
            return float(obj)
        case np.bool_():
            return bool(obj)
        case tuple():
            return list(obj)
    raise TypeError(f"Object of type {type(obj).__name__} is not JSON serializable")


def dumps_json(obj) -> str:
    """Two-space indented JSON with a trailing newline; floats round-trip exactly."""
    return json.dumps(obj, indent=2, default=_plain) + "\n"


def write_json(path, obj) -> None:
    """Write `obj` as JSON to `path` (``-`` or None means stdout)."""
    text = dumps_json(obj)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        return
    Path(path).write_text(text, encoding="utf-8", newline="\n")
    _logger.info("Wrote %s", path)


def read_json(path) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise CheckpointError(path, f"cannot read file: {e.strerror}") from e
    except json.JSONDecodeError as e:
        raise CheckpointError(path, f"invalid JSON: {e}") from e


def write_metrics(path, frame: pd.DataFrame, meta: Mapping[str, Any]) -> None:
    """CSV metrics preceded by ``# key=value`` lines; the header row is always written."""
    lines = []
    for key, value in meta.items():
        if isinstance(value, (dict, list)):
            value = json.dumps(value, separators=(",", ":"), default=_plain)
        lines.append(f"# {key}={value}\n")
    body = frame.to_csv(index=False, sep=",", lineterminator="\n")
    Path(path).write_text("".join(lines) + body, encoding="utf-8", newline="\n")
    _logger.info("Wrote %d metric rows to %s", len(frame), path)


def read_metrics(path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def load_config(path) -> dict:
    """Read a YAML or JSON configuration file; the top level must be a mapping."""
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as f:
            raw = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e.strerror}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse config {path}: {e}") from e
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"Config {path} must contain a mapping, got {type(raw).__name__}")
    return raw


def save_checkpoint(path, model, config=None, seed=None) -> dict:
    """Write a model checkpoint with its meta block; returns the document."""
    match model:
        case MonotonicNet():
            doc = model.to_checkpoint(train_config=config, seed=seed)
        case CommNetPolicy():
            doc = model.to_checkpoint(seed=seed)
        case _:
            raise TypeError(f"Cannot checkpoint {type(model).__name__}")
    doc["meta"] = artifact_meta(config, seed)
    write_json(path, doc)
    return doc


def load_checkpoint(path) -> MonotonicNet | CommNetPolicy:
    """Load a checkpoint, dispatching on its ``kind``."""
    doc = read_json(path)
    match doc:
        case {"kind": "myerson"}:
            return MonotonicNet.from_checkpoint(doc, path)
        case {"kind": "commnet"}:
            return CommNetPolicy.from_checkpoint(doc, path)
        case {"kind": kind}:
            raise CheckpointError(path, f"unknown checkpoint kind {kind!r}")
        case _:
            raise CheckpointError(path, "missing 'kind'")
