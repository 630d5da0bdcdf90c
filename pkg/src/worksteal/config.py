"""Configuration files: ``key = value`` lines or a JSON object.

Keys use the long CLI flag names with dashes or underscores
(``cores_per_socket``, ``llc-remote``...).  A ``partition`` key holds an
explicit placement map as ``start:stop:place`` triples separated by commas.
"""
from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Dict, List, Mapping, Tuple

from .topology import parse_place

ENV_PREFIX = "WORKSTEAL_"


def normalize_key(key: str) -> str:
    return key.strip().lower().replace("-", "_")


def parse_kv(text: str) -> Dict[str, str]:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, value = line.split("=", 1)
        out[normalize_key(key)] = value.strip()
    return out


def load_config(path) -> Dict[str, object]:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError("JSON config must be an object")
        return {normalize_key(k): v for k, v in _flatten(data).items()}
    return parse_kv(text)


def _flatten(data: Mapping, prefix: str = "") -> dict:
    """Nested sections are allowed; only the leaf key names matter."""
    out = {}
    for k, v in data.items():
        if isinstance(v, Mapping):
            out.update(_flatten(v, prefix))
        else:
            out[k] = v
    return out


def env_overrides(environ: Mapping[str, str] = None) -> Dict[str, str]:
    environ = os.environ if environ is None else environ
    return {normalize_key(k[len(ENV_PREFIX):]): v for k, v in environ.items()
            if k.startswith(ENV_PREFIX) and len(k) > len(ENV_PREFIX)}


def parse_partition_map(value) -> List[Tuple[int, int, int]]:
    """``"0:64:0, 64:128:1"`` or a list of triples -> [(start, stop, place)]."""
    if isinstance(value, str):
        items = [tuple(part.split(":")) for part in value.split(",") if part.strip()]
    else:
        items = [tuple(v) for v in value]
    ranges = []
    for item in items:
        if len(item) != 3:
            raise ValueError(f"partition entry {item!r} is not start:stop:place")
        start, stop, place = item
        ranges.append((int(start), int(stop), parse_place(place)))
    return ranges
