"""File formats: norm specs (key=value text), point datasets (binary), index metadata (JSON).

Norm spec text::

    symann.norm/1
    kind=orlicz
    dim=32
    G.kind=huber
    G.delta=1.0

Nested fields use dotted keys; every value is a JSON literal. Blank lines and
lines starting with ``#`` are ignored.

Dataset binary (little-endian): 8-byte magic ``SYMANNPT``, u32 version, u64 n,
u64 d, then n * d float64 values in row-major order.
"""
from __future__ import annotations

import json
import math
import os
import struct

import numpy as np

from ..vecnorm import SymmetricNorm, catalog, norm_from_dict

NORM_HEADER = "symann.norm/1"
INDEX_SCHEMA = "symann.index/1"
MAGIC = b"SYMANNPT"
VERSION = 1
_HEAD = struct.Struct("<8sIQQ")


class FormatError(ValueError):
    pass


def _flatten(data: dict, prefix: str = ""):
    for key, value in data.items():
        if isinstance(value, dict):
            yield from _flatten(value, f"{prefix}{key}.")
        else:
            yield f"{prefix}{key}", value


def norm_to_text(norm: SymmetricNorm) -> str:
    lines = [NORM_HEADER]
    for key, value in _flatten(norm.to_dict()):
        lines.append(f"{key}={json.dumps(value)}")
    return "\n".join(lines) + "\n"


def norm_from_text(text: str) -> SymmetricNorm:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or lines[0] != NORM_HEADER:
        raise FormatError(f"expected header {NORM_HEADER!r}")
    data: dict = {}
    for ln in lines[1:]:
        key, sep, raw = ln.partition("=")
        if not sep:
            raise FormatError(f"malformed line {ln!r}")
        try:
            value = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad value for {key!r}: {raw!r}") from exc
        node = data
        *parents, leaf = key.strip().split(".")
        for part in parents:
            node = node.setdefault(part, {})
        if leaf in node:
            raise FormatError(f"duplicate key {key!r}")
        node[leaf] = value
    try:
        return norm_from_dict(data)
    except (KeyError, TypeError) as exc:
        raise FormatError(f"incomplete norm spec: {exc}") from exc


def resolve_norm(ref, d: int | None = None) -> SymmetricNorm:
    """A norm from a spec dict, a spec file path, or a catalog name (needs ``d``)."""
    if isinstance(ref, SymmetricNorm):
        return ref
    if isinstance(ref, dict):
        return norm_from_dict(ref)
    if isinstance(ref, str) and os.path.exists(ref):
        with open(ref) as fh:
            return norm_from_text(fh.read())
    if d is None:
        raise ValueError("a catalog norm name needs the dimension d")
    names = catalog(d, normalize=False)
    if ref not in names:
        raise ValueError(f"unknown norm {ref!r}; catalog names: {', '.join(sorted(names))}")
    return names[ref]


def write_points(path, points) -> None:
    P = np.ascontiguousarray(np.asarray(points, dtype="<f8"))
    if P.ndim != 2:
        raise ValueError("points must be a 2-d array")
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(MAGIC, VERSION, P.shape[0], P.shape[1]))
        fh.write(P.tobytes())


def read_points(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_HEAD.size)
        if len(head) != _HEAD.size:
            raise FormatError("truncated header")
        magic, version, n, d = _HEAD.unpack(head)
        if magic != MAGIC:
            raise FormatError("not a point dataset (bad magic)")
        if version != VERSION:
            raise FormatError(f"unsupported dataset version {version}")
        payload = fh.read()
    if len(payload) != 8 * n * d:
        raise FormatError(f"payload has {len(payload)} bytes, expected {8 * n * d}")
    return np.frombuffer(payload, dtype="<f8").reshape(n, d).astype(float)


def dump_json(data, path=None) -> str:
    """Canonical JSON: sorted keys, fixed separators, non-finite floats as strings."""
    text = json.dumps(_finite(data), sort_keys=True, indent=2) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _finite(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, np.generic):
        return _finite(obj.item())
    return obj


def index_metadata(config: dict, embedding_json: str | None = None) -> dict:
    meta = {"schema": INDEX_SCHEMA, "config": config}
    if embedding_json is not None:
        meta["embedding"] = json.loads(embedding_json)
    return meta


def read_index_metadata(path) -> dict:
    with open(path) as fh:
        meta = json.load(fh)
    if meta.get("schema") != INDEX_SCHEMA:
        raise FormatError(f"unsupported index schema {meta.get('schema')!r}")
    return meta
