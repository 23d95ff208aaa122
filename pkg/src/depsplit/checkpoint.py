"""Checkpoint files for trained networks.

Layout::

    DEPSPLIT-CKPT 1\\n
    <one line of JSON header>\\n
    <raw little-endian float64 arrays, concatenated in header order>

The header lists each array's name and shape, the feature normalization
statistics, and the configuration used for training. Output is byte-for-byte
reproducible for identical inputs (no timestamps, sorted keys).
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .core import DataError, NormStats
from .mlp import PARAM_NAMES, Mlp

MAGIC = b"DEPSPLIT-CKPT 1\n"


def save(path, nets: dict[str, Mlp], norm: NormStats | None, meta: dict) -> None:
    arrays = []
    blobs = []
    for role, net in nets.items():
        for name in PARAM_NAMES:
            a = np.ascontiguousarray(getattr(net, name), dtype="<f8")
            arrays.append({"name": f"{role}.{name}", "shape": list(a.shape)})
            blobs.append(a.tobytes())
    header = {
        "arrays": arrays,
        "roles": list(nets),
        "norm": norm.to_dict() if norm is not None else None,
        "meta": meta,
    }
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(json.dumps(header, sort_keys=True).encode("utf-8") + b"\n")
        for b in blobs:
            fh.write(b)


def load(path):
    """Return ``(nets_by_role, norm, meta)``."""
    data = Path(path).read_bytes()
    if not data.startswith(MAGIC):
        raise DataError(f"{path}: not a checkpoint file")
    end = data.index(b"\n", len(MAGIC))
    header = json.loads(data[len(MAGIC):end])
    offset = end + 1
    params = {}
    for spec in header["arrays"]:
        shape = tuple(spec["shape"])
        n = int(np.prod(shape)) if shape else 1
        params[spec["name"]] = np.frombuffer(data, dtype="<f8", count=n,
                                             offset=offset).reshape(shape).copy()
        offset += 8 * n
    if offset != len(data):
        raise DataError(f"{path}: trailing or missing bytes")
    nets = {role: Mlp(*(params[f"{role}.{n}"] for n in PARAM_NAMES)) for role in header["roles"]}
    norm = NormStats.from_dict(header["norm"]) if header["norm"] is not None else None
    return nets, norm, header["meta"]
