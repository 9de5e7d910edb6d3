"""Named parameter tensors: seeded initialization and the JSON weights file.

A parameter set is a plain ``dict`` mapping dotted names such as
``backbone_I.conv0.weight`` to float64 arrays, kept in declaration order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .rng import SplitMix64


@dataclass(frozen=True)
class ParamSpec:
    name: str
    shape: tuple
    fan_in: int | None = None  # None: constant ``fill`` instead of a random draw
    fill: float = 0.0


def init_tensors(rng: SplitMix64, specs) -> dict:
    """Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), drawn in declaration order;
    biases and other constant tensors take their ``fill`` value."""
    out = {}
    for spec in specs:
        n = int(np.prod(spec.shape))
        if spec.fan_in is None:
            out[spec.name] = np.full(spec.shape, float(spec.fill))
        else:
            bound = 1.0 / np.sqrt(spec.fan_in)
            out[spec.name] = rng.uniform(-bound, bound, n).reshape(spec.shape)
    return out


def subtree(params: dict, prefix: str) -> dict:
    """Entries under ``prefix.``, with the prefix stripped."""
    p = prefix + "."
    return {k[len(p):]: v for k, v in params.items() if k.startswith(p)}


def count(params: dict, names=None) -> int:
    names = params.keys() if names is None else names
    return int(sum(params[n].size for n in names))


def dump_weights(params: dict, metadata: dict) -> str:
    doc = {"metadata": metadata}
    for name, arr in params.items():
        doc[name] = {"shape": list(arr.shape), "data": [float(v) for v in arr.ravel()]}
    return json.dumps(doc, indent=1)


def load_weights(text: str) -> tuple[dict, dict]:
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ConfigError("weights file must hold a JSON object")
    meta = doc.pop("metadata", {})
    params = {}
    for name, entry in doc.items():
        try:
            shape = tuple(int(s) for s in entry["shape"])
            data = np.asarray(entry["data"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad tensor entry {name!r}: {exc}") from exc
        if data.size != int(np.prod(shape)):
            raise ConfigError(f"tensor {name!r}: {data.size} values for shape {shape}")
        params[name] = data.reshape(shape)
    return params, meta
