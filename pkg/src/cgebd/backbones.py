"""Small strided conv stacks standing in for the I-frame, motion and residual
backbones, plus input normalization and guidance-plane resizing."""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ShapeError
from .params import ParamSpec, init_tensors
from .rng import SplitMix64

DEFAULT_HIDDEN = (8, 16)


def channel_plan(in_channels, out_channels, hidden=DEFAULT_HIDDEN):
    return (in_channels, *hidden, out_channels)


def param_specs(prefix, plan):
    specs = []
    for i, (cin, cout) in enumerate(zip(plan[:-1], plan[1:])):
        specs.append(ParamSpec(f"{prefix}.conv{i}.weight", (cout, cin, 3, 3), cin * 9))
        specs.append(ParamSpec(f"{prefix}.conv{i}.bias", (cout,)))
    return specs


def init_params(seed, plan, prefix="backbone"):
    return init_tensors(SplitMix64(seed), param_specs(prefix, plan))


def n_layers(params, prefix):
    n = 0
    while f"{prefix}.conv{n}.weight" in params:
        n += 1
    return n


def output_size(size, layers):
    for _ in range(layers):
        size = (size + 1) // 2
    return size


def forward_backbone(params, x, prefix="backbone"):
    """Conv(3x3, stride 2, pad 1) + ReLU per layer. x: (Cin, H, W) or (B, Cin, H, W)."""
    single = x.ndim == 3
    h = np.ascontiguousarray(x[None] if single else x, dtype=np.float64)
    layers = n_layers(params, prefix)
    if layers == 0:
        raise ShapeError(f"no parameters under {prefix!r}")
    for i in range(layers):
        w = params[f"{prefix}.conv{i}.weight"]
        if h.shape[1] != w.shape[1]:
            raise ShapeError(f"{prefix}.conv{i}: expected {w.shape[1]} input channels, got {h.shape[1]}")
        h = np.maximum(kernels.conv2d(h, w, params[f"{prefix}.conv{i}.bias"], 2), 0.0)
    return h[0] if single else h


def normalize_rgb(frame):
    """(H, W, 3) uint8 -> (3, H, W) in [-0.5, 0.5]."""
    return frame.transpose(2, 0, 1).astype(np.float64) / 255.0 - 0.5


def normalize_motion(motion, search_range):
    return np.asarray(motion, dtype=np.float64) / float(search_range)


def normalize_residual(residual):
    return np.asarray(residual, dtype=np.float64) / 255.0


def resize_motion(field, stride=8):
    """Average-pool a (K, H, W) field over stride x stride cells.

    The field is first padded on the bottom/right by edge replication up to a
    multiple of ``stride``, so output is (K, ceil(H/stride), ceil(W/stride)).
    """
    k, height, width = field.shape
    hf, wf = -(-height // stride), -(-width // stride)
    padded = np.pad(np.asarray(field, dtype=np.float64),
                    ((0, 0), (0, hf * stride - height), (0, wf * stride - width)), mode="edge")
    return padded.reshape(k, hf, stride, wf, stride).mean(axis=(2, 4))
