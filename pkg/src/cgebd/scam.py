"""Spatial-channel attention fusion of I-frame features with P-frame guidance.

For one guidance branch (motion or residual):

    z      = guide(concat[x_I, x_G, G])           conv-ReLU-conv
    w_cha  = sigmoid(fc2(relu(fc1(mean_ij z))))   per channel, in (0, 1)
    w_spa  = softmax_ij(conv(z))                  positive, sums to 1
    v_hat  = sum_ij (x_I * w_cha)[:, i, j] w_spa[i, j]
    v      = v_hat + sum_ij x_G[:, i, j] softmax_ij(refine(x_G + x_I))[i, j]

and the P-frame descriptor is ``v_motion + v_residual``.

Branch parameters are plain dicts with local names (``guide0.weight`` ...);
use :func:`cgebd.params.subtree` to cut them out of a full model.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from .errors import ShapeError
from .params import ParamSpec


def param_specs(prefix, channels, guide_channels):
    c = channels
    cin = 2 * c + guide_channels
    half = max(c // 2, 1)
    specs = []

    def conv(name, cout, cin_):
        specs.append(ParamSpec(f"{prefix}.{name}.weight", (cout, cin_, 3, 3), cin_ * 9))
        specs.append(ParamSpec(f"{prefix}.{name}.bias", (cout,)))

    def fc(name, cout, cin_):
        specs.append(ParamSpec(f"{prefix}.{name}.weight", (cout, cin_), cin_))
        specs.append(ParamSpec(f"{prefix}.{name}.bias", (cout,)))

    conv("guide0", c, cin)
    conv("guide1", c, c)
    fc("fc1", half, c)
    fc("fc2", c, half)
    conv("spatial", 1, c)
    conv("refine0", c, c)
    conv("refine1", c, c)
    conv("refine2", 1, c)
    return specs


def _conv(p, name, x):
    return kernels.conv2d(np.ascontiguousarray(x[None]), p[f"{name}.weight"], p[f"{name}.bias"], 1)[0]


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def softmax2d(h):
    """Softmax over every position of an (H, W) map."""
    e = np.exp(h - h.max())
    return e / e.sum()


def guidance_encode(p, x_i, x_g, guide):
    if not (x_i.shape[1:] == x_g.shape[1:] == guide.shape[1:]):
        raise ShapeError(f"grid mismatch: {x_i.shape}, {x_g.shape}, {guide.shape}")
    z = np.concatenate([x_i, x_g, guide], axis=0)
    if z.shape[0] != p["guide0.weight"].shape[1]:
        raise ShapeError(f"guidance encoder expects {p['guide0.weight'].shape[1]} channels, got {z.shape[0]}")
    return _conv(p, "guide1", np.maximum(_conv(p, "guide0", z), 0.0))


def channel_weight(p, z):
    h = z.mean(axis=(1, 2))
    hidden = np.maximum(p["fc1.weight"] @ h + p["fc1.bias"], 0.0)
    return _sigmoid(p["fc2.weight"] @ hidden + p["fc2.bias"])


def apply_channel(x_i, w_cha):
    if x_i.shape[0] != w_cha.shape[0]:
        raise ShapeError("channel count mismatch")
    return x_i * w_cha[:, None, None]


def spatial_weight(p, z):
    return softmax2d(_conv(p, "spatial", z)[0])


def attend(x_cha, w_spa):
    if x_cha.shape[1:] != w_spa.shape:
        raise ShapeError("grid mismatch")
    return np.einsum("cij,ij->c", x_cha, w_spa)


def refine_map(p, x):
    h = np.maximum(_conv(p, "refine0", x), 0.0)
    h = np.maximum(_conv(p, "refine1", h), 0.0)
    return _conv(p, "refine2", h)[0]


def bidirectional_refine(p, x_g, x_i):
    if x_g.shape != x_i.shape:
        raise ShapeError("grid mismatch")
    return attend(x_g, softmax2d(refine_map(p, x_g + x_i)))


def branch_forward(p, x_i, x_g, guide):
    z = guidance_encode(p, x_i, x_g, guide)
    v_hat = attend(apply_channel(x_i, channel_weight(p, z)), spatial_weight(p, z))
    return v_hat + bidirectional_refine(p, x_g, x_i)


def scam_forward(p_motion, p_residual, x_i, x_m, m, x_r, r):
    return branch_forward(p_motion, x_i, x_m, m) + branch_forward(p_residual, x_i, x_r, r)
