"""Local frames bags, the 2-layer LSTM, grouped similarity maps, the FCN head
and the Conv1D boundary classifier."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConfigError, ShapeError
from .params import ParamSpec

GATES = ("i", "f", "g", "o")


@dataclass(frozen=True, eq=False)
class FrameTimeline:
    vectors: np.ndarray  # (L, C)
    frame_indices: np.ndarray  # (L,) source frame index of each entry
    fps: float

    def __len__(self):
        return self.vectors.shape[0]

    @property
    def timestamps(self):
        return self.frame_indices / self.fps


def timeline_from_gops(iframe_features, pframe_vectors, frame_indices, fps):
    """Interleave per-GOP entries: the spatially pooled I-frame feature map,
    then that GOP's fused P-frame descriptors.

    ``iframe_features`` is a list of (C, Hf, Wf) maps, ``pframe_vectors`` a
    list of (T_i, C) arrays, ``frame_indices`` a list of per-GOP source frame
    index lists of length 1 + T_i.
    """
    vecs, idx = [], []
    for x_i, v, fi in zip(iframe_features, pframe_vectors, frame_indices):
        v = np.asarray(v, dtype=np.float64).reshape(-1, x_i.shape[0])
        if len(fi) != 1 + len(v):
            raise ShapeError("frame index list does not match GOP entries")
        vecs.append(x_i.mean(axis=(1, 2))[None])
        vecs.append(v)
        idx.extend(fi)
    return FrameTimeline(np.concatenate(vecs), np.asarray(idx, dtype=np.int64), float(fps))


def bag_indices(length, center, radius):
    if not 0 <= center < length:
        raise IndexError(f"center {center} outside timeline of length {length}")
    return np.clip(np.arange(center - radius, center + radius + 1), 0, length - 1)


def build_bag(timeline, center, radius):
    vecs = timeline.vectors if isinstance(timeline, FrameTimeline) else np.asarray(timeline)
    return vecs[bag_indices(len(vecs), center, radius)]


def all_bags(vectors, radius):
    """(L, 2k+1, C) bags for every center, edge-replicated."""
    n = len(vectors)
    idx = np.clip(np.arange(n)[:, None] + np.arange(-radius, radius + 1)[None, :], 0, n - 1)
    return vectors[idx]


def lstm_specs(prefix, input_size, hidden, layers=2):
    specs = []
    for layer in range(layers):
        n_in = input_size if layer == 0 else hidden
        for g in GATES:
            specs.append(ParamSpec(f"{prefix}.l{layer}.W_i{g}", (hidden, n_in), n_in))
        for g in GATES:
            specs.append(ParamSpec(f"{prefix}.l{layer}.W_h{g}", (hidden, hidden), hidden))
        for g in GATES:
            specs.append(ParamSpec(f"{prefix}.l{layer}.b_i{g}", (hidden,)))
        for g in GATES:
            specs.append(ParamSpec(f"{prefix}.l{layer}.b_h{g}", (hidden,)))
    return specs


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def lstm_forward(p, seq):
    """Run the stacked LSTM over ``seq`` of shape (S, C) or (B, S, C).

    ``p`` holds local names ``l{n}.W_ii`` etc. Returns last-layer hidden
    states with the same leading shape. Initial h and c are zero.
    """
    single = seq.ndim == 2
    x = np.asarray(seq[None] if single else seq, dtype=np.float64)
    layer = 0
    while f"l{layer}.W_ii" in p:
        w_in = np.concatenate([p[f"l{layer}.W_i{g}"] for g in GATES])
        w_h = np.concatenate([p[f"l{layer}.W_h{g}"] for g in GATES])
        bias = np.concatenate([p[f"l{layer}.b_i{g}"] + p[f"l{layer}.b_h{g}"] for g in GATES])
        if x.shape[-1] != w_in.shape[1]:
            raise ShapeError(f"LSTM layer {layer} expects {w_in.shape[1]} inputs, got {x.shape[-1]}")
        hid = w_h.shape[1]
        batch, steps, _ = x.shape
        pre_in = x @ w_in.T + bias
        h = np.zeros((batch, hid))
        c = np.zeros((batch, hid))
        out = np.empty((batch, steps, hid))
        for t in range(steps):
            a = pre_in[:, t] + h @ w_h.T
            i = _sigmoid(a[:, :hid])
            f = _sigmoid(a[:, hid:2 * hid])
            g = np.tanh(a[:, 2 * hid:3 * hid])
            o = _sigmoid(a[:, 3 * hid:])
            c = f * c + i * g
            h = o * np.tanh(c)
            out[:, t] = h
        x = out
        layer += 1
    if layer == 0:
        raise ShapeError("no LSTM layers in parameters")
    return x[0] if single else x


def group_similarity(hidden, groups):
    """Per-group pairwise cosine similarity: (S, C) -> (G, S, S), batched on
    a leading axis. Cosine against a zero vector is defined as 0."""
    single = hidden.ndim == 2
    h = np.asarray(hidden[None] if single else hidden, dtype=np.float64)
    batch, steps, c = h.shape
    if groups < 1 or c % groups:
        raise ConfigError(f"{c} channels not divisible into {groups} groups")
    g = h.reshape(batch, steps, groups, c // groups).transpose(0, 2, 1, 3)
    norms = np.linalg.norm(g, axis=-1)
    dots = g @ g.transpose(0, 1, 3, 2)
    denom = norms[..., :, None] * norms[..., None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        sim = np.where(denom > 0, dots / np.where(denom > 0, denom, 1.0), 0.0)
    sim = np.clip(sim, -1.0, 1.0)
    return sim[0] if single else sim


def head_specs(groups, descriptor, fcn_width=16, classifier_width=16):
    specs = []
    plan = (groups, fcn_width, fcn_width, fcn_width, descriptor)
    for i, (cin, cout) in enumerate(zip(plan[:-1], plan[1:])):
        specs.append(ParamSpec(f"fcn.conv{i}.weight", (cout, cin, 3, 3), cin * 9))
        specs.append(ParamSpec(f"fcn.conv{i}.bias", (cout,)))
    specs.append(ParamSpec("classifier.norm_shift", (descriptor,)))
    specs.append(ParamSpec("classifier.norm_gain", (descriptor,), fill=1.0))
    for i, (cin, cout) in enumerate(((descriptor, classifier_width), (classifier_width, 1))):
        specs.append(ParamSpec(f"classifier.conv{i}.weight", (cout, cin, 3), cin * 3))
        specs.append(ParamSpec(f"classifier.conv{i}.bias", (cout,)))
    return specs


def fcn_layers(p, sim, start=0, cache=None):
    """Apply FCN conv-ReLU layers ``start..3`` to a batch (B, Cin, S, S).

    When ``cache`` is a list, each layer's input is appended to it.
    """
    h = np.ascontiguousarray(sim, dtype=np.float64)
    i = start
    while f"conv{i}.weight" in p:
        if cache is not None:
            cache.append(h)
        h = np.maximum(kernels.conv2d(h, p[f"conv{i}.weight"], p[f"conv{i}.bias"], 1), 0.0)
        i += 1
    return h


def head_forward(p, sim):
    """Four conv-ReLU layers then global average pooling.

    ``p`` holds the FCN's local names (``conv0.weight`` ...). sim: (G, S, S)
    or (B, G, S, S); returns (C',) or (B, C').
    """
    single = sim.ndim == 3
    out = fcn_layers(p, sim[None] if single else sim).mean(axis=(2, 3))
    return out[0] if single else out


def conv1d(x, w, b):
    """Kernel-3, zero-padding-1 convolution along the timeline. x: (Cin, L)."""
    length = x.shape[1]
    xp = np.pad(x, ((0, 0), (1, 1)))
    out = np.broadcast_to(b[:, None], (w.shape[0], length)).copy()
    for k in range(3):
        out += w[:, :, k] @ xp[:, k:k + length]
    return out


def standardize(p, descriptors):
    """Fixed per-channel affine map ``(d - norm_shift) * norm_gain``; identity
    unless the statistics were fitted."""
    if "norm_shift" not in p:
        return descriptors
    return (descriptors - p["norm_shift"]) * p["norm_gain"]


def classify(p, descriptors):
    """Boundary score per timeline entry from (L, C') descriptors; ``p`` holds
    the classifier's local names."""
    x = standardize(p, descriptors)
    h = np.maximum(conv1d(x.T, p["conv0.weight"], p["conv0.bias"]), 0.0)
    return _sigmoid(conv1d(h, p["conv1.weight"], p["conv1.bias"])[0])


def scores_to_boundaries(scores, fps, threshold=0.5, radius=2, timestamps=None):
    """Peak picking: entry ``l`` fires if its score is >= ``threshold`` and
    strictly greater than every other score within ``radius`` entries.

    Timestamps default to ``l / fps``; pass ``timestamps`` to map entries to
    source times instead.
    """
    if not 0.0 < threshold < 1.0:
        raise ConfigError("threshold must lie in (0, 1)")
    if radius < 1:
        raise ConfigError("suppression radius must be >= 1")
    scores = np.asarray(scores, dtype=np.float64)
    n = len(scores)
    out = []
    for l in range(n):
        if scores[l] < threshold:
            continue
        lo, hi = max(0, l - radius), min(n, l + radius + 1)
        others = np.delete(scores[lo:hi], l - lo)
        if others.size == 0 or scores[l] > others.max():
            out.append(float(timestamps[l]) if timestamps is not None else l / fps)
    return out
