"""End-to-end detector: GOP stream -> per-entry boundary scores -> timestamps.

Per GOP the I-frame goes through ``backbone_I``; each sampled, backtraced
P-frame goes through ``backbone_M`` / ``backbone_R`` and is fused with the
I-frame features by the two attention branches. The resulting timeline is
scored by the local-bag LSTM, grouped similarity, FCN and Conv1D classifier.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import backbones, scam, temporal
from .backtrace import accumulate, sample_indices
from .codec import GopStream
from .errors import ConfigError, ShapeError
from .params import init_tensors, subtree
from .rng import SplitMix64


@dataclass(frozen=True)
class ModelConfig:
    channels: int = 32  # C
    samples: int = 3  # T, P-frames kept per GOP
    radius: int = 8  # k, bag holds 2k+1 entries
    groups: int = 4  # G
    descriptor: int = 32  # C'
    seed: int = 0
    backbone_hidden: tuple = (8, 16)
    fcn_width: int = 16
    classifier_width: int = 16

    def __post_init__(self):
        if self.channels < 2 or self.channels % self.groups:
            raise ConfigError(f"channels ({self.channels}) must be divisible by groups ({self.groups})")
        if self.samples < 1 or self.radius < 0 or self.descriptor < 1:
            raise ConfigError("samples >= 1, radius >= 0, descriptor >= 1 required")

    @property
    def stride(self):
        return 2 ** (len(self.backbone_hidden) + 1)

    def as_dict(self):
        d = asdict(self)
        d["backbone_hidden"] = list(self.backbone_hidden)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "backbone_hidden" in d:
            d["backbone_hidden"] = tuple(d["backbone_hidden"])
        return cls(**d)


TINY = ModelConfig(channels=8, samples=3, radius=2, groups=2, descriptor=8,
                   backbone_hidden=(8,))


def param_specs(cfg: ModelConfig):
    c = cfg.channels
    specs = []
    specs += backbones.param_specs("backbone_I", backbones.channel_plan(3, c, cfg.backbone_hidden))
    specs += backbones.param_specs("backbone_M", backbones.channel_plan(2, c, cfg.backbone_hidden))
    specs += backbones.param_specs("backbone_R", backbones.channel_plan(3, c, cfg.backbone_hidden))
    specs += scam.param_specs("scam_M", c, 2)
    specs += scam.param_specs("scam_R", c, 3)
    specs += temporal.lstm_specs("lstm", c, c)
    specs += temporal.head_specs(cfg.groups, cfg.descriptor, cfg.fcn_width, cfg.classifier_width)
    return specs


def init_model(cfg: ModelConfig) -> dict:
    return init_tensors(SplitMix64(cfg.seed), param_specs(cfg))


def check_params(params, cfg):
    for spec in param_specs(cfg):
        arr = params.get(spec.name)
        if arr is None:
            raise ShapeError(f"missing parameter {spec.name}")
        if arr.shape != spec.shape:
            raise ShapeError(f"{spec.name}: shape {arr.shape}, expected {spec.shape}")


@dataclass
class GopFeatures:
    iframe_features: np.ndarray  # (C, Hf, Wf)
    pframe_vectors: np.ndarray  # (T_i, C)
    frame_indices: list = field(default_factory=list)


def gop_features(params, gop, cfg, search_range, first_frame, mb=16):
    """Backbone + fusion features for one GOP (pure; safe to run in parallel)."""
    stride = cfg.stride
    x_i = backbones.forward_backbone(params, backbones.normalize_rgb(gop.iframe), "backbone_I")
    acc = accumulate(gop, mb)
    picks = sample_indices(len(acc), min(cfg.samples, len(acc))) if acc else []
    p_m, p_r = subtree(params, "scam_M"), subtree(params, "scam_R")
    vecs = []
    for t in picks:
        f = acc[t]
        motion = backbones.normalize_motion(f.acc_motion, search_range)
        residual = backbones.normalize_residual(f.acc_residual)
        x_m = backbones.forward_backbone(params, motion, "backbone_M")
        x_r = backbones.forward_backbone(params, residual, "backbone_R")
        m = backbones.resize_motion(motion, stride)
        r = backbones.resize_motion(residual, stride)
        vecs.append(scam.scam_forward(p_m, p_r, x_i, x_m, m, x_r, r))
    vecs = np.array(vecs).reshape(len(picks), cfg.channels)
    return GopFeatures(x_i, vecs, [first_frame] + [first_frame + 1 + t for t in picks])


def timeline_frame_indices(stream: GopStream, cfg: ModelConfig):
    """Source frame index of every timeline entry, without running the network."""
    out, first = [], 0
    for g in stream.gops:
        n = len(g)
        picks = sample_indices(n, min(cfg.samples, n)) if n else []
        out += [first] + [first + 1 + t for t in picks]
        first += 1 + n
    return np.asarray(out, dtype=np.int64)


def extract_timeline(params, stream: GopStream, cfg: ModelConfig, threads=1) -> temporal.FrameTimeline:
    h = stream.header
    starts = np.cumsum([0] + [1 + len(g) for g in stream.gops])

    def work(i):
        return gop_features(params, stream.gops[i], cfg, h.search_range, int(starts[i]), h.macroblock_size)

    idx = range(len(stream.gops))
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            feats = list(pool.map(work, idx))
    else:
        feats = [work(i) for i in idx]
    return temporal.timeline_from_gops(
        [f.iframe_features for f in feats],
        [f.pframe_vectors for f in feats],
        [f.frame_indices for f in feats],
        float(stream.fps),
    )


def similarity_maps(params, vectors, cfg):
    """(L, G, 2k+1, 2k+1) grouped similarity of every bag's LSTM states."""
    bags = temporal.all_bags(vectors, cfg.radius)
    hidden = temporal.lstm_forward(subtree(params, "lstm"), bags)
    return temporal.group_similarity(hidden, cfg.groups)


def score_timeline(params, vectors, cfg):
    sims = similarity_maps(params, vectors, cfg)
    desc = temporal.head_forward(subtree(params, "fcn"), sims)
    return temporal.classify(subtree(params, "classifier"), desc)


def detect(params, stream, cfg, threshold=0.5, radius=2, threads=1, video_id=""):
    """Scores and boundary timestamps (seconds) for one stream, as a JSON-ready dict."""
    timeline = extract_timeline(params, stream, cfg, threads)
    scores = score_timeline(params, timeline.vectors, cfg)
    bounds = temporal.scores_to_boundaries(scores, timeline.fps, threshold, radius, timeline.timestamps)
    return {
        "video_id": video_id,
        "fps": timeline.fps,
        "frame_indices": [int(i) for i in timeline.frame_indices],
        "scores": [float(s) for s in scores],
        "boundaries_s": bounds,
    }
