"""Synthetic videos with known event boundaries, and a pixel-difference
baseline detector used to validate the evaluation harness."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .annotations import BoundaryAnnotation
from .codec import RawVideo
from .rng import SplitMix64


@dataclass(frozen=True)
class Sprite:
    size: int = 8
    velocity: tuple = (1, 0)
    start: tuple = (0, 0)
    color: tuple = (255, 255, 255)


@dataclass(frozen=True)
class Segment:
    duration_frames: int
    background: tuple
    sprite: Sprite = Sprite()


@dataclass(frozen=True)
class SynthSpec:
    width: int = 32
    height: int = 32
    fps: tuple = (12, 1)
    segments: tuple = ()
    rater_count: int = 5
    rater_jitter_sd: float = 0.0
    seed: int = 0
    video_id: str = "synth"

    def __post_init__(self):
        if any(s.duration_frames < 1 for s in self.segments):
            raise ValueError("segment durations must be >= 1")
        if self.rater_jitter_sd < 0:
            raise ValueError("jitter must be >= 0")

    @classmethod
    def from_json(cls, obj):
        segs = []
        for s in obj.get("segments", []):
            sp = s.get("sprite", {})
            sprite = Sprite(
                int(sp.get("size", 8)),
                tuple(sp.get("velocity", (1, 0))),
                tuple(sp.get("start", (0, 0))),
                tuple(sp.get("color", (255, 255, 255))),
            )
            segs.append(Segment(int(s["duration_frames"]), tuple(s["background"]), sprite))
        return cls(
            width=int(obj.get("width", 32)),
            height=int(obj.get("height", 32)),
            fps=tuple(obj.get("fps", (12, 1))),
            segments=tuple(segs),
            rater_count=int(obj.get("rater_count", 5)),
            rater_jitter_sd=float(obj.get("rater_jitter_sd", 0.0)),
            seed=int(obj.get("seed", 0)),
            video_id=str(obj.get("video_id", "synth")),
        )


def _render(seg, t, width, height):
    frame = np.empty((height, width, 3), dtype=np.uint8)
    frame[:] = seg.background
    sp = seg.sprite
    x0 = sp.start[0] + sp.velocity[0] * t
    y0 = sp.start[1] + sp.velocity[1] * t
    ys = slice(max(y0, 0), max(min(y0 + sp.size, height), 0))
    xs = slice(max(x0, 0), max(min(x0 + sp.size, width), 0))
    frame[ys, xs] = sp.color
    # darker quadrant gives block matching something to lock onto
    half = sp.size // 2
    ys2 = slice(max(y0, 0), max(min(y0 + half, height), 0))
    xs2 = slice(max(x0, 0), max(min(x0 + half, width), 0))
    frame[ys2, xs2] = tuple(c // 2 for c in sp.color)
    return frame


def generate(spec: SynthSpec):
    frames = []
    bounds = []
    for i, seg in enumerate(spec.segments):
        if i:
            bounds.append(len(frames))
        frames.extend(_render(seg, t, spec.width, spec.height) for t in range(seg.duration_frames))
    num, den = spec.fps
    fps = num / den
    n = len(frames)
    video = RawVideo(spec.width, spec.height, num, den,
                     np.stack(frames) if frames else np.zeros((0, spec.height, spec.width, 3), np.uint8))
    duration = n / fps
    truth = [b / fps for b in bounds]
    rng = SplitMix64(spec.seed)
    raters = []
    for _ in range(spec.rater_count):
        if spec.rater_jitter_sd > 0 and truth:
            jit = rng.normal(len(truth)) * spec.rater_jitter_sd
            raters.append(sorted(float(np.clip(t + j, 0.0, duration)) for t, j in zip(truth, jit)))
        else:
            raters.append(list(truth))
    ann = BoundaryAnnotation(spec.video_id, fps, n, duration, raters)
    return video, ann


def frame_differences(video: RawVideo):
    """Mean absolute difference between each frame and its predecessor (0 for frame 0)."""
    f = video.frames.astype(np.int16)
    d = np.zeros(video.num_frames)
    if video.num_frames > 1:
        d[1:] = np.abs(np.diff(f, axis=0)).mean(axis=(1, 2, 3))
    return d


def baseline_detector(video: RawVideo, tau_pix=20.0, radius=2):
    d = frame_differences(video)
    fps = float(video.fps)
    out = []
    for j in range(len(d)):
        if d[j] <= tau_pix:
            continue
        lo, hi = max(0, j - radius), min(len(d), j + radius + 1)
        others = np.delete(d[lo:hi], j - lo)
        if others.size == 0 or d[j] > others.max():
            out.append(j / fps)
    return out


def _distinct_color(rng, prev, min_dist=150):
    while True:
        c = tuple(int(v) for v in (rng.random(3) * 256).astype(int))
        if prev is None or sum(abs(a - b) for a, b in zip(c, prev)) >= min_dist:
            return c


def hard_cut_spec(seed, width=32, height=32, fps=(12, 1), segments=(2, 4),
                  frames=(18, 42), rater_count=5, jitter_sd=0.05, video_id=None):
    """Random video whose boundaries are hard scene cuts (new background and sprite)."""
    rng = SplitMix64(seed)
    n_seg = rng.integers(segments[0], segments[1] + 1)
    segs = []
    prev = None
    for _ in range(n_seg):
        bg = _distinct_color(rng, prev)
        prev = bg
        size = rng.integers(6, 13)
        sprite = Sprite(
            size=size,
            velocity=(rng.integers(-2, 3), rng.integers(-2, 3)),
            start=(rng.integers(0, width - size), rng.integers(0, height - size)),
            color=_distinct_color(rng, bg),
        )
        segs.append(Segment(rng.integers(frames[0], frames[1] + 1), bg, sprite))
    return SynthSpec(width, height, fps, tuple(segs), rater_count, jitter_sd, seed,
                     video_id or f"cut{seed:05d}")


def hard_cut_suite(n, seed=0, **kwargs):
    return [generate(hard_cut_spec(seed + i, **kwargs)) for i in range(n)]


def demo_spec():
    return SynthSpec(
        width=48,
        height=48,
        fps=(12, 1),
        segments=(
            Segment(30, (30, 60, 200), Sprite(10, (1, 0), (4, 10), (250, 250, 40))),
            Segment(30, (200, 40, 40), Sprite(12, (0, 1), (20, 2), (20, 220, 90))),
            Segment(30, (30, 160, 60), Sprite(8, (-1, -1), (36, 36), (240, 240, 240))),
        ),
        rater_count=3,
        rater_jitter_sd=0.05,
        seed=7,
        video_id="demo",
    )
