"""Boundary annotations and their JSON file format.

The file is a JSON array of objects with exactly the keys ``video_id``,
``fps``, ``num_frames``, ``duration_s`` and ``raters`` (a list of sorted
boundary-timestamp lists in seconds).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import ConfigError

FIELDS = ("video_id", "fps", "num_frames", "duration_s", "raters")


@dataclass(frozen=True)
class BoundaryAnnotation:
    video_id: str
    fps: float
    num_frames: int
    duration_s: float
    raters: list = field(default_factory=list)

    def __post_init__(self):
        for r in self.raters:
            if any(t < 0 or t > self.duration_s for t in r):
                raise ConfigError(f"{self.video_id}: boundary outside [0, {self.duration_s}]")

    def to_json(self):
        return {
            "video_id": self.video_id,
            "fps": self.fps,
            "num_frames": self.num_frames,
            "duration_s": self.duration_s,
            "raters": [list(r) for r in self.raters],
        }

    @classmethod
    def from_json(cls, obj):
        missing = [k for k in FIELDS if k not in obj]
        if missing:
            raise ConfigError(f"annotation missing fields {missing}")
        return cls(
            str(obj["video_id"]),
            float(obj["fps"]),
            int(obj["num_frames"]),
            float(obj["duration_s"]),
            [sorted(float(t) for t in r) for r in obj["raters"]],
        )


def dumps(annotations) -> str:
    return json.dumps([a.to_json() for a in annotations], indent=2)


def loads(text) -> list[BoundaryAnnotation]:
    doc = json.loads(text)
    if isinstance(doc, dict):
        doc = [doc]
    return [BoundaryAnnotation.from_json(o) for o in doc]
