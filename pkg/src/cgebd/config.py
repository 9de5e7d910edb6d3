"""Pipeline configuration: one INI-style text file, every key optional.

Example (all defaults)::

    [codec]
    gop_size = 12          ; 1 I-frame + 11 P-frames
    search_range = 7
    lossless = true
    quant_step = 4         ; only used when lossless = false

    [model]
    channels = 32          ; C
    samples = 3            ; T, P-frames sampled per GOP
    radius = 8             ; k, bag of 2k+1 entries
    groups = 4             ; G
    descriptor = 32        ; C'
    seed = 0
    backbone_hidden = 8,16
    fcn_width = 16
    classifier_width = 16

    [detect]
    threshold = 0.5        ; tau
    nms_radius = 2         ; w

    [train]
    steps = 200
    lr = 1.0
    top_n_raters = 2
    alpha = 1.0            ; soft-label Gaussian width, in timeline entries
    trainable = classifier.conv

    [eval]
    thresholds = 0.05,0.10,0.15,0.20,0.25,0.30,0.35,0.40,0.45,0.50
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

from .codec import EncoderConfig
from .errors import ConfigError
from .evaluation import THRESHOLDS
from .model import ModelConfig


@dataclass(frozen=True)
class DetectConfig:
    threshold: float = 0.5
    nms_radius: int = 2

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("detect.threshold must lie in (0, 1)")
        if self.nms_radius < 1:
            raise ConfigError("detect.nms_radius must be >= 1")


@dataclass(frozen=True)
class TrainConfig:
    steps: int = 200
    lr: float = 1.0
    top_n_raters: int = 2
    alpha: float = 1.0
    trainable: tuple = ("classifier.conv",)

    def __post_init__(self):
        if self.steps < 0 or self.lr < 0:
            raise ConfigError("train.steps and train.lr must be non-negative")
        if self.top_n_raters < 1:
            raise ConfigError("train.top_n_raters must be >= 1")
        if self.alpha <= 0:
            raise ConfigError("train.alpha must be positive")
        if not self.trainable:
            raise ConfigError("train.trainable is empty")


@dataclass(frozen=True)
class EvalConfig:
    thresholds: tuple = THRESHOLDS

    def __post_init__(self):
        t = self.thresholds
        if not t or any(not 0.0 < x <= 1.0 for x in t) or list(t) != sorted(set(t)):
            raise ConfigError("eval.thresholds must be strictly increasing values in (0, 1]")


@dataclass(frozen=True)
class PipelineConfig:
    codec: EncoderConfig = field(default_factory=EncoderConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    detect: DetectConfig = field(default_factory=DetectConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _names(text):
    return tuple(x.strip() for x in text.split(",") if x.strip())


_TUPLES = {"backbone_hidden": _ints, "thresholds": _floats, "trainable": _names}


def _section(parser, name, cls):
    if not parser.has_section(name):
        return cls()
    known = {f.name: f for f in fields(cls)}
    default = cls()
    kwargs = {}
    for key, raw in parser.items(name):
        if key not in known:
            raise ConfigError(f"unknown key {name}.{key}")
        current = getattr(default, key)
        try:
            if key in _TUPLES:
                kwargs[key] = _TUPLES[key](raw)
            elif isinstance(current, bool):
                kwargs[key] = parser.getboolean(name, key)
            elif isinstance(current, int):
                kwargs[key] = int(raw)
            elif isinstance(current, float):
                kwargs[key] = float(raw)
            else:
                kwargs[key] = raw
        except ValueError as e:
            raise ConfigError(f"{name}.{key}: cannot parse {raw!r}") from e
    return cls(**kwargs)


_SECTIONS = {"codec": EncoderConfig, "model": ModelConfig, "detect": DetectConfig,
             "train": TrainConfig, "eval": EvalConfig}


def parse_config(text) -> PipelineConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from e
    for s in parser.sections():
        if s not in _SECTIONS:
            raise ConfigError(f"unknown section [{s}]")
    cfg = PipelineConfig(**{n: _section(parser, n, c) for n, c in _SECTIONS.items()})
    return validate(cfg)


def validate(cfg: PipelineConfig) -> PipelineConfig:
    # cross-section consistency: the model samples P-frames from one GOP
    if cfg.model.samples > cfg.codec.gop_size - 1:
        raise ConfigError(
            f"model.samples={cfg.model.samples} exceeds the {cfg.codec.gop_size - 1} P-frames per GOP"
        )
    return cfg


def load_config(path=None) -> PipelineConfig:
    if path is None:
        return validate(PipelineConfig())
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def dump_config(cfg: PipelineConfig) -> str:
    parser = configparser.ConfigParser()
    for name in _SECTIONS:
        sec = getattr(cfg, name)
        parser[name] = {}
        for f in fields(sec):
            v = getattr(sec, f.name)
            if isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            parser[name][f.name] = str(v)
    lines = []
    for name in parser.sections():
        lines.append(f"[{name}]")
        lines += [f"{k} = {v}" for k, v in parser[name].items()]
        lines.append("")
    return "\n".join(lines)
