"""Generic event boundary detection on compressed (GOP) video streams."""
from . import kernels
from .annotations import BoundaryAnnotation
from .backtrace import AccumulatedPFrame, accumulate, reconstruct, sample_indices
from .codec import EncoderConfig, GopStream, RawVideo, decode, deserialize, encode, serialize
from .config import PipelineConfig, load_config
from .errors import (BadMagic, BadVersion, CgebdError, ConfigError, CorruptStream, InvalidSampleCount,
                     ShapeError, Truncated)
from .evaluation import THRESHOLDS, f1_report
from .model import TINY, ModelConfig, detect, init_model
from .training import micro_train

__version__ = "0.1.0"
