"""Minimal motion-compensated GOP codec and its binary stream format.

Each GOP stores one raw I-frame followed by P-frames. A P-frame is a grid of
integer macroblock displacements plus a signed residual plane. Prediction for
pixel ``p`` reads the previous reconstructed frame at ``clamp(p + d)``, where
``d`` is the displacement of the macroblock containing ``p``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .errors import BadMagic, BadVersion, ConfigError, CorruptStream, EmptyVideo, InvalidDimensions, Truncated

MAGIC = b"LCVS"
VERSION = 1
MACROBLOCK = 16

FLAG_LOSSY = 0x01
FLAG_PARTIAL_GOP = 0x02

_HEADER = struct.Struct("<4sHHHHHIBBBB")


@dataclass(frozen=True, eq=False)
class RawVideo:
    """Decoded RGB24 video. ``frames`` has shape (N, H, W, 3), dtype uint8."""

    width: int
    height: int
    fps_num: int
    fps_den: int
    frames: np.ndarray

    def __post_init__(self):
        if self.fps_den <= 0:
            raise ValueError("fps denominator must be positive")
        f = self.frames
        if f.ndim != 4 or f.shape[1:] != (self.height, self.width, 3) or f.dtype != np.uint8:
            raise ValueError(f"frames must be uint8 (N, {self.height}, {self.width}, 3), got {f.dtype} {f.shape}")

    @property
    def fps(self) -> Fraction:
        return Fraction(self.fps_num, self.fps_den)

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    def __eq__(self, other):
        if not isinstance(other, RawVideo):
            return NotImplemented
        return (
            (self.width, self.height, self.fps_num, self.fps_den)
            == (other.width, other.height, other.fps_num, other.fps_den)
            and np.array_equal(self.frames, other.frames)
        )


@dataclass(frozen=True)
class EncoderConfig:
    gop_size: int = 12
    search_range: int = 7
    lossless: bool = True
    quant_step: int = 4  # only used when lossless is False

    def __post_init__(self):
        if self.gop_size < 2 or self.gop_size - 1 > 0xFF:
            raise ConfigError("gop_size must be in [2, 256]")
        if not 1 <= self.search_range <= 32:
            raise ConfigError("search_range must be in [1, 32]")
        if self.quant_step < 1:
            raise ConfigError("quant_step must be >= 1")


@dataclass(frozen=True)
class StreamHeader:
    width: int
    height: int
    fps_num: int
    fps_den: int
    gop_count: int
    pframes_per_gop: int
    macroblock_size: int = MACROBLOCK
    search_range: int = 7
    flags: int = 0

    @property
    def lossy(self) -> bool:
        return bool(self.flags & FLAG_LOSSY)

    @property
    def partial_gop(self) -> bool:
        return bool(self.flags & FLAG_PARTIAL_GOP)

    @property
    def grid(self) -> tuple[int, int]:
        mb = self.macroblock_size
        return -(-self.height // mb), -(-self.width // mb)


@dataclass(frozen=True, eq=False)
class Gop:
    """One group of pictures.

    ``motion`` is (P, gh, gw, 2) int8 with (dx, dy) per macroblock and
    ``residual`` is (P, 3, H, W) int16, channel-major.
    """

    iframe: np.ndarray
    motion: np.ndarray
    residual: np.ndarray

    def __len__(self):
        return self.motion.shape[0]

    @property
    def pframes(self):
        return list(zip(self.motion, self.residual))

    def __eq__(self, other):
        if not isinstance(other, Gop):
            return NotImplemented
        return all(
            a.dtype == b.dtype and np.array_equal(a, b)
            for a, b in ((self.iframe, other.iframe), (self.motion, other.motion), (self.residual, other.residual))
        )


@dataclass(frozen=True)
class GopStream:
    header: StreamHeader
    gops: tuple = field(default_factory=tuple)

    @property
    def fps(self) -> Fraction:
        return Fraction(self.header.fps_num, self.header.fps_den)

    @property
    def num_frames(self) -> int:
        return sum(1 + len(g) for g in self.gops)


def candidate_offsets(search_range):
    """All displacements in the search window, in tie-break order:
    smallest |dx|+|dy|, then smallest dy, then smallest dx."""
    r = range(-search_range, search_range + 1)
    cands = sorted(((dx, dy) for dy in r for dx in r), key=lambda d: (abs(d[0]) + abs(d[1]), d[1], d[0]))
    return np.array(cands, dtype=np.int64)


def quantize_residual(residual, step):
    q = np.round(residual / step) * step
    return np.clip(q, -255, 255).astype(np.int16)


def encode(raw: RawVideo, cfg: EncoderConfig = EncoderConfig()) -> GopStream:
    if raw.num_frames == 0:
        raise EmptyVideo("video has no frames")
    if raw.width < MACROBLOCK or raw.height < MACROBLOCK:
        raise InvalidDimensions(f"{raw.width}x{raw.height} is smaller than the {MACROBLOCK}px macroblock")
    if raw.width > 0xFFFF or raw.height > 0xFFFF:
        raise InvalidDimensions("dimensions must fit in 16 bits")
    cands = candidate_offsets(cfg.search_range)
    gops = []
    for start in range(0, raw.num_frames, cfg.gop_size):
        chunk = raw.frames[start:start + cfg.gop_size]
        gops.append(_encode_gop(chunk, cands, cfg))

    flags = 0 if cfg.lossless else FLAG_LOSSY
    if raw.num_frames % cfg.gop_size:
        flags |= FLAG_PARTIAL_GOP
    header = StreamHeader(
        width=raw.width,
        height=raw.height,
        fps_num=raw.fps_num,
        fps_den=raw.fps_den,
        gop_count=len(gops),
        pframes_per_gop=cfg.gop_size - 1,
        macroblock_size=MACROBLOCK,
        search_range=cfg.search_range,
        flags=flags,
    )
    return GopStream(header, tuple(gops))


def _encode_gop(frames, cands, cfg):
    height, width, _ = frames[0].shape
    gh, gw = -(-height // MACROBLOCK), -(-width // MACROBLOCK)
    n_p = len(frames) - 1
    motion = np.zeros((n_p, gh, gw, 2), dtype=np.int8)
    residual = np.zeros((n_p, 3, height, width), dtype=np.int16)
    recon = np.ascontiguousarray(frames[0])
    for t in range(n_p):
        src = np.ascontiguousarray(frames[t + 1])
        mv = kernels.block_search(src, recon, MACROBLOCK, cands)
        pred = kernels.motion_compensate(recon, mv, MACROBLOCK)
        res = (src.astype(np.int32) - pred).transpose(2, 0, 1)
        if cfg.lossless:
            res = res.astype(np.int16)
            recon = src
        else:
            res = quantize_residual(res, cfg.quant_step)
            recon = np.clip(pred + res.transpose(1, 2, 0), 0, 255).astype(np.uint8)
        motion[t] = mv
        residual[t] = res
    return Gop(np.array(frames[0], dtype=np.uint8), motion, residual)


def decode_gop(gop: Gop, mb: int = MACROBLOCK) -> np.ndarray:
    """Sequentially reconstruct all frames of one GOP, shape (1 + P, H, W, 3)."""
    out = np.empty((1 + len(gop),) + gop.iframe.shape, dtype=np.uint8)
    out[0] = gop.iframe
    prev = np.ascontiguousarray(gop.iframe)
    for t in range(len(gop)):
        pred = kernels.motion_compensate(prev, gop.motion[t].astype(np.int64), mb)
        prev = np.clip(pred + gop.residual[t].transpose(1, 2, 0), 0, 255).astype(np.uint8)
        out[t + 1] = prev
    return out


def decode(stream: GopStream) -> RawVideo:
    h = stream.header
    parts = [decode_gop(g, h.macroblock_size) for g in stream.gops]
    frames = np.concatenate(parts) if parts else np.zeros((0, h.height, h.width, 3), np.uint8)
    return RawVideo(h.width, h.height, h.fps_num, h.fps_den, frames)


def serialize(stream: GopStream) -> bytes:
    h = stream.header
    out = [
        _HEADER.pack(
            MAGIC, VERSION, h.width, h.height, h.fps_num, h.fps_den, h.gop_count,
            h.pframes_per_gop, h.macroblock_size, h.search_range, h.flags,
        )
    ]
    for gop in stream.gops:
        out.append(np.ascontiguousarray(gop.iframe, dtype=np.uint8).tobytes())
        for mv, res in zip(gop.motion, gop.residual):
            out.append(np.ascontiguousarray(mv, dtype=np.int8).tobytes())
            out.append(np.ascontiguousarray(res, dtype="<i2").tobytes())
    return b"".join(out)


def deserialize(data: bytes) -> GopStream:
    data = bytes(data)
    if len(data) < 4:
        raise Truncated("stream shorter than magic", len(data))
    if data[:4] != MAGIC:
        raise BadMagic(f"bad magic {data[:4]!r}", 0)
    if len(data) < 6:
        raise Truncated("missing version", len(data))
    (version,) = struct.unpack_from("<H", data, 4)
    if version != VERSION:
        raise BadVersion(f"unsupported version {version}", 4)
    if len(data) < _HEADER.size:
        raise Truncated("incomplete header", len(data))
    _, _, width, height, fps_num, fps_den, gop_count, n_p, mb, sr, flags = _HEADER.unpack_from(data, 0)
    if mb != MACROBLOCK:
        raise CorruptStream(f"macroblock size {mb} != {MACROBLOCK}", 19)
    if width < mb or height < mb:
        raise CorruptStream(f"invalid dimensions {width}x{height}", 6)
    if fps_den == 0:
        raise CorruptStream("zero fps denominator", 12)
    if flags & ~(FLAG_LOSSY | FLAG_PARTIAL_GOP):
        raise CorruptStream(f"unknown flag bits {flags:#04x}", 21)
    header = StreamHeader(width, height, fps_num, fps_den, gop_count, n_p, mb, sr, flags)
    gh, gw = header.grid
    iframe_bytes = 3 * height * width
    mv_bytes = 2 * gh * gw
    res_bytes = 2 * 3 * height * width

    pos = _HEADER.size
    gops = []
    for i in range(gop_count):
        last = i == gop_count - 1
        if len(data) - pos < iframe_bytes:
            raise Truncated(f"GOP {i} I-frame", len(data))
        iframe = np.frombuffer(data, np.uint8, iframe_bytes, pos).reshape(height, width, 3).copy()
        pos += iframe_bytes
        if last and header.partial_gop:
            remaining = len(data) - pos
            count, rest = divmod(remaining, mv_bytes + res_bytes)
            if rest:
                raise Truncated(f"GOP {i} P-frame", pos + count * (mv_bytes + res_bytes) + min(rest, mv_bytes))
            if count >= n_p:
                raise CorruptStream("partial-GOP flag set but last GOP is complete", pos)
        else:
            count = n_p
        motion = np.empty((count, gh, gw, 2), np.int8)
        residual = np.empty((count, 3, height, width), np.int16)
        for t in range(count):
            if len(data) - pos < mv_bytes:
                raise Truncated(f"GOP {i} P-frame {t} motion grid", len(data))
            motion[t] = np.frombuffer(data, np.int8, mv_bytes, pos).reshape(gh, gw, 2)
            pos += mv_bytes
            if len(data) - pos < res_bytes:
                raise Truncated(f"GOP {i} P-frame {t} residual", len(data))
            residual[t] = np.frombuffer(data, "<i2", 3 * height * width, pos).reshape(3, height, width)
            pos += res_bytes
        if np.abs(motion.astype(np.int64)).max(initial=0) > sr:
            raise CorruptStream(f"GOP {i} motion vector exceeds search range {sr}", pos)
        gops.append(Gop(iframe, motion, residual))
    if pos != len(data):
        raise CorruptStream(f"{len(data) - pos} trailing bytes", pos)
    return GopStream(header, tuple(gops))


# Raw planar video container used by the CLI.
RAW_MAGIC = b"LCVR"
_RAW_HEADER = struct.Struct("<4sHHHHI")


def write_raw(raw: RawVideo) -> bytes:
    head = _RAW_HEADER.pack(RAW_MAGIC, raw.width, raw.height, raw.fps_num, raw.fps_den, raw.num_frames)
    planar = np.ascontiguousarray(raw.frames.transpose(0, 3, 1, 2))
    return head + planar.tobytes()


def read_raw(data: bytes) -> RawVideo:
    if len(data) < _RAW_HEADER.size:
        raise Truncated("raw video header", len(data))
    magic, width, height, fps_num, fps_den, n = _RAW_HEADER.unpack_from(data, 0)
    if magic != RAW_MAGIC:
        raise BadMagic(f"bad magic {magic!r}", 0)
    size = n * 3 * height * width
    body = data[_RAW_HEADER.size:]
    if len(body) < size:
        raise Truncated("raw video frames", len(data))
    if len(body) > size:
        raise CorruptStream("trailing bytes after raw frames", _RAW_HEADER.size + size)
    planar = np.frombuffer(body, np.uint8).reshape(n, 3, height, width)
    return RawVideo(width, height, fps_num, fps_den, np.ascontiguousarray(planar.transpose(0, 2, 3, 1)))
