"""Backtracing of chained P-frames to their GOP's I-frame.

After accumulation, every P-frame is described by a per-pixel displacement
into the I-frame and a per-pixel accumulated residual, so it can be rebuilt
from the I-frame alone. One forward pass over the GOP suffices.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import kernels
from .codec import GopStream, Gop
from .errors import BadMagic, BadVersion, CorruptStream, InvalidSampleCount, Truncated


@dataclass(frozen=True, eq=False)
class AccumulatedPFrame:
    acc_motion: np.ndarray  # (2, H, W) int32: dx, dy into the I-frame
    acc_residual: np.ndarray  # (3, H, W) int32
    source_index: int  # 0-based position among the GOP's P-frames


def accumulate(gop: Gop, mb: int = 16) -> list[AccumulatedPFrame]:
    height, width, _ = gop.iframe.shape
    yy, xx = np.mgrid[0:height, 0:width]
    posx = xx.astype(np.int32)
    posy = yy.astype(np.int32)
    acc = np.zeros((3, height, width), dtype=np.int32)
    out = []
    for t in range(len(gop)):
        posx, posy, acc = kernels.backtrace_step(
            posx, posy, acc, gop.motion[t].astype(np.int64), gop.residual[t].astype(np.int32), mb
        )
        motion = np.stack([posx - xx, posy - yy]).astype(np.int32)
        out.append(AccumulatedPFrame(motion, acc, t))
    return out


def reconstruct(iframe: np.ndarray, frame: AccumulatedPFrame) -> np.ndarray:
    """Rebuild a P-frame as ``I[p + acc_motion(p)] + acc_residual(p)``, clamped."""
    height, width, _ = iframe.shape
    yy, xx = np.mgrid[0:height, 0:width]
    src = iframe[yy + frame.acc_motion[1], xx + frame.acc_motion[0]].astype(np.int32)
    return np.clip(src + frame.acc_residual.transpose(1, 2, 0), 0, 255).astype(np.uint8)


def sample_indices(n_available: int, count: int) -> list[int]:
    """Evenly spaced interior picks: floor((j+1)(n+1)/(count+1)) - 1.

    With the I-frame counted as position 0 of the GOP this spaces the I-frame
    and the picks uniformly (n=11, count=3 gives 2, 5, 8).
    """
    if not 1 <= count <= n_available:
        raise InvalidSampleCount(f"cannot sample {count} of {n_available} P-frames")
    return [(j + 1) * (n_available + 1) // (count + 1) - 1 for j in range(count)]


def sample_pframes(acc, count):
    return [acc[i] for i in sample_indices(len(acc), count)]


ACC_MAGIC = b"LCVA"
ACC_VERSION = 1


def dump_accumulated(stream: GopStream) -> bytes:
    """Binary dump of every accumulated P-frame in a stream.

    Layout (little-endian): "LCVA", version u16, width u16, height u16,
    gop_count u32; per GOP: P-frame count u8; per P-frame: source_index u8,
    motion (2*H*W i16, dx plane then dy plane), residual (3*H*W i16,
    channel-major then row-major).
    """
    h = stream.header
    parts = [struct.pack("<4sHHHI", ACC_MAGIC, ACC_VERSION, h.width, h.height, h.gop_count)]
    for gop in stream.gops:
        frames = accumulate(gop, h.macroblock_size)
        parts.append(struct.pack("<B", len(frames)))
        for f in frames:
            parts.append(struct.pack("<B", f.source_index))
            parts.append(_to_i16(f.acc_motion).tobytes())
            parts.append(_to_i16(f.acc_residual).tobytes())
    return b"".join(parts)


def _to_i16(a):
    if a.size and (a.min() < -32768 or a.max() > 32767):
        raise OverflowError("accumulated plane does not fit in int16")
    return np.ascontiguousarray(a, dtype="<i2")


def load_accumulated(data: bytes):
    """Inverse of :func:`dump_accumulated`: (width, height, per-GOP frame lists)."""
    head = struct.calcsize("<4sHHHI")
    if len(data) < head:
        raise Truncated("accumulated dump header", len(data))
    magic, version, w, hgt, count = struct.unpack_from("<4sHHHI", data, 0)
    if magic != ACC_MAGIC:
        raise BadMagic(f"bad magic {magic!r}", 0)
    if version != ACC_VERSION:
        raise BadVersion(f"unsupported version {version}", 4)
    off = head
    nm, nr = 2 * hgt * w * 2, 3 * hgt * w * 2
    gops = []
    for _ in range(count):
        if off + 1 > len(data):
            raise Truncated("missing P-frame count", off)
        n = data[off]
        off += 1
        frames = []
        for _ in range(n):
            if off + 1 + nm + nr > len(data):
                raise Truncated("accumulated P-frame", off)
            src = data[off]
            off += 1
            mot = np.frombuffer(data, "<i2", 2 * hgt * w, off).reshape(2, hgt, w).astype(np.int32)
            off += nm
            res = np.frombuffer(data, "<i2", 3 * hgt * w, off).reshape(3, hgt, w).astype(np.int32)
            off += nr
            frames.append(AccumulatedPFrame(mot, res, src))
        gops.append(frames)
    if off != len(data):
        raise CorruptStream("trailing bytes after accumulated dump", off)
    return w, hgt, gops
