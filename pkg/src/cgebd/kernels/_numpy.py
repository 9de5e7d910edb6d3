"""Pure-numpy reference versions of the hot kernels."""
import numpy as np


def _pixel_displacements(mv, mb, height, width):
    dx = np.repeat(np.repeat(mv[..., 0], mb, axis=0), mb, axis=1)[:height, :width]
    dy = np.repeat(np.repeat(mv[..., 1], mb, axis=0), mb, axis=1)[:height, :width]
    return dx.astype(np.int64), dy.astype(np.int64)


def block_search(cur, ref, mb, candidates):
    """Full-search SAD over ``candidates`` (K, 2) for every macroblock.

    The first candidate with the minimal SAD wins, so the candidate order
    encodes the tie-break rule.
    """
    height, width, _ = cur.shape
    gh, gw = -(-height // mb), -(-width // mb)
    cur = cur.astype(np.int32)
    ref = ref.astype(np.int32)
    ys = np.arange(height)
    xs = np.arange(width)
    pad = ((0, gh * mb - height), (0, gw * mb - width))
    sads = np.empty((len(candidates), gh, gw), dtype=np.int64)
    for k in range(len(candidates)):
        dx, dy = candidates[k]
        pred = ref[np.clip(ys + dy, 0, height - 1)][:, np.clip(xs + dx, 0, width - 1)]
        diff = np.pad(np.abs(cur - pred).sum(axis=2), pad)
        sads[k] = diff.reshape(gh, mb, gw, mb).sum(axis=(1, 3))
    best = np.argmin(sads, axis=0)
    return np.ascontiguousarray(candidates[best]).astype(np.int64)


def motion_compensate(ref, mv, mb):
    height, width, _ = ref.shape
    dx, dy = _pixel_displacements(mv, mb, height, width)
    yy, xx = np.mgrid[0:height, 0:width]
    qy = np.clip(yy + dy, 0, height - 1)
    qx = np.clip(xx + dx, 0, width - 1)
    return ref[qy, qx].astype(np.int32)


def backtrace_step(posx, posy, acc_res, mv, residual, mb):
    """One backtracing hop: follow this frame's clamped displacement into the
    previous frame's accumulated state and add this frame's residual."""
    _, height, width = residual.shape
    dx, dy = _pixel_displacements(mv, mb, height, width)
    yy, xx = np.mgrid[0:height, 0:width]
    qy = np.clip(yy + dy, 0, height - 1)
    qx = np.clip(xx + dx, 0, width - 1)
    return posx[qy, qx], posy[qy, qx], acc_res[:, qy, qx] + residual


def conv2d(x, w, b, stride):
    """3x3 convolution, zero padding 1. x: (B, Cin, H, W); w: (Cout, Cin, 3, 3)."""
    batch, cin, height, width = x.shape
    cout = w.shape[0]
    ho = (height - 1) // stride + 1
    wo = (width - 1) // stride + 1
    xp = np.zeros((batch, cin, height + 2, width + 2))
    xp[:, :, 1:-1, 1:-1] = x
    cols = np.empty((batch, ho, wo, 3, 3, cin))
    for ky in range(3):
        for kx in range(3):
            win = xp[:, :, ky:ky + stride * (ho - 1) + 1:stride, kx:kx + stride * (wo - 1) + 1:stride]
            cols[:, :, :, ky, kx, :] = win.transpose(0, 2, 3, 1)
    wmat = w.transpose(0, 2, 3, 1).reshape(cout, -1)
    out = cols.reshape(batch * ho * wo, -1) @ wmat.T + b
    return np.ascontiguousarray(out.reshape(batch, ho, wo, cout).transpose(0, 3, 1, 2))
