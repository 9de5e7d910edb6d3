"""numba-compiled versions of the hot kernels; same contracts as ``_numpy``."""
import numpy as np
from numba import njit

_opts = dict(cache=True, nogil=True)


@njit(**_opts)
def _clamp(v, lo, hi):
    if v < lo:
        return lo
    if v > hi:
        return hi
    return v


@njit(**_opts)
def block_search(cur, ref, mb, candidates):
    height, width, nch = cur.shape
    gh = (height + mb - 1) // mb
    gw = (width + mb - 1) // mb
    out = np.zeros((gh, gw, 2), dtype=np.int64)
    for by in range(gh):
        y0 = by * mb
        y1 = min(y0 + mb, height)
        for bx in range(gw):
            x0 = bx * mb
            x1 = min(x0 + mb, width)
            best = np.int64(-1)
            best_k = 0
            for k in range(candidates.shape[0]):
                dx = candidates[k, 0]
                dy = candidates[k, 1]
                sad = np.int64(0)
                for y in range(y0, y1):
                    qy = _clamp(y + dy, 0, height - 1)
                    for x in range(x0, x1):
                        qx = _clamp(x + dx, 0, width - 1)
                        for c in range(nch):
                            d = np.int64(cur[y, x, c]) - np.int64(ref[qy, qx, c])
                            sad += d if d >= 0 else -d
                    # candidates only replace on strictly smaller SAD
                    if best >= 0 and sad >= best:
                        break
                if best < 0 or sad < best:
                    best = sad
                    best_k = k
            out[by, bx, 0] = candidates[best_k, 0]
            out[by, bx, 1] = candidates[best_k, 1]
    return out


@njit(**_opts)
def motion_compensate(ref, mv, mb):
    height, width, nch = ref.shape
    out = np.empty((height, width, nch), dtype=np.int32)
    for y in range(height):
        for x in range(width):
            dx = mv[y // mb, x // mb, 0]
            dy = mv[y // mb, x // mb, 1]
            qy = _clamp(y + dy, 0, height - 1)
            qx = _clamp(x + dx, 0, width - 1)
            for c in range(nch):
                out[y, x, c] = ref[qy, qx, c]
    return out


@njit(**_opts)
def backtrace_step(posx, posy, acc_res, mv, residual, mb):
    nch, height, width = residual.shape
    nx = np.empty_like(posx)
    ny = np.empty_like(posy)
    nr = np.empty_like(acc_res)
    for y in range(height):
        for x in range(width):
            dx = mv[y // mb, x // mb, 0]
            dy = mv[y // mb, x // mb, 1]
            qy = _clamp(y + dy, 0, height - 1)
            qx = _clamp(x + dx, 0, width - 1)
            nx[y, x] = posx[qy, qx]
            ny[y, x] = posy[qy, qx]
            for c in range(nch):
                nr[c, y, x] = acc_res[c, qy, qx] + residual[c, y, x]
    return nx, ny, nr


@njit(**_opts)
def conv2d(x, w, b, stride):
    batch, cin, height, width = x.shape
    cout = w.shape[0]
    ho = (height - 1) // stride + 1
    wo = (width - 1) // stride + 1
    out = np.empty((batch, cout, ho, wo))
    for n in range(batch):
        for co in range(cout):
            for oy in range(ho):
                for ox in range(wo):
                    s = 0.0
                    for ky in range(3):
                        iy = oy * stride + ky - 1
                        if iy < 0 or iy >= height:
                            continue
                        for kx in range(3):
                            ix = ox * stride + kx - 1
                            if ix < 0 or ix >= width:
                                continue
                            for ci in range(cin):
                                s += w[co, ci, ky, kx] * x[n, ci, iy, ix]
                    out[n, co, oy, ox] = s + b[co]
    return out
