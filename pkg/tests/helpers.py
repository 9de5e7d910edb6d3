import numpy as np

from cgebd import codec


def moving_video(n, h, w, seed):
    """Random texture panned by a random integer velocity, with noise patches."""
    rng = np.random.default_rng(seed)
    big = rng.integers(0, 256, (h + 40, w + 40, 3), dtype=np.uint8)
    vx, vy = rng.integers(-3, 4, 2)
    frames = []
    for t in range(n):
        oy, ox = 20 + int(np.clip(vy * t, -20, 20)), 20 + int(np.clip(vx * t, -20, 20))
        f = big[oy:oy + h, ox:ox + w].copy()
        y, x = rng.integers(0, h - 8), rng.integers(0, w - 8)
        f[y:y + 8, x:x + 8] = rng.integers(0, 256, (8, 8, 3))
        frames.append(f)
    return codec.RawVideo(w, h, 12, 1, np.stack(frames))


def random_gop(seed, size=64, pframes=11, search_range=7):
    v = moving_video(pframes + 1, size, size, seed)
    cfg = codec.EncoderConfig(gop_size=pframes + 1, search_range=search_range)
    return codec.encode(v, cfg).gops[0], v
