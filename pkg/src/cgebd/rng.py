"""SplitMix64 generator (Steele, Lea & Flood), used for all seeded randomness.

Output ``i`` (1-based) for seed ``s`` is ``mix(s + i * GOLDEN_GAMMA)`` modulo
2**64, which lets whole blocks be produced with vectorized uint64 arithmetic.
"""
import math

import numpy as np

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
MASK64 = (1 << 64) - 1


def _mix(z):
    z = ((z ^ (z >> np.uint64(30))) * np.uint64(MIX1))
    z = ((z ^ (z >> np.uint64(27))) * np.uint64(MIX2))
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    def __init__(self, seed):
        self.state = int(seed) & MASK64

    def next_u64(self):
        return int(self.next_block(1)[0])

    def next_block(self, n):
        """Next ``n`` outputs as a uint64 array, advancing the state by ``n``."""
        steps = np.arange(1, n + 1, dtype=np.uint64)
        with np.errstate(over="ignore"):
            z = np.uint64(self.state) + steps * np.uint64(GOLDEN_GAMMA)
            out = _mix(z)
        self.state = (self.state + n * GOLDEN_GAMMA) & MASK64
        return out

    def random(self, n=None):
        """Doubles in [0, 1) from the top 53 bits."""
        k = 1 if n is None else n
        u = (self.next_block(k) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return float(u[0]) if n is None else u

    def uniform(self, low, high, n=None):
        u = self.random(n)
        return low + (high - low) * u

    def normal(self, n=None):
        """Standard normals via Box-Muller, one pair of uniforms per value."""
        k = 1 if n is None else n
        u = self.random(2 * k).reshape(k, 2)
        r = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
        z = r * np.cos(2.0 * math.pi * u[:, 1])
        return float(z[0]) if n is None else z

    def integers(self, low, high):
        """Integer in [low, high)."""
        return low + int(self.random() * (high - low))
