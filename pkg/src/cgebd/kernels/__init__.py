"""Hot kernels. The numba build is used unless ``CGEBD_NUMBA=0``.

``conv2d`` always takes the numpy path: its im2col product runs on BLAS and
beats the numba loop nest by about an order of magnitude (see
benchmarks/bench_kernels.py).
"""
from .._jit import USE_NUMBA
from ._numpy import conv2d

if USE_NUMBA:
    from ._numba import backtrace_step, block_search, motion_compensate

    BACKEND = "numba"
else:
    from ._numpy import backtrace_step, block_search, motion_compensate

    BACKEND = "numpy"

__all__ = ["BACKEND", "backtrace_step", "block_search", "conv2d", "motion_compensate"]
