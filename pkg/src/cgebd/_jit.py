"""Backend switch for the compiled kernels.

Set ``CGEBD_NUMBA=0`` before import to force the pure-numpy path.
"""
import os

_flag = os.environ.get("CGEBD_NUMBA", "1").strip().lower()
USE_NUMBA = _flag not in ("0", "false", "no", "off")

if USE_NUMBA:
    try:
        import numba  # noqa: F401
    except ImportError:  # pragma: no cover
        USE_NUMBA = False
