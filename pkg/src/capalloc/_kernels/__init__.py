"""Hot numeric loops behind a backend switch.

The compiled numba path is used when numba imports cleanly, unless the
environment variable ``CAPALLOC_DISABLE_NUMBA`` is set to a non-empty value
other than ``0``. Both paths produce bit-identical results.
"""

import os

from . import _numpy

_disabled = os.environ.get("CAPALLOC_DISABLE_NUMBA", "") not in ("", "0")

if _disabled:
    _impl = _numpy
    BACKEND = "numpy"
else:
    try:
        from . import _numba as _impl
        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _numpy
        BACKEND = "numpy"


aggregate = _impl.aggregate
weighted_sum = _impl.weighted_sum
cumulative = _impl.cumulative
tail_weights = _impl.tail_weights
choquet_sorted = _impl.choquet_sorted

__all__ = [
    "BACKEND",
    "aggregate",
    "weighted_sum",
    "cumulative",
    "tail_weights",
    "choquet_sorted",
]
