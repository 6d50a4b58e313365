"""Hot-loop kernels with backend selection at import time.

The compiled Cython extension is preferred when present; the pure-Python
reference is the fallback and the behavioural contract. Set WATTWISE_PURE=1
to force the reference implementation (the benchmark uses this to compare
both backends in one process via `wattwise.kernels._ref`).
"""

import os

from . import _ref

if os.environ.get("WATTWISE_PURE"):
    _impl = _ref
    BACKEND = "pure-python (forced)"
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        _impl = _ref
        BACKEND = "pure-python"

weather_series = _impl.weather_series
motion_series = _impl.motion_series
step_temp = _impl.step_temp
relax_through = _impl.relax_through
