"""Backend selection for the hot kernels.

The compiled Cython extension (``emproj.kernels._core``) is used when it
built successfully; otherwise the pure-numpy fallback is selected. Setting
the environment variable ``EMPROJ_PURE_PYTHON=1`` forces the fallback,
which is mainly useful for the kernel equivalence tests and benchmarks.
"""

import os

from . import _fallback

if os.environ.get("EMPROJ_PURE_PYTHON"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

simulate_core = _impl.simulate_core
filter_loglik = _impl.filter_loglik

__all__ = ["BACKEND", "simulate_core", "filter_loglik", "_fallback"]
