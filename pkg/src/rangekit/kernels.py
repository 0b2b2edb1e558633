"""Kernel dispatch: the compiled extension when importable, numpy otherwise.

Set ``RANGEKIT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("RANGEKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py

random_words = _impl.random_words
uniforms = _impl.uniforms
sample_counts = _impl.sample_counts
laguerre_table = _impl.laguerre_table
displacement_real = _impl.displacement_real
stream_key = _impl.stream_key

__all__ = [
    "BACKEND",
    "random_words",
    "uniforms",
    "sample_counts",
    "laguerre_table",
    "displacement_real",
    "stream_key",
]
