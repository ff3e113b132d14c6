"""Selects the compiled kernels when available.

Set ``EGCHAIN_PURE_PYTHON=1`` to force the pure-Python kernels.
"""

import os

from . import _pykernels

python_kernels = _pykernels

try:
    from . import _kernels as compiled_kernels
except ImportError:  # extension not built
    compiled_kernels = None

if compiled_kernels is not None and os.environ.get("EGCHAIN_PURE_PYTHON", "") in ("", "0"):
    kernels = compiled_kernels
else:
    kernels = python_kernels

BACKEND = kernels.NAME
