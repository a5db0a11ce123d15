"""Integrator backend selection.

The compiled extension is preferred when present; setting the
environment variable ``LANEDEP_PURE_PYTHON=1`` before import forces the
pure-Python fallback (useful for benchmarking and debugging).
"""

from __future__ import annotations

import os

if os.environ.get("LANEDEP_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

integrate_closed_loop = kernels.integrate_closed_loop
COMPILED: bool = kernels.COMPILED
