"""Backend selection for the simplex kernel.

The compiled extension is used when it was built; otherwise the numpy version.
Set ``BILEVELCUT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _simplex_py

BACKEND = "python"
run_phase = _simplex_py.run_phase
pivot = _simplex_py.pivot

if os.environ.get("BILEVELCUT_PURE_PYTHON") != "1":
    try:
        from . import _simplex_core
    except ImportError:  # extension not built
        _simplex_core = None
    if _simplex_core is not None:
        BACKEND = "cython"
        run_phase = _simplex_core.run_phase
        pivot = _simplex_core.pivot

__all__ = ["BACKEND", "run_phase", "pivot"]
