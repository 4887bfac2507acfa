"""Backend selection for the integration core.

The compiled extension is preferred when present; the pure-Python twin is
the fallback.  Set SNTBIF_BACKEND=python (or =cython) to force a choice.
"""

import os

from . import _kernels_py

_requested = os.environ.get("SNTBIF_BACKEND", "").lower()

if _requested == "python":
    kernels = _kernels_py
elif _requested == "cython":
    from . import _kernels as kernels  # noqa: F401  (raises if not built)
else:
    try:
        from . import _kernels as kernels
    except ImportError:
        kernels = _kernels_py

BACKEND_NAME = kernels.BACKEND_NAME

integrate_span = kernels.integrate_span
field_eval = kernels.field_eval
STATUS_DONE = kernels.STATUS_DONE
STATUS_STEP_UNDERFLOW = kernels.STATUS_STEP_UNDERFLOW
STATUS_MAX_STEPS = kernels.STATUS_MAX_STEPS
STATUS_NONFINITE = kernels.STATUS_NONFINITE
