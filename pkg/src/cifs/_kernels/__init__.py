"""Hot kernels with a compiled core and a pure-Python fallback.

The compiled extension is used when it was built and imports cleanly;
setting ``CIFS_PURE_PYTHON=1`` forces the fallback.  ``BACKEND`` names the
active implementation.
"""

import os

from . import _pykernels as python

compiled = None
if not os.environ.get("CIFS_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled
    except ImportError:
        compiled = None

_active = compiled if compiled is not None else python
BACKEND = "cython" if compiled is not None else "python"

chaos_orbit = _active.chaos_orbit
directed_min_sq = _active.directed_min_sq

__all__ = ["BACKEND", "chaos_orbit", "directed_min_sq", "python", "compiled"]
