"""Backend selection for the hot loops (tree growth, SMO).

The compiled extension is used when it imports; set ``ARTSOH_PURE_PYTHON=1``
to force the numpy fallback.
"""
import os

from . import _pykernels

try:
    if os.environ.get("ARTSOH_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _pykernels
    BACKEND = "python"

grow_tree = _impl.grow_tree
smo_solve = _impl.smo_solve


def backends() -> dict:
    """All importable backends, keyed by name."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
