"""Select the interaction kernels at import time.

The compiled extension is used when it imports cleanly. Setting
``ASVGD_BACKEND=python`` forces the numpy fallback, and
``ASVGD_BACKEND=compiled`` turns a missing extension into an ImportError.
"""
import logging
import os

from asvgd import _fallback

logger = logging.getLogger(__name__)

_requested = os.environ.get("ASVGD_BACKEND", "auto").lower()

if _requested not in ("auto", "compiled", "python"):
    raise ImportError(f"ASVGD_BACKEND must be auto, compiled or python, got {_requested!r}")

ops = _fallback
name = "python"

if _requested != "python":
    try:
        from asvgd import _core
    except ImportError:
        if _requested == "compiled":
            raise
        logger.info("compiled core unavailable, using numpy fallback")
    else:
        ops = _core
        name = "compiled"

BACKENDS = {"python": _fallback}
if name == "compiled":
    BACKENDS["compiled"] = ops


def get(backend=None):
    """Return the kernel module for ``backend`` (default: the active one)."""
    if backend is None:
        return ops
    try:
        return BACKENDS[backend]
    except KeyError:
        raise ValueError(f"backend {backend!r} not available; have {sorted(BACKENDS)}") from None
