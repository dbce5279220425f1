"""Backend selection for the stepping kernel.

The compiled extension is preferred when present; the NumPy fallback is
always available.  Set SOLITONSIM_KERNELS=pure|compiled|auto to override
(``compiled`` raises if the extension is missing).
"""

import os

from . import pure

_requested = os.environ.get("SOLITONSIM_KERNELS", "auto")
if _requested not in ("auto", "pure", "compiled"):
    raise RuntimeError(f"SOLITONSIM_KERNELS must be auto|pure|compiled, got {_requested!r}")

if _requested == "pure":
    _impl = pure
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "compiled":
            raise
        _impl = pure

BACKEND = _impl.BACKEND
leapfrog_step_sphere = _impl.leapfrog_step_sphere


def get_backend(name: str | None = None):
    """Return a kernel module by name ('pure' or 'compiled'); default active."""
    if name is None or name == BACKEND:
        return _impl
    if name == "pure":
        return pure
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown kernel backend {name!r}")
