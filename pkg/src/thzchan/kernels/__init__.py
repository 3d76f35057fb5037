"""Numeric kernel dispatch: compiled extension when available, numpy otherwise.

Set ``THZCHAN_KERNELS=python`` (or ``compiled``) to force a backend; forcing
``compiled`` raises if the extension was not built.
"""

import os

from . import _numpy as _python_impl

_requested = os.environ.get("THZCHAN_KERNELS", "").strip().lower()

if _requested in ("python", "py", "numpy"):
    _impl = _python_impl
elif _requested in ("compiled", "c", "cython"):
    from . import _core as _impl  # type: ignore[no-redef]
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _python_impl

BACKEND = _impl.BACKEND
ray_path_distance = _impl.ray_path_distance
mirror_step = _impl.mirror_step
stf_power_profile = _impl.stf_power_profile
psd_correlation_scan = _impl.psd_correlation_scan

__all__ = [
    "BACKEND",
    "ray_path_distance",
    "mirror_step",
    "stf_power_profile",
    "psd_correlation_scan",
]
