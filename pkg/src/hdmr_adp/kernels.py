"""Backend selection for the hot kernels.

The compiled extension is used when it was built and importable; otherwise
the NumPy reference implementation is used.  Setting ``HDMR_ADP_PURE=1`` in
the environment forces the NumPy backend.
"""
import os

from . import _pykernels

_backend = _pykernels
if os.environ.get("HDMR_ADP_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _backend  # type: ignore[no-redef]
    except ImportError:
        _backend = _pykernels

BACKEND: str = _backend.BACKEND
accumulate_batch = _backend.accumulate_batch
secular_newton = _backend.secular_newton
candidate_min = _backend.candidate_min


def available_backends():
    """Return a mapping of backend name to kernel module for benchmarking."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
