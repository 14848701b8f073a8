"""Select the kernel implementation at import time.

The compiled ``_kernels`` module is used when it was built; otherwise, or
when ``COCOONNET_PURE_PYTHON`` is set to a non-empty value, the numpy
versions in ``_pure`` are used.
"""
import os

from . import _pure

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and not os.environ.get("COCOONNET_PURE_PYTHON"):
    kernels = _compiled
else:
    kernels = _pure

BACKEND = kernels.NAME


def available():
    """Names of the backends importable in this environment."""
    return ["python"] + (["cython"] if _compiled is not None else [])


def get(name):
    if name == "python":
        return _pure
    if name == "cython" and _compiled is not None:
        return _compiled
    raise ValueError(f"backend {name!r} is not available")
