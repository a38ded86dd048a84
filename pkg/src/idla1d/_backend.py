"""Kernel backend selection.

The compiled extension is used when importable; otherwise the pure-Python
kernel is used.  Set ``IDLA1D_BACKEND=python`` to force the fallback.
"""

import os

from . import _pykernel

kernel = _pykernel
NAME = "python"

if os.environ.get("IDLA1D_BACKEND", "").lower() != "python":
    try:
        from . import _kernel as kernel  # noqa: F811
        NAME = "compiled"
    except ImportError:  # pragma: no cover - depends on build
        pass


def get(name=None):
    """Return the kernel module for ``name`` ('compiled', 'python' or None)."""
    if name is None:
        return kernel
    if name == "python":
        return _pykernel
    if name == "compiled":
        from . import _kernel
        return _kernel
    raise ValueError("unknown backend %r" % name)


def available():
    names = ["python"]
    try:
        from . import _kernel  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:  # pragma: no cover
        pass
    return names
