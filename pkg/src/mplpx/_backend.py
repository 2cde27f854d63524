"""Import-time selection of the message-update kernels.

The compiled Cython kernels are used when the extension built; otherwise the
pure-numpy fallback takes over. Set ``MPLPX_PURE_PYTHON=1`` to force the
fallback regardless.
"""

import os

from . import _kernels_py

_compiled = None
if not os.environ.get("MPLPX_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

DEFAULT = _compiled if _compiled is not None else _kernels_py


def compiled_available() -> bool:
    return _compiled is not None


def backend_name(module) -> str:
    return "compiled" if getattr(module, "IS_COMPILED", False) else "python"


def get_backend(name=None):
    """Resolve a backend spec: None/"auto", "python", "compiled", or a module."""
    if name is None or name == "auto":
        return DEFAULT
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise RuntimeError(
                "compiled kernels are not available "
                "(extension not built or MPLPX_PURE_PYTHON set)"
            )
        return _compiled
    if hasattr(name, "update_edges") and hasattr(name, "update_clusters"):
        return name
    raise ValueError(f"unknown backend {name!r}")
