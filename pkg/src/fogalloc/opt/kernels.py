"""Kernel selection: the compiled extension when built, else pure Python.

Set ``FOGALLOC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _search_py

try:
    if os.environ.get("FOGALLOC_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _search as _compiled
except ImportError:
    _compiled = None

IMPLEMENTATION = "cython" if _compiled is not None else "python"
_active = _compiled if _compiled is not None else _search_py

STATUS_OK = _search_py.STATUS_OK
STATUS_INFEASIBLE = _search_py.STATUS_INFEASIBLE
STATUS_TIMEOUT = _search_py.STATUS_TIMEOUT
STATUS_TOO_MANY = _search_py.STATUS_TOO_MANY


def available() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])


def get(name: str | None = None):
    """Kernel module by name (``"cython"`` or ``"python"``); default is the active one."""
    if name is None:
        return _active
    if name == "python":
        return _search_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown kernel implementation {name!r}")
