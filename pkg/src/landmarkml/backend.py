"""Selects the compiled epoch kernels when available.

Resolution order: the LANDMARKML_BACKEND environment variable ("cython"
or "python") wins; otherwise the compiled extension is used if it
imports, with a silent fallback to the numpy reference implementation.
"""

from __future__ import annotations

import os

from . import _kernels_py
from .errors import ArgumentError


def _load(name):
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels  # may raise ImportError
        return _kernels
    raise ArgumentError(f"unknown backend {name!r}; expected 'cython' or 'python'")


_forced = os.environ.get("LANDMARKML_BACKEND")
if _forced:
    kernels = _load(_forced)
else:
    try:
        kernels = _load("cython")
    except ImportError:
        kernels = _kernels_py

BACKEND_NAME = kernels.BACKEND_NAME


def get_kernels(name=None):
    """The active kernel module, or an explicitly named one (for tests
    and benchmarks)."""
    if name is None:
        return kernels
    return _load(name)
