"""Kernel backend selection.

The hot numeric loops (gradient voting, block normalization, the
sliding-window scan) exist twice: a numba-jitted module and a pure-numpy
fallback with identical signatures.  The active backend is chosen from the
``YOKLAMA_BACKEND`` environment variable at import time:

    auto   use numba when importable, else numpy (default)
    numba  require the jitted kernels, fail if numba is missing
    numpy  force the fallback

``set_backend`` switches at runtime (used by the parity tests and the
kernel benchmark).  Both backends produce results equal to within normal
floating-point reassociation noise; each is individually deterministic.
"""

from __future__ import annotations

import os

_ENV_VAR = "YOKLAMA_BACKEND"
_active_name: str | None = None
_active_module = None


def _load(name: str):
    if name == "numpy":
        from yoklama import _numpy_kernels

        return _numpy_kernels
    if name == "numba":
        from yoklama import _numba_kernels

        return _numba_kernels
    raise ValueError(f"unknown backend {name!r} (expected 'numba' or 'numpy')")


def available_backends() -> list[str]:
    names = []
    try:
        import numba  # noqa: F401

        names.append("numba")
    except ImportError:
        pass
    names.append("numpy")
    return names


def set_backend(name: str) -> str:
    """Select the kernel backend; returns the name actually activated."""
    global _active_name, _active_module
    if name == "auto":
        name = "numba" if "numba" in available_backends() else "numpy"
    _active_module = _load(name)
    _active_name = name
    return name


def active_backend() -> str:
    if _active_name is None:
        set_backend(os.environ.get(_ENV_VAR, "auto"))
    return _active_name


def kernels():
    """Return the active kernel module."""
    if _active_module is None:
        active_backend()
    return _active_module
