"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``KERRSPT_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"
rk4_affine = _fallback.rk4_affine

if os.environ.get("KERRSPT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from ._ext.rk4 import rk4_affine  # noqa: F811
    except ImportError:
        pass
    else:
        BACKEND = "cython"

__all__ = ["BACKEND", "rk4_affine"]
