"""Kernel dispatch: compiled ``_core`` when importable, ``_pycore`` otherwise.

Set ``LATTICEID_PURE_PYTHON=1`` to force the fallback.
"""
import os

BACKEND = "python"

if not os.environ.get("LATTICEID_PURE_PYTHON"):
    try:
        from ._core import charfn_direct, katti_recursion, series_quotient
        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._pycore import charfn_direct, katti_recursion, series_quotient

__all__ = ["BACKEND", "charfn_direct", "katti_recursion", "series_quotient"]
