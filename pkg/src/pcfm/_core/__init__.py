"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the numpy
fallback is used. Setting ``PCFM_PURE_PYTHON=1`` forces the fallback.
"""
import importlib
import os

__all__ = ["BACKEND", "load_backend", "phase_poly", "phase_filon", "rk4_sweep"]


def load_backend(name=None):
    """Return the kernel module for ``name`` ("cython", "python" or None for auto)."""
    if name is None:
        name = "python" if os.environ.get("PCFM_PURE_PYTHON", "") not in ("", "0") else "cython"
    if name == "cython":
        try:
            return importlib.import_module("pcfm._core._ckernels")
        except ImportError:
            return importlib.import_module("pcfm._core._pykernels")
    if name == "python":
        return importlib.import_module("pcfm._core._pykernels")
    raise ValueError(f"unknown backend {name!r}")


_mod = load_backend()
BACKEND = "cython" if _mod.__name__.endswith("_ckernels") else "python"
phase_poly = _mod.phase_poly
phase_filon = _mod.phase_filon
rk4_sweep = _mod.rk4_sweep
