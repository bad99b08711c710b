"""Backend selection for the hot kernels.

The compiled extension is used when importable; set ``GMN_PURE_PYTHON=1`` to
force the numpy fallback.
"""
import os

from gmn import _kernels_py

_py = _kernels_py
_c = None
if os.environ.get("GMN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from gmn import _kernels_c as _c
    except ImportError:  # extension not built
        _c = None

_impl = _c if _c is not None else _py
BACKEND = "cython" if _c is not None else "python"

family_score = _impl.family_score
family_a_max = _impl.family_a_max
qubit_terms = _impl.qubit_terms


def get_backend(name):
    """Return the kernel module for ``"python"`` or ``"cython"``."""
    if name == "python":
        return _py
    if name == "cython":
        if _c is None:
            raise ImportError("compiled kernels are not built")
        return _c
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    return ["python"] + (["cython"] if _c is not None else [])
