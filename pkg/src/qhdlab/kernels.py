"""Backend selection for the hot kernels.

The compiled extension ``qhdlab._kernels`` is used when importable;
otherwise, or when the environment variable ``QHDLAB_PURE_PYTHON`` is set to
a non-empty value, the NumPy implementation in ``qhdlab._kernels_py`` is.
``BACKEND`` names the active one.
"""
import os

from . import _kernels_py

if os.environ.get("QHDLAB_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"
    else:
        BACKEND = "cython"

dispersion_roots = _impl.dispersion_roots
propagator = _impl.propagator
remainder_n2 = _impl.remainder_n2
mode_weights = _impl.mode_weights


def available_backends():
    """Return ``{name: module}`` for every backend importable here."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out
