"""Select the compiled kernels when available, the NumPy fallback otherwise."""

try:
    from . import _kernels as kernels
    BACKEND = "cython"
except ImportError:  # extension not built
    from . import _kernels_py as kernels
    BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
