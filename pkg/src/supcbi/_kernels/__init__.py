"""Kernel backend selection: compiled extension if available, else pure Python.

Both backends expose the same functions (run_supcbi, run_embedding,
sample_increments, sample_speeds) and consume the underlying bit generator
in the same order, producing identical paths.
"""

from . import _pyloop

try:
    from . import _core

    BACKEND = "compiled"
    _impl = _core
except ImportError:  # extension not built; pure-Python fallback
    BACKEND = "python"
    _impl = _pyloop

run_supcbi = _impl.run_supcbi
run_embedding = _impl.run_embedding
sample_increments = _impl.sample_increments
sample_speeds = _impl.sample_speeds


def get_backend(name=None):
    """Return the kernel module for ``name`` ('compiled', 'python' or None)."""
    if name is None:
        return _impl
    if name == "python":
        return _pyloop
    if name == "compiled":
        if BACKEND != "compiled":
            raise RuntimeError("compiled kernel backend is not available")
        return _core
    raise ValueError(f"unknown backend {name!r}")
