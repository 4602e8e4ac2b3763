"""Numba acceleration toggle.

Hot kernels are compiled with ``@njit`` when numba is importable and the
environment variable ``WORLDLENS_NO_NUMBA`` is unset (or "0").  Otherwise the
same functions run as plain-numpy/Python fallbacks.  Both paths compute
identical results; ``benchmarks/bench_kernels.py`` compares their speed.
"""
import os

NUMBA_ENABLED = os.environ.get("WORLDLENS_NO_NUMBA", "0") not in ("1", "true", "yes")

if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if not NUMBA_ENABLED:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(fn):
            return fn

        return wrap
