"""Backend selection for the hot Monte-Carlo kernels.

Set CVSTAB_BACKEND=numpy to force the pure-numpy fallback; =numba to require
the jitted kernels (raising if numba is unavailable). Unset, numba is used
when it imports cleanly. ``set_num_threads`` controls the jitted kernels'
parallelism; results are identical for any thread count.
"""

from __future__ import annotations

import os
import warnings

from . import numpy_backend

_ENV_VAR = "CVSTAB_BACKEND"
_active = None
_active_name = None


def _load_numba_backend():
    from . import numba_backend

    return numba_backend


def get_backend():
    """The active kernel module; resolved once per process."""
    global _active, _active_name
    if _active is not None:
        return _active
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice == "numpy":
        _active, _active_name = numpy_backend, "numpy"
    elif choice == "numba":
        _active, _active_name = _load_numba_backend(), "numba"
    elif choice == "":
        try:
            _active, _active_name = _load_numba_backend(), "numba"
        except ImportError:
            warnings.warn("numba unavailable; falling back to the pure-numpy kernels")
            _active, _active_name = numpy_backend, "numpy"
    else:
        raise ValueError(f"{_ENV_VAR} must be 'numba' or 'numpy', got {choice!r}")
    return _active


def backend_name() -> str:
    get_backend()
    return _active_name


def set_backend(name: str) -> None:
    """Programmatic override, mainly for tests and benchmarks."""
    global _active, _active_name
    if name == "numpy":
        _active, _active_name = numpy_backend, "numpy"
    elif name == "numba":
        _active, _active_name = _load_numba_backend(), "numba"
    else:
        raise ValueError(f"unknown backend {name!r}")


def set_num_threads(workers: int) -> None:
    if backend_name() == "numba":
        import numba

        numba.set_num_threads(max(1, min(workers, numba.config.NUMBA_NUM_THREADS)))
