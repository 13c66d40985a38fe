"""Backend switch for the compiled kernels.

Set ``BRACKETSUMS_BACKEND=numpy`` to force the vectorised numpy fallback.
Any other value (or none) uses numba when it can be imported.
"""
import os
import warnings

# the sandboxed TBB is too old; numba falls back to its own pool silently
warnings.filterwarnings("ignore", message="The TBB threading layer")

BACKEND_ENV = "BRACKETSUMS_BACKEND"

try:
    import numba

    HAS_NUMBA = True
    prange = numba.prange
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False
    prange = range

USE_NUMBA = HAS_NUMBA and os.environ.get(BACKEND_ENV, "numba").lower() != "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAS_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda func: func


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def set_workers(workers: int | None) -> None:
    """Cap the numba thread pool. Results never depend on this value."""
    if workers is None or not USE_NUMBA:
        return
    limit = numba.config.NUMBA_NUM_THREADS
    numba.set_num_threads(max(1, min(int(workers), limit)))
