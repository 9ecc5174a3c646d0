"""JIT selection.

Hot kernels are compiled with numba unless ``ADAPTIVE_CONSENSUS_NO_JIT`` is set
to a truthy value (or numba is missing), in which case the simulator falls
back to the vectorised numpy implementations. The flag is read once, at import.
"""
import os

_FLAG = os.environ.get("ADAPTIVE_CONSENSUS_NO_JIT", "").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _FLAG in ("", "0", "false", "no")


def njit(*args, **kwargs):
    """``numba.njit`` when the JIT is enabled, otherwise a no-op decorator."""
    if not USE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda fn: fn
    return numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
