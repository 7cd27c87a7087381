"""Optional numba acceleration.

Set ``BELLFORGE_NUMBA=0`` to force the pure-numpy kernels even when numba is
installed. ``BELLFORGE_THREADS`` caps the number of numba worker threads.
"""

import os
import warnings

try:
    import numba
    from numba import njit, prange
    NUMBA_AVAILABLE = True
    # the bundled TBB is often too old; numba falls back to another layer anyway
    warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return decorator

    def prange(*args):
        return range(*args)


def _flag(name, default):
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() not in ("0", "false", "no", "off", "")


USE_NUMBA = NUMBA_AVAILABLE and _flag("BELLFORGE_NUMBA", True)


def configure_threads():
    """Apply ``BELLFORGE_THREADS`` to numba; returns the thread count in use."""
    raw = os.environ.get("BELLFORGE_THREADS")
    if not NUMBA_AVAILABLE:
        return 1
    if raw:
        try:
            wanted = max(1, int(raw))
        except ValueError:
            wanted = numba.config.NUMBA_NUM_THREADS
        numba.set_num_threads(min(wanted, numba.config.NUMBA_NUM_THREADS))
    return numba.get_num_threads()
