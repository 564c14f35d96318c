"""Process-wide worker configuration."""
import os

_threads = None


def set_threads(n):
    global _threads
    _threads = None if n is None else max(1, int(n))


def threads():
    """Worker count: explicit setting, else SPHEREWAVE_THREADS, else 1."""
    if _threads is not None:
        return _threads
    env = os.environ.get("SPHEREWAVE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1
