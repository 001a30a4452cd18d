"""Backend selection for the hot kernels.

Set ``POPTQ_DISABLE_NUMBA=1`` to force the pure-numpy path.  The numba
path is used otherwise, provided numba imports cleanly.
"""

import os

_FLAG = "POPTQ_DISABLE_NUMBA"


def _truthy(value):
    return value.strip().lower() not in ("", "0", "false", "no", "off")


try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except Exception:  # pragma: no cover - numba is a soft dependency
    _njit = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _truthy(os.environ.get(_FLAG, ""))


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if _njit is None:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    kwargs.setdefault("cache", True)
    return _njit(*args, **kwargs)


def backend():
    return "numba" if USE_NUMBA else "numpy"
