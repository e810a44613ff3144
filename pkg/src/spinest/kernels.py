"""Select the trial kernel at import: compiled if built, numpy otherwise.

Set ``SPINEST_BACKEND=python`` to force the numpy kernel.
"""

import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

_requested = os.environ.get("SPINEST_BACKEND", "").strip().lower()
if _requested and _requested not in BACKENDS:
    raise ImportError(f"SPINEST_BACKEND={_requested!r} unavailable; have {sorted(BACKENDS)}")
BACKEND = _requested or ("cython" if "cython" in BACKENDS else "python")


def get_kernel(name: str | None = None):
    name = name or BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} unavailable; have {sorted(BACKENDS)}") from None
