"""Gate kernel backend selection.

The compiled extension is used when it imports; set ``RTI_SIM_PURE=1`` to
force the NumPy fallback. Both backends draw the same stream, so switching
never changes simulation results.
"""

from __future__ import annotations

import os

from . import _pykernels

python_first_fire = _pykernels.first_fire

try:
    from ._ckernels import first_fire as compiled_first_fire
except ImportError:  # extension not built
    compiled_first_fire = None

_IMPLS = {"python": python_first_fire}
if compiled_first_fire is not None:
    _IMPLS["cython"] = compiled_first_fire


def available_backends() -> list[str]:
    return sorted(_IMPLS)


def use_backend(name: str) -> None:
    global BACKEND, first_fire
    if name not in _IMPLS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    BACKEND = name
    first_fire = _IMPLS[name]


BACKEND = "python"
first_fire = python_first_fire
use_backend("python" if os.environ.get("RTI_SIM_PURE", "") not in ("", "0") or compiled_first_fire is None else "cython")
