"""Choice between the compiled kernel and the numpy fallback.

``CONDQPT_BACKEND`` may be set to ``cython`` or ``python`` to force one;
the default takes the compiled kernel when it imports.
"""
from __future__ import annotations

import os
from types import ModuleType

from ..errors import CapabilityError

BACKEND_ENV = "CONDQPT_BACKEND"
BACKENDS = ("cython", "python")


def _compiled() -> ModuleType | None:
    try:
        from . import _kernel
    except ImportError:
        return None
    return _kernel


def available_backends() -> tuple[str, ...]:
    return BACKENDS if _compiled() is not None else ("python",)


def load_backend(name: str | None = None) -> tuple[str, ModuleType]:
    """Return ``(name, module)`` exposing ``propagate``."""
    name = (name or os.environ.get(BACKEND_ENV) or "auto").lower()
    if name not in BACKENDS + ("auto",):
        raise CapabilityError(f"unknown kernel backend {name!r}; choose from {BACKENDS}")
    if name in ("auto", "cython"):
        mod = _compiled()
        if mod is not None:
            return "cython", mod
        if name == "cython":
            raise CapabilityError("compiled kernel not built; reinstall with a C compiler and Cython")
    from . import _kernel_py

    return "python", _kernel_py


DEFAULT_BACKEND = load_backend()[0]
