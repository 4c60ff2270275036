"""Backend selection: compiled extension core with a pure-Python fallback.

The compiled core (localmatch._core, Cython) implements the hot kernels:
the configuration-model run loop, the finite-support fluid RK4 solver and
the Poisson scalar solver.  It is selected automatically at import when the
extension built; set ``LOCALMATCH_BACKEND=pure`` (or pass backend="pure") to
force the reference implementation.  Both backends follow the same draw
protocol, so simulation outputs are identical on the same seed.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .criteria import CriterionKind

KIND_CODES = {
    CriterionKind.GREEDY: 0,
    CriterionKind.UNI_MIN: 1,
    CriterionKind.UNI_MAX: 2,
    CriterionKind.MIN_MIN: 3,
    CriterionKind.MAX_MAX: 4,
}

try:
    from . import _core
except ImportError:  # built without the extension: pure fallback only
    _core = None


@dataclass(frozen=True)
class Backend:
    name: str
    core: object


_PURE = Backend("pure", None)
_COMPILED = Backend("compiled", _core) if _core is not None else None


def compiled_available() -> bool:
    return _COMPILED is not None


def default_name() -> str:
    env = os.environ.get("LOCALMATCH_BACKEND", "").strip().lower()
    if env in ("pure", "compiled"):
        return env
    return "compiled" if compiled_available() else "pure"


def select(name: str | None = None) -> Backend:
    if name is None:
        name = default_name()
    if name == "pure":
        return _PURE
    if name == "compiled":
        if _COMPILED is None:
            raise RuntimeError("compiled backend requested but localmatch._core is not built")
        return _COMPILED
    raise ValueError(f"unknown backend {name!r}")
