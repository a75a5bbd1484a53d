"""Hot numeric kernels for the simplex engine.

Two interchangeable backends implement the same contracts: a numba
``@njit`` backend (default when numba imports) and a vectorized pure-numpy
fallback.  Selection happens once at import via the ``SHEDOPT_NUMBA``
environment variable and can be overridden at runtime with :func:`use`:

    SHEDOPT_NUMBA=0   force the numpy fallback
    SHEDOPT_NUMBA=1   require numba (ImportError when missing)
    unset / auto      numba when available, numpy otherwise

``benchmarks/bench_kernels.py`` compares the two backends.
"""
from __future__ import annotations

import os

from . import _numpy

_ALIASES = {"numpy": "numpy", "np": "numpy", "0": "numpy", "off": "numpy",
            "false": "numpy", "no": "numpy",
            "numba": "numba", "nb": "numba", "1": "numba", "on": "numba",
            "true": "numba", "yes": "numba"}


def _load_numba_backend():
    from . import _numba
    return _numba


def available_backends() -> dict:
    backends = {"numpy": _numpy}
    try:
        backends["numba"] = _load_numba_backend()
    except ImportError:
        pass
    return backends


def _initial_choice() -> str:
    raw = os.environ.get("SHEDOPT_NUMBA", "").strip().lower()
    if raw in ("", "auto"):
        try:
            _load_numba_backend()
            return "numba"
        except ImportError:
            return "numpy"
    try:
        return _ALIASES[raw]
    except KeyError:
        raise ValueError(f"SHEDOPT_NUMBA={raw!r}: expected 0/1/auto") from None


def use(name: str) -> None:
    """Switch the active backend ('numba' or 'numpy') process-wide."""
    global impl, BACKEND
    if name == "numpy":
        impl = _numpy
    elif name == "numba":
        impl = _load_numba_backend()
    else:
        raise ValueError(f"unknown kernel backend {name!r}")
    BACKEND = name


BACKEND = _initial_choice()
impl = _numpy if BACKEND == "numpy" else _load_numba_backend()
