"""Numeric backend selection: compiled extension or pure-numpy fallback.

The compiled module is preferred when importable; set WAIRSIM_BACKEND to
"python" or "compiled" to force a choice (forcing "compiled" raises if the
extension is missing). Both backends expose the same three entry points:
``phase_eval``, ``al_merit``, ``al_merit_grad`` (plus ``eval_dynamics`` for
tests and benchmarks).
"""

from __future__ import annotations

import os

from . import pyref

_requested = os.environ.get("WAIRSIM_BACKEND", "").strip().lower()

if _requested not in ("", "python", "compiled"):
    raise RuntimeError(f"WAIRSIM_BACKEND must be 'python' or 'compiled', got {_requested!r}")

impl = pyref
BACKEND_NAME = "python"

if _requested != "python":
    try:
        from . import _speedups as _ext

        impl = _ext
        BACKEND_NAME = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        # fall through to the numpy reference implementation


def get_backend(name: str | None = None):
    """Return a backend module by name (None = the one selected at import)."""
    if name in (None, BACKEND_NAME):
        return impl
    if name == "python":
        return pyref
    if name == "compiled":
        from . import _speedups as ext

        return ext
    raise ValueError(f"unknown backend {name!r}")
