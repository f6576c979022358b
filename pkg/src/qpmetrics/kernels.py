"""Backend selection for the enumeration kernels.

Imports the compiled Cython kernels when available, otherwise the
pure-NumPy fallback.  ``QPMETRICS_BACKEND=python`` forces the fallback
(useful for benchmarking and parity testing).  Both backends implement
identical contracts; see ``_enum_fallback`` for the documentation.
"""

from __future__ import annotations

import os

from . import _enum_fallback

phase_grid_max_opnorm = _enum_fallback.phase_grid_max_opnorm

if os.environ.get("QPMETRICS_BACKEND", "").lower() == "python":
    _impl = _enum_fallback
else:
    try:
        from . import _enum_kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _enum_fallback

max_signed_opnorm = _impl.max_signed_opnorm
max_subset_extreme = _impl.max_subset_extreme


def backend() -> str:
    """Name of the active kernel backend: ``"cython"`` or ``"python"``."""
    return "cython" if _impl.__name__.endswith("_enum_kernels") else "python"
