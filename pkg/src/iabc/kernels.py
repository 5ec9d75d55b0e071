"""Backend selection for the exhaustive witness scan.

The compiled ``_kernels`` extension is used when it was built and the
``IABC_PURE_PYTHON`` environment variable is unset or ``0``; otherwise the
pure-Python twin runs. ``BACKEND`` names the active choice.
"""
from __future__ import annotations

import os
from typing import Sequence

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and os.environ.get("IABC_PURE_PYTHON", "0") in ("", "0"):
    BACKEND = "cython"
    _scan = _compiled.scan_assignments
else:
    BACKEND = "python"
    _scan = _pykernels.scan_assignments

COMPILED_AVAILABLE = _compiled is not None


def scan_assignments(in_masks: Sequence[int], n: int, f: int, faulty_mask: int) -> tuple[int, int] | None:
    # the compiled path is limited to 64-bit masks
    if n > 64:
        return _pykernels.scan_assignments(in_masks, n, f, faulty_mask)
    return _scan(in_masks, n, f, faulty_mask)


def backends() -> dict:
    """All available scanners by name, for cross-checking and benchmarks."""
    out = {"python": _pykernels.scan_assignments}
    if _compiled is not None:
        out["cython"] = _compiled.scan_assignments
    return out
