"""Pure-Python witness scanner; reference twin of ``_kernels.pyx``."""
from __future__ import annotations

from typing import Sequence


def scan_assignments(in_masks: Sequence[int], n: int, f: int, faulty_mask: int) -> tuple[int, int] | None:
    """Find the first (L, R) split of the non-faulty nodes that violates the condition.

    Free nodes ``r_0 < r_1 < ...`` carry base-3 digits (0 -> L, 1 -> C, 2 -> R)
    with ``r_0`` least significant, advanced as an odometer so each step costs
    O(1) mask updates. Returns ``(L_mask, R_mask)`` or ``None``.
    """
    free = [v for v in range(n) if not faulty_mask >> v & 1]
    k = len(free)
    if k < 2:
        return None
    # C|R seen from v in L is free - L; L|C seen from v in R is free - R.
    avail = [in_masks[v] & ~faulty_mask for v in range(n)]
    digits = [0] * k
    lmask = sum(1 << v for v in free)
    rmask = 0
    while True:
        if lmask and rmask and _violates(avail, free, f, lmask, rmask):
            return lmask, rmask
        j = 0
        while j < k:
            bit = 1 << free[j]
            d = digits[j]
            if d == 0:
                digits[j] = 1
                lmask ^= bit
                break
            if d == 1:
                digits[j] = 2
                rmask |= bit
                break
            digits[j] = 0
            rmask ^= bit
            lmask |= bit
            j += 1
        else:
            return None


def _violates(avail: list[int], free: list[int], f: int, lmask: int, rmask: int) -> bool:
    for v in free:
        bit = 1 << v
        if lmask & bit:
            if (avail[v] & ~lmask).bit_count() > f:
                return False
        elif rmask & bit:
            if (avail[v] & ~rmask).bit_count() > f:
                return False
    return True
