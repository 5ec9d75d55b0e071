# cython: language_level=3
"""Compiled witness scanner; same contract as ``iabc._pykernels``."""
from libc.stdint cimport uint64_t


cdef extern from *:
    int popcount64 "__builtin_popcountll"(unsigned long long) nogil


cdef bint _violates(uint64_t* avail, int* free, int k, int f,
                    uint64_t lmask, uint64_t rmask) noexcept nogil:
    cdef int j, v
    cdef uint64_t bit
    for j in range(k):
        v = free[j]
        bit = (<uint64_t>1) << v
        if lmask & bit:
            if popcount64(avail[v] & ~lmask) > f:
                return False
        elif rmask & bit:
            if popcount64(avail[v] & ~rmask) > f:
                return False
    return True


def scan_assignments(in_masks, int n, int f, faulty_mask):
    """Find the first (L, R) split of the non-faulty nodes violating the condition.

    Requires ``n <= 64``. Returns ``(L_mask, R_mask)`` or ``None``.
    """
    if n > 64:
        raise ValueError("compiled scanner supports n <= 64")
    cdef uint64_t fmask = <uint64_t>faulty_mask
    cdef uint64_t avail[64]
    cdef int free[64]
    cdef unsigned char digits[64]
    cdef int k = 0, v, j
    cdef uint64_t lmask = 0, rmask = 0, bit
    cdef bint found = False
    for v in range(n):
        avail[v] = (<uint64_t>in_masks[v]) & ~fmask
        if not (fmask >> v) & 1:
            free[k] = v
            digits[k] = 0
            lmask |= (<uint64_t>1) << v
            k += 1
    if k < 2:
        return None
    with nogil:
        while True:
            if lmask and rmask and _violates(avail, free, k, f, lmask, rmask):
                found = True
                break
            j = 0
            while j < k:
                bit = (<uint64_t>1) << free[j]
                if digits[j] == 0:
                    digits[j] = 1
                    lmask ^= bit
                    break
                if digits[j] == 1:
                    digits[j] = 2
                    rmask |= bit
                    break
                digits[j] = 0
                rmask ^= bit
                lmask |= bit
                j += 1
            if j == k:
                break
    if found:
        return int(lmask), int(rmask)
    return None
