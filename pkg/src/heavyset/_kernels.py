"""Compiled orbit scanners on 60-bit fixed point with rigorous error bars.

A point ``x`` and the rotation ``theta`` are stored as ``floor(v * 2**60)``
together with an error in units of ``2**-60``.  After ``i`` steps the true
position lies in ``[P, P + ex + i*et]`` (mod ``2**60``), where ``P`` is the
exact fixed-point sum.  The indicator is decided only when that whole window
sits inside ``[0, 1/2]`` or inside ``(1/2, 1)``; otherwise the scan stops and
reports the index so the caller can settle it exactly.
"""

import numpy as np
from numba import njit

FRAC_BITS = 60
ONE = np.uint64(1 << FRAC_BITS)
MASK = np.uint64((1 << FRAC_BITS) - 1)
HALF = np.uint64(1 << (FRAC_BITS - 1))


@njit(cache=True)
def _indicator(pos, width):
    # +1 / -1 when certain, 0 when the window straddles 0 or 1/2
    if pos + width <= HALF:
        return 1
    if pos > HALF and pos + width < ONE:
        return -1
    return 0


@njit(cache=True)
def scan_values(x, ex, theta, et, start, stop, out):
    """Fill ``out[i] = f(T^i x)`` for ``start <= i < stop``; return first undecided index or -1."""
    pos = (x + np.uint64(start) * theta) & MASK
    for i in range(start, stop):
        w = ex + np.uint64(i) * et
        v = _indicator(pos, w)
        if v == 0:
            return i
        out[i] = v
        pos = (pos + theta) & MASK
    return -1


@njit(cache=True)
def scan_heavy(x, ex, theta, et, start, stop, s0):
    """Run sums from index ``start`` with ``S = s0``.

    Returns ``(status, index, S)``: status 0 = reached ``stop`` with all sums
    nonnegative, 1 = first negative sum at ``S_index``, 2 = undecided
    indicator at ``index`` (``S`` is the sum before it).
    """
    s = s0
    pos = (x + np.uint64(start) * theta) & MASK
    for i in range(start, stop):
        w = ex + np.uint64(i) * et
        v = _indicator(pos, w)
        if v == 0:
            return 2, i, s
        s += v
        if s < 0:
            return 1, i + 1, s
        pos = (pos + theta) & MASK
    return 0, stop, s
