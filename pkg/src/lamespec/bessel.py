"""Bessel functions of the first kind, integer order.

Values for all orders ``0..nmax`` at once come from Miller's backward
recurrence normalised by ``J_0 + 2 * sum_k J_2k = 1``.  The recurrence is
vectorised over the argument array, which is what the disk root scans need:
one pass yields every angular order at every grid point.
"""
from __future__ import annotations

import math

import numpy as np

from .errors import BesselRangeError

MAX_ORDER = 200
MAX_ARGUMENT = 1.0e4

_RESCALE_AT = 1.0e250


def _start_order(nmax: int, xmax: float) -> int:
    top = max(nmax, xmax)
    m = int(math.ceil(top + 12.0 * top ** (1.0 / 3.0) + 30.0))
    return m + (m % 2)


def bessel_j_table(nmax: int, x) -> np.ndarray:
    """Return ``J_k(x)`` for ``k = 0..nmax``, shape ``(nmax + 1,) + x.shape``."""
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xf = x.ravel()
    if nmax < 0:
        raise BesselRangeError("nmax must be nonnegative")
    if xf.size and (xf.min() < 0.0 or xf.max() > MAX_ARGUMENT):
        raise BesselRangeError(f"argument outside [0, {MAX_ARGUMENT:g}]")
    out = np.zeros((nmax + 1, xf.size))
    zero = xf == 0.0
    pos = ~zero
    if zero.any():
        out[0, zero] = 1.0
    if pos.any():
        out[:, pos] = _miller(nmax, xf[pos])
    return out.reshape((nmax + 1,) + shape)


def _miller(nmax: int, x: np.ndarray) -> np.ndarray:
    m = _start_order(nmax, float(x.max()))
    out = np.zeros((nmax + 1, x.size))
    two_over_x = 2.0 / x
    j_next = np.zeros_like(x)  # J_{k+1}
    j_cur = np.full_like(x, 1e-300)  # J_k, arbitrary seed at k = m
    norm = np.zeros_like(x)
    for k in range(m, 0, -1):
        if k <= nmax:
            out[k] = j_cur
        if k % 2 == 0:
            norm += 2.0 * j_cur
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        big = np.abs(j_cur) > _RESCALE_AT
        if big.any():
            scale = np.where(big, 1.0 / _RESCALE_AT, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            out[:, big] *= 1.0 / _RESCALE_AT
    out[0] = j_cur
    norm += j_cur
    out /= norm
    return out


def bessel_j(order: int, x):
    """Bessel function of the first kind ``J_order(x)`` for ``x >= 0``.

    Accepts scalar or array ``x``; returns a float for scalar input.

    >>> bessel_j(0, 0.0)
    1.0
    """
    if int(order) != order or order < 0 or order > MAX_ORDER:
        raise BesselRangeError(f"order must be an integer in [0, {MAX_ORDER}], got {order}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0.0) or np.any(~np.isfinite(xa)):
        raise BesselRangeError("argument must be finite and nonnegative")
    val = bessel_j_table(int(order), xa)[int(order)]
    return float(val) if val.ndim == 0 else val


def bessel_j_and_derivative(orders, x):
    """Return ``(J_n(x), J_n'(x))`` elementwise for integer arrays ``orders``.

    ``orders`` and ``x`` broadcast against each other.
    """
    orders, x = np.broadcast_arrays(np.asarray(orders, dtype=int), np.asarray(x, dtype=float))
    if orders.size == 0:
        return np.zeros(orders.shape), np.zeros(orders.shape)
    if orders.min() < 0 or orders.max() > MAX_ORDER:
        raise BesselRangeError(f"orders must lie in [0, {MAX_ORDER}]")
    nmax = int(orders.max()) + 1
    table = bessel_j_table(nmax, x.ravel())
    idx = np.arange(x.size)
    o = orders.ravel()
    jn = table[o, idx]
    jp1 = table[o + 1, idx]
    jm1 = np.where(o > 0, table[np.maximum(o - 1, 0), idx], -jp1)
    return jn.reshape(x.shape), (0.5 * (jm1 - jp1)).reshape(x.shape)
