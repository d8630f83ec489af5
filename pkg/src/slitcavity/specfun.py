"""Real-argument Bessel and Hankel functions of integer order.

Ascending series are used for ``x <= 12`` and the Hankel asymptotic expansion
beyond.  Orders above one come from Miller's backward recurrence for ``J`` and
forward recurrence for ``Y``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

ArrayLike = Union[float, np.ndarray]

EULER_GAMMA: float = 0.57721566490153286061
SERIES_CUTOFF: float = 12.0
MAX_ORDER: int = 16


@dataclass(frozen=True)
class MathConstants:
    gamma0: float
    gamma1: complex
    gamma2: complex


def math_constants() -> MathConstants:
    g0 = EULER_GAMMA
    g1 = complex(g0 - math.log(2.0), -math.pi / 2.0)
    g2 = complex((math.log(2.0) - g0) / (4.0 * math.pi), -1.0 / (4.0 * math.pi) + 1.0 / 8.0)
    return MathConstants(gamma0=g0, gamma1=g1, gamma2=g2)


CONSTANTS = math_constants()


def _check_order(order: int) -> int:
    if isinstance(order, bool) or int(order) != order or order < 0:
        raise ValueError(f"order must be a nonnegative integer, got {order!r}")
    if order > MAX_ORDER:
        raise ValueError(f"order {order} exceeds the supported maximum {MAX_ORDER}")
    return int(order)


def _check_argument(x: ArrayLike, allow_zero: bool) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise ValueError("argument must be finite")
    if allow_zero:
        if np.any(arr < 0):
            raise ValueError("argument must be nonnegative")
    elif np.any(arr <= 0):
        raise ValueError("argument must be positive")
    return arr


def _harmonic(k: int) -> float:
    return sum(1.0 / j for j in range(1, k + 1))


# ---------------------------------------------------------------- series

def _j_series(n: int, x: np.ndarray) -> np.ndarray:
    h = 0.5 * x
    term = h**n / math.factorial(n)
    total = term.copy()
    q = -h * h
    for k in range(1, 80):
        term = term * q / (k * (k + n))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total) + 1e-300):
            break
    return total


def _y0_tail(x: np.ndarray) -> np.ndarray:
    """``(2/pi) * sum_{k>=1} (-1)^{k+1} H_k (x/2)^{2k} / (k!)^2``."""
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.zeros_like(x)
    hk = 0.0
    for k in range(1, 80):
        term = -term * q / (k * k)
        hk += 1.0 / k
        contrib = -term * hk
        total = total + contrib
        if np.all(np.abs(contrib) <= 1e-17 * np.abs(total) + 1e-300):
            break
    return (2.0 / math.pi) * total


def _y0_series(x: np.ndarray) -> np.ndarray:
    return (2.0 / math.pi) * (np.log(0.5 * x) + EULER_GAMMA) * _j_series(0, x) + _y0_tail(x)


def _y1_series(x: np.ndarray) -> np.ndarray:
    h = 0.5 * x
    term = h.copy()  # (x/2)^{2k+1} / (k! (k+1)!) at k = 0
    total = term * (_digamma_int(1) + _digamma_int(2))
    q = -h * h
    for k in range(1, 80):
        term = term * q / (k * (k + 1))
        contrib = term * (_digamma_int(k + 1) + _digamma_int(k + 2))
        total = total + contrib
        if np.all(np.abs(contrib) <= 1e-17 * np.abs(total) + 1e-300):
            break
    return (2.0 / math.pi) * np.log(h) * _j_series(1, x) - 2.0 / (math.pi * x) - total / math.pi


def _digamma_int(m: int) -> float:
    return -EULER_GAMMA + _harmonic(m - 1)


# ------------------------------------------------------------ asymptotic

def _hankel_asymptotic(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mu = 4.0 * n * n
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    last = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 60):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = np.abs(term)
        active &= mag < last
        last = np.where(active, mag, last)
        contrib = np.where(active, term, 0.0)
        if k % 2 == 1:
            q = q + contrib * (-1.0) ** ((k - 1) // 2)
        else:
            p = p + contrib * (-1.0) ** (k // 2)
        if not np.any(active & (mag > 1e-17)):
            break
    chi = x - (0.5 * n + 0.25) * math.pi
    amp = np.sqrt(2.0 / (math.pi * x))
    j = amp * (p * np.cos(chi) - q * np.sin(chi))
    y = amp * (p * np.sin(chi) + q * np.cos(chi))
    return j, y


# ------------------------------------------------------------ low orders

def _j01(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    j0 = np.empty_like(x)
    j1 = np.empty_like(x)
    small = x <= SERIES_CUTOFF
    if np.any(small):
        j0[small] = _j_series(0, x[small])
        j1[small] = _j_series(1, x[small])
    if np.any(~small):
        j0[~small] = _hankel_asymptotic(0, x[~small])[0]
        j1[~small] = _hankel_asymptotic(1, x[~small])[0]
    return j0, j1


def _y01(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    y0 = np.empty_like(x)
    y1 = np.empty_like(x)
    small = x <= SERIES_CUTOFF
    if np.any(small):
        y0[small] = _y0_series(x[small])
        y1[small] = _y1_series(x[small])
    if np.any(~small):
        y0[~small] = _hankel_asymptotic(0, x[~small])[1]
        y1[~small] = _hankel_asymptotic(1, x[~small])[1]
    return y0, y1


def _miller_j(n: int, x: np.ndarray) -> np.ndarray:
    """``J_n`` by backward recurrence normalised with ``J_0 + 2 sum J_2k = 1``."""
    out = np.zeros_like(x)
    pos = x > 0
    if not np.any(pos):
        return out
    xs = x[pos]
    start = 2 * ((max(n, int(np.max(xs))) + 20) // 2) + 20
    f_next = np.zeros_like(xs)
    f_cur = np.full_like(xs, 1e-30)
    norm = np.zeros_like(xs)
    target = np.zeros_like(xs)
    for k in range(start, 0, -1):
        f_prev = (2.0 * k / xs) * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        if k - 1 == n:
            target = f_cur.copy()
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm = norm + 2.0 * f_cur
        big = np.abs(f_cur) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            f_cur, f_next, norm, target = f_cur * scale, f_next * scale, norm * scale, target * scale
    norm = norm + f_cur
    out[pos] = target / norm
    return out


# --------------------------------------------------------------- public

def _finish(value: np.ndarray, x: ArrayLike) -> ArrayLike:
    if np.ndim(x) == 0:
        return value.item()
    return value


def bessel_j(order: int, x: ArrayLike) -> ArrayLike:
    """Bessel function of the first kind ``J_order(x)`` for ``x >= 0``."""
    n = _check_order(order)
    arr = np.atleast_1d(_check_argument(x, allow_zero=True)).astype(float)
    if n <= 1:
        val = _j01(arr)[n]
    else:
        val = _miller_j(n, arr)
    return _finish(val.reshape(np.shape(x)), x)


def bessel_y(order: int, x: ArrayLike) -> ArrayLike:
    """Bessel function of the second kind ``Y_order(x)`` for ``x > 0``."""
    n = _check_order(order)
    arr = np.atleast_1d(_check_argument(x, allow_zero=False)).astype(float)
    y0, y1 = _y01(arr)
    if n == 0:
        val = y0
    else:
        prev, cur = y0, y1
        for k in range(1, n):
            prev, cur = cur, (2.0 * k / arr) * cur - prev
        val = cur
    return _finish(val.reshape(np.shape(x)), x)


def hankel1(order: int, x: ArrayLike) -> ArrayLike:
    """Hankel function of the first kind ``J + iY``."""
    j = np.asarray(bessel_j(order, x), dtype=float)
    y = np.asarray(bessel_y(order, x), dtype=float)
    val = j + 1j * y
    if np.ndim(x) == 0:
        return complex(val)
    return val


def hankel1_0(x: np.ndarray) -> np.ndarray:
    """Vectorised ``H_0^(1)`` for positive arrays (no validation)."""
    arr = np.asarray(x, dtype=float)
    j0, _ = _j01(arr.ravel())
    y0, _ = _y01(arr.ravel())
    return (j0 + 1j * y0).reshape(arr.shape)


def j0_small(z: np.ndarray) -> np.ndarray:
    """``J_0`` by its ascending series; intended for ``0 <= z <= 12``."""
    return _j_series(0, np.asarray(z, dtype=float))


def y0_regular(z: np.ndarray) -> np.ndarray:
    """Regular part of ``Y_0``: ``Y_0(z) - (2/pi)(ln(z/2) + gamma0) J_0(z)``."""
    return _y0_tail(np.asarray(z, dtype=float))
