"""Independent reference computations used by several test modules."""

import math

import numpy as np


def _log_cheb(a, J):
    """int_{-1}^{1} ln|a - y| T_j(y) (1 - y^2)^{-1/2} dy for j < J."""
    a = np.asarray(a, float)[..., None]
    j = np.arange(J)
    inside = np.abs(a) <= 1
    th = np.arccos(np.clip(a, -1, 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        inner = np.where(j == 0, -math.pi * math.log(2), -math.pi / np.maximum(j, 1) * np.cos(j * th))
        eta = np.arccosh(np.maximum(np.abs(a), 1))
        outer = np.where(
            j == 0,
            math.pi * (eta - math.log(2)),
            -math.pi / np.maximum(j, 1) * np.sign(a) ** j * np.exp(-j * eta),
        )
    return np.where(inside, inner, outer)


def _smooth_part(X, Y):
    u, v = X - Y, X + Y
    su = np.where(np.abs(u) < 1e-300, math.pi / 2, np.sin(math.pi * u / 2) / np.where(u == 0, 1, u))
    sv = np.sin(math.pi * v / 2) / (v * (2 - v))
    return (np.log(su) + np.log(sv)) / math.pi


def chebyshev_q0(n):
    """<K^{-1}1, 1> from an inverse-square-root-weighted Chebyshev collocation."""
    x = np.cos((2 * np.arange(n) + 1) * math.pi / (2 * n))
    X = (x + 1) / 2
    A = (2 * _log_cheb(x, n) + _log_cheb(-2 - x, n) + _log_cheb(2 - x, n)) / math.pi
    A[:, 0] -= 4 * math.log(2)
    T = np.cos(np.arange(n)[None, :] * np.arccos(x)[:, None])
    A += (math.pi / n) * _smooth_part(X[:, None], X[None, :]) @ T
    c = np.linalg.solve(A, np.ones(n))
    return math.pi * c[0]


def richardson_q0(n=256):
    """The Chebyshev scheme converges like n^{-8/3} (edge exponent -1/3); extrapolate once."""
    r = 2.0 ** (8.0 / 3.0)
    return (r * chebyshev_q0(2 * n) - chebyshev_q0(n)) / (r - 1.0)
