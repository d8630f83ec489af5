"""Graded Nyström discretisation of log-singular aperture operators.

The aperture coordinate is graded as ``X = s(eta)`` with the quintic smoothstep
``s(u) = 10u^3 - 15u^4 + 6u^5``.  The rescaled density behaves like
``X^(-1/3)`` at each edge (the aperture edges are 3*pi/2 corners), and the
graded density ``psi(eta) = phi(s(eta)) s'(eta)`` is analytic on ``[0, 1]``.

Every logarithm in the kernels, ``ln|X-Y|``, ``ln(X+Y)`` and ``ln(2-X-Y)``,
factors exactly over roots of polynomials in ``eta``.  Each factor
``ln|eta - a|`` is integrated against the Lagrange basis on Gauss-Legendre
nodes with Legendre moments expressed through ``Q_n(alpha)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss, legvander, legval

TINY_XI: float = 1e-6
NEAR_RADIUS: float = 1.5


def smoothstep(u: np.ndarray) -> np.ndarray:
    return u**3 * (10.0 - 15.0 * u + 6.0 * u * u)


def smoothstep_prime(u: np.ndarray) -> np.ndarray:
    return 30.0 * (u * (1.0 - u)) ** 2


def smoothstep_inverse(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    flip = X > 0.5
    t = np.where(flip, 1.0 - X, X)
    eta = np.cbrt(t / 10.0)
    for _ in range(60):
        step = (smoothstep(eta) - t) / np.maximum(smoothstep_prime(eta), 1e-300)
        eta = np.clip(eta - step, 0.0, 0.5)
        if np.all(np.abs(step) <= 1e-16 * np.maximum(eta, 1e-300)):
            break
    return np.where(flip, 1.0 - eta, eta)


# ------------------------------------------------------------ Legendre moments

def legendre_q(alpha: np.ndarray, n: int) -> np.ndarray:
    """Legendre functions of the second kind ``Q_0 .. Q_n``.

    Real ``alpha`` in ``(-1, 1)`` gives the Ferrers values.  Off the cut, the
    minimal solution is taken by backward recurrence unless the point is so close
    to the cut that forward recurrence is harmless.
    """
    alpha = np.asarray(alpha, dtype=complex).ravel()
    out = np.empty((alpha.size, n + 1), dtype=complex)
    inside = (alpha.imag == 0.0) & (np.abs(alpha.real) < 1.0)
    root = np.sqrt(alpha - 1.0) * np.sqrt(alpha + 1.0)
    z = alpha + root
    z = np.where(np.abs(z) < 1.0, alpha - root, z)
    lz = np.log(np.abs(z))
    forward = inside | (n * lz < 1.0)
    if np.any(forward):
        a = alpha[forward]
        x = a.real
        with np.errstate(divide="ignore"):
            q0 = np.where(
                inside[forward],
                0.5 * np.log(np.abs((1.0 + x) / (1.0 - x))) + 0j,
                0.5 * np.log((a + 1.0) / (a - 1.0)),
            )
        q = np.empty((a.size, n + 1), dtype=complex)
        q[:, 0] = q0
        if n >= 1:
            q[:, 1] = a * q0 - 1.0
        for k in range(1, n):
            q[:, k + 1] = ((2 * k + 1) * a * q[:, k] - k * q[:, k - 1]) / (k + 1)
        out[forward] = q
    backward = ~forward
    if np.any(backward):
        a = alpha[backward]
        start = n + int(math.ceil(40.0 / float(np.min(lz[backward])))) + 10
        q = np.empty((a.size, n + 1), dtype=complex)
        nxt = np.zeros_like(a)
        cur = np.full_like(a, 1e-280)
        for k in range(start, 0, -1):
            if k <= n:
                q[:, k] = cur
            prev = ((2 * k + 1) * a * cur - (k + 1) * nxt) / k
            nxt, cur = cur, prev
            big = np.abs(cur) > 1e250
            if np.any(big):
                sc = np.where(big, 1e-250, 1.0)
                cur, nxt = cur * sc, nxt * sc
                q *= sc[:, None]
        q[:, 0] = cur
        q *= (0.5 * np.log((a + 1.0) / (a - 1.0)) / cur)[:, None]
        out[backward] = q
    return out


def log_moments(alpha: np.ndarray, n: int) -> np.ndarray:
    """``L_j(alpha) = int_{-1}^{1} ln|y - alpha| P_j(y) dy`` for ``j < n``."""
    a = np.asarray(alpha, dtype=complex).ravel()
    with np.errstate(invalid="ignore", divide="ignore"):
        q = legendre_q(a, n)
    out = np.empty((a.size, n))
    j = np.arange(1, n)
    with np.errstate(invalid="ignore", divide="ignore"):
        out[:, 0] = np.real(_xlogx(a + 1.0) - _xlogx(a - 1.0)) - 2.0
        out[:, 1:] = np.real((2.0 / (2 * j + 1)) * (q[:, 2 : n + 1] - q[:, 0 : n - 1]))
    # at the endpoints Q_j is infinite but the moments are finite
    for sign in (1.0, -1.0):
        hit = a == sign
        if np.any(hit):
            out[hit, 1:] = -2.0 / (j * (j + 1.0)) * sign**j
    return out


def _xlogx(z: np.ndarray) -> np.ndarray:
    safe = np.where(z == 0, 1.0, z)
    return np.where(z == 0, 0.0, z * np.log(safe))


# ------------------------------------------------------------ root factorisations

def _polish(coeffs: list[float], r: np.ndarray) -> np.ndarray:
    dcoef = np.polyder(coeffs)
    for _ in range(4):
        dv = np.polyval(dcoef, r)
        ok = dv != 0
        r = np.where(ok, r - np.polyval(coeffs, r) / np.where(ok, dv, 1.0), r)
    return r


def _tiny_roots(coeffs: list[float], xi: float, near: np.ndarray) -> np.ndarray:
    far = _polish(coeffs, np.roots([6.0, -15.0, 10.0]).astype(complex))
    if xi > 1e-150:
        near = _polish(coeffs, near.astype(complex))
    return np.concatenate([near.astype(complex), far])


def _diff_roots_left(xi: float) -> np.ndarray:
    """Roots of ``R`` with ``s(eta) - s(xi) = (eta - xi) R(eta)``; ``xi <= 1/2``."""
    c = 6.0 * xi * xi - 15.0 * xi + 10.0
    coeffs = [6.0, 6.0 * xi - 15.0, c, xi * c, xi * xi * c]
    if xi < TINY_XI:
        # the two near roots separate from the far pair; avoid an underflowing leading term
        return _tiny_roots(coeffs, xi, xi * np.roots([1.0, 1.0, 1.0]))
    mu = np.roots([6.0 * xi * xi, (6.0 * xi - 15.0) * xi, c, c, c])
    return _polish(coeffs, xi * mu.astype(complex))


def diff_roots(xi: float) -> np.ndarray:
    if xi <= 0.5:
        return _diff_roots_left(xi)
    return 1.0 - _diff_roots_left(1.0 - xi)


def sum_roots(xi: float) -> np.ndarray:
    """Roots in ``eta`` of ``s(xi) + s(eta)``."""
    c = 10.0 - 15.0 * xi + 6.0 * xi * xi
    coeffs = [6.0, -15.0, 10.0, 0.0, 0.0, float(smoothstep(np.float64(xi)))]
    if xi < TINY_XI:
        return _tiny_roots(coeffs, xi, xi * np.roots([10.0, 0.0, 0.0, c]))
    mu = np.roots([6.0 * xi * xi, -15.0 * xi, 10.0, 0.0, 0.0, c])
    return _polish(coeffs, xi * mu.astype(complex))


# ------------------------------------------------------------ grid

@dataclass(frozen=True)
class LogWeights:
    """Product-integration weights for the three logarithms at a set of targets."""

    diff: np.ndarray
    total: np.ndarray
    total_c: np.ndarray


class ApertureGrid:
    """Gauss-Legendre nodes in the graded variable, with cached log weights."""

    def __init__(self, n: int) -> None:
        if n < 8:
            raise ValueError("grid size must be at least 8")
        y, wy = leggauss(n)
        self.n = n
        self.y = y
        self.wy = wy
        self.eta = 0.5 * (1.0 + y)
        self.w = 0.5 * wy
        self.X = smoothstep(self.eta)
        self.Xc = smoothstep(1.0 - self.eta)
        self.jacobian = smoothstep_prime(self.eta)
        vand = legvander(y, n - 1)
        scale = (2.0 * np.arange(n) + 1.0) / 2.0
        self._lag_to_leg = (vand * wy[:, None]).T * scale[:, None]
        self.weights = self.log_weights(self.eta)

    def legendre_coefficients(self, values: np.ndarray) -> np.ndarray:
        return self._lag_to_leg @ values

    def interpolate(self, values: np.ndarray, eta: np.ndarray) -> np.ndarray:
        return legval(2.0 * np.asarray(eta) - 1.0, self.legendre_coefficients(values))

    def _point_weights(self, points: np.ndarray) -> np.ndarray:
        """Rows ``int_0^1 ln|eta - a| l_q(eta) d eta`` for each point ``a``."""
        a = np.asarray(points, dtype=complex).ravel()
        alpha = 2.0 * a - 1.0
        root = np.sqrt(alpha - 1.0) * np.sqrt(alpha + 1.0)
        z = alpha + root
        z = np.where(np.abs(z) < 1.0, alpha - root, z)
        near = np.abs(z) < NEAR_RADIUS
        out = np.empty((a.size, self.n))
        far = ~near
        if np.any(far):
            out[far] = self.w * np.log(np.abs(self.eta[None, :] - a[far, None]))
        if np.any(near):
            mom = log_moments(alpha[near], self.n)
            out[near] = 0.5 * (mom @ self._lag_to_leg - math.log(2.0) * self.wy)
        return out

    def log_weights(self, targets: np.ndarray) -> LogWeights:
        targets = np.asarray(targets, dtype=float).ravel()
        pts_d, pts_s, pts_c = [], [], []
        for xi in targets:
            pts_d.append(np.concatenate([[complex(xi)], diff_roots(float(xi))]))
            pts_s.append(sum_roots(float(xi)))
            pts_c.append(1.0 - sum_roots(1.0 - float(xi)))
        ln6 = math.log(6.0) * self.w

        def rows(pts: list[np.ndarray]) -> np.ndarray:
            k = pts[0].size
            flat = self._point_weights(np.concatenate(pts))
            return flat.reshape(len(pts), k, self.n).sum(axis=1) + ln6

        return LogWeights(rows(pts_d), rows(pts_s), rows(pts_c))


@lru_cache(maxsize=16)
def aperture_grid(n: int) -> ApertureGrid:
    return ApertureGrid(n)


@dataclass(frozen=True)
class PairGeometry:
    """Accurate ``X - Y``, ``X + Y`` and ``2 - X - Y`` between targets and nodes."""

    u: np.ndarray
    v: np.ndarray
    vc: np.ndarray

    @classmethod
    def build(cls, X: np.ndarray, Xc: np.ndarray, Y: np.ndarray, Yc: np.ndarray) -> "PairGeometry":
        X, Xc = X[:, None], Xc[:, None]
        Y, Yc = Y[None, :], Yc[None, :]
        u = np.where((X > 0.5) & (Y > 0.5), Yc - Xc, X - Y)
        return cls(u=u, v=X + Y, vc=Xc + Yc)


def sin_log_remainder(p: PairGeometry) -> np.ndarray:
    """``ln(sin(pi u/2)/u) + ln(sin(pi v/2)/(v (2 - v)))``, analytic on the square."""
    t1 = np.log(0.5 * math.pi * np.sinc(0.5 * p.u))
    low = p.v <= 1.0
    t2 = np.where(
        low,
        np.log(0.5 * math.pi * np.sinc(0.5 * p.v) / np.where(low, p.vc, 1.0)),
        np.log(0.5 * math.pi * np.sinc(0.5 * p.vc) / np.where(low, 1.0, p.v)),
    )
    return t1 + t2


def xlogx2(t: np.ndarray) -> np.ndarray:
    """``t^2 ln|t|`` with the removable value 0 at ``t = 0``."""
    at = np.abs(t)
    out = np.zeros_like(at)
    pos = at > 0
    out[pos] = at[pos] ** 2 * np.log(at[pos])
    return out
