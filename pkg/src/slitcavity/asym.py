"""Small-aperture asymptotics: kernel splitting, q0, characteristic functions and resonances."""

from __future__ import annotations

import cmath
import contextlib
import enum
import math
import threading
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import scipy.linalg

from .bie import DEFAULT_GRID, SolverError, assemble_operator, singular_operator
from .discretize import aperture_grid
from .cavity import Bottom, CavityGeometry, IncidentWave, PoleError
from .green import gamma1, gamma2, kernel_exterior, kernel_interior
from .specfun import CONSTANTS

P1_POLE_GUARD: float = 1e-8


@dataclass(frozen=True)
class KernelDecomposition:
    gamma1: complex
    gamma2: float
    bottom: Bottom

    @property
    def gamma(self) -> complex:
        return self.gamma1 + self.gamma2


def kernel_decomposition(wave: IncidentWave, geometry: CavityGeometry) -> KernelDecomposition:
    return KernelDecomposition(gamma1(wave.kappa, geometry.epsilon), gamma2(wave.kappa, geometry), geometry.bottom)


def singular_kernel_k(X: float, Y: float) -> float:
    """``(ln|X-Y| + ln|sin(pi(X+Y)/2)| + ln|sin(pi(X-Y)/2)|) / pi``."""
    if X == Y:
        raise ValueError("k(X, Y) is singular at X = Y")
    if X + Y <= 0.0 or X + Y >= 2.0:
        raise ValueError("k(X, Y) is singular at the corners (0, 0) and (1, 1)")
    return (
        math.log(abs(X - Y))
        + math.log(abs(math.sin(0.5 * math.pi * (X + Y))))
        + math.log(abs(math.sin(0.5 * math.pi * abs(X - Y))))
    ) / math.pi


def kernel_remainder(X: float, Y: float, wave: IncidentWave, geometry: CavityGeometry) -> complex:
    """Full aperture kernel minus ``Gamma + k(X, Y)``."""
    return kernel_exterior(X, Y, wave, geometry).smooth_part + kernel_interior(X, Y, wave, geometry).smooth_part


# ------------------------------------------------------------------ q0

_Q0_LOCK = threading.Lock()
_Q0_CACHE: float | None = None
_Q0_SCALE: float = 1.0


class ConvergenceError(RuntimeError):
    pass


def q0_at_grid(n: int) -> float:
    x = np.linalg.solve(singular_operator(n), np.ones(n))
    return float(aperture_grid(n).w @ x)


def _compute_q0(start: int = 16, doublings: int = 6) -> float:
    n = start
    prev = q0_at_grid(n)
    change = math.inf
    for _ in range(doublings):
        n *= 2
        cur = q0_at_grid(n)
        change = abs(cur - prev)
        prev = cur
        if change <= 4e-16 * abs(cur):
            return cur
    if change > 1e-8:
        raise ConvergenceError(f"q0 failed to converge: last change {change:.3e}")
    return prev


def q0_constant() -> float:
    """``<K^{-1} 1, 1>`` for the parameter-free kernel ``k``; computed once and cached."""
    global _Q0_CACHE
    if _Q0_CACHE is None:
        with _Q0_LOCK:
            if _Q0_CACHE is None:
                _Q0_CACHE = _compute_q0()
    return _Q0_CACHE * _Q0_SCALE


@contextlib.contextmanager
def perturbed_q0(factor: float) -> Iterator[None]:
    """Scale the cached ``q0`` inside the block; used to test sensitivity of validation checks."""
    global _Q0_SCALE
    old = _Q0_SCALE
    _Q0_SCALE = old * factor
    try:
        yield
    finally:
        _Q0_SCALE = old


# ------------------------------------------------------------------ characteristic functions

def _check_p1_domain(kappa: complex, geometry: CavityGeometry) -> complex:
    kappa = complex(kappa)
    if abs(kappa) <= 1e-8:
        raise ValueError("|kappa| must exceed 1e-8")
    if kappa.real <= 0.0:
        raise ValueError("Re kappa must be positive (principal logarithm branch)")
    d = geometry.d
    shift = 0.5 if geometry.bottom is Bottom.PMC else 0.0
    j = round((kappa * d).real / math.pi - shift)
    pole = (j + shift) * math.pi / d
    if abs(kappa - pole) < P1_POLE_GUARD:
        raise PoleError(f"kappa = {kappa} lies within {P1_POLE_GUARD:g} of the pole {pole:.12g}")
    return kappa


def _rho(kappa: complex) -> complex:
    return (2.0 * math.log(2.0) + cmath.log(kappa) + CONSTANTS.gamma1) / math.pi


def _trig_term(kappa: complex, geometry: CavityGeometry) -> complex:
    kd = kappa * geometry.d
    if geometry.bottom is Bottom.PMC:
        return -cmath.tan(kd) / kappa
    return 1.0 / (cmath.tan(kd) * kappa)


def p1_function(kappa: complex, geometry: CavityGeometry) -> complex:
    kappa = _check_p1_domain(kappa, geometry)
    eps = geometry.epsilon
    return eps + (_trig_term(kappa, geometry) + eps * _rho(kappa) + eps * math.log(eps) / math.pi) * q0_constant()


def p1_derivative(kappa: complex, geometry: CavityGeometry) -> complex:
    kappa = _check_p1_domain(kappa, geometry)
    d, eps = geometry.d, geometry.epsilon
    kd = kappa * d
    if geometry.bottom is Bottom.PMC:
        sec2 = 1.0 / cmath.cos(kd) ** 2
        trig = (cmath.tan(kd) - kappa * d * sec2) / kappa**2
    else:
        csc2 = 1.0 / cmath.sin(kd) ** 2
        trig = (-kappa * d * csc2 - 1.0 / cmath.tan(kd)) / kappa**2
    return (trig + eps / (math.pi * kappa)) * q0_constant()


def lambda_full(kappa: float, geometry: CavityGeometry, grid_size: int = DEFAULT_GRID) -> complex:
    """``1 + Gamma <L^{-1} 1, 1>`` with ``L`` the discretised kernel minus its constant part."""
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    op = assemble_operator(IncidentWave(float(kappa)), geometry, grid_size)
    lu, piv = scipy.linalg.lu_factor(op.matrix)
    gecon = scipy.linalg.get_lapack_funcs("gecon", (lu,))
    rcond, _ = gecon(lu, np.linalg.norm(op.matrix, 1), norm="1")
    if rcond < 1e-13:
        raise SolverError(f"near-singular discretisation: condition estimate {1.0 / max(rcond, 1e-300):.3e}")
    y = scipy.linalg.lu_solve((lu, piv), np.ones(grid_size))
    return complex(1.0 + op.gamma * (op.grid.w @ y))


def p_function(kappa: float, geometry: CavityGeometry, grid_size: int = DEFAULT_GRID) -> complex:
    return geometry.epsilon * lambda_full(kappa, geometry, grid_size)


# ------------------------------------------------------------------ resonances

class ResonanceMethod(str, enum.Enum):
    ASYMPTOTIC = "asymptotic-formula"
    NEWTON = "newton-on-p1"
    SWEEP = "sweep-peak"


@dataclass(frozen=True)
class ResonanceResult:
    n: int
    k_complex: complex
    method: ResonanceMethod
    residual: float
    iterations: int


def leading_resonance(n: int, geometry: CavityGeometry) -> float:
    if geometry.bottom is Bottom.PMC:
        if n < 1:
            raise ValueError("PMC resonances are indexed from n = 1")
        return n * math.pi / geometry.d
    if n < 0:
        raise ValueError("PEC resonances are indexed from n = 0")
    return (n + 0.5) * math.pi / geometry.d


def resonance_asymptotic(n: int, geometry: CavityGeometry) -> ResonanceResult:
    k0 = leading_resonance(n, geometry)
    eps, d = geometry.epsilon, geometry.d
    bracket = eps * math.log(eps) / math.pi + (
        1.0 / q0_constant() + (2.0 * math.log(2.0) + math.log(k0) + CONSTANTS.gamma1) / math.pi
    ) * eps
    shift = k0 / d * bracket
    if abs(shift) >= 0.2 * k0:
        raise ValueError(f"epsilon = {eps:g} is too large: the correction exceeds 20% of the leading term")
    k = k0 + shift
    return ResonanceResult(n, complex(k), ResonanceMethod.ASYMPTOTIC, abs(p1_function(k, geometry)), 0)


def resonance_newton(n: int, geometry: CavityGeometry, tolerance: float = 1e-13, max_iter: int = 50) -> ResonanceResult:
    if tolerance < 1e-13:
        raise ValueError("tolerance must be at least 1e-13")
    k0 = leading_resonance(n, geometry)
    k = resonance_asymptotic(n, geometry).k_complex
    for it in range(1, max_iter + 1):
        val = p1_function(k, geometry)
        k = k - val / p1_derivative(k, geometry)
        if abs(k.real - k0) > math.pi / (2.0 * geometry.d):
            raise ConvergenceError(f"Newton iterate {k} escaped the sector around {k0:.6g}")
        res = abs(p1_function(k, geometry))
        if res <= tolerance:
            return ResonanceResult(n, k, ResonanceMethod.NEWTON, res, it)
    raise ConvergenceError(f"Newton on p1 did not converge in {max_iter} iterations (residual {res:.3e})")
