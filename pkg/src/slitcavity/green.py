"""Green functions of the half-plane and of the cavity, and the rescaled aperture kernels."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .cavity import Bottom, CavityGeometry, IncidentWave, PoleError, POLE_GUARD
from .specfun import CONSTANTS, hankel1_0, j0_small, y0_regular

CORRECTION_TOL: float = 1e-14
CORRECTION_CAP: int = 10_000


@dataclass(frozen=True)
class KernelEvaluation:
    value: complex
    singular_part: complex
    smooth_part: complex
    truncation_terms: int


class SumForm(str, enum.Enum):
    CLOSED_FORM = "closed-form"
    DIRECT_SERIES = "direct-series"


@dataclass(frozen=True)
class ModalSum:
    m: int
    value: float
    form: SumForm


def halfspace_green(x: tuple[float, float], y: tuple[float, float], kappa: float) -> complex:
    """Neumann Green function of the upper half-plane."""
    x1, x2 = map(float, x)
    y1, y2 = map(float, y)
    if x2 < 0 or y2 < 0:
        raise ValueError("both points must lie in the closed upper half-plane")
    r = math.hypot(x1 - y1, x2 - y2)
    if r == 0.0:
        raise ValueError("coincident source and observation points")
    rr = math.hypot(x1 - y1, x2 + y2)
    h = hankel1_0(np.array([kappa * r, kappa * rr]))
    return complex(-0.25j * (h[0] + h[1]))


def gamma1(kappa: float, epsilon: float) -> complex:
    return (math.log(kappa) + CONSTANTS.gamma1 + math.log(epsilon)) / math.pi


def _check_cos(kd: float) -> None:
    if abs(math.cos(kd)) < POLE_GUARD:
        raise PoleError(f"trigonometric pole: cos(kappa d) = {math.cos(kd):.3e}")


def _check_sin(kd: float) -> None:
    if abs(math.sin(kd)) < POLE_GUARD:
        raise PoleError(f"trigonometric pole: sin(kappa d) = {math.sin(kd):.3e}")


def gamma2(kappa: float, geometry: CavityGeometry) -> float:
    kd = kappa * geometry.d
    base = 2.0 * math.log(2.0) / math.pi
    if geometry.bottom is Bottom.PMC:
        _check_cos(kd)
        return -math.tan(kd) / (geometry.epsilon * kappa) + base
    _check_sin(kd)
    return 1.0 / (math.tan(kd) * geometry.epsilon * kappa) + base


def modal_sum_C(m: int, wave: IncidentWave, geometry: CavityGeometry) -> float:
    """Closed form of ``sum_n c_mn alpha_mn`` for the cavity Green function."""
    k, d = wave.kappa, geometry.d
    if m == 0:
        if geometry.bottom is Bottom.PMC:
            _check_cos(k * d)
            return -d * math.tan(k * d) / k
        _check_sin(k * d)
        return d / (math.tan(k * d) * k)
    t = m * math.pi / geometry.epsilon
    if t <= k:
        raise ValueError(f"mode {m} propagates; outside the model")
    s = math.sqrt((t - k) * (t + k))
    e = math.exp(-2.0 * d * s)
    ratio = (1.0 - e) / (1.0 + e) if geometry.bottom is Bottom.PMC else (1.0 + e) / (1.0 - e)
    return -2.0 * d / s * ratio


def modal_sum(
    m: int,
    wave: IncidentWave,
    geometry: CavityGeometry,
    form: SumForm | str = SumForm.CLOSED_FORM,
    n_max: int = 1_000_000,
) -> ModalSum:
    """``C_m`` either in closed form or by the truncated double-index series plus a tail estimate."""
    form = SumForm(form)
    if form is SumForm.CLOSED_FORM:
        return ModalSum(m, modal_sum_C(m, wave, geometry), form)
    k, d, eps = wave.kappa, geometry.d, geometry.epsilon
    n = np.arange(n_max + 1, dtype=float)
    if geometry.bottom is Bottom.PMC:
        lam_n = (n + 0.5) * math.pi / d
        alpha = np.full_like(n, 2.0 if m == 0 else 4.0)
        shift = 0.5
    else:
        lam_n = n * math.pi / d
        alpha = np.where(n == 0, 1.0, 2.0) * (1.0 if m == 0 else 2.0)
        shift = 0.0
    denom = k * k - (m * math.pi / eps) ** 2 - lam_n**2
    total = math.fsum((alpha / denom)[::-1])
    # tail sum_{n > n_max} -a d^2 / (pi^2 (n + shift)^2), Euler-Maclaurin to leading order
    a_tail = alpha[-1]
    x0 = n_max + shift + 0.5
    total += -a_tail * d * d / (math.pi**2) / x0
    return ModalSum(m, total, form)


def correction_coefficients(
    wave: IncidentWave,
    geometry: CavityGeometry,
    tol: float = CORRECTION_TOL,
    cap: int = CORRECTION_CAP,
) -> np.ndarray:
    """``b_m = (C_m + 2 d eps/(m pi)) / (eps d)`` for ``m = 1, 2, ...`` until three terms fall below ``tol``."""
    k, d, eps = wave.kappa, geometry.d, geometry.epsilon
    pmc = geometry.bottom is Bottom.PMC
    out: list[float] = []
    small = 0
    for m in range(1, cap + 1):
        t = m * math.pi / eps
        a = k / t
        r = math.sqrt((1.0 - a) * (1.0 + a))
        s = t * r
        e = math.exp(-2.0 * d * s)
        one_minus_t = 2.0 * e / (1.0 + e) if pmc else -2.0 * e / (1.0 - e)
        b = (2.0 / (m * math.pi)) * (-a * a / (r * (1.0 + r)) + one_minus_t / r)
        out.append(b)
        small = small + 1 if abs(b) < tol else 0
        if small >= 3:
            break
    return np.asarray(out)


def exterior_parts(z: np.ndarray, log_dist: np.ndarray, kappa: float, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Split ``-(i/2) H_0(z)`` as ``Gamma1 + ln|X-Y|/pi`` plus a smooth remainder.

    ``z = eps*kappa*|X-Y|`` must not exceed 12 and ``log_dist = ln|X-Y|``.
    Returns ``(J_0(z), remainder)`` so callers can reuse the Bessel factor.
    """
    j0 = j0_small(z)
    g1 = gamma1(kappa, epsilon)
    rem = g1 * (j0 - 1.0) + (j0 - 1.0) * log_dist / math.pi + 0.5 * y0_regular(z)
    return j0, rem


def kernel_exterior(X: float, Y: float, wave: IncidentWave, geometry: CavityGeometry) -> KernelEvaluation:
    if X == Y:
        raise ValueError("exterior kernel is logarithmically singular at X = Y")
    eps, k = geometry.epsilon, wave.kappa
    dist = abs(X - Y)
    z = eps * k * dist
    singular = gamma1(k, eps) + math.log(dist) / math.pi
    if z <= 12.0:
        _, rem = exterior_parts(np.array([z]), np.array([math.log(dist)]), k, eps)
        smooth = complex(rem[0])
    else:
        smooth = complex(-0.5j * hankel1_0(np.array([z]))[0]) - singular
    return KernelEvaluation(singular + smooth, singular, smooth, 1)


def kernel_interior(X: float, Y: float, wave: IncidentWave, geometry: CavityGeometry) -> KernelEvaluation:
    if X == Y or X + Y <= 0.0 or X + Y >= 2.0:
        raise ValueError("interior kernel is singular at X = Y and at the corners")
    singular = gamma2(wave.kappa, geometry) + (
        math.log(abs(math.sin(0.5 * math.pi * (X + Y)))) + math.log(abs(math.sin(0.5 * math.pi * (X - Y))))
    ) / math.pi
    b = correction_coefficients(wave, geometry)
    m = np.arange(1, b.size + 1)
    terms = b * np.cos(m * math.pi * X) * np.cos(m * math.pi * Y)
    smooth = math.fsum(terms[::-1])
    return KernelEvaluation(complex(singular + smooth), complex(singular), complex(smooth), int(b.size))
