"""Cavity geometry, incident field and waveguide-mode machinery."""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

POLE_GUARD: float = 1e-12


class Bottom(str, enum.Enum):
    PMC = "pmc"
    PEC = "pec"

    @classmethod
    def parse(cls, value: "Bottom | str") -> "Bottom":
        if isinstance(value, Bottom):
            return value
        try:
            return cls(str(value).lower())
        except ValueError as exc:
            raise ValueError(f"unknown bottom condition {value!r}; expected 'pmc' or 'pec'") from exc


class DtnVariant(str, enum.Enum):
    FULL = "full"
    SINGLE_MODE = "single-mode"


class PoleError(ArithmeticError):
    """Raised when a trigonometric symbol or denominator is too close to a pole."""


@dataclass(frozen=True)
class CavityGeometry:
    epsilon: float
    d: float
    bottom: Bottom = Bottom.PMC

    def __post_init__(self) -> None:
        if not (math.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be positive, got {self.epsilon!r}")
        if not (math.isfinite(self.d) and self.d > 0):
            raise ValueError(f"depth must be positive, got {self.d!r}")
        object.__setattr__(self, "bottom", Bottom.parse(self.bottom))

    def check_subwavelength(self, wave: "IncidentWave") -> None:
        if wave.kappa * self.epsilon >= math.pi:
            raise ValueError(
                f"kappa*epsilon = {wave.kappa * self.epsilon:.6g} must stay below pi "
                "(higher cavity modes would propagate)"
            )


@dataclass(frozen=True)
class IncidentWave:
    kappa: float
    theta: float = 0.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ValueError(f"kappa must be positive, got {self.kappa!r}")
        if not (math.isfinite(self.theta) and abs(self.theta) < math.pi / 2):
            raise ValueError(f"theta must lie in (-pi/2, pi/2), got {self.theta!r}")

    @property
    def wavelength(self) -> float:
        return 2.0 * math.pi / self.kappa

    def total_incident(self, x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
        """``u_inc + u_ref`` in the upper half-plane."""
        k, s, c = self.kappa, math.sin(self.theta), math.cos(self.theta)
        return np.exp(1j * k * s * x1) * 2.0 * np.cos(k * c * x2)


@dataclass(frozen=True)
class ModeCoefficients:
    alpha_plus: tuple[complex, ...]
    alpha_minus: tuple[complex, ...]
    truncation: int

    def __post_init__(self) -> None:
        if len(self.alpha_plus) != self.truncation + 1 or len(self.alpha_minus) != self.truncation + 1:
            raise ValueError("coefficient lists must have length truncation + 1")


def _decay_rate(n: int, kappa: float, geometry: CavityGeometry) -> float:
    t = n * math.pi / geometry.epsilon
    if t * t <= kappa * kappa:
        raise ValueError(f"mode {n} propagates (n*pi/epsilon <= kappa); outside the model")
    return math.sqrt((t - kappa) * (t + kappa))


def beta(n: int, wave: IncidentWave, geometry: CavityGeometry) -> complex:
    if n < 0:
        raise ValueError("mode index must be nonnegative")
    if n == 0:
        return complex(wave.kappa)
    return 1j * _decay_rate(n, wave.kappa, geometry)


def basis_value(n: int, x1: float, geometry: CavityGeometry) -> float:
    eps = geometry.epsilon
    if not (0.0 <= x1 <= eps):
        raise ValueError(f"x1 = {x1!r} lies outside [0, epsilon]")
    if n == 0:
        return 1.0 / math.sqrt(eps)
    return math.sqrt(2.0 / eps) * math.cos(n * math.pi * x1 / eps)


def aperture_forcing(X: float | np.ndarray, wave: IncidentWave, geometry: CavityGeometry) -> complex | np.ndarray:
    arr = np.asarray(X, dtype=float)
    if np.any((arr < 0) | (arr > 1)):
        raise ValueError("X must lie in [0, 1]")
    val = 2.0 * np.exp(1j * wave.kappa * math.sin(wave.theta) * geometry.epsilon * arr)
    return complex(val) if np.ndim(X) == 0 else val


def incident_mode_overlap(wave: IncidentWave, geometry: CavityGeometry) -> complex:
    """``<u_inc, phi_0>`` over the aperture, in closed form."""
    eps = geometry.epsilon
    a = wave.kappa * math.sin(wave.theta) * eps
    # (e^{ia} - 1)/(ia) = e^{ia/2} sinc(a/2), stable as a -> 0
    return math.sqrt(eps) * cmath.exp(0.5j * a) * float(np.sinc(a / (2.0 * math.pi)))


def dtn_symbol(n: int, wave: IncidentWave, geometry: CavityGeometry) -> complex:
    """Multiplier of the exact DtN map on mode ``n``."""
    k, d = wave.kappa, geometry.d
    pmc = geometry.bottom is Bottom.PMC
    if n == 0:
        if pmc:
            den = 2.0 * math.sin(k * d)
            if abs(den) < POLE_GUARD:
                raise PoleError(f"DtN symbol pole: sin(kappa d) = {den / 2:.3e}")
            return complex(k * math.cos(k * d) / math.sin(k * d))
        den = 2.0 * math.cos(k * d)
        if abs(den) < POLE_GUARD:
            raise PoleError(f"DtN symbol pole: cos(kappa d) = {den / 2:.3e}")
        return complex(-k * math.tan(k * d))
    s = _decay_rate(n, k, geometry)
    e = math.exp(-2.0 * s * d)
    if pmc:
        return complex(s * (1.0 + e) / (1.0 - e))
    return complex(s * (1.0 - e) / (1.0 + e))


def dtn_apply(
    coeffs: Sequence[complex],
    wave: IncidentWave,
    geometry: CavityGeometry,
    variant: DtnVariant | str = DtnVariant.FULL,
) -> list[complex]:
    variant = DtnVariant(variant)
    out: list[complex] = []
    for n, c in enumerate(coeffs):
        if n > 0 and variant is DtnVariant.SINGLE_MODE:
            out.append(0j)
            continue
        if c == 0 and n > 0:
            out.append(0j)
            continue
        out.append(dtn_symbol(n, wave, geometry) * complex(c))
    return out
