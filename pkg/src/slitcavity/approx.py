"""Single-mode approximation of the cavity field for the nonresonant regime."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.legendre import leggauss

from .bie import cavity_norms
from .cavity import Bottom, CavityGeometry, IncidentWave, ModeCoefficients, PoleError, incident_mode_overlap
from .specfun import EULER_GAMMA, j0_small, y0_regular

DENOMINATOR_GUARD: float = 1e-12


class ApproximateResonance(PoleError):
    """The single-mode denominator vanishes; the model is not valid here."""


def c0_constant(wave: IncidentWave, geometry: CavityGeometry, quadrature_points: int = 128) -> complex:
    """``(kappa / 2 eps) int_0^eps int_0^eps H_0(kappa |x1 - y1|) dy1 dx1``.

    Reduced to ``(kappa / eps) int_0^eps (eps - t) H_0(kappa t) dt``.  The
    ``(eps - t) ln t`` part is integrated exactly and the rest by Gauss-Legendre.
    """
    if quadrature_points < 32:
        raise ValueError("quadrature_points must be at least 32")
    geometry.check_subwavelength(wave)
    k, eps = wave.kappa, geometry.epsilon
    y, w = leggauss(quadrature_points)
    t = 0.5 * eps * (1.0 + y)
    w = 0.5 * eps * w
    z = k * t
    j0 = j0_small(z)
    lead = 1.0 + 2j / math.pi * (math.log(0.5 * k) + EULER_GAMMA)
    smooth = (eps - t) * (j0 * lead + 1j * y0_regular(z) + 2j / math.pi * (j0 - 1.0) * np.log(t))
    log_exact = 0.5 * eps * eps * math.log(eps) - 0.75 * eps * eps
    total = complex(w @ smooth) + 2j / math.pi * log_exact
    return k / eps * total


@dataclass(frozen=True)
class SingleModeSolution:
    alpha0_plus: complex
    alpha0_minus: complex
    c0: complex
    bottom: Bottom
    wave: IncidentWave
    geometry: CavityGeometry

    def as_modes(self) -> ModeCoefficients:
        return ModeCoefficients((self.alpha0_plus,), (self.alpha0_minus,), 0)


def single_mode_denominator(c0: complex, wave: IncidentWave, geometry: CavityGeometry) -> complex:
    e2 = cmath.exp(2j * wave.kappa * geometry.d)
    if geometry.bottom is Bottom.PMC:
        return (1.0 + c0) - (1.0 - c0) * e2
    return (1.0 + c0) + (1.0 - c0) * e2


def single_mode_solve(
    wave: IncidentWave,
    geometry: CavityGeometry,
    c0: complex | None = None,
) -> SingleModeSolution:
    if c0 is None:
        c0 = c0_constant(wave, geometry)
    den = single_mode_denominator(c0, wave, geometry)
    if abs(den) < DENOMINATOR_GUARD:
        raise ApproximateResonance(f"single-mode denominator {abs(den):.3e} vanishes at kappa = {wave.kappa}")
    plus = 2.0 * incident_mode_overlap(wave, geometry) / den
    e = cmath.exp(1j * wave.kappa * geometry.d)
    minus = -plus * e if geometry.bottom is Bottom.PMC else plus * e
    return SingleModeSolution(plus, minus, complex(c0), geometry.bottom, wave, geometry)


def _check_point(x: tuple[float, float], geometry: CavityGeometry) -> tuple[float, float]:
    x1, x2 = map(float, x)
    if not (0.0 <= x1 <= geometry.epsilon and -geometry.d <= x2 <= 0.0):
        raise ValueError(f"point {x!r} lies outside the closed cavity")
    return x1, x2


def approx_field(solution: SingleModeSolution, x: tuple[float, float]) -> complex:
    _, x2 = _check_point(x, solution.geometry)
    k, d = solution.wave.kappa, solution.geometry.d
    val = solution.alpha0_plus * cmath.exp(-1j * k * x2) + solution.alpha0_minus * cmath.exp(1j * k * (x2 + d))
    return val / math.sqrt(solution.geometry.epsilon)


def approx_field_dx2(solution: SingleModeSolution, x: tuple[float, float]) -> complex:
    _, x2 = _check_point(x, solution.geometry)
    k, d = solution.wave.kappa, solution.geometry.d
    val = -solution.alpha0_plus * cmath.exp(-1j * k * x2) + solution.alpha0_minus * cmath.exp(1j * k * (x2 + d))
    return 1j * k * val / math.sqrt(solution.geometry.epsilon)


def approx_enhancement(solution: SingleModeSolution) -> tuple[float, float]:
    """``(Q_E, Q_H)`` of the single-mode field."""
    u2, g2 = cavity_norms(solution.as_modes(), solution.wave, solution.geometry)
    vol = math.sqrt(solution.geometry.epsilon * solution.geometry.d)
    return math.sqrt(g2) / (solution.wave.kappa * vol), math.sqrt(u2) / vol


def approx_norms(solution: SingleModeSolution) -> tuple[float, float]:
    """``(||v||, ||grad v||)`` over the cavity."""
    u2, g2 = cavity_norms(solution.as_modes(), solution.wave, solution.geometry)
    return math.sqrt(u2), math.sqrt(g2)
