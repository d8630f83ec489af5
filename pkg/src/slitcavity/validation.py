"""Cross-module consistency suite behind the ``validate`` command."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from . import asym
from .approx import single_mode_solve
from .bie import (
    _basis,
    _profiles,
    assemble_and_solve,
    cavity_norms,
    enhancement_factors,
    mode_coefficients,
    solve_enhancement,
)
from .cavity import Bottom, CavityGeometry, IncidentWave, ModeCoefficients
from .specfun import bessel_j, bessel_y

THETA = math.pi / 3


class ValidationLevel(str, enum.Enum):
    QUICK = "quick"
    FULL = "full"


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    measured: float
    limit: str
    detail: str = ""


@dataclass
class ValidationReport:
    level: ValidationLevel
    checks: list[Check] = field(default_factory=list)
    constants: dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def render(self) -> str:
        lines = [f"validation level={self.level.value}"]
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            extra = f" ({c.detail})" if c.detail else ""
            lines.append(f"{tag} {c.name}: measured={c.measured:.6g} limit={c.limit}{extra}")
        for k, v in self.constants.items():
            lines.append(f"constant {k} = {v:.6g}")
        lines.append("overall: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"

    def as_dict(self) -> dict[str, Any]:
        return {
            "level": self.level.value,
            "passed": self.passed,
            "checks": [asdict(c) for c in self.checks],
            "constants": self.constants,
        }


# ------------------------------------------------------------------ oracles

def quadrature_norms(
    modes: ModeCoefficients,
    wave: IncidentWave,
    geometry: CavityGeometry,
    n1: int = 200,
    n2: int = 200,
) -> tuple[float, float]:
    """``(||u||^2, ||grad u||^2)`` by tensor quadrature of the modal field.

    The depth direction uses geometrically graded Gauss panels so the evanescent
    layers under the aperture are resolved with ``n2`` nodes in total.
    """
    eps, d = geometry.epsilon, geometry.d
    y, w = leggauss(n1)
    x1 = 0.5 * eps * (1.0 + y)
    w1 = 0.5 * eps * w
    per = 10
    panels = n2 // per
    edges = -d * np.concatenate([2.0 ** -np.arange(panels, dtype=float), [0.0]])
    yp, wp = leggauss(per)
    x2 = np.concatenate([0.5 * (a + b) + 0.5 * (b - a) * yp for a, b in zip(edges[:-1], edges[1:])])
    w2 = np.concatenate([0.5 * (b - a) * wp for a, b in zip(edges[:-1], edges[1:])])
    U, dU = _profiles(modes, wave, geometry, x2)
    phi = _basis(modes.truncation, x1, eps)
    n = np.arange(modes.truncation + 1)[:, None]
    dphi = -math.sqrt(2.0 / eps) * (n * math.pi / eps) * np.sin(n * math.pi * x1[None, :] / eps)
    u = phi.T @ U
    ux1 = dphi.T @ U
    ux2 = phi.T @ dU
    W = np.outer(w1, w2)
    return float(np.sum(W * np.abs(u) ** 2)), float(np.sum(W * (np.abs(ux1) ** 2 + np.abs(ux2) ** 2)))


def kernel_remainder_max(wave: IncidentWave, geometry: CavityGeometry, points: int = 19) -> float:
    """Largest ``|kernel - Gamma - k|`` over an off-diagonal grid of the unit square."""
    xs = [(j + 1) / (points + 1) for j in range(points)]
    return max(abs(asym.kernel_remainder(x, y, wave, geometry)) for x in xs for y in xs if x != y)


def difference_modes(modes: ModeCoefficients, approx: ModeCoefficients) -> ModeCoefficients:
    plus = list(modes.alpha_plus)
    minus = list(modes.alpha_minus)
    for i in range(approx.truncation + 1):
        plus[i] -= approx.alpha_plus[i]
        minus[i] -= approx.alpha_minus[i]
    return ModeCoefficients(tuple(plus), tuple(minus), modes.truncation)


def approx_gradient_gap(epsilon: float, depth: float = 1.0, kappa: float = 0.1) -> float:
    """``||grad(u - v)|| / eps`` between the full and single-mode fields."""
    geometry = CavityGeometry(epsilon, depth, Bottom.PMC)
    wave = IncidentWave(kappa, THETA)
    density = assemble_and_solve(wave, geometry)
    modes = mode_coefficients(density, wave, geometry)
    gap = difference_modes(modes, single_mode_solve(wave, geometry).as_modes())
    return math.sqrt(cavity_norms(gap, wave, geometry)[1]) / epsilon


def bie_peak(geometry: CavityGeometry, guess: float, quantity: str = "Q_H", half_width: float = 0.02) -> float:
    def objective(k: float) -> float:
        return -getattr(solve_enhancement(IncidentWave(k, THETA), geometry), quantity)

    res = minimize_scalar(objective, bracket=(guess - half_width, guess, guess + half_width),
                          method="golden", options={"xtol": 1e-9})
    return float(res.x)


# ------------------------------------------------------------------ checks

def _check_wronskian() -> Check:
    x = np.linspace(0.1, 50.0, 400)
    worst = 0.0
    for n in range(0, 16):
        w = bessel_j(n + 1, x) * bessel_y(n, x) - bessel_j(n, x) * bessel_y(n + 1, x)
        worst = max(worst, float(np.max(np.abs(w * math.pi * x / 2.0 - 1.0))))
    return Check("bessel_wronskian", worst <= 1e-9, worst, "<= 1e-9")


def _check_q0() -> Check:
    change = abs(asym.q0_at_grid(128) - asym.q0_at_grid(64))
    return Check("q0_grid_doubling", change <= 1e-10, change, "<= 1e-10", f"q0={asym.q0_constant():.15f}")


def _check_kernel_scaling(report: ValidationReport) -> list[Check]:
    out = []
    wave = IncidentWave(1.0)
    for bottom in Bottom:
        big = kernel_remainder_max(wave, CavityGeometry(0.01, 1.0, bottom))
        small = kernel_remainder_max(wave, CavityGeometry(0.005, 1.0, bottom))
        ratio = big / small
        out.append(Check(f"kernel_remainder_scaling_{bottom.value}", 3.0 <= ratio <= 5.0, ratio, "in [3, 5]"))
        report.constants[f"kernel_remainder_C_{bottom.value}"] = small / (0.005**2 * abs(math.log(0.005)))
    return out


def _check_resonances() -> Check:
    geometry = CavityGeometry(0.005, 1.0, Bottom.PMC)
    tol = 10.0 * 0.005**2 * abs(math.log(0.005))
    worst = 0.0
    for n in (1, 2, 3):
        root = asym.resonance_newton(n, geometry).k_complex.real
        peak = bie_peak(geometry, asym.resonance_newton(n, geometry).k_complex.real)
        worst = max(worst, abs(root - peak))
    return Check("resonance_agreement", worst <= tol, worst, f"<= {tol:.4g}", "Newton root of p1 vs full-solver peak")


def _check_approx(report: ValidationReport) -> Check:
    c1 = approx_gradient_gap(0.005)
    c2 = approx_gradient_gap(0.0025)
    report.constants["approx_gradient_C"] = c1
    ratio = max(c1, c2) / min(c1, c2)
    return Check("approx_vs_bie_gradient", ratio <= 2.0, ratio, "<= 2")


def _check_parseval() -> Check:
    geometry = CavityGeometry(0.005, 1.0, Bottom.PMC)
    wave = IncidentWave(1.0, THETA)
    modes = mode_coefficients(assemble_and_solve(wave, geometry), wave, geometry)
    p = cavity_norms(modes, wave, geometry)
    q = quadrature_norms(modes, wave, geometry)
    err = max(abs(p[0] - q[0]) / p[0], abs(p[1] - q[1]) / p[1])
    return Check("parseval_vs_quadrature", err <= 1e-6, err, "<= 1e-6")


def _check_self_convergence() -> Check:
    worst = 0.0
    for bottom, kappa in ((Bottom.PMC, 0.05), (Bottom.PMC, 3.1132), (Bottom.PEC, 0.1), (Bottom.PEC, 1.5549)):
        geometry = CavityGeometry(0.005, 1.0, bottom)
        wave = IncidentWave(kappa, THETA)
        a = solve_enhancement(wave, geometry, 64)
        b = solve_enhancement(wave, geometry, 128)
        worst = max(worst, abs(a.Q_E - b.Q_E) / b.Q_E, abs(a.Q_H - b.Q_H) / b.Q_H)
    return Check("solve_self_convergence", worst <= 1e-6, worst, "<= 1e-6")


def _check_p_vs_p1(report: ValidationReport) -> Check:
    fitted = {}
    for eps in (0.01, 0.005):
        geometry = CavityGeometry(eps, 1.0, Bottom.PMC)
        worst = 0.0
        for k in np.linspace(1.0, 3.0, 9):
            gap = abs(asym.p_function(float(k), geometry) - asym.p1_function(float(k), geometry))
            scale = (abs(math.tan(k)) / k + eps * abs(math.log(eps))) * eps * eps * abs(math.log(eps))
            worst = max(worst, gap / scale)
        fitted[eps] = worst
    report.constants["p_vs_p1_C"] = fitted[0.01]
    return Check("p_vs_p1", fitted[0.005] <= 1.5 * fitted[0.01], fitted[0.005], f"<= {1.5 * fitted[0.01]:.4g}")


def run_validation(level: ValidationLevel | str = ValidationLevel.QUICK) -> ValidationReport:
    level = ValidationLevel(level)
    report = ValidationReport(level)
    report.checks.append(_check_wronskian())
    report.checks.append(_check_q0())
    report.checks.extend(_check_kernel_scaling(report))
    report.checks.append(_check_resonances())
    report.checks.append(_check_approx(report))
    report.checks.append(_check_parseval())
    if level is ValidationLevel.FULL:
        report.checks.append(_check_self_convergence())
        report.checks.append(_check_p_vs_p1(report))
    return report
