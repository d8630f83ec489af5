"""Scattering by a narrow slit cavity in a ground plane: enhancement factors and resonances."""

from .approx import SingleModeSolution, approx_enhancement, approx_field, c0_constant, single_mode_solve
from .asym import (
    KernelDecomposition,
    ResonanceResult,
    lambda_full,
    p1_function,
    q0_constant,
    resonance_asymptotic,
    resonance_newton,
    singular_kernel_k,
)
from .bie import (
    ApertureDensity,
    EnhancementRecord,
    aperture_scattered,
    assemble_and_solve,
    density_moment,
    enhancement_factors,
    far_field_scattered,
    field_in_cavity,
    mode_coefficients,
    solve_enhancement,
)
from .cavity import Bottom, CavityGeometry, IncidentWave, ModeCoefficients
from .estimator import EnhancementSpectrum

__all__ = [
    "ApertureDensity",
    "Bottom",
    "CavityGeometry",
    "EnhancementRecord",
    "EnhancementSpectrum",
    "IncidentWave",
    "KernelDecomposition",
    "ModeCoefficients",
    "ResonanceResult",
    "SingleModeSolution",
    "aperture_scattered",
    "approx_enhancement",
    "approx_field",
    "assemble_and_solve",
    "c0_constant",
    "density_moment",
    "enhancement_factors",
    "far_field_scattered",
    "field_in_cavity",
    "lambda_full",
    "mode_coefficients",
    "p1_function",
    "q0_constant",
    "resonance_asymptotic",
    "resonance_newton",
    "single_mode_solve",
    "singular_kernel_k",
    "solve_enhancement",
]
