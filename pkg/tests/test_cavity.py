import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slitcavity.cavity import (
    Bottom,
    CavityGeometry,
    DtnVariant,
    IncidentWave,
    ModeCoefficients,
    PoleError,
    aperture_forcing,
    basis_value,
    beta,
    dtn_apply,
    dtn_symbol,
    incident_mode_overlap,
)

G = CavityGeometry(0.005, 1.0, Bottom.PMC)


def test_geometry_validation():
    with pytest.raises(ValueError):
        CavityGeometry(0.0, 1.0)
    with pytest.raises(ValueError):
        CavityGeometry(0.1, -1.0)
    with pytest.raises(ValueError):
        CavityGeometry(0.1, 1.0, "dirichlet")
    assert CavityGeometry(0.1, 1.0, "PEC").bottom is Bottom.PEC


def test_subwavelength_check():
    with pytest.raises(ValueError):
        CavityGeometry(1.0, 1.0).check_subwavelength(IncidentWave(4.0))


def test_wave_validation_and_wavelength():
    with pytest.raises(ValueError):
        IncidentWave(-1.0)
    with pytest.raises(ValueError):
        IncidentWave(1.0, math.pi / 2)
    assert IncidentWave(2.0).wavelength == math.pi


def test_mode_coefficient_lengths():
    with pytest.raises(ValueError):
        ModeCoefficients((1.0,), (1.0, 2.0), 0)


def test_beta_values():
    assert beta(0, IncidentWave(2.5), G) == 2.5
    with mp.workdps(30):
        ref = float(mp.sqrt((mp.pi / mp.mpf("0.005")) ** 2 - mp.pi**2))
    b = beta(1, IncidentWave(math.pi), G)
    assert b.real == 0 and abs(b.imag - ref) < 1e-10
    assert abs(beta(1, IncidentWave(1e-9), G).imag - math.pi / 0.005) < 1e-8
    with pytest.raises(ValueError):
        beta(1, IncidentWave(700.0), G)


def test_basis_examples():
    assert basis_value(0, 0.1, CavityGeometry(0.25, 1.0)) == 2.0
    assert abs(basis_value(1, 0.0025, G)) < 1e-13
    assert abs(basis_value(2, 0.0, G) - 20.0) < 1e-12
    with pytest.raises(ValueError):
        basis_value(1, 0.006, G)


@pytest.mark.parametrize("m", range(0, 6))
@pytest.mark.parametrize("n", range(0, 6))
def test_basis_orthonormality(m, n):
    # closed form: int_0^eps cos(m pi x/eps) cos(n pi x/eps) dx
    eps = G.epsilon
    cm = 1 / math.sqrt(eps) if m == 0 else math.sqrt(2 / eps)
    cn = 1 / math.sqrt(eps) if n == 0 else math.sqrt(2 / eps)
    if m == n:
        integral = eps if m == 0 else eps / 2
    else:
        integral = 0.0
    assert abs(cm * cn * integral - (1.0 if m == n else 0.0)) < 1e-12
    # and the implemented basis sampled on Gauss nodes agrees
    y, w = np.polynomial.legendre.leggauss(32)
    x = 0.5 * eps * (1 + y)
    vals = sum(0.5 * eps * wi * basis_value(m, xi, G) * basis_value(n, xi, G) for xi, wi in zip(x, w))
    assert abs(vals - (1.0 if m == n else 0.0)) < 1e-12


def test_forcing_examples():
    w0 = IncidentWave(3.0, 0.0)
    assert np.all(aperture_forcing(np.linspace(0, 1, 5), w0, G) == 2.0)
    assert aperture_forcing(0.0, IncidentWave(3.0, 1.0), G) == 2.0
    val = aperture_forcing(1.0, IncidentWave(math.pi, math.pi / 3), G)
    assert abs(val - 2 * cmath.exp(1j * math.pi * math.sin(math.pi / 3) * 0.005)) < 1e-15
    with pytest.raises(ValueError):
        aperture_forcing(1.5, w0, G)


@given(st.floats(0.0, 1.0), st.floats(0.01, 600.0), st.floats(-1.5, 1.5))
@settings(max_examples=80, deadline=None)
def test_forcing_modulus_is_two(X, kappa, theta):
    assert abs(abs(aperture_forcing(X, IncidentWave(kappa, theta), G)) - 2.0) < 1e-14


def test_overlap_examples():
    assert abs(incident_mode_overlap(IncidentWave(1.0, 0.0), CavityGeometry(0.01, 1.0)) - 0.1) < 1e-15
    r = abs(incident_mode_overlap(IncidentWave(math.pi, math.pi / 3), G))
    assert math.sqrt(0.005) * 0.995 <= r <= math.sqrt(0.005) * 1.005


@given(st.floats(0.01, 600.0), st.floats(-1.5, 1.5), st.floats(1e-4, 5e-3))
@settings(max_examples=80, deadline=None)
def test_overlap_closed_form_identity(kappa, theta, eps):
    g = CavityGeometry(eps, 1.0)
    a = kappa * math.sin(theta) * eps
    ref = math.sqrt(eps) * cmath.exp(0.5j * a) * (math.sin(a / 2) / (a / 2) if a else 1.0)
    assert abs(incident_mode_overlap(IncidentWave(kappa, theta), g) - ref) < 1e-14


def test_overlap_against_quadrature():
    g = CavityGeometry(0.05, 1.0)
    w = IncidentWave(20.0, 0.7)
    ref = mp.quad(lambda x: mp.exp(1j * 20.0 * mp.sin(0.7) * x) / mp.sqrt(0.05), [0, 0.05])
    assert abs(incident_mode_overlap(w, g) - complex(ref)) < 1e-14


def test_dtn_examples():
    w = IncidentWave(1.0)
    pmc = CavityGeometry(0.005, 0.1, Bottom.PMC)
    pec = CavityGeometry(0.005, 0.1, Bottom.PEC)
    assert abs(dtn_apply([1, 0, 0], w, pmc)[0] - math.cos(0.1) / math.sin(0.1)) < 1e-13
    assert abs(dtn_apply([1, 0, 0], w, pec)[0] + math.tan(0.1)) < 1e-15
    for geo in (pmc, pec):
        for variant in DtnVariant:
            assert dtn_apply([0, 0, 0, 0], w, geo, variant) == [0j] * 4


def test_dtn_symbol_matches_exponential_form():
    w = IncidentWave(1.3)
    for bottom, sign in ((Bottom.PMC, 1), (Bottom.PEC, -1)):
        geo = CavityGeometry(0.005, 0.7, bottom)
        e = cmath.exp(2j * 1.3 * 0.7)
        ref = 1j * 1.3 * (e + sign) / (e - sign) if bottom is Bottom.PMC else 1j * 1.3 * (e - 1) / (e + 1)
        assert abs(dtn_symbol(0, w, geo) - ref) < 1e-13


def test_dtn_pole():
    with pytest.raises(PoleError):
        dtn_symbol(0, IncidentWave(math.pi), CavityGeometry(0.005, 1.0, Bottom.PMC))
    with pytest.raises(PoleError):
        dtn_symbol(0, IncidentWave(math.pi / 2), CavityGeometry(0.005, 1.0, Bottom.PEC))


@given(st.floats(0.01, 1.5), st.integers(1, 200))
@settings(max_examples=80, deadline=None)
def test_pmc_symbol_positive(kd, n):
    geo = CavityGeometry(0.005, 1.0, Bottom.PMC)
    val = dtn_symbol(n, IncidentWave(kd), geo)
    assert val.imag == 0 and val.real > 0


@given(st.floats(0.01, 50.0), st.integers(1, 200))
@settings(max_examples=80, deadline=None)
def test_pec_symbol_bounded(kappa, n):
    geo = CavityGeometry(0.005, 1.0, Bottom.PEC)
    val = abs(dtn_symbol(n, IncidentWave(kappa), geo))
    t = n * math.pi / 0.005
    assert val <= max(kappa * abs(math.tan(kappa)), t)
    assert val / math.sqrt(1 + t * t) <= 1.0


def test_single_mode_variant_agrees_on_fundamental():
    w = IncidentWave(2.0)
    for bottom in Bottom:
        geo = CavityGeometry(0.005, 1.0, bottom)
        full = dtn_apply([0.3 + 0.1j, 0, 0], w, geo, DtnVariant.FULL)
        single = dtn_apply([0.3 + 0.1j, 0, 0], w, geo, DtnVariant.SINGLE_MODE)
        assert full == single
