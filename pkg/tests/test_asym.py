import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import richardson_q0
from slitcavity.asym import (
    ConvergenceError,
    ResonanceMethod,
    kernel_decomposition,
    kernel_remainder,
    lambda_full,
    leading_resonance,
    p1_derivative,
    p1_function,
    p_function,
    perturbed_q0,
    q0_at_grid,
    q0_constant,
    resonance_asymptotic,
    resonance_newton,
    singular_kernel_k,
)
from slitcavity.cavity import Bottom, CavityGeometry, IncidentWave, PoleError
from slitcavity.specfun import CONSTANTS

PMC = CavityGeometry(0.005, 1.0, Bottom.PMC)
PEC = CavityGeometry(0.005, 1.0, Bottom.PEC)


def rho(k):
    return (2 * math.log(2) + np.log(k) + CONSTANTS.gamma1) / math.pi


def test_singular_kernel_example():
    ref = (math.log(0.5) + math.log(math.sqrt(2) / 2)) / math.pi
    assert abs(singular_kernel_k(0.25, 0.75) - ref) < 1e-15
    assert abs(singular_kernel_k(0.25, 0.75) + 0.330953400228977) < 1e-14


@given(st.floats(0.001, 0.999), st.floats(0.001, 0.999))
@settings(max_examples=100, deadline=None)
def test_singular_kernel_symmetric(X, Y):
    if X != Y:
        assert singular_kernel_k(X, Y) == singular_kernel_k(Y, X)


def test_singular_kernel_merge_is_bounded():
    X = 0.3
    diffs = []
    for j in range(4, 40):
        Y = X + 2.0**-j
        lead = 2 / math.pi * math.log(abs(X - Y)) + math.log(abs(math.sin(math.pi * (X + Y) / 2))) / math.pi
        diffs.append(singular_kernel_k(X, Y) - lead)
    assert max(abs(v) for v in diffs) < 1.0
    assert abs(diffs[-1] - math.log(math.pi / 2) / math.pi) < 1e-9


def test_singular_kernel_rejections():
    for X, Y in ((0.4, 0.4), (0.0, 0.0), (1.0, 1.0)):
        with pytest.raises(ValueError):
            singular_kernel_k(X, Y)


def test_decomposition_invariants():
    w = IncidentWave(1.3)
    d = kernel_decomposition(w, PMC)
    assert d.gamma1 == pytest.approx((math.log(1.3) + CONSTANTS.gamma1) / math.pi + math.log(0.005) / math.pi)
    assert d.gamma2 == pytest.approx(-math.tan(1.3) / (0.005 * 1.3) + 2 * math.log(2) / math.pi)
    e = kernel_decomposition(w, PEC)
    assert e.gamma2 == pytest.approx(1 / math.tan(1.3) / (0.005 * 1.3) + 2 * math.log(2) / math.pi)
    assert d.gamma == d.gamma1 + d.gamma2


def test_kernel_remainder_small():
    w = IncidentWave(1.0)
    vals = [abs(kernel_remainder(x, y, w, PMC)) for x in (0.1, 0.45, 0.9) for y in (0.2, 0.55) if x != y]
    assert max(vals) <= 0.005**2 * abs(math.log(0.005)) * 5


def test_q0_against_independent_chebyshev_scheme():
    assert abs(q0_constant() - richardson_q0(256)) < 1e-11


def test_q0_nonzero_and_cauchy():
    assert q0_constant() != 0
    for n in (64, 128):
        assert abs(q0_at_grid(2 * n) - q0_at_grid(n)) <= 1e-10


def test_q0_cache_is_bitwise_stable():
    first = q0_constant()
    for g in (PMC, PEC, CavityGeometry(0.01, 2.0)):
        p1_function(1.0, g)
        assert q0_constant() == first
    out = []
    threads = [threading.Thread(target=lambda: out.append(q0_constant())) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert set(out) == {first}


def test_perturbed_q0_restores():
    base = q0_constant()
    with perturbed_q0(1.1):
        assert q0_constant() == pytest.approx(1.1 * base)
    assert q0_constant() == base


@pytest.mark.parametrize("n", [1, 2, 3])
def test_p1_at_trig_zero(n):
    k = n * math.pi
    ref = 0.005 + (0.005 * rho(k) + 0.005 * math.log(0.005) / math.pi) * q0_constant()
    assert abs(p1_function(k, PMC) - ref) < 1e-14
    k = (n + 0.5) * math.pi
    ref = 0.005 + (0.005 * rho(k) + 0.005 * math.log(0.005) / math.pi) * q0_constant()
    assert abs(p1_function(k, PEC) - ref) < 1e-13


@pytest.mark.parametrize("geo,n", [(PMC, 1), (PEC, 0)])
def test_p1_at_real_resonance(geo, n):
    eps = geo.epsilon
    r = resonance_newton(n, geo).k_complex.real
    assert abs(p1_function(r, geo) + 0.5j * q0_constant() * eps) <= 0.05 * (eps * math.log(eps)) ** 2


def test_p1_domain_errors():
    with pytest.raises(PoleError):
        p1_function(math.pi / 2 + 1e-10, PMC)
    with pytest.raises(PoleError):
        p1_function(math.pi, PEC)
    with pytest.raises(ValueError):
        p1_function(-1.0, PMC)
    with pytest.raises(ValueError):
        p1_function(1e-9, PMC)


@given(st.floats(0.2, 9.0), st.floats(-0.05, 0.05))
@settings(max_examples=60, deadline=None)
def test_p1_derivative_matches_difference(re, im):
    k = complex(re, im)
    for geo in (PMC, PEC):
        try:
            h = 1e-6
            fd = (p1_function(k + h, geo) - p1_function(k - h, geo)) / (2 * h)
            ex = p1_derivative(k, geo)
        except PoleError:
            continue
        if abs(ex) < 1e3:
            assert abs(fd - ex) <= 1e-6 * max(1.0, abs(ex))


def test_lambda_grid_doubling():
    for k in (1.0, 2.0, 2.9):
        assert abs(lambda_full(k, PMC, 64) - lambda_full(k, PMC, 128)) <= 1e-8


def test_lambda_rejects_small_grid():
    with pytest.raises(ValueError):
        lambda_full(1.0, PMC, 8)


def test_lambda_matches_p1_with_stable_constant():
    ks = np.linspace(1.0, 3.0, 21)
    consts = []
    for eps in (0.01, 0.005):
        g = CavityGeometry(eps, 1.0, Bottom.PMC)
        err = max(abs(eps * lambda_full(k, g) - p1_function(k, g)) for k in ks)
        consts.append(err / (eps * eps * abs(math.log(eps))))
    assert consts[1] <= 1.5 * consts[0]
    assert p_function(2.0, PMC) == 0.005 * lambda_full(2.0, PMC)


def test_lambda_continuity_between_poles():
    jumps = []
    for n in (50, 100, 200):
        ks = np.linspace(1.7, 4.6, n)
        lam = np.array([lambda_full(k, PMC, 32) for k in ks])
        jumps.append(np.max(np.abs(np.diff(lam))))
    assert jumps[2] < jumps[1] < jumps[0]


def test_leading_resonance_domains():
    assert leading_resonance(2, PMC) == 2 * math.pi
    assert leading_resonance(0, PEC) == math.pi / 2
    with pytest.raises(ValueError):
        leading_resonance(0, PMC)
    with pytest.raises(ValueError):
        leading_resonance(-1, PEC)


def test_asymptotic_resonance_imaginary_part():
    r = resonance_asymptotic(1, PMC)
    assert r.method is ResonanceMethod.ASYMPTOTIC
    assert abs(r.k_complex.imag + math.pi * 0.005 / 2) < 1e-15


def test_asymptotic_limit():
    gaps = [abs(resonance_asymptotic(1, CavityGeometry(e, 1.0)).k_complex - math.pi) for e in (1e-3, 1e-5, 1e-7)]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-5


def test_asymptotic_regression_value_pec():
    eps = 0.005
    k0 = math.pi / 2
    bracket = eps * math.log(eps) / math.pi + (
        1 / q0_constant() + (2 * math.log(2) + math.log(k0) + CONSTANTS.gamma1) / math.pi
    ) * eps
    assert resonance_asymptotic(0, PEC).k_complex == pytest.approx(k0 + k0 * bracket, abs=1e-15)
    assert resonance_asymptotic(0, PEC).k_complex.real == pytest.approx(1.5549, abs=1e-3)


def test_asymptotic_guard():
    with pytest.raises(ValueError):
        resonance_asymptotic(1, CavityGeometry(0.9, 1.0))


@pytest.mark.parametrize("geo,ns", [(PMC, [1, 2, 3]), (PEC, [0, 1, 2])])
def test_newton_against_asymptotic(geo, ns):
    eps = geo.epsilon
    for n in ns:
        r = resonance_newton(n, geo)
        assert r.method is ResonanceMethod.NEWTON
        assert r.residual <= 1e-13 and abs(p1_function(r.k_complex, geo)) == r.residual
        assert r.k_complex.imag < 0
        assert abs(r.k_complex - resonance_asymptotic(n, geo).k_complex) <= 10 * eps * eps * abs(math.log(eps))


def test_newton_width():
    k = resonance_newton(1, PMC).k_complex
    target = math.pi * 0.005 / 2
    assert abs(k.imag + target) <= 0.2 * target


def test_newton_tolerance_guard():
    with pytest.raises(ValueError):
        resonance_newton(1, PMC, tolerance=1e-15)
    with pytest.raises(ConvergenceError):
        resonance_newton(1, PMC, max_iter=1)


def test_resonance_ordering_and_shift_scaling():
    roots = [resonance_newton(n, PMC).k_complex.real for n in (1, 2, 3)]
    assert roots[0] < roots[1] < roots[2]
    # the first-order shift scales with k_n0, so the gap to n pi grows with n
    shifts = [n * math.pi - r for n, r in zip((1, 2, 3), roots)]
    assert 0 < shifts[0] < shifts[1] < shifts[2]


@pytest.mark.xfail(strict=True, reason="first-order shift exceeds 0.05 at n = 3 (0.069); see decision notes")
def test_resonances_within_fixed_window():
    for n in (1, 2, 3):
        assert abs(resonance_newton(n, PMC).k_complex.real - n * math.pi) < 0.05
