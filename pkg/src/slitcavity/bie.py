"""Aperture boundary integral solver, cavity modes, fields and enhancement factors.

The unknown is the rescaled aperture density ``phi(X) = -du/dx2 (eps X, 0)``.
It is stored through the graded density ``psi(eta) = phi(s(eta)) s'(eta)``,
which is analytic on ``[0, 1]`` even though ``phi`` blows up like ``X^(-1/3)``
at both edges.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.linalg
from numpy.polynomial.legendre import leggauss, legval

from .cavity import (
    Bottom,
    CavityGeometry,
    IncidentWave,
    ModeCoefficients,
    PoleError,
    POLE_GUARD,
    aperture_forcing,
)
from .discretize import (
    ApertureGrid,
    PairGeometry,
    aperture_grid,
    sin_log_remainder,
    smoothstep,
    smoothstep_inverse,
    smoothstep_prime,
    xlogx2,
)
from .green import correction_coefficients, gamma1, gamma2, halfspace_green
from .specfun import j0_small, y0_regular

DEFAULT_GRID: int = 64
MAX_GRID: int = 256
DEFAULT_MODES: int = 32
TAIL_TOL: float = 1e-8
RESIDUAL_TOL: float = 1e-10
CONDITION_LIMIT: float = 1e13


class SolverError(RuntimeError):
    """The discrete system is singular or the computed density is unresolved."""


class UnresolvedDensity(SolverError):
    pass


# ------------------------------------------------------------------ operator

@dataclass(frozen=True)
class DiscreteOperator:
    """Nyström matrix of the aperture operator with its constant part split off.

    ``full = matrix + gamma * outer(1, grid.w)`` discretises ``T^e + T^i``.
    """

    matrix: np.ndarray
    gamma: complex
    grid: ApertureGrid

    @property
    def full(self) -> np.ndarray:
        return self.matrix + self.gamma * np.outer(np.ones(self.grid.n), self.grid.w)


def _smooth_static(grid: ApertureGrid) -> tuple[PairGeometry, np.ndarray]:
    pair = PairGeometry.build(grid.X, grid.Xc, grid.X, grid.Xc)
    return pair, sin_log_remainder(pair) / math.pi


def singular_operator(n: int) -> np.ndarray:
    """Nyström matrix of the parameter-free kernel ``k`` alone."""
    grid = aperture_grid(n)
    W = grid.weights
    _, smooth = _smooth_static(grid)
    return (2.0 * W.diff + W.total + W.total_c) / math.pi + smooth * grid.w


def assemble_operator(wave: IncidentWave, geometry: CavityGeometry, grid_size: int = DEFAULT_GRID) -> DiscreteOperator:
    geometry.check_subwavelength(wave)
    grid = aperture_grid(grid_size)
    W = grid.weights
    eps, k = geometry.epsilon, wave.kappa
    pair, smooth = _smooth_static(grid)
    u, v, vc = pair.u, pair.v, pair.vc
    c2 = (eps * k) ** 2 / (4.0 * math.pi)

    z = eps * k * np.abs(u)
    j0 = j0_small(z)
    g1 = gamma1(k, eps)
    g2 = gamma2(k, geometry)

    b = correction_coefficients(wave, geometry)
    m = np.arange(1, b.size + 1)
    cosX = np.cos(math.pi * np.outer(grid.X, m))
    corr = (cosX * b) @ cosX.T
    corr_sing = -c2 * (xlogx2(u) + xlogx2(v) + xlogx2(vc))

    remainder = smooth + g1 * (j0 - 1.0) + 0.5 * y0_regular(z) + (corr - corr_sing)
    matrix = (
        W.diff * ((j0 + 1.0) / math.pi - c2 * u * u)
        + W.total * (1.0 / math.pi - c2 * v * v)
        + W.total_c * (1.0 / math.pi - c2 * vc * vc)
        + remainder * grid.w
    )
    return DiscreteOperator(matrix=matrix, gamma=complex(g1 + g2), grid=grid)


@dataclass(frozen=True)
class RankOneSolve:
    """Solution of ``(L + gamma 1 w^T) x = rhs`` through ``L^{-1}``."""

    x: np.ndarray
    q: complex
    lam: complex
    rcond: float


def _rank_one_solve(op: DiscreteOperator, mean: complex, deviation: np.ndarray) -> RankOneSolve:
    """``deviation`` must have zero weighted mean; ``rhs = mean + deviation``."""
    L = op.matrix
    lu, piv = scipy.linalg.lu_factor(L, check_finite=True)
    anorm = np.linalg.norm(L, 1)
    gecon = scipy.linalg.get_lapack_funcs("gecon", (lu,))
    rcond, _ = gecon(lu, anorm, norm="1")
    if rcond * CONDITION_LIMIT < 1.0:
        raise SolverError(
            f"aperture operator is numerically singular: condition estimate {1.0 / max(rcond, 1e-300):.3e}"
        )
    w = op.grid.w
    sols = scipy.linalg.lu_solve((lu, piv), np.column_stack([np.ones(op.grid.n), deviation]))
    y1, yr = sols[:, 0], sols[:, 1]
    q = complex(w @ y1)
    lam = 1.0 + op.gamma * q
    if lam == 0.0 or q == 0.0:
        raise SolverError("aperture operator is singular (rank-one denominator vanished)")
    mr = complex(w @ yr)
    # a huge gamma only ever multiplies the mean part
    x = (yr - y1 * (mr / q)) + y1 * ((mean * q + mr) / (q * lam))
    return RankOneSolve(x=x, q=q, lam=complex(lam), rcond=float(rcond))


# ------------------------------------------------------------------ density

@dataclass(frozen=True)
class ApertureDensity:
    """Solution of the aperture equation.

    ``coefficients`` are Legendre coefficients of the graded density ``psi`` in
    ``2 eta - 1``; ``values`` are ``psi`` at the Gauss nodes of ``grid_size``.
    """

    coefficients: np.ndarray
    values: np.ndarray
    grid_size: int
    wave: IncidentWave
    geometry: CavityGeometry
    aperture_moment: complex
    lam: complex = field(default=complex("nan"))

    @property
    def kappa(self) -> float:
        return self.wave.kappa

    @property
    def tail_ratio(self) -> float:
        c = np.abs(self.coefficients)
        top = c.max()
        if top == 0.0:
            return 0.0
        return float(c[-max(1, c.size // 10):].max() / top)

    def graded(self, eta: np.ndarray) -> np.ndarray:
        return legval(2.0 * np.asarray(eta, dtype=float) - 1.0, self.coefficients)

    def __call__(self, X: float | np.ndarray) -> complex | np.ndarray:
        """``phi(X)`` for interior ``X``."""
        arr = np.asarray(X, dtype=float)
        if np.any((arr <= 0.0) | (arr >= 1.0)):
            raise ValueError("phi is evaluated only at interior aperture points")
        eta = smoothstep_inverse(arr)
        val = self.graded(eta) / smoothstep_prime(eta)
        return complex(val) if np.ndim(X) == 0 else val


def _density_from_values(values, grid, wave, geometry, lam) -> ApertureDensity:
    return ApertureDensity(
        coefficients=grid.legendre_coefficients(values),
        values=values,
        grid_size=grid.n,
        wave=wave,
        geometry=geometry,
        aperture_moment=complex(grid.w @ values),
        lam=lam,
    )


def _split_forcing(grid: ApertureGrid, wave: IncidentWave, geometry: CavityGeometry) -> tuple[complex, np.ndarray]:
    """``f / eps`` at the nodes as its weighted mean plus a zero-mean deviation, without cancellation."""
    a = wave.kappa * math.sin(wave.theta) * geometry.epsilon * grid.X
    em1 = -2.0 * np.sin(0.5 * a) ** 2 + 1j * np.sin(a)
    avg = complex(grid.w @ em1)
    scale = 2.0 / geometry.epsilon
    return scale * (1.0 + avg), scale * (em1 - avg)


def assemble_and_solve(
    wave: IncidentWave,
    geometry: CavityGeometry,
    grid_size: int = DEFAULT_GRID,
    *,
    amplitude: complex = 1.0,
    auto_refine: bool = True,
) -> ApertureDensity:
    """Solve ``(T^e + T^i) phi = f / eps``.

    When the Legendre tail of the graded density fails the resolution check the grid
    is doubled, up to ``MAX_GRID``, unless ``auto_refine`` is off.
    """
    if grid_size < 16:
        raise ValueError("grid_size must be at least 16")
    n = grid_size
    while True:
        op = assemble_operator(wave, geometry, n)
        mean, dev = _split_forcing(op.grid, wave, geometry)
        mean, dev = amplitude * mean, amplitude * dev
        rhs = mean + dev
        sol = _rank_one_solve(op, mean, dev)
        A = op.full
        scale = np.linalg.norm(np.abs(A) @ np.abs(sol.x)) + np.linalg.norm(rhs)
        if scale > 0.0:
            resid = np.linalg.norm(A @ sol.x - rhs) / scale
            if resid > RESIDUAL_TOL:
                raise SolverError(f"collocation residual {resid:.3e} exceeds {RESIDUAL_TOL:.0e}")
        density = _density_from_values(sol.x, op.grid, wave, geometry, sol.lam)
        if density.tail_ratio <= TAIL_TOL:
            return density
        if not auto_refine or 2 * n > MAX_GRID:
            raise UnresolvedDensity(
                f"density unresolved at grid {n}: tail ratio {density.tail_ratio:.2e}; use a larger grid"
            )
        n *= 2


def density_moments(density: ApertureDensity, m_max: int) -> np.ndarray:
    """``int_0^1 phi(X) cos(m pi X) dX`` for ``m = 0 .. m_max``."""
    if m_max < 0:
        raise ValueError("m_max must be nonnegative")
    if m_max > max(density.grid_size // 2, DEFAULT_MODES):
        raise ValueError(f"moment order {m_max} exceeds the resolution of grid {density.grid_size}")
    nodes = density.grid_size + 4 * m_max + 32
    y, wy = leggauss(nodes)
    eta = 0.5 * (1.0 + y)
    psi = density.graded(eta) * (0.5 * wy)
    X = smoothstep(eta)
    m = np.arange(m_max + 1)
    out = np.cos(math.pi * np.outer(m, X)) @ psi
    out[0] = density.aperture_moment
    return out


def density_moment(density: ApertureDensity, m: int) -> complex:
    return complex(density_moments(density, m)[m])


# ------------------------------------------------------------------ modes

def _mode_rates(n_modes: int, wave: IncidentWave, geometry: CavityGeometry) -> np.ndarray:
    t = np.arange(1, n_modes + 1) * math.pi / geometry.epsilon
    k = wave.kappa
    if n_modes and t[0] <= k:
        raise ValueError("higher cavity modes propagate; outside the model")
    return np.sqrt((t - k) * (t + k))


def mode_coefficients(
    density: ApertureDensity,
    wave: IncidentWave,
    geometry: CavityGeometry,
    n_modes: int = DEFAULT_MODES,
) -> ModeCoefficients:
    """Waveguide amplitudes of ``u = sum_n phi_n(x1) (a_n^+ e^{-i b_n x2} + a_n^- e^{i b_n (x2 + d)})``."""
    eps, k, d = geometry.epsilon, wave.kappa, geometry.d
    mom = density_moments(density, n_modes)
    # projection of du/dx2(., 0) on each normalised mode
    proj = -math.sqrt(eps) * mom.astype(complex)
    proj[1:] *= math.sqrt(2.0)
    e0 = cmath.exp(1j * k * d)
    plus = np.empty(n_modes + 1, dtype=complex)
    minus = np.empty(n_modes + 1, dtype=complex)
    s = _mode_rates(n_modes, wave, geometry)
    e = np.exp(-s * d)
    if geometry.bottom is Bottom.PMC:
        if abs(math.cos(k * d)) < POLE_GUARD:
            raise PoleError(f"mode inversion pole: cos(kappa d) = {math.cos(k * d):.3e}")
        plus[0] = proj[0] / (-1j * k * (1.0 + e0 * e0))
        minus[0] = -plus[0] * e0
        plus[1:] = proj[1:] / (s * (1.0 + e * e))
        minus[1:] = -plus[1:] * e
    else:
        if abs(math.sin(k * d)) < POLE_GUARD:
            raise PoleError(f"mode inversion pole: sin(kappa d) = {math.sin(k * d):.3e}")
        plus[0] = proj[0] / (1j * k * (e0 * e0 - 1.0))
        minus[0] = plus[0] * e0
        plus[1:] = proj[1:] / (s * (1.0 - e * e))
        minus[1:] = plus[1:] * e
    return ModeCoefficients(tuple(complex(a) for a in plus), tuple(complex(a) for a in minus), n_modes)


def _profiles(modes: ModeCoefficients, wave: IncidentWave, geometry: CavityGeometry, x2: np.ndarray):
    """Depth profiles ``U_n(x2)`` and their derivatives, shape ``(n_modes + 1, len(x2))``."""
    k, d = wave.kappa, geometry.d
    a = np.asarray(modes.alpha_plus)[:, None]
    b = np.asarray(modes.alpha_minus)[:, None]
    x2 = np.asarray(x2, dtype=float)[None, :]
    rate = np.concatenate([[0.0], _mode_rates(modes.truncation, wave, geometry)])[:, None]
    up = np.exp(rate * x2).astype(complex)
    down = np.exp(-rate * (x2 + d)).astype(complex)
    up[0] = np.exp(-1j * k * x2[0])
    down[0] = np.exp(1j * k * (x2[0] + d))
    U = a * up + b * down
    dU = rate * (a * up - b * down)
    dU[0] = 1j * k * (-a[0] * up[0] + b[0] * down[0])
    return U, dU


def _basis(n_modes: int, x1: np.ndarray, eps: float) -> np.ndarray:
    n = np.arange(n_modes + 1)[:, None]
    out = math.sqrt(2.0 / eps) * np.cos(n * math.pi * np.asarray(x1, dtype=float)[None, :] / eps)
    out[0] = 1.0 / math.sqrt(eps)
    return out


def field_in_cavity(
    modes: ModeCoefficients,
    x: tuple[float, float],
    wave: IncidentWave,
    geometry: CavityGeometry,
) -> complex:
    x1, x2 = map(float, x)
    if not (0.0 <= x1 <= geometry.epsilon and -geometry.d <= x2 <= 0.0):
        raise ValueError(f"point {x!r} lies outside the cavity")
    U, _ = _profiles(modes, wave, geometry, np.array([x2]))
    return complex(_basis(modes.truncation, np.array([x1]), geometry.epsilon)[:, 0] @ U[:, 0])


def field_gradient_in_cavity(
    modes: ModeCoefficients,
    x: tuple[float, float],
    wave: IncidentWave,
    geometry: CavityGeometry,
) -> tuple[complex, complex]:
    x1, x2 = map(float, x)
    eps = geometry.epsilon
    U, dU = _profiles(modes, wave, geometry, np.array([x2]))
    n = np.arange(modes.truncation + 1)
    phi = _basis(modes.truncation, np.array([x1]), eps)[:, 0]
    dphi = -math.sqrt(2.0 / eps) * (n * math.pi / eps) * np.sin(n * math.pi * x1 / eps)
    return complex(dphi @ U[:, 0]), complex(phi @ dU[:, 0])


# ------------------------------------------------------------------ scattered fields

def far_field_scattered(
    density: ApertureDensity,
    x: tuple[float, float],
    wave: IncidentWave,
    geometry: CavityGeometry,
) -> complex:
    """``u^sc(x) = -eps int_0^1 G(x, (eps Y, 0)) phi(Y) dY`` above the ground plane."""
    x1, x2 = map(float, x)
    reach = 10.0 * max(geometry.epsilon, 1.0 / wave.kappa)
    if math.hypot(x1, x2) < reach or x2 < 0.0:
        raise ValueError(f"observation point must satisfy |x| >= {reach:.4g} in the upper half-plane")
    grid = aperture_grid(density.grid_size)
    g = np.array([halfspace_green((x1, x2), (geometry.epsilon * X, 0.0), wave.kappa) for X in grid.X])
    return complex(-geometry.epsilon * np.sum(grid.w * g * density.values))


def far_field_leading_order(
    density: ApertureDensity,
    x: tuple[float, float],
    wave: IncidentWave,
    geometry: CavityGeometry,
) -> complex:
    """Point-source shortcut ``-eps G(x, 0) <phi, 1>``."""
    return -geometry.epsilon * halfspace_green(x, (0.0, 0.0), wave.kappa) * density.aperture_moment


def aperture_scattered(
    density: ApertureDensity,
    x1: float,
    wave: IncidentWave,
    geometry: CavityGeometry,
) -> complex:
    """Trace of the scattered field on the aperture, ``-eps int G^e(X, Y) phi(Y) dY``."""
    eps, k = geometry.epsilon, wave.kappa
    if not (0.0 < x1 < eps):
        raise ValueError("x1 must lie strictly inside the aperture")
    grid = aperture_grid(density.grid_size)
    X = x1 / eps
    xi = float(smoothstep_inverse(np.array([X]))[0])
    weights = grid.log_weights(np.array([xi])).diff[0]
    Xc = float(smoothstep(np.float64(1.0 - xi)))
    u = PairGeometry.build(np.array([X]), np.array([Xc]), grid.X, grid.Xc).u[0]
    z = eps * k * np.abs(u)
    j0 = j0_small(z)
    row = weights * j0 / math.pi + grid.w * (gamma1(k, eps) * j0 + 0.5 * y0_regular(z))
    return complex(-eps * (row @ density.values))


# ------------------------------------------------------------------ enhancement

@dataclass(frozen=True)
class EnhancementRecord:
    kappa: float
    Q_E: float
    Q_H: float
    modes: ModeCoefficients
    aperture_moment: complex
    solver_grid: int
    bottom: Bottom = Bottom.PMC
    epsilon: float = float("nan")
    d: float = float("nan")

    def moment_from_modes(self) -> complex:
        """``<phi, 1>`` recovered from the fundamental mode amplitudes."""
        k, d, eps = self.kappa, self.d, self.epsilon
        if self.bottom is Bottom.PMC:
            return -self.modes.alpha_minus[0] / math.sqrt(eps) * 2j * k * math.cos(k * d)
        return -self.modes.alpha_plus[0] / math.sqrt(eps) * 1j * k * (cmath.exp(2j * k * d) - 1.0)

    def moment_defect(self) -> float:
        ref = abs(self.aperture_moment)
        return abs(self.moment_from_modes() - self.aperture_moment) / (ref if ref else 1.0)


def _x_minus_sin(x: float) -> float:
    if abs(x) < 0.1:
        x2 = x * x
        return x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    return x - math.sin(x)


def cavity_norms(modes: ModeCoefficients, wave: IncidentWave, geometry: CavityGeometry) -> tuple[float, float]:
    """``(||u||^2, ||grad u||^2)`` over the cavity by modal Parseval."""
    k, d, eps = wave.kappa, geometry.d, geometry.epsilon
    a = np.asarray(modes.alpha_plus)
    b = np.asarray(modes.alpha_minus)
    # the cross term is 2 Re(a b*) sin(kd)/k; regroup so that neither norm cancels as k -> 0
    c = (a[0] * np.conj(b[0])).real
    defect = 2.0 * c * _x_minus_sin(k * d) / k
    u2 = abs(a[0] + b[0]) ** 2 * d - defect
    g2 = k * k * (abs(a[0] - b[0]) ** 2 * d + defect)
    if modes.truncation:
        s = _mode_rates(modes.truncation, wave, geometry)
        t = np.arange(1, modes.truncation + 1) * math.pi / eps
        e = np.exp(-2.0 * s * d)
        edge = (np.abs(a[1:]) ** 2 + np.abs(b[1:]) ** 2) * (-np.expm1(-2.0 * s * d)) / (2.0 * s)
        mix = 2.0 * (a[1:] * np.conj(b[1:])).real * np.sqrt(e) * d
        u2 += float(np.sum(edge + mix))
        g2 += float(np.sum((s * s + t * t) * edge + (t * t - s * s) * mix))
    return float(u2), float(g2)


def enhancement_factors(
    modes: ModeCoefficients,
    wave: IncidentWave,
    geometry: CavityGeometry,
    density: ApertureDensity | None = None,
) -> EnhancementRecord:
    u2, g2 = cavity_norms(modes, wave, geometry)
    vol = math.sqrt(geometry.epsilon * geometry.d)
    record = EnhancementRecord(
        kappa=wave.kappa,
        Q_E=math.sqrt(g2) / (wave.kappa * vol),
        Q_H=math.sqrt(u2) / vol,
        modes=modes,
        aperture_moment=complex("nan"),
        solver_grid=density.grid_size if density is not None else 0,
        bottom=geometry.bottom,
        epsilon=geometry.epsilon,
        d=geometry.d,
    )
    moment = density.aperture_moment if density is not None else record.moment_from_modes()
    return replace(record, aperture_moment=complex(moment))


def solve_enhancement(
    wave: IncidentWave,
    geometry: CavityGeometry,
    grid_size: int = DEFAULT_GRID,
    n_modes: int = DEFAULT_MODES,
) -> EnhancementRecord:
    density = assemble_and_solve(wave, geometry, grid_size)
    modes = mode_coefficients(density, wave, geometry, n_modes)
    return enhancement_factors(modes, wave, geometry, density)
