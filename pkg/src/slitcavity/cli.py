"""Command-line driver: sweeps, resonance tables, field evaluation and validation."""

from __future__ import annotations

import csv
import enum
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import click
import numpy as np
from scipy.optimize import minimize_scalar

from . import asym
from .approx import single_mode_solve
from .bie import (
    DEFAULT_GRID,
    DEFAULT_MODES,
    EnhancementRecord,
    aperture_scattered,
    assemble_and_solve,
    enhancement_factors,
    far_field_scattered,
    field_in_cavity,
    mode_coefficients,
)
from .cavity import Bottom, CavityGeometry, IncidentWave
from .validation import ValidationLevel, ValidationReport, run_validation

SCHEMA_VERSION = 1
POLE_RADIUS = 1e-8
CSV_COLUMNS = ("kappa", "Q_E", "Q_H", "re_moment", "im_moment", "grid_size", "status")


class Solver(str, enum.Enum):
    BIE = "bie"
    SINGLE_MODE = "single-mode"


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


@dataclass(frozen=True)
class SweepConfig:
    epsilon: float = 0.005
    depth: float = 1.0
    theta: float = math.pi / 3
    bottom: Bottom = Bottom.PMC
    kappa_min: float = 0.5
    kappa_max: float = 10.0
    samples: int = 500
    grid_size: int = DEFAULT_GRID
    n_modes: int = DEFAULT_MODES
    solver: Solver = Solver.BIE
    output_path: str | None = None
    output_format: OutputFormat = OutputFormat.CSV

    def __post_init__(self) -> None:
        object.__setattr__(self, "bottom", Bottom.parse(self.bottom))
        object.__setattr__(self, "solver", Solver(self.solver))
        object.__setattr__(self, "output_format", OutputFormat(self.output_format))
        if not self.kappa_min > 0:
            raise ValueError("kappa_min must be positive")
        if not self.kappa_max > self.kappa_min:
            raise ValueError("kappa_max must exceed kappa_min")
        if self.samples < 2:
            raise ValueError("samples must be at least 2")
        CavityGeometry(self.epsilon, self.depth, self.bottom)
        IncidentWave(self.kappa_min, self.theta)

    @property
    def geometry(self) -> CavityGeometry:
        return CavityGeometry(self.epsilon, self.depth, self.bottom)

    def kappas(self) -> np.ndarray:
        return np.linspace(self.kappa_min, self.kappa_max, self.samples)


@dataclass(frozen=True)
class SweepRow:
    kappa: float
    Q_E: float
    Q_H: float
    moment: complex
    grid_size: int
    status: str

    def as_dict(self) -> dict[str, Any]:
        return {
            "kappa": self.kappa,
            "Q_E": self.Q_E,
            "Q_H": self.Q_H,
            "re_moment": self.moment.real,
            "im_moment": self.moment.imag,
            "grid_size": self.grid_size,
            "status": self.status,
        }


@dataclass(frozen=True)
class Peak:
    quantity: str
    kappa: float
    value: float
    nearest_resonance: int
    asymptotic_kappa: float


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list[SweepRow]
    skipped: list[float] = field(default_factory=list)
    peaks: list[Peak] = field(default_factory=list)


def pole_distance(kappa: float, geometry: CavityGeometry) -> float:
    """Distance from ``kappa`` to the nearest trigonometric pole of the cavity symbols."""
    shift = 0.5 if geometry.bottom is Bottom.PMC else 0.0
    step = math.pi / geometry.d
    j = round(kappa / step - shift)
    return min(abs(kappa - (i + shift) * step) for i in (j - 1, j, j + 1))


def solve_record(config: SweepConfig, kappa: float) -> EnhancementRecord:
    wave = IncidentWave(kappa, config.theta)
    geometry = config.geometry
    if config.solver is Solver.SINGLE_MODE:
        sol = single_mode_solve(wave, geometry)
        modes = sol.as_modes()
        return enhancement_factors(modes, wave, geometry)
    density = assemble_and_solve(wave, geometry, config.grid_size)
    modes = mode_coefficients(density, wave, geometry, config.n_modes)
    return enhancement_factors(modes, wave, geometry, density)


def evaluate_sample(config: SweepConfig, kappa: float) -> SweepRow:
    try:
        rec = solve_record(config, kappa)
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        return SweepRow(kappa, math.nan, math.nan, complex(math.nan, math.nan), config.grid_size, f"error: {exc}")
    return SweepRow(kappa, rec.Q_E, rec.Q_H, rec.aperture_moment, rec.solver_grid, "ok")


def _evaluate_packed(args: tuple[SweepConfig, float]) -> SweepRow:
    return evaluate_sample(*args)


def run_sweep(config: SweepConfig, jobs: int = 1, refine_peaks: bool = True) -> SweepResult:
    geometry = config.geometry
    todo: list[float] = []
    skipped: list[float] = []
    for k in config.kappas():
        (skipped if pole_distance(float(k), geometry) < POLE_RADIUS else todo).append(float(k))
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_evaluate_packed, [(config, k) for k in todo], chunksize=8))
    else:
        rows = [evaluate_sample(config, k) for k in todo]
    result = SweepResult(config, rows, skipped)
    if refine_peaks:
        result.peaks = find_peaks(config, rows)
    return result


def _nearest_resonance(kappa: float, geometry: CavityGeometry) -> tuple[int, float]:
    if geometry.bottom is Bottom.PMC:
        n = max(1, round(kappa * geometry.d / math.pi))
    else:
        n = max(0, round(kappa * geometry.d / math.pi - 0.5))
    try:
        k = asym.resonance_asymptotic(n, geometry).k_complex.real
    except ValueError:
        k = asym.leading_resonance(n, geometry)
    return n, k


def refine_peak(config: SweepConfig, quantity: str, bracket: tuple[float, float, float], xtol: float = 1e-6) -> tuple[float, float]:
    """Golden-section refinement of a sampled maximum of ``Q_E`` or ``Q_H``."""

    def objective(k: float) -> float:
        val = getattr(evaluate_sample(config, k), quantity)
        return -val if math.isfinite(val) else math.inf

    res = minimize_scalar(objective, bracket=bracket, method="golden", options={"xtol": xtol / bracket[1]})
    return float(res.x), float(-res.fun)


def find_peaks(config: SweepConfig, rows: Sequence[SweepRow]) -> list[Peak]:
    peaks: list[Peak] = []
    good = [r for r in rows if r.status == "ok"]
    for quantity in ("Q_E", "Q_H"):
        vals = [getattr(r, quantity) for r in good]
        for i in range(1, len(good) - 1):
            if vals[i] > vals[i - 1] and vals[i] >= vals[i + 1]:
                bracket = (good[i - 1].kappa, good[i].kappa, good[i + 1].kappa)
                try:
                    k, v = refine_peak(config, quantity, bracket)
                except ValueError:
                    k, v = good[i].kappa, vals[i]
                n, ka = _nearest_resonance(k, config.geometry)
                peaks.append(Peak(quantity, k, v, n, ka))
    return peaks


# ------------------------------------------------------------------ resonances

@dataclass(frozen=True)
class ResonanceRow:
    n: int
    asymptotic: asym.ResonanceResult
    newton: asym.ResonanceResult
    difference: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.difference <= self.tolerance and self.newton.k_complex.imag < 0

    def as_dict(self) -> dict[str, Any]:
        a, b = self.asymptotic.k_complex, self.newton.k_complex
        return {
            "n": self.n,
            "re_asymptotic": a.real,
            "im_asymptotic": a.imag,
            "re_newton": b.real,
            "im_newton": b.imag,
            "difference": self.difference,
            "residual": self.newton.residual,
            "iterations": self.newton.iterations,
            "status": "PASS" if self.passed else "FAIL",
        }


def run_resonances(geometry: CavityGeometry, n_max: int) -> list[ResonanceRow]:
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    eps = geometry.epsilon
    tol = 10.0 * eps * eps * abs(math.log(eps))
    first = 1 if geometry.bottom is Bottom.PMC else 0
    rows = []
    for n in range(first, n_max + 1):
        a = asym.resonance_asymptotic(n, geometry)
        b = asym.resonance_newton(n, geometry)
        rows.append(ResonanceRow(n, a, b, abs(a.k_complex - b.k_complex), tol))
    return rows


# ------------------------------------------------------------------ field

@dataclass(frozen=True)
class FieldSample:
    x1: float
    x2: float
    value: complex
    region: str
    status: str


def evaluate_field(points: Iterable[tuple[float, float]], kappa: float, config: SweepConfig) -> list[FieldSample]:
    wave = IncidentWave(kappa, config.theta)
    geometry = config.geometry
    density = assemble_and_solve(wave, geometry, config.grid_size)
    modes = mode_coefficients(density, wave, geometry, config.n_modes)
    out = []
    for x1, x2 in points:
        nan = complex(math.nan, math.nan)
        try:
            if x2 < 0.0:
                region = "cavity"
                val = field_in_cavity(modes, (x1, x2), wave, geometry)
            elif x2 == 0.0 and 0.0 < x1 < geometry.epsilon:
                region = "aperture"
                val = complex(wave.total_incident(x1, 0.0)) + aperture_scattered(density, x1, wave, geometry)
            else:
                region = "exterior"
                val = complex(wave.total_incident(x1, x2)) + far_field_scattered(density, (x1, x2), wave, geometry)
            out.append(FieldSample(x1, x2, val, region, "ok"))
        except (ValueError, ArithmeticError) as exc:
            out.append(FieldSample(x1, x2, nan, region, f"error: {exc}"))
    return out


def read_points(path: Path) -> list[tuple[float, float]]:
    pts = []
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                pts.append((float(row[0]), float(row[1])))
            except ValueError:
                if pts:
                    raise
    return pts


# ------------------------------------------------------------------ output

def fmt(x: float | int | str) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(rows: Iterable[dict[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(payload: dict[str, Any]) -> str:
    return json.dumps(_jsonable({"schema_version": SCHEMA_VERSION, **payload}), indent=2, allow_nan=False) + "\n"


def sweep_payload(result: SweepResult) -> dict[str, Any]:
    return {
        "config": asdict(result.config),
        "records": [r.as_dict() for r in result.rows],
        "skipped": result.skipped,
        "samples_in": len(result.rows) + len(result.skipped),
        "peaks": [asdict(p) for p in result.peaks],
    }


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ click

def _load_config(ctx: click.Context, _param: click.Parameter, value: str | None) -> str | None:
    if value:
        with open(value) as fh:
            data = json.load(fh)
        ctx.default_map = {**(ctx.default_map or {}), **{k.replace("-", "_"): v for k, v in data.items()}}
    return value


def common_options(fn: Callable) -> Callable:
    opts = [
        click.option("--config", type=click.Path(exists=True, dir_okay=False), callback=_load_config,
                     is_eager=True, expose_value=False, help="JSON file of option defaults; flags override it."),
        click.option("--epsilon", type=float, default=0.005, show_default=True, help="Aperture width."),
        click.option("--depth", type=float, default=1.0, show_default=True, help="Cavity depth d."),
        click.option("--theta", type=float, default=math.pi / 3, show_default=True, help="Incidence angle."),
        click.option("--bottom", type=click.Choice(["pmc", "pec"]), default="pmc", show_default=True),
        click.option("--grid", "grid_size", type=int, default=DEFAULT_GRID, show_default=True),
        click.option("--modes", "n_modes", type=int, default=DEFAULT_MODES, show_default=True),
        click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None),
        click.option("--format", "output_format", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


@click.group()
def main() -> None:
    """Scattering and resonance tools for a slit cavity in a ground plane."""


@main.command()
@common_options
@click.option("--kmin", type=float, default=0.5, show_default=True)
@click.option("--kmax", type=float, default=10.0, show_default=True)
@click.option("--samples", type=int, default=500, show_default=True)
@click.option("--solver", type=click.Choice(["bie", "single-mode"]), default="bie", show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True)
@click.option("--no-peaks", is_flag=True, help="Skip golden-section peak refinement.")
def sweep(epsilon, depth, theta, bottom, grid_size, n_modes, out, output_format, kmin, kmax, samples, solver, jobs, no_peaks):
    """Enhancement factors over a wavenumber range."""
    try:
        config = SweepConfig(epsilon, depth, theta, bottom, kmin, kmax, samples, grid_size, n_modes, solver, out, output_format)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc
    result = run_sweep(config, jobs=jobs, refine_peaks=not no_peaks)
    if config.output_format is OutputFormat.JSON:
        emit(write_json(sweep_payload(result)), out)
    else:
        emit(write_csv((r.as_dict() for r in result.rows), CSV_COLUMNS), out)
    click.echo(
        f"samples={config.samples} records={len(result.rows)} skipped={len(result.skipped)}"
        + "".join(f" skipped_kappa={k:.17g}" for k in result.skipped),
        err=True,
    )
    for p in result.peaks:
        click.echo(
            f"peak {p.quantity} kappa={p.kappa:.10f} value={p.value:.6g} "
            f"nearest n={p.nearest_resonance} asymptotic={p.asymptotic_kappa:.10f}",
            err=True,
        )


@main.command()
@common_options
@click.option("--nmax", "n_max", type=int, default=3, show_default=True)
def resonances(epsilon, depth, theta, bottom, grid_size, n_modes, out, output_format, n_max):
    """Asymptotic and Newton resonances side by side."""
    geometry = CavityGeometry(epsilon, depth, bottom)
    rows = run_resonances(geometry, n_max)
    dicts = [r.as_dict() for r in rows]
    if output_format == "json":
        emit(write_json({"epsilon": epsilon, "depth": depth, "bottom": bottom, "rows": dicts}), out)
    else:
        emit(write_csv(dicts, list(dicts[0])), out)
    if not all(r.passed for r in rows):
        sys.exit(1)


@main.command(name="field")
@common_options
@click.option("--kappa", type=float, required=True)
@click.option("--points", type=click.Path(exists=True, dir_okay=False), required=True,
              help="CSV of x1,x2 coordinates.")
def field_cmd(epsilon, depth, theta, bottom, grid_size, n_modes, out, output_format, kappa, points):
    """Total field at points read from a coordinate file."""
    config = SweepConfig(epsilon, depth, theta, bottom, kappa_min=kappa, kappa_max=2 * kappa, samples=2,
                         grid_size=grid_size, n_modes=n_modes)
    samples = evaluate_field(read_points(Path(points)), kappa, config)
    dicts = [
        {"x1": s.x1, "x2": s.x2, "re_u": s.value.real, "im_u": s.value.imag, "region": s.region, "status": s.status}
        for s in samples
    ]
    if output_format == "json":
        emit(write_json({"kappa": kappa, "points": dicts}), out)
    else:
        emit(write_csv(dicts, ["x1", "x2", "re_u", "im_u", "region", "status"]), out)


@main.command()
@click.option("--level", type=click.Choice(["quick", "full"]), default="quick", show_default=True)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
@click.option("--format", "output_format", type=click.Choice(["text", "json"]), default="text", show_default=True)
def validate(level, out, output_format):
    """Cross-module consistency checks; exit status 1 on any failure."""
    report = run_validation(ValidationLevel(level))
    text = write_json(report.as_dict()) if output_format == "json" else report.render()
    emit(text, out)
    if not report.passed:
        sys.exit(1)


if __name__ == "__main__":
    main()
