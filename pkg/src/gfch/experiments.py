"""Convergence studies and conservation/dispersion audits.

The headline study integrates the Boussinesq parent from right-going data
``u(x, 0) = eps U0(delta x)`` and compares it, after mapping into the reduced
model's frame, with the gfCH or gfKdV solution at the matched time.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np
from scipy import optimize, stats

from . import frames
from .models import (
    BoussinesqFlow,
    ModelId,
    ModelParams,
    bbm_energy,
    l2_energy,
    linear_frequency,
    make_flow,
    mass,
    sech_profile,
    slow_frame_rhs,
)
from .spectral import Grid, derivative, make_grid, periodic_gaussian
from .stepping import RK4, RK4_IF, BlowUpError, StepperConfig, integrate

CSV_COLUMNS = (
    "model", "p", "nu", "eps", "delta", "n", "dt", "S_end",
    "err_max", "err_l2", "slope_eps", "slope_delta", "drift_mass", "drift_energy", "wall_s",
)
SUPPORT_BAND = 10
SUPPORT_RTOL = 1e-10


class PeriodViolationError(RuntimeError):
    pass


def fmt(x) -> str:
    """17 significant digits for floats, plain ``str`` otherwise."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return "" if x is None else str(x)


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def edge_fraction(q: np.ndarray, band: int = SUPPORT_BAND) -> float:
    """``max |q|`` within ``band`` points of the box edge over ``max |q|``."""
    peak = np.max(np.abs(q))
    if peak == 0:
        return 0.0
    edge = np.concatenate([q[:band], q[-band:]])
    return float(np.max(np.abs(edge)) / peak)


def fit_slope(params, errors):
    """Least-squares slope of ``log err`` against ``log param`` with its standard error."""
    x, y = np.log(np.asarray(params, float)), np.log(np.asarray(errors, float))
    fit = stats.linregress(x, y)
    return float(fit.slope), float(fit.stderr)


@dataclass(frozen=True)
class ConvergenceStudy:
    """Sweep ``eps`` at ``delta = delta_fixed`` and ``delta`` at ``eps = eps_fixed``.

    Lengths are in slow units: the profile is ``exp(-(Y - L/2)^2 / sigma^2)``
    on a ``Y`` box of period ``length``; the physical box is ``length / delta``.
    """

    reduced: str = ModelId.GFCH.value
    epsilons: tuple = (0.2, 0.1, 0.05)
    deltas: tuple = (0.2, 0.1, 0.05)
    eps_fixed: float = 1e-3
    delta_fixed: float | None = None
    p: int = 1
    nu: float = 1.0
    sigma: float = 2.0
    S_end: float = 1.0
    n: int = 512
    length: float = 40.0
    dt_factor: float = 0.2
    parent: str = ModelId.BOUSSINESQ.value

    def __post_init__(self):
        if ModelId.parse(self.parent) is not ModelId.BOUSSINESQ:
            raise ValueError("the parent model must be Boussinesq")
        if ModelId.parse(self.reduced) not in (ModelId.GFCH, ModelId.GFKDV):
            raise ValueError(f"reduced model must be GfCH or GfKdV, got {self.reduced!r}")
        for name in ("epsilons", "deltas"):
            vals = tuple(float(v) for v in getattr(self, name))
            if len(vals) < 3:
                raise ValueError(f"{name} needs at least 3 values for slope fitting")
            if any(b >= a for a, b in zip(vals, vals[1:])):
                raise ValueError(f"{name} must be strictly decreasing")
            object.__setattr__(self, name, vals)
        if self.delta_fixed is None:
            object.__setattr__(self, "delta_fixed", min(self.deltas))
        if self.sigma < 8 * self.length / self.n:
            raise ValueError("profile width sigma must cover at least 8 grid spacings")
        if self.length / 2 < 10 * self.sigma:
            raise ValueError("box too small: profile must sit >= 10 sigma from the edge")
        ModelParams(self.p, self.nu, self.eps_fixed, self.delta_fixed)

    def cells(self):
        """``(sweep, eps, delta)`` triples in report order."""
        out = [("eps", e, self.delta_fixed) for e in self.epsilons]
        out += [("delta", self.eps_fixed, d) for d in self.deltas]
        return out


@dataclass
class ExperimentReport:
    rows: list
    config: dict
    slope_eps: float = math.nan
    slope_eps_stderr: float = math.nan
    slope_delta: float = math.nan
    slope_delta_stderr: float = math.nan
    flags: list = field(default_factory=list)
    wall_s: float = 0.0

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def to_csv(self, with_timing: bool = False) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(("sweep",) + CSV_COLUMNS)
        for row in self.rows:
            values = dict(row, slope_eps=self.slope_eps, slope_delta=self.slope_delta)
            if not with_timing:
                values["wall_s"] = None
            writer.writerow([row["sweep"]] + [fmt(values[c]) for c in CSV_COLUMNS])
        return buf.getvalue()

    def to_gnuplot(self) -> str:
        lines = [f"# config_hash {self.config_hash}", "# sweep param err_max err_l2"]
        for sweep in ("eps", "delta"):
            for row in self.rows:
                if row["sweep"] == sweep:
                    lines.append(f"{sweep} {fmt(row[sweep])} {fmt(row['err_max'])} {fmt(row['err_l2'])}")
            lines.append("")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "slope_eps": self.slope_eps,
            "slope_eps_stderr": self.slope_eps_stderr,
            "slope_delta": self.slope_delta,
            "slope_delta_stderr": self.slope_delta_stderr,
            "flags": list(self.flags),
            "config_hash": self.config_hash,
        }


def unidirectional_initial_data(grid_x: Grid, U0: np.ndarray, params: ModelParams):
    """Right-going Boussinesq data from a slow-frame profile sampled on the same nodes.

    ``u_t = -u_x + eps delta U_S`` with ``U_S`` from the slow-frame model, which
    leaves a left-going remnant of size ``O(eps^{2p}, delta^{4nu})``.
    """
    eps, delta = params.eps, params.delta
    grid_y = Grid(grid_x.n, delta * grid_x.length)
    u0 = eps * U0
    ut0 = -derivative(grid_x, u0) + eps * delta * slow_frame_rhs(grid_y, U0, params)
    return u0, ut0


def _errors(ref: np.ndarray, approx: np.ndarray):
    scale = np.max(np.abs(ref))
    err_max = float(np.max(np.abs(approx - ref)) / scale)
    err_l2 = float(np.sqrt(np.sum((approx - ref) ** 2) / np.sum(ref**2)))
    return err_max, err_l2


def run_cell(study: ConvergenceStudy, eps: float, delta: float) -> dict:
    """One ``(eps, delta)`` comparison; returns a CSV-ready row dict."""
    start = time.perf_counter()
    params = ModelParams(study.p, study.nu, eps, delta)
    reduced = ModelId.parse(study.reduced)
    grid_y = make_grid(study.n, study.length)
    grid_x = make_grid(study.n, study.length / delta)
    U0 = periodic_gaussian(grid_y, study.length / 2, study.sigma)
    u0, ut0 = unidirectional_initial_data(grid_x, U0, params)
    t_end = study.S_end / delta

    parent = BoussinesqFlow(grid_x, study.p, study.nu)
    dt_x = study.dt_factor * grid_x.dx
    final = integrate(parent, (u0, ut0), StepperConfig(dt=dt_x, t_end=t_end, scheme=RK4_IF))

    if reduced is ModelId.GFCH:
        grid_r, q0, _ = frames.physical_to_ch_frame(grid_x, u0, 0.0, study.nu)
        horizon = frames.composite_map(study.nu).gamma * t_end
        _, ref, _ = frames.physical_to_ch_frame(grid_x, final.u, t_end, study.nu, grid_r)
    else:
        grid_r, q0, horizon = grid_y, U0, study.S_end
        _, ref, _ = frames.boussinesq_to_slow(grid_x, final.u, t_end, eps, delta, grid_y)

    flow = make_flow(reduced, grid_r, params)
    dt_r = study.dt_factor * grid_r.dx
    q = integrate(flow, q0, StepperConfig(dt=dt_r, t_end=horizon, scheme=RK4_IF))

    # support check in the comoving frame of the parent
    _, comoving, _ = frames.boussinesq_to_slow(grid_x, final.u, t_end, eps, delta, grid_y)
    err_max, err_l2 = _errors(ref, q)

    def drift(fn):
        f0 = fn(grid_r, q0)
        return abs(fn(grid_r, q) - f0) / abs(f0)

    return {
        "model": reduced.value,
        "p": study.p,
        "nu": float(study.nu),
        "eps": float(eps),
        "delta": float(delta),
        "n": study.n,
        "dt": float(dt_x),
        "S_end": float(study.S_end),
        "err_max": err_max,
        "err_l2": err_l2,
        "drift_mass": drift(mass),
        "drift_energy": drift(l2_energy),
        "edge_fraction": edge_fraction(comoving),
        "wall_s": time.perf_counter() - start,
    }


def run_unidirectional_comparison(study: ConvergenceStudy, threads: int = 1) -> ExperimentReport:
    start = time.perf_counter()
    cells = study.cells()

    def job(cell):
        sweep, eps, delta = cell
        try:
            row = run_cell(study, eps, delta)
        except BlowUpError as exc:
            raise BlowUpError(f"blow-up at eps={eps}, delta={delta}: {exc}", exc.time, exc.mode) from exc
        row["sweep"] = sweep
        return row

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(job, cells))
    else:
        rows = [job(c) for c in cells]

    flags = []
    for row in rows:
        if row["edge_fraction"] > SUPPORT_RTOL:
            raise PeriodViolationError(
                f"solution reaches the box edge (relative amplitude {row['edge_fraction']:.2e}) "
                f"at eps={row['eps']}, delta={row['delta']}"
            )
    report = ExperimentReport(rows=rows, config=asdict(study), flags=flags)
    for sweep in ("eps", "delta"):
        sub = sorted((r for r in rows if r["sweep"] == sweep), key=lambda r: -r[sweep])
        errs = [r["err_max"] for r in sub]
        if any(b >= a for a, b in zip(errs, errs[1:])):
            flags.append(f"non-monotone error table in the {sweep} sweep")
        tail = sub[-3:]
        slope, stderr = fit_slope([r[sweep] for r in tail], [r["err_max"] for r in tail])
        setattr(report, f"slope_{sweep}", slope)
        setattr(report, f"slope_{sweep}_stderr", stderr)
    report.wall_s = time.perf_counter() - start
    return report


def compare_models_at(eps: float, delta: float, **study_kw) -> dict:
    """gfCH and gfKdV errors against the same parent run at one ``(eps, delta)``."""
    out = {}
    for model in (ModelId.GFCH, ModelId.GFKDV):
        study = ConvergenceStudy(reduced=model.value, **study_kw)
        out[model.value] = run_cell(study, eps, delta)["err_max"]
    return out


def box_sensitivity(eps: float, delta: float, factor: int = 2, **study_kw) -> float:
    """Relative change of ``err_max`` when the box and ``n`` are both scaled by ``factor``."""
    base = ConvergenceStudy(**study_kw)
    big = ConvergenceStudy(**{**asdict(base), "n": base.n * factor, "length": base.length * factor})
    e0 = run_cell(base, eps, delta)["err_max"]
    e1 = run_cell(big, eps, delta)["err_max"]
    return abs(e1 - e0) / e0


# --- conservation --------------------------------------------------------------


def conserved_functionals(model: ModelId, params: ModelParams) -> dict:
    """Functionals conserved by the semi-discrete flow of ``model``.

    gfKdV: mass and L2.  gfBBM: mass and ``int v^2 + |(-D^2)^{nu/2} v|^2``.
    gfCH: mass only when ``p = 1``, where ``int v (-D^2)^nu v_x = 0`` by skew
    symmetry.  Boussinesq: ``int u_t`` (its zero mode has no forcing).
    """
    nu = params.nu
    if model in (ModelId.GFKDV, ModelId.GFKDV_ORIGINAL, ModelId.SLOW_FRAME):
        out = {"mass": mass}
        if model is not ModelId.SLOW_FRAME:
            out["l2"] = l2_energy
        return out
    if model in (ModelId.GFBBM, ModelId.GFBBM_ORIGINAL):
        if model is ModelId.GFBBM_ORIGINAL:
            return {"mass": mass}
        return {"mass": mass, "energy": lambda g, q: bbm_energy(g, q, nu)}
    if model in (ModelId.GFCH, ModelId.GFCH_ORIGINAL, ModelId.GCH, ModelId.CLASSICAL_CH, ModelId.MOVING_FRAME):
        return {"mass": mass} if params.p == 1 or model is ModelId.CLASSICAL_CH else {}
    if model is ModelId.MCH:
        return {}
    if model is ModelId.BOUSSINESQ:
        return {"mass_ut": lambda g, s: g.integrate(s.u_t)}
    return {}


@dataclass
class DriftReport:
    model: str
    times: list
    series: dict
    max_drift: dict
    linear_mass_error: float | None = None


def run_conservation_audit(
    model: ModelId | str,
    params: ModelParams,
    horizon: float = 10.0,
    n: int = 256,
    length: float = 40.0,
    sigma: float = 2.0,
    dt_factor: float = 0.1,
    snapshot_every: int = 10,
) -> DriftReport:
    """Integrate a Gaussian pulse and track every conserved functional.

    For Boussinesq the initial velocity is a second, offset Gaussian so that
    ``int u_t != 0``; ``int u`` must then grow exactly linearly.
    """
    model = ModelId.parse(model) if isinstance(model, str) else model
    grid = make_grid(n, length)
    flow = make_flow(model, grid, params)
    funcs = conserved_functionals(model, params)
    q0 = periodic_gaussian(grid, length / 2, sigma)
    if model is ModelId.BOUSSINESQ:
        q0 = (params.eps * q0, params.eps * periodic_gaussian(grid, length / 2 + sigma, sigma, 0.5))
    times, series, masses_u = [], {k: [] for k in funcs}, []

    def record(t, qh):
        q = flow.to_physical(qh)
        times.append(t)
        for k, fn in funcs.items():
            series[k].append(fn(grid, q))
        if model is ModelId.BOUSSINESQ:
            masses_u.append(grid.integrate(q.u))

    integrate(flow, q0, StepperConfig(dt=dt_factor * grid.dx, t_end=horizon, snapshot_every=snapshot_every), record)
    max_drift = {}
    for k, vals in series.items():
        vals = np.asarray(vals)
        max_drift[k] = float(np.max(np.abs(vals - vals[0])) / abs(vals[0]))
    lin = None
    if model is ModelId.BOUSSINESQ:
        t = np.asarray(times)
        m0, slope = masses_u[0], series["mass_ut"][0]
        predicted = m0 + slope * t
        lin = float(np.max(np.abs(np.asarray(masses_u) - predicted)) / (abs(m0) + horizon * abs(slope)))
    return DriftReport(model.value, times, series, max_drift, lin)


# --- dispersion ----------------------------------------------------------------


def measure_frequency(k: int, nu: float, amplitude: float = 1e-8, n: int = 32, dt: float = 1e-2, t_end: float | None = None) -> float:
    """Measured Boussinesq frequency of mode ``k`` on a ``2 pi`` box.

    Standing-wave data ``u = A cos(k x)``, ``u_t = 0`` is advanced with plain RK4
    (no exact propagator involved); ``omega`` is fitted to the recorded mode
    amplitude ``cos(omega t)`` by least squares, started from the first zero
    crossing.
    """
    grid = make_grid(n, 2 * np.pi)
    flow = BoussinesqFlow(grid, 1, nu)
    u0 = amplitude * np.cos(k * grid.nodes)
    if t_end is None:
        t_end = 2 * np.pi * math.sqrt(1 + k ** (2 * nu)) / k  # about one period
    times, amps = [], []

    def record(t, qh):
        times.append(t)
        amps.append(qh[0][k].real)

    integrate(flow, (u0, np.zeros(n)), StepperConfig(dt=dt, t_end=t_end, scheme=RK4, snapshot_every=1), record)
    t = np.asarray(times)
    r = np.asarray(amps) / amps[0]
    crossing = np.argmax(r < 0)
    t0 = t[crossing - 1] + (t[crossing] - t[crossing - 1]) * r[crossing - 1] / (r[crossing - 1] - r[crossing])
    fit = optimize.least_squares(lambda w: np.cos(w[0] * t) - r, x0=[math.pi / (2 * t0)], xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return float(fit.x[0])


def run_dispersion_audit(nu: float, ks=(1, 2, 4), **kw) -> list:
    rows = []
    for k in ks:
        measured = measure_frequency(k, nu, **kw)
        exact = float(linear_frequency(k, nu))
        rows.append({"k": k, "nu": nu, "omega_measured": measured, "omega_exact": exact, "rel_error": abs(measured - exact) / exact})
    return rows


# --- solitary waves ----------------------------------------------------------


def fit_solitary_wave(p: int, eps: float, delta: float, K: float, npts: int = 41):
    """Fix ``(A, c)`` of ``A sech^{2/p}(K xi)`` by substituting it into gfKdV (``nu = 1``).

    With ``s = sech^{2/p}(K xi)`` the once-integrated travelling-wave equation
    ``-c s + (eps^p / 2) A^p s^{p+1} + (delta^2 / 2) s'' = 0`` is linear in
    ``c`` and ``A^p``; ``s''`` is taken by high-precision numerical
    differentiation and the pair is fitted by least squares over sample points.
    """
    q = mpmath.mpf(2) / p
    s = lambda z: mpmath.sech(K * z) ** q  # noqa: E731
    xi = np.linspace(-4 / K, 4 / K, npts)
    with mpmath.workdps(30):
        sv = np.array([float(s(z)) for z in xi])
        s2 = np.array([float(mpmath.diff(s, z, 2)) for z in xi])
    alpha, beta = eps**p / 2, delta**2 / 2
    lhs = np.column_stack([sv, -alpha * sv ** (p + 1)])
    (c, Ap), *_ = np.linalg.lstsq(lhs, beta * s2, rcond=None)
    return float(Ap ** (1 / p)), float(c)


def run_solitary_wave(
    p: int,
    eps: float = 1.0,
    delta: float = 1.0,
    K: float = 0.5,
    n: int = 256,
    length: float = 40.0,
    dt_factor: float = 0.1,
):
    """Propagate the fitted solitary wave once around the box.

    Returns ``(relative max error, A, c)``.
    """
    A, c = fit_solitary_wave(p, eps, delta, K)
    grid = make_grid(n, length)
    params = ModelParams(p, 1.0, eps, delta)
    U0 = sech_profile(grid.nodes, A, K, p, center=length / 2)
    flow = make_flow(ModelId.GFKDV, grid, params)
    U = integrate(flow, U0, StepperConfig(dt=dt_factor * grid.dx, t_end=length / c))
    return float(np.max(np.abs(U - U0)) / np.max(np.abs(U0))), A, c
