"""Acceptance criteria, one function each.

Every ``criterion_N`` returns ``(ok, detail)``.  Under pytest each one prints a
``[PASS]`` / ``[FAIL]`` line (collected again in the terminal summary); run the
file directly to get the same lines without pytest.
"""
import json
import sys
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from gfch import frames, hierarchy, validation
from gfch.cli import main as cli_main
from gfch.config import PRESETS, preset_command
from gfch.experiments import (
    ConvergenceStudy,
    compare_models_at,
    run_conservation_audit,
    run_dispersion_audit,
    run_solitary_wave,
    run_unidirectional_comparison,
)
from gfch.models import ModelId, ModelParams
from gfch.spectral import fractional_laplacian, make_grid, periodic_gaussian

RESULTS = []


def criterion_1():
    """Fractional Laplacian eigenvalues k^{2 nu} on sin(kx), k <= n/4."""
    start = time.perf_counter()
    g = make_grid(16, 2 * np.pi)
    worst = 0.0
    for nu in (0.75, 1.0, 1.5, 2.0):
        for k in range(1, g.n // 4 + 1):
            f = np.sin(k * g.nodes)
            lam = float(k) ** (2 * nu)
            worst = max(worst, np.max(np.abs(fractional_laplacian(g, f, nu) - lam * f)) / lam)
    dt = time.perf_counter() - start
    return worst < 1e-12 and dt < 1.0, f"max rel error {worst:.2e} (tol 1e-12), {dt:.2f} s (limit 1 s)"


def criterion_2():
    """Dilation: (-D^2)^nu [f(delta x)] = delta^{2 nu} [(-D^2)^nu f](delta x)."""
    start = time.perf_counter()
    rng = np.random.default_rng(2)
    length, n, kmax = 20.0, 64, 8
    ks = np.arange(1, kmax + 1)
    worst = 0.0
    for delta in (0.5, 0.25):
        for nu in (1.0, 1.5):
            a, b = rng.standard_normal(kmax), rng.standard_normal(kmax)
            xi = 2 * np.pi * ks / length
            # f and (-D^2)^nu f in closed form, sampled at delta x on the stretched box
            gx = make_grid(n, length / delta)
            y = delta * gx.nodes[:, None]
            f = (a * np.cos(xi * y) + b * np.sin(xi * y)).sum(axis=1)
            mf = (xi ** (2 * nu) * (a * np.cos(xi * y) + b * np.sin(xi * y))).sum(axis=1)
            lhs = fractional_laplacian(gx, f, nu)
            rhs = delta ** (2 * nu) * mf
            worst = max(worst, np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs)))
    dt = time.perf_counter() - start
    return worst < 1e-11 and dt < 1.0, f"max rel deviation {worst:.2e} (tol 1e-11), {dt:.2f} s (limit 1 s)"


def criterion_3():
    """Order-by-order residuals vanish and the 3/8 mutation is caught."""
    start = time.perf_counter()
    clean = validation.hierarchy_checks()
    worst = max(c.value for c in clean)
    mutated = validation.hierarchy_checks(mutate="u3s_three_eighths")
    caught = [c for c in mutated if c.name == "eq-f" and not c.passed]
    g = make_grid(192, 48.0)
    r = hierarchy.hierarchy_residuals(
        hierarchy.build_bundle(g, periodic_gaussian(g, 24.0, 2.0), ModelParams(1, 1.0), hierarchy.mutated_coeffs("u3s_three_eighths"))
    )
    loud = r["eq-f"] > 1e-3 * r["scale"]
    dt = time.perf_counter() - start
    ok = all(c.passed for c in clean) and len(clean) == 36 and len(caught) == 9 and loud and dt < 10.0
    return ok, (
        f"max residual {worst:.2e} over {len(clean)} checks (tol 1e-10); mutation flagged in {len(caught)}/9 cases, "
        f"eq-f/scale = {r['eq-f'] / r['scale']:.2e}; {dt:.2f} s (limit 10 s)"
    )


def criterion_4():
    """gfCH(nu=1) = gCH, gCH(p=2) = mCH, gCH(p=1) = CH(6/5, 9/5) on 50 random fields."""
    start = time.perf_counter()
    checks = validation.reduction_checks(n_fields=50)
    worst = max(c.value for c in checks)
    dt = time.perf_counter() - start
    return all(c.passed for c in checks) and dt < 5.0, f"max deviation {worst:.2e} (tol 1e-12), {dt:.2f} s (limit 5 s)"


def criterion_5():
    """Moving-frame coefficients equal (6/5, 3/2, 1, 3(p+1)/10) in extended precision."""
    start = time.perf_counter()
    worst = 0.0
    for p in (1, 2, 3):
        for nu in (0.75, 1.0, 1.5, 2.0):
            worst = max(worst, max(frames.frame_audit(nu, p).values()))
    dt = time.perf_counter() - start
    return worst < 1e-14 and dt < 1.0, f"max deviation {worst:.2e} (tol 1e-14), {dt:.2f} s (limit 1 s)"


def criterion_6():
    """Boussinesq vs gfCH orders in eps and delta, and gfCH no worse than gfKdV."""
    start = time.perf_counter()
    rep = run_unidirectional_comparison(ConvergenceStudy(n=512))
    errs = compare_models_at(0.1, 0.1, n=512)
    dt = time.perf_counter() - start
    ok = rep.slope_eps >= 1.8 and rep.slope_delta >= 3.6 and errs["GfCH"] <= errs["GfKdV"] and dt <= 600
    return ok, (
        f"eps-slope {rep.slope_eps:.3f} +- {rep.slope_eps_stderr:.3f} (>= 1.8), "
        f"delta-slope {rep.slope_delta:.3f} +- {rep.slope_delta_stderr:.3f} (>= 3.6), "
        f"err GfCH {errs['GfCH']:.3e} <= GfKdV {errs['GfKdV']:.3e}; {dt:.1f} s (limit 600 s)"
    )


def criterion_7():
    """Relative drift of the conserved functionals over horizon 10 at dt = 0.1 dx."""
    start = time.perf_counter()
    cases = [
        (ModelId.GFKDV, ModelParams(2, 1.5, 0.5, 0.5), ("mass", "l2")),
        (ModelId.GFBBM, ModelParams(1, 1.5), ("mass", "energy")),
        (ModelId.GFCH, ModelParams(1, 1.0), ("mass",)),
        (ModelId.BOUSSINESQ, ModelParams(1, 1.0, 0.1, 0.1), ("mass_ut",)),
    ]
    worst, parts = 0.0, []
    for model, params, keys in cases:
        rep = run_conservation_audit(model, params, horizon=10.0, dt_factor=0.1)
        for key in keys:
            worst = max(worst, rep.max_drift[key])
            parts.append(f"{model.value}:{key} {rep.max_drift[key]:.1e}")
    dt = time.perf_counter() - start
    return worst < 1e-8 and dt < 120, f"{', '.join(parts)} (tol 1e-8); {dt:.1f} s (limit 120 s)"


def criterion_8():
    """Measured Boussinesq frequencies match k / sqrt(1 + k^{2 nu})."""
    start = time.perf_counter()
    worst = 0.0
    for nu in (1.0, 2.0):
        for row in run_dispersion_audit(nu, ks=(1, 2, 4)):
            worst = max(worst, row["rel_error"])
    dt = time.perf_counter() - start
    return worst < 1e-6 and dt < 30, f"max rel error {worst:.2e} (tol 1e-6), {dt:.1f} s (limit 30 s)"


def criterion_9():
    """gfKdV sech^{2/p} solitary waves keep their shape over one box transit."""
    start = time.perf_counter()
    e1, _, _ = run_solitary_wave(1)
    e2, _, _ = run_solitary_wave(2, n=512, length=80.0)
    dt = time.perf_counter() - start
    return max(e1, e2) < 1e-4 and dt < 60, f"shape error p=1 {e1:.2e}, p=2 {e2:.2e} (tol 1e-4); {dt:.1f} s (limit 60 s)"


def criterion_10():
    """Every preset produces byte-identical CSV files on a rerun."""
    start = time.perf_counter()
    mismatched, count = [], 0
    with tempfile.TemporaryDirectory() as tmp:
        for name in PRESETS:
            runs = []
            for tag in ("a", "b"):
                out = Path(tmp) / f"{name}_{tag}"
                code = cli_main([preset_command(name), "--preset", name, "--out", str(out)])
                if code != 0:
                    return False, f"preset {name} exited with {code}"
                runs.append({p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*.csv"))})
                runs[-1]["manifest"] = json.loads((out / "manifest.json").read_text())["config_hash"]
            count += len(runs[0]) - 1
            if runs[0] != runs[1] or len(runs[0]) < 2:
                mismatched.append(name)
    dt = time.perf_counter() - start
    return not mismatched, f"{count} CSV files across {len(PRESETS)} presets, mismatches: {mismatched or 'none'}; {dt:.1f} s"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9, criterion_10]


def _report(fn):
    ok, detail = fn()
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {fn.__name__.split('_')[1]}: {fn.__doc__.strip()} -- {detail}"
    RESULTS.append(line)
    print(line)
    return ok, line


@pytest.mark.parametrize("fn", CRITERIA, ids=lambda f: f.__name__)
def test_criterion(fn):
    ok, line = _report(fn)
    assert ok, line


if __name__ == "__main__":
    outcomes = [_report(fn)[0] for fn in CRITERIA]
    sys.exit(0 if all(outcomes) else 1)
