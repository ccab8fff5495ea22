"""Self-checks run by ``gfch validate``: derivation residuals, reduction chain,
frame constants and conservation.

Each check yields :class:`Check` rows; the suite passes iff every row does.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import frames, hierarchy
from .experiments import run_conservation_audit
from .models import ModelId, ModelParams, classical_ch_rhs, gch_rhs, gfch_rhs, mch_rhs
from .spectral import make_grid, periodic_gaussian, random_bandlimited

HIERARCHY_TOL = 1e-10
REDUCTION_TOL = 1e-12
FRAME_TOL = 1e-14
DRIFT_TOL = 1e-8


@dataclass(frozen=True)
class Check:
    group: str
    name: str
    p: int
    nu: float
    value: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.tol)


def hierarchy_checks(powers=(1, 2, 3), nus=(1.0, 1.5, 2.0), n=192, length=48.0, sigma=2.0, mutate=None):
    """Max-norm residual of each order's equation for a centred Gaussian profile."""
    grid = make_grid(n, length)
    U0 = periodic_gaussian(grid, length / 2, sigma)
    coeffs = hierarchy.mutated_coeffs(mutate) if mutate else hierarchy.COEFFS
    rows = []
    for p in powers:
        for nu in nus:
            bundle = hierarchy.build_bundle(grid, U0, ModelParams(p, nu), coeffs)
            res = hierarchy.hierarchy_residuals(bundle)
            for name in hierarchy.ORDER_NAMES:
                rows.append(Check("hierarchy", name, p, nu, res[name], HIERARCHY_TOL))
    return rows


def reduction_checks(n_fields=50, n=128, length=2 * np.pi, seed=0):
    """gfCH(nu=1) = gCH, gCH(p=2) = mCH and gCH(p=1) = classical CH (6/5, 9/5).

    The deviation is measured relative to ``max(1, max |rhs|)`` and maximised over
    random band-limited fields with ``kmax = n/8``.
    """
    grid = make_grid(n, length)
    rng = np.random.default_rng(seed)
    worst = {"gfch-nu1=gch": 0.0, "gch-p2=mch": 0.0, "gch-p1=ch": 0.0}
    for _ in range(n_fields):
        v = random_bandlimited(grid, rng, n // 8, amplitude=0.5)
        pairs = {
            "gfch-nu1=gch": [(gfch_rhs(grid, v, ModelParams(p, 1.0)), gch_rhs(grid, v, p)) for p in (1, 2, 3)],
            "gch-p2=mch": [(gch_rhs(grid, v, 2), mch_rhs(grid, v))],
            "gch-p1=ch": [(gch_rhs(grid, v, 1), classical_ch_rhs(grid, v, 6 / 5, 9 / 5))],
        }
        for key, items in pairs.items():
            for lhs, rhs in items:
                dev = np.max(np.abs(lhs - rhs)) / max(1.0, np.max(np.abs(rhs)))
                worst[key] = max(worst[key], float(dev))
    return [Check("reduction", k, 0, 1.0, v, REDUCTION_TOL) for k, v in worst.items()]


def frame_checks(powers=(1, 2, 3), nus=(0.75, 1.0, 1.5, 2.0)):
    rows = []
    for p in powers:
        for nu in nus:
            for name, dev in frames.frame_audit(nu, p).items():
                rows.append(Check("frame", name, p, nu, dev, FRAME_TOL))
    return rows


def conservation_checks(horizon=10.0):
    cases = [
        (ModelId.GFKDV, ModelParams(2, 1.5, 0.5, 0.5)),
        (ModelId.GFBBM, ModelParams(1, 1.5)),
        (ModelId.GFCH, ModelParams(1, 1.0)),
        (ModelId.BOUSSINESQ, ModelParams(1, 1.0, 0.1, 0.1)),
    ]
    rows = []
    for model, params in cases:
        report = run_conservation_audit(model, params, horizon)
        for name, drift in report.max_drift.items():
            rows.append(Check("conservation", f"{model.value}:{name}", params.p, params.nu, drift, DRIFT_TOL))
        if report.linear_mass_error is not None:
            rows.append(
                Check("conservation", f"{model.value}:mass_linear", params.p, params.nu, report.linear_mass_error, DRIFT_TOL)
            )
    return rows


def run_suite(seed=0, mutate=None, n_fields=50, horizon=10.0, hierarchy_kw=None):
    rows = hierarchy_checks(mutate=mutate, **(hierarchy_kw or {}))
    rows += reduction_checks(n_fields=n_fields, seed=seed)
    rows += frame_checks()
    rows += conservation_checks(horizon)
    return rows
