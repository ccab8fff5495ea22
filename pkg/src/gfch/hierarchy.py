"""Order-by-order solution of the two-parameter expansion in the slow frame.

The expansion is ``U = U0 + eps^p U1 + delta^{2nu} U2 + eps^p delta^{2nu} U3``.
Right-going closure is encoded rather than solved for: ``U0`` depends on ``Y``
only, ``U1`` and ``U2`` are linear in ``S`` (``U1 = S * U1S``, ``U2 = S * U2S``,
zero integration functions) and only ``U3S``/``U3SS`` of the last order are
ever formed.

Coefficients live in :data:`COEFFS` so a mutated copy can be passed in to check
that the residual test actually detects a wrong derivation.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .models import ModelParams, slow_frame_rhs
from .spectral import Grid, check_field, dealiased_product, derivative, fractional_laplacian

COEFFS = {
    "u1s": -1 / 2,
    "u2s": 1 / 2,
    "u3ss_a": -1 / 4,
    "u3ss_b": -1 / 4,
    "u3s_a": -1 / 2,
    "u3s_b": 1 / 2,
    "u3s_c": 3 / 8,
    "u3s_d": -1 / 8,
}

# name -> (key, corrupted value); consumed by the validation mutation harness
MUTATIONS = {
    "u3s_three_eighths": ("u3s_c", 1 / 2),
    "u3ss_quarter": ("u3ss_a", -1 / 2),
    "u1s_half": ("u1s", -1.0),
}


def mutated_coeffs(name: str) -> dict:
    if name not in MUTATIONS:
        raise ValueError(f"unknown mutation {name!r}; known: {sorted(MUTATIONS)}")
    key, value = MUTATIONS[name]
    return {**COEFFS, key: value}


def _pow(grid, f, k):
    return dealiased_product(grid, *([f] * k)) if k > 1 else np.array(f, dtype=float)


def u1s_of(grid: Grid, U0: np.ndarray, p: int, coeffs: dict = COEFFS) -> np.ndarray:
    """``U1S = -(1/2) (U0^{p+1})_Y``."""
    check_field(grid, U0)
    return coeffs["u1s"] * derivative(grid, _pow(grid, U0, p + 1))


def u2s_of(grid: Grid, U0: np.ndarray, nu: float, coeffs: dict = COEFFS) -> np.ndarray:
    """``U2S = (1/2) (-D^2)^nu U0_Y``."""
    return coeffs["u2s"] * fractional_laplacian(grid, derivative(grid, U0), nu)


def u3ss_of(grid: Grid, U0: np.ndarray, p: int, nu: float, coeffs: dict = COEFFS) -> np.ndarray:
    m = lambda f: fractional_laplacian(grid, f, nu)  # noqa: E731
    first = m(derivative(grid, _pow(grid, U0, p + 1), 2))
    second = derivative(grid, dealiased_product(grid, _pow(grid, U0, p), m(derivative(grid, U0))))
    return coeffs["u3ss_a"] * first + coeffs["u3ss_b"] * (p + 1) * second


def u3s_of(grid: Grid, U0, U1, U2, p: int, nu: float, coeffs: dict = COEFFS) -> np.ndarray:
    """Four-term closed form of ``U3S`` given ``U0`` and the current ``U1``, ``U2``."""
    m = lambda f: fractional_laplacian(grid, f, nu)  # noqa: E731
    U0p = _pow(grid, U0, p)
    return (
        coeffs["u3s_a"] * (p + 1) * derivative(grid, dealiased_product(grid, U0p, U2))
        + coeffs["u3s_b"] * m(derivative(grid, U1))
        + coeffs["u3s_c"] * m(derivative(grid, _pow(grid, U0, p + 1)))
        + coeffs["u3s_d"] * (p + 1) * dealiased_product(grid, U0p, m(derivative(grid, U0)))
    )


def _d_s_u3s(grid, U0, U1S, U2S, p, nu, coeffs):
    """``d/dS`` of :func:`u3s_of`: only the ``U1``, ``U2`` slots carry ``S``."""
    U0p = _pow(grid, U0, p)
    return (
        coeffs["u3s_a"] * (p + 1) * derivative(grid, dealiased_product(grid, U0p, U2S))
        + coeffs["u3s_b"] * fractional_laplacian(grid, derivative(grid, U1S), nu)
    )


@dataclass(frozen=True)
class HierarchyBundle:
    grid: Grid
    U0: np.ndarray
    U1S: np.ndarray
    U2S: np.ndarray
    U3SS: np.ndarray
    params: ModelParams
    coeffs: dict

    def U1(self, S: float) -> np.ndarray:
        return S * self.U1S

    def U2(self, S: float) -> np.ndarray:
        return S * self.U2S

    def U3S(self, S: float) -> np.ndarray:
        p, nu = self.params.p, self.params.nu
        return u3s_of(self.grid, self.U0, self.U1(S), self.U2(S), p, nu, self.coeffs)

    def U3SS_from_u3s(self) -> np.ndarray:
        p, nu = self.params.p, self.params.nu
        return _d_s_u3s(self.grid, self.U0, self.U1S, self.U2S, p, nu, self.coeffs)


def build_bundle(grid: Grid, U0: np.ndarray, params: ModelParams, coeffs: dict = COEFFS) -> HierarchyBundle:
    U0 = np.array(check_field(grid, U0), dtype=float)
    p, nu = params.p, params.nu
    return HierarchyBundle(
        grid, U0,
        u1s_of(grid, U0, p, coeffs),
        u2s_of(grid, U0, nu, coeffs),
        u3ss_of(grid, U0, p, nu, coeffs),
        params, coeffs,
    )


ORDER_NAMES = ("eq-a", "eq-b", "eq-d", "eq-f")


def hierarchy_residuals(bundle: HierarchyBundle, S_values=(0.0, 1.0)) -> dict:
    """Max-norm residual of each order's equation with the closed forms substituted.

    ``(D_S - 2 D_Y)`` is applied with the analytic ``S``-dependence: ``U0S = 0``,
    ``U1SS = U2SS = 0`` and ``D_S U3S = U3SS`` (``U3SSS = 0``).  The last
    order is checked at every ``S`` in ``S_values`` and additionally with
    ``D_S U3S`` taken by differentiating the ``U3S`` formula, so a mismatch
    between the ``U3S`` and ``U3SS`` forms also shows up.  Returns a dict with
    one entry per order plus ``"scale"`` (size of the largest term).
    """
    g, p, nu = bundle.grid, bundle.params.p, bundle.params.nu
    m = lambda f: fractional_laplacian(g, f, nu)  # noqa: E731
    dY = lambda f, k=1: derivative(g, f, k)  # noqa: E731
    U0, U1S, U2S = bundle.U0, bundle.U1S, bundle.U2S
    U0p1 = _pow(g, U0, p + 1)

    res_a = np.zeros(g.n)  # U0S vanishes identically
    res_b = -2 * dY(U1S) - dY(U0p1, 2)
    res_d = -2 * dY(U2S) + m(dY(U0, 2))

    U0p = _pow(g, U0, p)
    res_f = 0.0
    scale = max(np.max(np.abs(t)) for t in (U0, U1S, U2S, bundle.U3SS))
    for S in S_values:
        U1, U2 = bundle.U1(S), bundle.U2(S)
        U3S = bundle.U3S(S)
        # U1SY is S-independent; U1S is constant in S
        forcing = m(dY(U1, 2) - 2 * dY(U1S)) - (p + 1) * dY(dealiased_product(g, U0p, U2), 2)
        for u3ss in (bundle.U3SS, bundle.U3SS_from_u3s()):
            r = u3ss - 2 * dY(U3S) + forcing
            res_f = max(res_f, float(np.max(np.abs(r))))
        scale = max(scale, float(np.max(np.abs(U3S))))
    return {
        "eq-a": float(np.max(np.abs(res_a))),
        "eq-b": float(np.max(np.abs(res_b))),
        "eq-d": float(np.max(np.abs(res_d))),
        "eq-f": res_f,
        "scale": scale,
    }


def assembled_us(grid: Grid, U0: np.ndarray, params: ModelParams, S: float = 0.0, coeffs: dict = COEFFS) -> np.ndarray:
    """Truncated ``U_S = eps^p U1S + delta^{2nu} U2S + eps^p delta^{2nu} U3S``."""
    b = build_bundle(grid, U0, params, coeffs)
    epsp, d2nu = params.eps**params.p, params.delta ** (2 * params.nu)
    return epsp * b.U1S + d2nu * b.U2S + epsp * d2nu * b.U3S(S)


def expansion_field(grid: Grid, U0: np.ndarray, params: ModelParams, S: float = 0.0, coeffs: dict = COEFFS) -> np.ndarray:
    """``U0 + eps^p U1 + delta^{2nu} U2`` at slow time ``S``."""
    b = build_bundle(grid, U0, params, coeffs)
    epsp, d2nu = params.eps**params.p, params.delta ** (2 * params.nu)
    return b.U0 + epsp * b.U1(S) + d2nu * b.U2(S)


def us_residual(grid: Grid, U0: np.ndarray, params: ModelParams, S: float = 1.0) -> float:
    """``max |assembled U_S - slow_frame_rhs(U)|`` with ``U`` the expansion at ``S``."""
    U = expansion_field(grid, U0, params, S)
    diff = assembled_us(grid, U0, params, S) - slow_frame_rhs(grid, U, params)
    return float(np.max(np.abs(diff)))


def with_params(params: ModelParams, **kw) -> ModelParams:
    return replace(params, **kw)
