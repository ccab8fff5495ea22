"""Coordinate and amplitude maps between the four frames.

``(x, t)``  physical frame of the Boussinesq parent,
``(Y, S)``  slow frame ``Y = delta (x - t)``, ``S = delta t`` with ``u = eps U``,
``(X, T)``  moving frame ``X = a Y + b S``, ``T = c S``,
``(zeta, tau)`` scaled-out frame ``X = delta zeta``, ``T = delta tau`` with ``v = eps V``.

Grid periods in derived frames are obtained by pushing the physical period
through the spatial part of each map, so snapshots are moved between frames
with the same ``n`` and a trigonometric shift, never a re-gridding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import mpmath
import numpy as np

from .spectral import Grid, check_nu, shift

PERIOD_RTOL = 1e-12


class PeriodMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FrameConstants:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0:
            raise ValueError(f"frame constants must be positive, got {self}")


def frame_parameters(nu: float) -> FrameConstants:
    """Canonical moving-frame constants ``a = (2/sqrt 5)**(1/nu)``, ``b = 2a/5``, ``c = a/3``."""
    nu = check_nu(nu)
    a = (2.0 / math.sqrt(5.0)) ** (1.0 / nu)
    return FrameConstants(a, 0.4 * a, a / 3.0)


class FrameKind(str, Enum):
    SCALING = "Scaling-approx"
    MOVING = "Moving-eq-j"
    SCALEOUT = "Scaleout-eq-n"
    COMPOSITE = "Composite-trans"


@dataclass(frozen=True)
class FrameMap:
    """Affine coordinate map ``(s, r) -> (alpha s + beta r, gamma r)``.

    All four frame changes have this triangular form, so one class covers them;
    ``forward``/``inverse`` accept scalars or arrays.
    """

    kind: FrameKind
    alpha: float
    beta: float
    gamma: float

    def forward(self, s, r):
        s, r = np.asarray(s, dtype=float), np.asarray(r, dtype=float)
        return self.alpha * s + self.beta * r, self.gamma * r

    def inverse(self, s, r):
        s, r = np.asarray(s, dtype=float), np.asarray(r, dtype=float)
        r0 = r / self.gamma
        return (s - self.beta * r0) / self.alpha, r0

    def then(self, other: "FrameMap") -> "FrameMap":
        """Composition ``other`` after ``self``."""
        return FrameMap(
            FrameKind.COMPOSITE,
            other.alpha * self.alpha,
            other.alpha * self.beta + other.beta * self.gamma,
            other.gamma * self.gamma,
        )


def scaling_map(delta: float) -> FrameMap:
    """``(x, t) -> (Y, S) = (delta (x - t), delta t)``."""
    return FrameMap(FrameKind.SCALING, delta, -delta, delta)


def moving_map(fc: FrameConstants) -> FrameMap:
    """``(Y, S) -> (X, T) = (a Y + b S, c S)``."""
    return FrameMap(FrameKind.MOVING, fc.a, fc.b, fc.c)


def scaleout_map(delta: float) -> FrameMap:
    """``(X, T) -> (zeta, tau) = (X / delta, T / delta)``."""
    return FrameMap(FrameKind.SCALEOUT, 1.0 / delta, 0.0, 1.0 / delta)


def composite_map(nu: float) -> FrameMap:
    """``(x, t) -> (zeta, tau) = (a (x - 3t/5), a t / 3)`` with canonical ``a``."""
    a = frame_parameters(nu).a
    return FrameMap(FrameKind.COMPOSITE, a, -0.6 * a, a / 3.0)


def _expect_period(grid: Grid | None, period: float) -> None:
    if grid is not None and abs(grid.length - period) > PERIOD_RTOL * period:
        raise PeriodMismatchError(
            f"target grid period {grid.length!r} does not match mapped period {period!r}"
        )


def boussinesq_to_slow(grid_x: Grid, u: np.ndarray, t: float, eps: float, delta: float, grid_y: Grid | None = None):
    """Snapshot ``u(., t)`` -> ``U(., S)`` with ``S = delta t``.

    Returns ``(grid_y, U, S)``; ``U(Y) = u(Y / delta + t) / eps``.
    """
    period = delta * grid_x.length
    _expect_period(grid_y, period)
    grid_y = grid_y or Grid(grid_x.n, period)
    return grid_y, shift(grid_x, u, t) / eps, delta * t


def slow_to_boussinesq(grid_y: Grid, U: np.ndarray, S: float, eps: float, delta: float, grid_x: Grid | None = None):
    """Inverse of :func:`boussinesq_to_slow`; returns ``(grid_x, u, t)``."""
    period = grid_y.length / delta
    _expect_period(grid_x, period)
    grid_x = grid_x or Grid(grid_y.n, period)
    return grid_x, eps * shift(grid_y, U, -S), S / delta


def physical_to_ch_frame(grid_x: Grid, w: np.ndarray, t: float, nu: float, grid_z: Grid | None = None):
    """Snapshot ``w(., t)`` -> ``v(., tau)`` through the composite map.

    No amplitude factor: ``w(x, t) = v(zeta, tau)``.  Returns ``(grid_z, v, tau)``.
    """
    cmap = composite_map(nu)
    period = cmap.alpha * grid_x.length
    _expect_period(grid_z, period)
    grid_z = grid_z or Grid(grid_x.n, period)
    # v(zeta_j) = w(zeta_j / a + 3t/5) and zeta_j / a is exactly x_j
    return grid_z, shift(grid_x, w, 0.6 * t), cmap.gamma * t


def ch_frame_to_physical(grid_z: Grid, v: np.ndarray, tau: float, nu: float, grid_x: Grid | None = None):
    """Inverse of :func:`physical_to_ch_frame`; returns ``(grid_x, w, t)``."""
    cmap = composite_map(nu)
    period = grid_z.length / cmap.alpha
    _expect_period(grid_x, period)
    grid_x = grid_x or Grid(grid_z.n, period)
    t = tau / cmap.gamma
    return grid_x, shift(grid_z, v, cmap.beta * t), t


def slow_to_moving(grid_y: Grid, U: np.ndarray, fc: FrameConstants):
    """``S = 0`` slice only: ``V(X) = U(X / a)`` on a grid of period ``a L_Y``."""
    return Grid(grid_y.n, fc.a * grid_y.length), np.array(U, dtype=float, copy=True)


def moving_to_ch(grid_m: Grid, V: np.ndarray, eps: float, delta: float):
    """``v(zeta) = eps V(delta zeta)`` on a grid of period ``L_X / delta``."""
    return Grid(grid_m.n, grid_m.length / delta), eps * np.asarray(V, dtype=float)


def moving_frame_coefficients(nu, p: int, dps: int = 40, constants=None) -> dict:
    """Moving-frame model coefficients in extended precision.

    ``constants`` is an optional ``(a, b, c)`` triple; by default the canonical
    values are recomputed in ``mpmath`` at ``dps`` digits.  Keys: ``advect``
    (``b/c``), ``steepen`` (``a/2c``), ``helm`` (``a^{2nu+1}/2b``), ``nl_disp``
    (``(p+1) a^{2nu+1}/8c``) and ``theta`` (``2a/b - 3``, the weight of
    ``(-D^2)^nu (V^p V_X)`` relative to ``V^p (-D^2)^nu V_X``).
    """
    with mpmath.workdps(dps):
        nu = mpmath.mpf(nu)
        if constants is None:
            a = (2 / mpmath.sqrt(5)) ** (1 / nu)
            b, c = 2 * a / 5, a / 3
        else:
            a, b, c = (mpmath.mpf(v) for v in constants)
        a2 = a ** (2 * nu + 1)
        return {
            "advect": b / c,
            "steepen": a / (2 * c),
            "helm": a2 / (2 * b),
            "nl_disp": (p + 1) * a2 / (8 * c),
            "theta": 2 * a / b - 3,
        }


def canonical_targets(p: int) -> dict:
    """Fixed-frame values the canonical constants must produce."""
    return {
        "advect": mpmath.mpf(6) / 5,
        "steepen": mpmath.mpf(3) / 2,
        "helm": mpmath.mpf(1),
        "nl_disp": 3 * mpmath.mpf(p + 1) / 10,
        "theta": mpmath.mpf(2),
    }


def frame_audit(nu, p: int, dps: int = 40) -> dict:
    """Absolute deviation of each moving-frame coefficient from its target."""
    with mpmath.workdps(dps):
        got, want = moving_frame_coefficients(nu, p, dps), canonical_targets(p)
        return {k: float(abs(got[k] - want[k])) for k in want}
