"""Fixed-step fourth-order time integration of :class:`~gfch.models.Flow` objects."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .models import Flow

RK4 = "RK4"
RK4_IF = "RK4-IntegratingFactor"
SCHEMES = (RK4, RK4_IF)

# imaginary-axis stability limit of classical RK4
RK4_IMAG_BOUND = 2.0 * math.sqrt(2.0)


class BlowUpError(RuntimeError):
    def __init__(self, message: str, time: float, mode: int):
        super().__init__(message)
        self.time = time
        self.mode = mode


@dataclass(frozen=True)
class StepperConfig:
    dt: float
    t_end: float
    scheme: str = RK4_IF
    cfl_guard: float = 0.5
    snapshot_every: int = 0

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        for name in ("dt", "t_end", "cfl_guard"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if self.snapshot_every < 0:
            raise ValueError("snapshot_every must be >= 0")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))


def stability_bound(flow: Flow) -> float:
    """Largest stable explicit-RK4 step for the flow's linear symbol."""
    rate = flow.max_rate()
    return math.inf if rate == 0 else RK4_IMAG_BOUND / rate


def validate(flow: Flow, cfg: StepperConfig) -> None:
    if cfg.scheme == RK4:
        if flow.stiff:
            raise ValueError("dispersive symbol grows faster than |xi|; use the integrating-factor scheme")
        bound = cfg.cfl_guard * stability_bound(flow)
        if cfg.dt > bound:
            raise ValueError(f"dt = {cfg.dt:g} exceeds cfl_guard * stability bound = {bound:g}")


def rk4_step(flow: Flow, qh: np.ndarray, h: float) -> np.ndarray:
    f = flow.rhs_hat
    k1 = f(qh)
    k2 = f(qh + 0.5 * h * k1)
    k3 = f(qh + 0.5 * h * k2)
    k4 = f(qh + h * k3)
    return qh + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def if_rk4_step(flow: Flow, qh: np.ndarray, h: float) -> np.ndarray:
    """Lawson RK4: classical RK4 on ``exp(-tL) q``; the linear part is exact."""
    N, E = flow.nonlinear, flow.propagate
    half = 0.5 * h
    qhalf = E(qh, half)
    k1 = N(qh)
    k2 = N(qhalf + half * E(k1, half))
    k3 = N(qhalf + half * k2)
    k4 = N(E(qh, h) + h * E(k3, half))
    return E(qh, h) + h / 6 * (E(k1, h) + 2 * E(k2 + k3, half) + k4)


def step(flow: Flow, qh: np.ndarray, h: float, scheme: str = RK4_IF) -> np.ndarray:
    if scheme == RK4:
        return rk4_step(flow, qh, h)
    if scheme == RK4_IF:
        return if_rk4_step(flow, qh, h)
    raise ValueError(f"unknown scheme {scheme!r}")


def _check_finite(qh: np.ndarray, t: float) -> None:
    bad = ~np.isfinite(qh)
    if bad.any():
        mode = int(np.argwhere(bad)[0][-1])
        raise BlowUpError(f"non-finite spectral coefficient at mode {mode} (t = {t:g})", t, mode)


def integrate(
    flow: Flow,
    state,
    cfg: StepperConfig,
    callback: Callable[[float, np.ndarray], None] | None = None,
):
    """Advance ``state`` (physical) to ``cfg.t_end`` in ``cfg.n_steps`` equal steps.

    The step is adjusted to ``t_end / n_steps`` so the final time is hit exactly.
    ``callback(t, qh)`` sees the spectral state at ``t = 0`` and every
    ``snapshot_every`` steps (plus the final step).  Returns the physical state.
    """
    validate(flow, cfg)
    n = cfg.n_steps
    h = cfg.t_end / n
    qh = flow.to_spectral(state)
    _check_finite(qh, 0.0)
    if callback:
        callback(0.0, qh)
    # overflow is reported through BlowUpError, not floating-point warnings
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(1, n + 1):
            qh = step(flow, qh, h, cfg.scheme)
            t = i * h
            _check_finite(qh, t)
            if callback and ((cfg.snapshot_every and i % cfg.snapshot_every == 0) or i == n):
                callback(t, qh)
    return flow.to_physical(qh)
