"""Right-hand sides for the Boussinesq parent and its unidirectional reductions.

Every model is written as a semi-discrete flow ``dq/dt = L q + N(q)`` in
spectral space (:class:`Flow`).  Terms of the form ``(-D^2)^nu q_t`` are moved
to the left and inverted mode by mode; the factor ``1 + alpha |xi|**(2 nu)``
is at least one, so the inversion is always stable.

Frames: ``x,t`` for the parent and the original-frame models, ``Y,S`` for the
slow-frame and KdV flows, ``X,T`` for the generic moving frame and
``zeta,tau`` for the CH family and BBM.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .frames import FrameConstants, frame_parameters
from .spectral import (
    Grid,
    check_field,
    check_nu,
    check_power,
    dealiased_product,
    dealiased_product_hat,
    derivative,
    fractional_laplacian,
)


@dataclass(frozen=True)
class ModelParams:
    p: int = 1
    nu: float = 1.0
    eps: float = 0.1
    delta: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "p", check_power(self.p))
        object.__setattr__(self, "nu", check_nu(self.nu, warn=True))
        for name in ("eps", "delta"):
            value = float(getattr(self, name))
            if not (0 < value <= 1):
                raise ValueError(f"{name} must lie in (0, 1], got {value}")
            object.__setattr__(self, name, value)


class ModelId(str, Enum):
    BOUSSINESQ = "Boussinesq"
    SLOW_FRAME = "SlowFrameUnidirectional"
    MOVING_FRAME = "MovingFrameGeneric"
    GFCH = "GfCH"
    GFCH_ORIGINAL = "GfCH-original"
    GCH = "GCH"
    MCH = "MCH"
    CLASSICAL_CH = "ClassicalCH"
    GFBBM = "GfBBM"
    GFBBM_ORIGINAL = "GfBBM-original"
    GFKDV = "GfKdV"
    GFKDV_ORIGINAL = "GfKdV-original"

    @property
    def frame(self) -> str:
        return _FRAMES[self]

    @classmethod
    def parse(cls, name: str) -> "ModelId":
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown model {name!r}; valid models: {valid}") from None


_FRAMES = {
    ModelId.BOUSSINESQ: "x,t",
    ModelId.SLOW_FRAME: "Y,S",
    ModelId.MOVING_FRAME: "X,T",
    ModelId.GFCH: "zeta,tau",
    ModelId.GFCH_ORIGINAL: "x,t",
    ModelId.GCH: "zeta,tau",
    ModelId.MCH: "zeta,tau",
    ModelId.CLASSICAL_CH: "zeta,tau",
    ModelId.GFBBM: "zeta,tau",
    ModelId.GFBBM_ORIGINAL: "x,t",
    ModelId.GFKDV: "Y,S",
    ModelId.GFKDV_ORIGINAL: "x,t",
}


@dataclass
class BoussinesqState:
    u: np.ndarray
    u_t: np.ndarray


class Flow:
    """Scalar evolution ``q_t = symbol * q + nonlinear(q)`` on rfft modes.

    ``stiff`` marks flows whose linear symbol grows faster than ``|xi|``;
    those must be advanced with the integrating-factor scheme.
    """

    def __init__(self, grid: Grid, symbol: np.ndarray, nonlinear: Callable[[np.ndarray], np.ndarray] | None = None, stiff: bool = False):
        self.grid = grid
        self.symbol = symbol
        self._nonlinear = nonlinear
        self.stiff = stiff

    def to_spectral(self, q: np.ndarray) -> np.ndarray:
        return self.grid.to_spectral(check_field(self.grid, q))

    def to_physical(self, qh: np.ndarray) -> np.ndarray:
        return self.grid.to_physical(qh)

    def linear(self, qh: np.ndarray) -> np.ndarray:
        return self.symbol * qh

    def propagate(self, qh: np.ndarray, h: float) -> np.ndarray:
        """Exact solution operator of the linear part over time ``h``."""
        return np.exp(self.symbol * h) * qh

    def nonlinear(self, qh: np.ndarray) -> np.ndarray:
        if self._nonlinear is None:
            return np.zeros_like(qh)
        return self._nonlinear(qh)

    def rhs_hat(self, qh: np.ndarray) -> np.ndarray:
        return self.linear(qh) + self.nonlinear(qh)

    def rhs(self, q: np.ndarray) -> np.ndarray:
        return self.to_physical(self.rhs_hat(self.to_spectral(q)))

    def max_rate(self) -> float:
        return float(np.max(np.abs(self.symbol)))


class BoussinesqFlow(Flow):
    """``u_tt = -xi^2 (u + u^{p+1})^ / (1 + |xi|^{2 nu})`` as a first-order system.

    Spectral state has shape ``(2, n/2 + 1)``: rows are ``u`` and ``u_t``.
    """

    def __init__(self, grid: Grid, p: int, nu: float):
        self.p = check_power(p)
        self.nu = check_nu(nu)
        self.helm = 1.0 + grid.frac_symbol(self.nu)
        self.omega2 = grid.k**2 / self.helm
        self.omega = np.sqrt(self.omega2)
        super().__init__(grid, symbol=None, stiff=False)

    def to_spectral(self, state) -> np.ndarray:
        if isinstance(state, BoussinesqState):
            state = (state.u, state.u_t)
        u, ut = state
        return np.stack([self.grid.to_spectral(check_field(self.grid, u)), self.grid.to_spectral(check_field(self.grid, ut))])

    def to_physical(self, qh: np.ndarray) -> BoussinesqState:
        return BoussinesqState(self.grid.to_physical(qh[0]), self.grid.to_physical(qh[1]))

    def linear(self, qh):
        return np.stack([qh[1], -self.omega2 * qh[0]])

    def propagate(self, qh, h):
        wh = self.omega * h
        cos = np.cos(wh)
        # sin(w h) / w with the w -> 0 limit h
        sinc = h * np.sinc(wh / np.pi)
        return np.stack([cos * qh[0] + sinc * qh[1], -self.omega2 * sinc * qh[0] + cos * qh[1]])

    def nonlinear(self, qh):
        power = dealiased_product_hat(self.grid, *([qh[0]] * (self.p + 1)))
        return np.stack([np.zeros_like(qh[0]), -self.grid.k**2 * power / self.helm])

    def rhs(self, state) -> BoussinesqState:
        return self.to_physical(self.rhs_hat(self.to_spectral(state)))

    def max_rate(self) -> float:
        return float(np.max(self.omega))


def _power_hat(grid, qh, p):
    return dealiased_product_hat(grid, *([qh] * (p + 1)))


def _ch_type_flow(grid: Grid, p: int, nu: float, helm: float, advect: float, steepen: float, nl_disp: float, theta: float) -> Flow:
    """Generic CH-type flow

    ``(1 + helm m) q_t = -[advect q_x + steepen (q^{p+1})_x
    + nl_disp (theta m(q^p q_x) + q^p m q_x)]`` with ``m = (-D^2)^nu``.
    """
    m = grid.frac_symbol(nu)
    ik = grid.ik
    denom = 1.0 + helm * m

    def nonlinear(qh):
        out = steepen * ik * _power_hat(grid, qh, p)
        if nl_disp:
            qxh = ik * qh
            out = out + nl_disp * (
                theta * m * dealiased_product_hat(grid, *([qh] * p), qxh)
                + dealiased_product_hat(grid, *([qh] * p), m * qxh)
            )
        return -out / denom

    return Flow(grid, -advect * ik / denom, nonlinear)


def gfch_flow(grid: Grid, params: ModelParams) -> Flow:
    """Generalized fractional CH in ``(zeta, tau)``."""
    p = params.p
    return _ch_type_flow(grid, p, params.nu, 1.0, 6 / 5, 3 / 2, 3 * (p + 1) / 10, 2.0)


def gfch_original_flow(grid: Grid, params: ModelParams) -> Flow:
    """Generalized fractional CH written back in the physical frame ``(x, t)``."""
    p, nu = params.p, params.nu
    m = grid.frac_symbol(nu)
    ik = grid.ik
    denom = 1.0 + 1.25 * m
    inner = _ch_type_flow(grid, p, nu, 1.25, 0.0, 0.5, (p + 1) / 8, 2.0)
    return Flow(grid, -ik * (1.0 + 0.75 * m) / denom, inner.nonlinear)


def gfbbm_flow(grid: Grid, params: ModelParams, kappa1: float = 6 / 5) -> Flow:
    return _ch_type_flow(grid, params.p, params.nu, 1.0, kappa1, 3 / 2, 0.0, 0.0)


def gfbbm_original_flow(grid: Grid, params: ModelParams) -> Flow:
    m = grid.frac_symbol(params.nu)
    ik = grid.ik
    denom = 1.0 + 1.25 * m
    inner = _ch_type_flow(grid, params.p, params.nu, 1.25, 0.0, 0.5, 0.0, 0.0)
    return Flow(grid, -ik * (1.0 + 0.75 * m) / denom, inner.nonlinear)


def moving_frame_flow(grid: Grid, params: ModelParams, fc: FrameConstants | None = None) -> Flow:
    """Moving-frame model with free ``(a, b, c)``, after the BBM-type exchange."""
    fc = fc or frame_parameters(params.nu)
    a, b, c = fc.a, fc.b, fc.c
    p, nu, eps, delta = params.p, params.nu, params.eps, params.delta
    epsp, d2nu = eps**p, delta ** (2 * nu)
    m = grid.frac_symbol(nu)
    ik = grid.ik
    helm = d2nu * a ** (2 * nu + 1) / (2 * b)
    denom = 1.0 + helm * m
    kbr = (p + 1) * epsp * d2nu * a ** (2 * nu + 1) / (8 * c)
    theta = 3 - 2 * a / b

    def nonlinear(qh):
        qxh = ik * qh
        vp = [qh] * p
        bracket = theta * m * dealiased_product_hat(grid, *vp, qxh) - dealiased_product_hat(grid, *vp, m * qxh)
        return (-(a * epsp / (2 * c)) * ik * _power_hat(grid, qh, p) + kbr * bracket) / denom

    return Flow(grid, -(b / c) * ik / denom, nonlinear)


def slow_frame_flow(grid: Grid, params: ModelParams, cross_terms: bool = True) -> Flow:
    """Unidirectional model in the slow frame; ``cross_terms=False`` gives gfKdV."""
    p, nu = params.p, params.nu
    epsp, d2nu = params.eps**p, params.delta ** (2 * nu)
    m = grid.frac_symbol(nu)
    ik = grid.ik
    kbr = epsp * d2nu * (p + 1) / 8

    def nonlinear(qh):
        out = -(epsp / 2) * ik * _power_hat(grid, qh, p)
        if cross_terms:
            qxh = ik * qh
            vp = [qh] * p
            out = out + kbr * (3 * m * dealiased_product_hat(grid, *vp, qxh) - dealiased_product_hat(grid, *vp, m * qxh))
        return out

    return Flow(grid, (d2nu / 2) * m * ik, nonlinear, stiff=True)


def gfkdv_flow(grid: Grid, params: ModelParams) -> Flow:
    return slow_frame_flow(grid, params, cross_terms=False)


def gfkdv_original_flow(grid: Grid, params: ModelParams) -> Flow:
    p = params.p
    m = grid.frac_symbol(params.nu)
    ik = grid.ik

    def nonlinear(qh):
        return -0.5 * ik * _power_hat(grid, qh, p)

    return Flow(grid, -ik + 0.5 * m * ik, nonlinear, stiff=True)


def classical_ch_flow(grid: Grid, kappa1: float, kappa2: float) -> Flow:
    """``v_t + k1 v_x + 3 v v_x - v_xxt = k2 (2 v_x v_xx + v v_xxx)``."""
    k2 = grid.k**2
    ik = grid.ik
    denom = 1.0 + k2

    def nonlinear(vh):
        vx, vxx, vxxx = ik * vh, -k2 * vh, ik**3 * vh
        rhs = -3 * dealiased_product_hat(grid, vh, vx) + kappa2 * (
            2 * dealiased_product_hat(grid, vx, vxx) + dealiased_product_hat(grid, vh, vxxx)
        )
        return rhs / denom

    return Flow(grid, -kappa1 * ik / denom, nonlinear)


def gch_flow(grid: Grid, p: int) -> Flow:
    """Generalized CH written with ordinary derivatives."""
    p = check_power(p)
    k2 = grid.k**2
    ik = grid.ik
    denom = 1.0 + k2
    coef = 3 * (p + 1) / 10

    def nonlinear(vh):
        vp = [vh] * p
        vpvx = dealiased_product_hat(grid, *vp, ik * vh)
        rhs = -1.5 * ik * _power_hat(grid, vh, p) + coef * (
            2 * (-k2) * vpvx + dealiased_product_hat(grid, *vp, ik**3 * vh)
        )
        return rhs / denom

    return Flow(grid, -1.2 * ik / denom, nonlinear)


def mch_flow(grid: Grid) -> Flow:
    """Modified CH: ``v_t + 6/5 v_x + 9/2 v^2 v_x - v_xxt = 9/10 [2 (v^2 v_x)_xx + v^2 v_xxx]``."""
    k2 = grid.k**2
    ik = grid.ik
    denom = 1.0 + k2

    def nonlinear(vh):
        v2vx = dealiased_product_hat(grid, vh, vh, ik * vh)
        v2vxxx = dealiased_product_hat(grid, vh, vh, ik**3 * vh)
        rhs = -4.5 * v2vx + 0.9 * (-2 * k2 * v2vx + v2vxxx)
        return rhs / denom

    return Flow(grid, -1.2 * ik / denom, nonlinear)


# --- physical-space right-hand sides -------------------------------------------------


def boussinesq_rhs(grid: Grid, state: BoussinesqState, params: ModelParams) -> BoussinesqState:
    return BoussinesqFlow(grid, params.p, params.nu).rhs(state)


def gfch_rhs(grid: Grid, v: np.ndarray, params: ModelParams) -> np.ndarray:
    return gfch_flow(grid, params).rhs(v)


def gfch_original_rhs(grid: Grid, w: np.ndarray, params: ModelParams) -> np.ndarray:
    return gfch_original_flow(grid, params).rhs(w)


def classical_ch_rhs(grid: Grid, v: np.ndarray, kappa1: float, kappa2: float) -> np.ndarray:
    return classical_ch_flow(grid, kappa1, kappa2).rhs(v)


def gch_rhs(grid: Grid, v: np.ndarray, p: int) -> np.ndarray:
    return gch_flow(grid, p).rhs(v)


def mch_rhs(grid: Grid, v: np.ndarray) -> np.ndarray:
    return mch_flow(grid).rhs(v)


def gfbbm_rhs(grid: Grid, v: np.ndarray, params: ModelParams, kappa1: float = 6 / 5) -> np.ndarray:
    return gfbbm_flow(grid, params, kappa1).rhs(v)


def gfbbm_original_rhs(grid: Grid, w: np.ndarray, params: ModelParams) -> np.ndarray:
    return gfbbm_original_flow(grid, params).rhs(w)


def gfkdv_rhs(grid: Grid, U: np.ndarray, params: ModelParams) -> np.ndarray:
    return gfkdv_flow(grid, params).rhs(U)


def gfkdv_original_rhs(grid: Grid, w: np.ndarray, params: ModelParams) -> np.ndarray:
    return gfkdv_original_flow(grid, params).rhs(w)


def slow_frame_rhs(grid: Grid, U: np.ndarray, params: ModelParams) -> np.ndarray:
    return slow_frame_flow(grid, params).rhs(U)


def moving_frame_rhs(grid: Grid, V: np.ndarray, params: ModelParams, fc: FrameConstants | None = None) -> np.ndarray:
    return moving_frame_flow(grid, params, fc).rhs(V)


def bbm_kappa1(a: float, nu: float) -> float:
    """``kappa1 = 3 a^{2 nu} / 2``; ``a = (4/5)^{1/(2 nu)}`` gives 6/5."""
    return 1.5 * a ** (2 * nu)


def make_flow(model: ModelId | str, grid: Grid, params: ModelParams, **kw) -> Flow:
    """Build the flow for ``model``.

    Extra keywords: ``kappa1``/``kappa2`` (ClassicalCH, GfBBM) and ``fc``
    (MovingFrameGeneric).
    """
    model = ModelId.parse(model) if isinstance(model, str) else model
    if model is ModelId.BOUSSINESQ:
        return BoussinesqFlow(grid, params.p, params.nu)
    if model is ModelId.SLOW_FRAME:
        return slow_frame_flow(grid, params)
    if model is ModelId.MOVING_FRAME:
        return moving_frame_flow(grid, params, kw.get("fc"))
    if model is ModelId.GFCH:
        return gfch_flow(grid, params)
    if model is ModelId.GFCH_ORIGINAL:
        return gfch_original_flow(grid, params)
    if model is ModelId.GCH:
        return gch_flow(grid, params.p)
    if model is ModelId.MCH:
        return mch_flow(grid)
    if model is ModelId.CLASSICAL_CH:
        return classical_ch_flow(grid, kw.get("kappa1", 6 / 5), kw.get("kappa2", 9 / 5))
    if model is ModelId.GFBBM:
        return gfbbm_flow(grid, params, kw.get("kappa1", 6 / 5))
    if model is ModelId.GFBBM_ORIGINAL:
        return gfbbm_original_flow(grid, params)
    if model is ModelId.GFKDV:
        return gfkdv_flow(grid, params)
    return gfkdv_original_flow(grid, params)


# --- residuals of the displayed equations ---------------------------------------------
#
# Each residual reassembles an equation term by term in physical space from a
# field and a candidate time derivative, without going through the flows above.


def _d(grid, f, order=1):
    return derivative(grid, f, order)


def _m(grid, f, nu):
    return fractional_laplacian(grid, f, nu)


def _pow(grid, f, k):
    return dealiased_product(grid, *([f] * k)) if k > 1 else f


def gfch_residual(grid, v, v_t, params):
    p, nu = params.p, params.nu
    vx = _d(grid, v)
    vp = _pow(grid, v, p)
    lhs = v_t + 1.2 * vx + 1.5 * _d(grid, _pow(grid, v, p + 1)) + _m(grid, v_t, nu)
    rhs = -0.3 * (p + 1) * (2 * _m(grid, dealiased_product(grid, vp, vx), nu) + dealiased_product(grid, vp, _m(grid, vx, nu)))
    return lhs - rhs


def gfch_original_residual(grid, w, w_t, params):
    p, nu = params.p, params.nu
    wx = _d(grid, w)
    wp = _pow(grid, w, p)
    lhs = w_t + wx + 0.5 * _d(grid, _pow(grid, w, p + 1)) + 0.75 * _m(grid, wx, nu) + 1.25 * _m(grid, w_t, nu)
    rhs = -(p + 1) / 8 * (2 * _m(grid, dealiased_product(grid, wp, wx), nu) + dealiased_product(grid, wp, _m(grid, wx, nu)))
    return lhs - rhs


def classical_ch_residual(grid, v, v_t, kappa1=6 / 5, kappa2=9 / 5):
    vx, vxx, vxxx = _d(grid, v), _d(grid, v, 2), _d(grid, v, 3)
    lhs = v_t + kappa1 * vx + 3 * dealiased_product(grid, v, vx) - _d(grid, v_t, 2)
    rhs = kappa2 * (2 * dealiased_product(grid, vx, vxx) + dealiased_product(grid, v, vxxx))
    return lhs - rhs


def gch_residual(grid, v, v_t, p):
    vx = _d(grid, v)
    vp = _pow(grid, v, p)
    lhs = v_t + 1.2 * vx + 1.5 * _d(grid, _pow(grid, v, p + 1)) - _d(grid, v_t, 2)
    rhs = 0.3 * (p + 1) * (2 * _d(grid, dealiased_product(grid, vp, vx), 2) + dealiased_product(grid, vp, _d(grid, v, 3)))
    return lhs - rhs


def mch_residual(grid, v, v_t):
    vx = _d(grid, v)
    v2 = dealiased_product(grid, v, v)
    lhs = v_t + 1.2 * vx + 4.5 * dealiased_product(grid, v2, vx) - _d(grid, v_t, 2)
    rhs = 0.9 * (2 * _d(grid, dealiased_product(grid, v2, vx), 2) + dealiased_product(grid, v2, _d(grid, v, 3)))
    return lhs - rhs


def gfbbm_residual(grid, v, v_t, params, kappa1=6 / 5):
    return v_t + kappa1 * _d(grid, v) + 1.5 * _d(grid, _pow(grid, v, params.p + 1)) + _m(grid, v_t, params.nu)


def gfbbm_original_residual(grid, w, w_t, params):
    wx = _d(grid, w)
    return (
        w_t + wx + 0.5 * _d(grid, _pow(grid, w, params.p + 1))
        + 0.75 * _m(grid, wx, params.nu) + 1.25 * _m(grid, w_t, params.nu)
    )


def gfkdv_residual(grid, U, U_s, params):
    p, nu = params.p, params.nu
    return U_s + params.eps**p / 2 * _d(grid, _pow(grid, U, p + 1)) - params.delta ** (2 * nu) / 2 * _m(grid, _d(grid, U), nu)


def gfkdv_original_residual(grid, w, w_t, params):
    wx = _d(grid, w)
    return w_t + wx + 0.5 * _d(grid, _pow(grid, w, params.p + 1)) - 0.5 * _m(grid, wx, params.nu)


def slow_frame_residual(grid, U, U_s, params):
    p, nu = params.p, params.nu
    epsp, d2nu = params.eps**p, params.delta ** (2 * nu)
    Ux = _d(grid, U)
    Up = _pow(grid, U, p)
    bracket = 3 * _m(grid, dealiased_product(grid, Up, Ux), nu) - dealiased_product(grid, Up, _m(grid, Ux, nu))
    return U_s + epsp / 2 * _d(grid, _pow(grid, U, p + 1)) - d2nu / 2 * _m(grid, Ux, nu) - epsp * d2nu * (p + 1) / 8 * bracket


def moving_frame_residual(grid, V, V_t, params, fc=None):
    fc = fc or frame_parameters(params.nu)
    a, b, c = fc.a, fc.b, fc.c
    p, nu = params.p, params.nu
    epsp, d2nu = params.eps**p, params.delta ** (2 * nu)
    Vx = _d(grid, V)
    Vp = _pow(grid, V, p)
    bracket = (3 - 2 * a / b) * _m(grid, dealiased_product(grid, Vp, Vx), nu) - dealiased_product(grid, Vp, _m(grid, Vx, nu))
    return (
        V_t + b / c * Vx + a * epsp / (2 * c) * _d(grid, _pow(grid, V, p + 1))
        + d2nu * a ** (2 * nu + 1) / (2 * b) * _m(grid, V_t, nu)
        - (p + 1) * epsp * d2nu * a ** (2 * nu + 1) / (8 * c) * bracket
    )


def boussinesq_residual(grid, u, u_tt, params):
    """Residual of ``u_tt - u_xx + (-D^2)^nu u_tt - (u^{p+1})_xx``."""
    return u_tt - _d(grid, u, 2) + _m(grid, u_tt, params.nu) - _d(grid, _pow(grid, u, params.p + 1), 2)


# --- conserved functionals ---------------------------------------------------------


def mass(grid: Grid, q: np.ndarray) -> float:
    return grid.integrate(q)


def l2_energy(grid: Grid, q: np.ndarray) -> float:
    return grid.integrate(q * q)


def bbm_energy(grid: Grid, q: np.ndarray, nu: float) -> float:
    """``int v^2 + |(-D^2)^{nu/2} v|^2``."""
    half = fractional_laplacian(grid, q, nu / 2)
    return grid.integrate(q * q + half * half)


def linear_frequency(k, nu: float):
    """Boussinesq dispersion relation ``omega = k / sqrt(1 + |k|^{2 nu})``."""
    k = np.asarray(k, dtype=float)
    return k / np.sqrt(1.0 + np.abs(k) ** (2 * nu))


def solitary_wave_closed_form(p: int, eps: float, delta: float, K: float):
    """Closed-form ``(A, c)`` of ``A sech^{2/p}(K (Y - c S))`` for gfKdV at ``nu = 1``."""
    q = 2.0 / p
    alpha, beta = eps**p / 2, delta**2 / 2
    c = beta * q * q * K * K
    A = (beta * q * (q + 1) * K * K / alpha) ** (1.0 / p)
    return A, c


def sech_profile(Y, A, K, p, center=0.0):
    return A / np.cosh(K * (np.asarray(Y) - center)) ** (2.0 / p)


def is_finite(x) -> bool:
    return bool(np.all(np.isfinite(x)))

