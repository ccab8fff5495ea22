import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from gfch import models as M
from gfch.frames import FrameConstants, frame_parameters
from gfch.models import BoussinesqState, ModelId, ModelParams
from gfch.spectral import Grid, derivative, make_grid, periodic_gaussian, random_bandlimited

TWO_PI = 2 * np.pi
ZETA_MODELS = [ModelId.GFCH, ModelId.GCH, ModelId.MCH, ModelId.CLASSICAL_CH, ModelId.GFBBM]


def field(n=64, kmax=8, seed=0, amp=0.5, length=TWO_PI):
    g = make_grid(n, length)
    return g, random_bandlimited(g, np.random.default_rng(seed), kmax, amplitude=amp)


def fd8(f, h, order):
    """8th-order central differences on a periodic grid (independent of the FFT)."""
    if order == 1:
        c = {1: 4 / 5, 2: -1 / 5, 3: 4 / 105, 4: -1 / 280}
        return sum(w * (np.roll(f, -j) - np.roll(f, j)) for j, w in c.items()) / h
    c = {0: -205 / 72, 1: 8 / 5, 2: -1 / 5, 3: 8 / 315, 4: -1 / 560}
    return (c[0] * f + sum(w * (np.roll(f, -j) + np.roll(f, j)) for j, w in c.items() if j)) / h**2


# --- parameters and ids --------------------------------------------------------


@pytest.mark.parametrize(
    "kw", [dict(p=0), dict(p=1.5), dict(nu=0.0), dict(eps=0.0), dict(eps=1.5), dict(delta=-0.1)]
)
def test_model_params_validation(kw):
    with pytest.raises((ValueError, TypeError)):
        ModelParams(**kw)


def test_model_id_frames_and_parse():
    assert ModelId.parse("GfCH") is ModelId.GFCH
    assert ModelId.GFKDV.frame == "Y,S"
    assert ModelId.MOVING_FRAME.frame == "X,T"
    assert ModelId.GFCH_ORIGINAL.frame == "x,t"
    with pytest.raises(ValueError, match="GfBBM-original"):
        ModelId.parse("CH")


def test_every_model_has_a_flow():
    g = make_grid(32, 20.0)
    for model in ModelId:
        flow = M.make_flow(model, g, ModelParams())
        assert flow.grid is g


# --- Boussinesq ----------------------------------------------------------------


def test_boussinesq_zero_state():
    g = make_grid(32, TWO_PI)
    d = M.boussinesq_rhs(g, BoussinesqState(np.zeros(32), np.zeros(32)), ModelParams())
    assert np.all(d.u == 0) and np.all(d.u_t == 0)


def test_boussinesq_matches_finite_difference_residual():
    # ν = 1: (1 - D^2) u_tt = (u + u^2)_xx, checked with 8th-order FD on a fine grid
    g = make_grid(256, TWO_PI)
    u = 1e-2 * np.sin(g.nodes)
    d = M.boussinesq_rhs(g, BoussinesqState(u, np.zeros_like(u)), ModelParams(1, 1.0))
    res = d.u_t - fd8(d.u_t, g.dx, 2) - fd8(u + u**2, g.dx, 2)
    assert np.max(np.abs(res)) < 1e-6
    assert np.all(d.u == 0)


def test_boussinesq_rhs_returns_velocity():
    g, u = field()
    _, ut = field(seed=1)
    assert_allclose(M.boussinesq_rhs(g, BoussinesqState(u, ut), ModelParams()).u, ut)


# --- CH family -----------------------------------------------------------------


def test_gfch_zero_and_constant():
    g = make_grid(32, 10.0)
    for p in (1, 2, 3):
        for nu in (1.0, 1.5):
            pars = ModelParams(p, nu)
            assert np.all(M.gfch_rhs(g, np.zeros(32), pars) == 0)
            assert np.max(np.abs(M.gfch_rhs(g, np.full(32, 0.7), pars))) < 1e-14


def test_gfch_p1_nu1_is_classical_ch_on_bump():
    g = make_grid(128, 40.0)
    v = 0.8 / np.cosh(g.nodes - 20.0) ** 2
    a = M.gfch_rhs(g, v, ModelParams(1, 1.0))
    b = M.classical_ch_rhs(g, v, 6 / 5, 9 / 5)
    assert np.max(np.abs(a - b)) < 1e-12


def test_classical_ch_zero():
    g = make_grid(32, TWO_PI)
    assert np.all(M.classical_ch_rhs(g, np.zeros(32), 1.0, 1.0) == 0)


def test_classical_ch_sine_without_dispersion():
    # (1 - D^2) v_t = -3 v v_x = -(3/2) sin 2x  =>  v_t = -(3/10) sin 2x
    g = make_grid(32, TWO_PI)
    got = M.classical_ch_rhs(g, np.sin(g.nodes), 0.0, 0.0)
    assert_allclose(got, -0.3 * np.sin(2 * g.nodes), atol=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reduction_chain(seed):
    g, v = field(128, 16, seed)
    for p in (1, 2, 3):
        a, b = M.gfch_rhs(g, v, ModelParams(p, 1.0)), M.gch_rhs(g, v, p)
        assert np.max(np.abs(a - b)) < 1e-12 * max(1.0, np.max(np.abs(b)))
    b = M.mch_rhs(g, v)
    assert np.max(np.abs(M.gch_rhs(g, v, 2) - b)) < 1e-12 * max(1.0, np.max(np.abs(b)))
    b = M.classical_ch_rhs(g, v, 6 / 5, 9 / 5)
    assert np.max(np.abs(M.gch_rhs(g, v, 1) - b)) < 1e-12 * max(1.0, np.max(np.abs(b)))


def test_gch_and_mch_zero():
    g = make_grid(16, TWO_PI)
    assert np.all(M.gch_rhs(g, np.zeros(16), 2) == 0)
    assert np.all(M.mch_rhs(g, np.zeros(16)) == 0)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_mch_residual(seed):
    g, v = field(64, 8, seed)
    assert np.max(np.abs(M.mch_residual(g, v, M.mch_rhs(g, v)))) < 1e-11


# --- BBM -----------------------------------------------------------------------


def test_gfbbm_zero_and_constant():
    g = make_grid(32, 10.0)
    pars = ModelParams(2, 1.5)
    assert np.all(M.gfbbm_rhs(g, np.zeros(32), pars) == 0)
    assert np.max(np.abs(M.gfbbm_rhs(g, np.full(32, -0.3), pars))) < 1e-14


@pytest.mark.parametrize("nu", [1.0, 1.5, 2.0])
def test_bbm_kappa1_choice(nu):
    assert M.bbm_kappa1((4 / 5) ** (1 / (2 * nu)), nu) == pytest.approx(6 / 5, rel=1e-15)


@pytest.mark.parametrize("nu", [1.0, 1.5, 2.0])
@pytest.mark.parametrize("p", [1, 2])
def test_original_frame_forms_match_mapped_zeta_forms(nu, p):
    # w(x, t) = v(a (x - 3t/5), a t / 3)  =>  w_t = (a/3) v_tau - (3/5) w_x
    gx, w = field(128, 12, seed=p, amp=0.3)
    a = frame_parameters(nu).a
    gz = Grid(128, a * gx.length)
    pars = ModelParams(p, nu)
    wx = derivative(gx, w)
    for orig, zeta in ((M.gfch_original_rhs, M.gfch_rhs), (M.gfbbm_original_rhs, M.gfbbm_rhs)):
        got = orig(gx, w, pars)
        want = a / 3 * zeta(gz, w, pars) - 0.6 * wx
        assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.max(np.abs(want)))


# --- KdV and slow frame --------------------------------------------------------


def test_gfkdv_zero():
    g = make_grid(16, TWO_PI)
    assert np.all(M.gfkdv_rhs(g, np.zeros(16), ModelParams()) == 0)


def test_gfkdv_p1_nu1_is_kdv():
    g, U = field(64, 8, 3)
    eps, delta = 0.3, 0.2
    got = M.gfkdv_rhs(g, U, ModelParams(1, 1.0, eps, delta))
    want = -eps * U * derivative(g, U) - delta**2 / 2 * derivative(g, U, 3)
    # the dealiased square differs from the pointwise one only above n/2, absent here
    assert np.max(np.abs(got - want)) < 1e-12


def test_slow_frame_zero():
    g = make_grid(16, TWO_PI)
    assert np.all(M.slow_frame_rhs(g, np.zeros(16), ModelParams()) == 0)


def test_slow_frame_p1_nu1_term_by_term():
    g, U = field(64, 8, 4)
    eps, delta = 0.3, 0.4
    Uy, Uyyy = derivative(g, U), derivative(g, U, 3)
    want = -(
        eps / 2 * derivative(g, U * U)
        + delta**2 / 2 * Uyyy
        + eps * delta**2 / 4 * (3 * derivative(g, U * Uy, 2) - U * Uyyy)
    )
    got = M.slow_frame_rhs(g, U, ModelParams(1, 1.0, eps, delta))
    assert np.max(np.abs(got - want)) < 1e-12


def test_slow_frame_without_cross_terms_is_gfkdv():
    g, U = field(64, 8, 5)
    pars = ModelParams(2, 1.5, 0.4, 0.3)
    a = M.slow_frame_flow(g, pars, cross_terms=False).rhs(U)
    assert np.array_equal(a, M.gfkdv_rhs(g, U, pars))


# --- moving frame --------------------------------------------------------------


def test_moving_frame_zero():
    g = make_grid(16, TWO_PI)
    assert np.all(M.moving_frame_rhs(g, np.zeros(16), ModelParams()) == 0)


@pytest.mark.parametrize("p", [1, 2, 3])
@pytest.mark.parametrize("nu", [1.0, 1.5])
def test_moving_frame_canonical_constants_give_fixed_frame_model(p, nu):
    # with eps = delta = 1 the fixed-frame form coincides with gfCH
    g, V = field(64, 8, p, amp=0.3)
    pars = ModelParams(p, nu, 1.0, 1.0)
    got = M.moving_frame_rhs(g, V, pars, frame_parameters(nu))
    want = M.gfch_rhs(g, V, pars)
    assert np.max(np.abs(got - want)) < 1e-12 * max(1.0, np.max(np.abs(want)))


def test_moving_frame_general_constants_residual():
    g, V = field(64, 8, 9, amp=0.3)
    pars = ModelParams(2, 1.5, 0.3, 0.4)
    fc = FrameConstants(0.7, 0.45, 0.2)
    Vt = M.moving_frame_rhs(g, V, pars, fc)
    assert np.max(np.abs(M.moving_frame_residual(g, V, Vt, pars, fc))) < 1e-11


# --- standing properties -------------------------------------------------------


@pytest.mark.parametrize("model", ZETA_MODELS + [ModelId.GFCH_ORIGINAL, ModelId.GFBBM_ORIGINAL])
def test_constants_are_equilibria(model):
    g = make_grid(32, 10.0)
    flow = M.make_flow(model, g, ModelParams(2, 1.5))
    assert np.max(np.abs(flow.rhs(np.full(32, 0.4)))) < 1e-14


def _residual_cases(g, q, seed):
    pars = ModelParams(1 + seed % 3, (1.0, 1.5, 2.0)[seed % 3], 0.3, 0.4)
    p = pars.p
    return [
        (M.gfch_residual, M.gfch_rhs(g, q, pars), (pars,)),
        (M.gfch_original_residual, M.gfch_original_rhs(g, q, pars), (pars,)),
        (M.classical_ch_residual, M.classical_ch_rhs(g, q, 6 / 5, 9 / 5), ()),
        (M.gch_residual, M.gch_rhs(g, q, p), (p,)),
        (M.mch_residual, M.mch_rhs(g, q), ()),
        (M.gfbbm_residual, M.gfbbm_rhs(g, q, pars), (pars,)),
        (M.gfbbm_original_residual, M.gfbbm_original_rhs(g, q, pars), (pars,)),
        (M.gfkdv_residual, M.gfkdv_rhs(g, q, pars), (pars,)),
        (M.gfkdv_original_residual, M.gfkdv_original_rhs(g, q, pars), (pars,)),
        (M.slow_frame_residual, M.slow_frame_rhs(g, q, pars), (pars,)),
        (M.moving_frame_residual, M.moving_frame_rhs(g, q, pars), (pars,)),
    ]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_residual_self_consistency(seed):
    # n = 32 keeps the (n/2)^{2 nu} roundoff amplification of the nu = 2 cases below 1e-11
    g, q = field(32, 4, seed, amp=0.4)
    for residual, qt, extra in _residual_cases(g, q, seed):
        assert np.max(np.abs(residual(g, q, qt, *extra))) < 1e-11, residual.__name__


def test_boussinesq_residual_self_consistency():
    g, u = field(32, 4, 11, amp=0.4)
    pars = ModelParams(2, 1.5)
    d = M.boussinesq_rhs(g, BoussinesqState(u, np.zeros_like(u)), pars)
    assert np.max(np.abs(M.boussinesq_residual(g, u, d.u_t, pars))) < 1e-11


def test_non_finite_field_rejected():
    g = make_grid(16, TWO_PI)
    v = np.zeros(16)
    v[0] = np.inf
    with pytest.raises(ValueError):
        M.gfch_rhs(g, v, ModelParams())


# --- functionals and closed forms ---------------------------------------------


def test_linear_frequency_values():
    assert M.linear_frequency(1, 1.0) == pytest.approx(1 / np.sqrt(2), rel=1e-15)
    assert M.linear_frequency(2, 2.0) == pytest.approx(2 / np.sqrt(17), rel=1e-15)
    assert M.linear_frequency(2, 1.0) == pytest.approx(2 / np.sqrt(5), rel=1e-15)


@pytest.mark.parametrize("nu", [0.75, 1.0, 2.0])
def test_long_waves_are_nondispersive(nu):
    k = np.array([1e-2, 1e-4, 1e-6])
    ratio = M.linear_frequency(k, nu) / k
    assert np.all(np.diff(np.abs(ratio - 1)) <= 0)
    # 1 - omega/k ~ k^{2 nu} / 2
    assert np.all(np.abs(ratio - 1) <= k ** (2 * nu))


def test_bbm_energy_of_mode():
    g = make_grid(32, TWO_PI)
    v = np.cos(3 * g.nodes)
    # int cos^2 = pi, and (-D^2)^{nu/2} multiplies by 3^nu
    assert M.bbm_energy(g, v, 1.5) == pytest.approx(np.pi * (1 + 3**3), rel=1e-13)


@pytest.mark.parametrize("p", [1, 2, 3])
def test_solitary_wave_closed_form_satisfies_gfkdv(p):
    g = make_grid(1024, 160.0)
    A, c = M.solitary_wave_closed_form(p, 1.0, 1.0, 0.5)
    U = M.sech_profile(g.nodes, A, 0.5, p, 80.0)
    r = M.gfkdv_rhs(g, U, ModelParams(p, 1.0, 1.0, 1.0)) + c * derivative(g, U)
    assert np.max(np.abs(r)) < 1e-6 * A


def test_solitary_wave_p1_values():
    assert M.solitary_wave_closed_form(1, 1.0, 1.0, 0.5) == pytest.approx((1.5, 0.5), rel=1e-15)


def test_mass_and_l2_of_gaussian():
    g = make_grid(128, 40.0)
    f = periodic_gaussian(g, 20.0, 2.0)
    assert M.mass(g, f) == pytest.approx(2.0 * np.sqrt(np.pi), rel=1e-12)
    assert M.l2_energy(g, f) == pytest.approx(2.0 * np.sqrt(np.pi / 2), rel=1e-12)
