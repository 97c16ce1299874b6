import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irs_spectrum.numerics import quadratic_form
from irs_spectrum.system import (LiftedChannels, ReflectionVector, SystemParams, align_phases,
                                 build_AB, db_to_linear, dbm_to_watts, equivalent_gain,
                                 extract_reflection, gains, lift, sinr_primary, sinr_secondary,
                                 su_rate, watts_to_dbm)

from conftest import cn, random_channels


def test_unit_conversions():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(-105.0) == pytest.approx(10 ** -13.5)
    assert watts_to_dbm(0.1) == pytest.approx(20.0)
    assert db_to_linear(20.0) == pytest.approx(100.0)


def test_params_validation(params):
    with pytest.raises(ValueError):
        SystemParams(p_p=0.0, p_max=1.0, sigma2_p=1.0, sigma2_s=1.0, gamma_th=1.0, n_elements=2)
    with pytest.raises(ValueError):
        SystemParams(p_p=1.0, p_max=1.0, sigma2_p=1.0, sigma2_s=1.0, gamma_th=1.0, n_elements=0)
    assert params.with_p_max(5.0).p_max == 5.0


def test_reflection_vector_convention():
    r = ReflectionVector.from_phases([np.pi / 2])
    assert r.coefficients == pytest.approx([1j])
    assert r.v == pytest.approx([-1j])
    with pytest.raises(ValueError):
        ReflectionVector([1.0, 0.5])


def test_lift_and_extract_roundtrip(rng):
    v = np.exp(1j * rng.uniform(0, 2 * np.pi, 7))
    for phi in (0.0, 1.3, -2.9):
        assert np.allclose(extract_reflection(np.exp(1j * phi) * lift(v)), v, atol=1e-12)
    assert np.allclose(ReflectionVector.from_lifted(lift(v)).v, v)


def test_sinr_formulas_by_hand(params):
    ch = random_channels(np.random.default_rng(1), 4)
    v = np.exp(1j * np.arange(4))
    refl = ReflectionVector(v)
    pp = abs(np.vdot(v, ch.cascaded("pp")) + ch.h_pp) ** 2
    sp = abs(np.vdot(v, ch.cascaded("sp")) + ch.h_sp) ** 2
    ss = abs(np.vdot(v, ch.cascaded("ss")) + ch.h_ss) ** 2
    ps = abs(np.vdot(v, ch.cascaded("ps")) + ch.h_ps) ** 2
    p_s = 0.7
    assert sinr_primary(refl, p_s, ch, params) == pytest.approx(params.p_p * pp / (p_s * sp + params.sigma2_p))
    assert sinr_secondary(refl, p_s, ch, params) == pytest.approx(p_s * ss / (params.p_p * ps + params.sigma2_s))


def test_no_irs_uses_direct_links_only(params):
    ch = random_channels(np.random.default_rng(2), 3)
    g = gains(ch, None)
    assert g["pp"] == pytest.approx(abs(ch.h_pp) ** 2)
    assert sinr_secondary(None, 0.0, ch, params) == 0.0
    with pytest.raises(ValueError):
        sinr_primary(None, -1.0, ch, params)


def test_equivalent_gain_matches_reflection_form(rng):
    ch = random_channels(rng, 5)
    v = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
    lc = LiftedChannels.from_channels(ch)
    for link in ("pp", "ps", "sp", "ss"):
        assert equivalent_gain(lift(v), lc[link]) == pytest.approx(gains(ch, v)[link], rel=1e-12)
    with pytest.raises(ValueError):
        equivalent_gain(np.ones(3), np.ones(4))


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 8), st.integers(0, 2**32 - 1), st.floats(0.0, 5.0))
def test_quadratic_form_ratios_reproduce_sinrs(n, seed, p_s):
    rng = np.random.default_rng(seed)
    ch = random_channels(rng, n)
    params = SystemParams(p_p=1.3, p_max=5.0, sigma2_p=0.2, sigma2_s=0.05, gamma_th=2.0, n_elements=n)
    v = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
    vt = np.exp(1j * rng.uniform(0, 2 * np.pi)) * lift(v)  # common rotation is irrelevant
    f = build_AB(ch, p_s, params)
    gp = quadratic_form(f.A_pp, vt) / quadratic_form(f.B_sp, vt)
    gs = quadratic_form(f.A_ss, vt) / quadratic_form(f.B_ps, vt)
    assert gp == pytest.approx(sinr_primary(v, p_s, ch, params), rel=1e-10)
    assert gs == pytest.approx(sinr_secondary(v, p_s, ch, params), rel=1e-10, abs=1e-300)


def test_build_ab_rejects_negative_power(params):
    with pytest.raises(ValueError):
        build_AB(random_channels(np.random.default_rng(0), 4), -0.1, params)


def test_su_rate():
    assert su_rate(0.0) == 0.0
    assert su_rate(3.0) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        su_rate(-0.1)


def test_align_phases_adds_paths_coherently(rng):
    h_c, h_d = cn(rng, 6), cn(rng)
    c = align_phases(h_c, h_d)
    total = c @ h_c + h_d
    assert abs(total) == pytest.approx(np.abs(h_c).sum() + abs(h_d), rel=1e-12)
    assert np.allclose(align_phases(np.ones(3), 0.0), 1.0)
