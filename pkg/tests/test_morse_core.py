import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import digamma

from morsejt.errors import IndexOutOfBasis, NoBoundStates, NonPositiveArgument, NonPositiveInput
from morsejt.morse_core import (MorseParams, confluent_f, confluent_f_series, derive_params,
                                energy_level, eval_eigenfunction, gauss_rule, inverse_y_matrix,
                                levels, morse_state, node_count, overlap, overlap_matrix,
                                x_matrix, x_of_y, y_of_x)
from oracles import dvr_levels, mp_matrix_element, scan_sign_changes


def test_derive_params_nu6(p6):
    assert p6.nu == pytest.approx(6.0, abs=1e-14)
    assert p6.hbar_Omega == pytest.approx(0.5, abs=1e-14)
    assert (p6.N_floor, p6.N_eff) == (2, 2)


def test_threshold_state_excluded():
    p = derive_params(1.0, 3.125, 1.0, 1.0)
    assert p.nu == pytest.approx(5.0)
    assert (p.N_floor, p.N_eff) == (2, 1)


def test_threshold_norm_diverges():
    # the s = 0 candidate has integrand y^{-1} near 0 under dy/(alpha y)
    with mp.workdps(20):
        tail = [mp.quad(lambda y: y ** -1 * mp.exp(-y), [10.0 ** -k, 1]) for k in (4, 8)]
    assert tail[1] - tail[0] > 9.0


def test_no_bound_states():
    with pytest.raises(NoBoundStates):
        derive_params(1.0, 0.1, 10.0, 1.0)


@pytest.mark.parametrize("bad", [dict(m=0), dict(V0=-1), dict(alpha=0), dict(hbar=-2)])
def test_non_positive_inputs(bad):
    kw = dict(m=1.0, V0=4.5, alpha=1.0, hbar=1.0) | bad
    with pytest.raises(NonPositiveInput):
        derive_params(**kw)


@given(st.floats(0.1, 50), st.floats(0.1, 500), st.floats(0.1, 5), st.floats(0.2, 3))
@settings(max_examples=60, deadline=None)
def test_frequency_identity(m, V0, alpha, hbar):
    try:
        p = derive_params(m, V0, alpha, hbar)
    except NoBoundStates:
        return
    assert p.hbar * p.Omega * p.nu == pytest.approx(p.hbar * p.omega_harm, rel=1e-14)
    assert p.s(p.N_eff) > 0
    assert p.N_eff in (p.N_floor, p.N_floor - 1)


def test_energy_levels_nu6(p6):
    assert energy_level(p6, 0) == pytest.approx(-3.125, abs=1e-14)
    assert energy_level(p6, 2) == pytest.approx(-0.125, abs=1e-14)
    with pytest.raises(IndexOutOfBasis):
        energy_level(p6, p6.N_eff + 1)


@pytest.mark.parametrize("nu", [6.0, 11.3, 29.5])
def test_levels_match_dvr(p_nu, nu):
    p = p_nu(nu)
    ref = dvr_levels(p.m, p.V0, p.alpha, p.hbar)
    assert len(ref) >= p.size
    np.testing.assert_allclose(levels(p), ref[: p.size], rtol=1e-6)


@given(st.floats(2.2, 80), st.data())
@settings(max_examples=40, deadline=None)
def test_energy_gap_identity(nu, data):
    p = MorseParams.from_reduced(nu, 0.7)
    n = data.draw(st.integers(0, p.N_eff))
    gap = energy_level(p, n) - energy_level(p, 0)
    assert gap == pytest.approx(p.hbar_Omega * n * (p.nu - 1 - n), rel=1e-12, abs=1e-12)
    assert np.all(np.diff(levels(p)) > 0) and np.all(levels(p) < 0)


def test_confluent_polynomial_forms():
    y = np.linspace(0.01, 30, 50)
    for n in range(7):
        np.testing.assert_allclose(confluent_f(n, 3.7, y), confluent_f_series(n, 3.7, y),
                                   rtol=1e-10, atol=1e-12)
    ref = [float(mp.hyp1f1(-4, 3.7, v)) for v in y[:5]]
    np.testing.assert_allclose(confluent_f(4, 3.7, y[:5]), ref, rtol=1e-12)


def test_ground_state_shape(p6):
    y = np.array([0.5, 2.0, 7.0])
    psi = eval_eigenfunction(p6, 0, y)
    ratio = psi / (y ** 2.5 * np.exp(-y / 2))
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-13)


def test_eigenfunction_root_and_domain(p6):
    assert abs(eval_eigenfunction(p6, 1, 4.0)) < 1e-14
    with pytest.raises(NonPositiveArgument):
        eval_eigenfunction(p6, 0, 0.0)
    with pytest.raises(IndexOutOfBasis):
        eval_eigenfunction(p6, 3, 1.0)


def test_node_count(p_nu, p6):
    y = np.geomspace(1e-3, 200, 40001)
    assert scan_sign_changes(lambda v: eval_eigenfunction(p6, 2, v), y) == 2
    p = p_nu(29.5)
    for n in range(6):
        assert node_count(p, n) == n


def test_gauss_rule_moments():
    a = 1.7
    rule = gauss_rule(a, 48)
    for k in range(40):
        exact = math.exp(math.lgamma(a + k + 1) - math.lgamma(a + 1))
        assert rule.expect(rule.nodes ** k) == pytest.approx(exact, rel=1e-10)
    assert np.all(rule.weights > 0)


def test_overlap_nu6(p6):
    assert overlap(p6, 0, 0) == pytest.approx(1.0, abs=1e-8)
    assert abs(overlap(p6, 0, 1)) < 1e-8


@pytest.mark.parametrize("nu", [6.0, 11.3, 29.5])
def test_gram_identity(p_nu, nu):
    p = p_nu(nu)
    assert np.max(np.abs(overlap_matrix(p) - np.eye(p.size))) < 1e-8


def test_gram_matches_mpmath(p_nu):
    p = p_nu(11.3)
    for n, n2 in [(0, 3), (2, 5), (5, 5)]:
        ref = mp_matrix_element(p.nu, p.alpha, n, n2, lambda y: 1)
        assert overlap(p, n, n2) == pytest.approx(ref, abs=1e-10)


def test_closed_form_normalization_ratio(p6):
    # c_closed is the normalization under plain dy, not dy/(alpha y)
    ratios = [morse_state(p6, n).closed_ratio for n in range(3)]
    np.testing.assert_allclose(ratios, [1 / math.sqrt(5), 1 / math.sqrt(3), 1.0], rtol=1e-10)


def test_x_matrix_ground_digamma(p6):
    x = x_matrix(p6).data
    assert x[0, 0] == pytest.approx(math.log(6) - digamma(5), abs=1e-12)
    assert x[0, 0] == pytest.approx(0.285642, abs=1e-6)
    assert np.array_equal(x, x.T)


def test_x_matrix_matches_mpmath(p_nu):
    p = p_nu(11.3)
    x = x_matrix(p).data
    for n, n2 in [(0, 1), (1, 4), (3, 3), (0, 5)]:
        ref = mp_matrix_element(p.nu, p.alpha, n, n2, lambda y: (mp.log(p.nu) - mp.log(y)) / p.alpha)
        assert x[n, n2] == pytest.approx(ref, abs=1e-10)


def test_inverse_y_ground(p6):
    assert inverse_y_matrix(p6).data[0, 0] == pytest.approx(0.25, abs=1e-12)


def test_x01_harmonic_limit(p_nu):
    p = p_nu(800)
    x01 = x_matrix(p, 2).data[0, 1]
    assert abs(x01 - p.x_scale) / p.x_scale < 1.0 / p.nu


def test_coordinate_maps(p6):
    x = np.linspace(-1, 3, 9)
    np.testing.assert_allclose(x_of_y(p6, y_of_x(p6, x)), x, atol=1e-14)
