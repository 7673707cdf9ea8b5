import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morsejt.errors import BasisTooSmall, IndexOutOfBasis
from morsejt.morse_core import MorseParams, derive_params, eval_eigenfunction, levels
from morsejt.operators import commutator, on_mode
from morsejt.su11_algebra import (apply_differential, check_commutators, derived_b0_multiplier,
                                  differential_consistency, finite_difference_derivatives,
                                  ladder_matrices, phased_ladder_matrices, reduced_action,
                                  vibrational_hamiltonian, xi_commutator_identity, xi_label_action)


def test_ladder_elements_nu6(p6):
    lad = ladder_matrices(p6)
    assert lad.Bplus[1, 0] == pytest.approx(math.sqrt(5), abs=1e-15)
    np.testing.assert_allclose(np.diag(lad.B0), [2.5, 1.5, 0.5], atol=1e-15)
    ground = np.zeros(3)
    ground[0] = 1
    assert not np.any(lad.Bminus @ ground)
    assert np.array_equal(lad.Bminus, -lad.Bplus.T)
    assert np.array_equal(np.triu(lad.Bplus), np.zeros((3, 3)))


def test_ladder_too_small():
    with pytest.raises(BasisTooSmall):
        ladder_matrices(MorseParams.from_reduced(2.5, 1.0))


def test_commutator_example_nu6(p6):
    lad = ladder_matrices(p6)
    assert commutator(lad.Bplus, lad.Bminus)[1, 1] == pytest.approx(3.0, abs=1e-13)


@pytest.mark.parametrize("nu", [6.0, 11.3, 29.5])
def test_commutators(p_nu, nu):
    rep = check_commutators(p_nu(nu))
    assert rep["passed"], rep


def test_commutators_need_three_states():
    with pytest.raises(BasisTooSmall):
        check_commutators(MorseParams.from_reduced(4.5, 1.0))


def test_cross_mode_commute_exactly(p6):
    lad = ladder_matrices(p6)
    assert not np.any(commutator(on_mode(lad.Bplus, 1), on_mode(lad.Bminus, 2)))


def test_phased_equal_plain(p_nu):
    p = p_nu(11.3)
    a, b = phased_ladder_matrices(p), ladder_matrices(p)
    assert np.array_equal(a.Aplus, b.Bplus) and np.array_equal(a.Aminus, b.Bminus)
    assert np.array_equal(a.A0, b.B0)
    np.testing.assert_array_equal(a.s_spectrum, p.s(np.arange(p.size)))


def test_xi_label_bookkeeping():
    for n, label in [(0, 2.5), (3, 0.7)]:
        for sign in (1, -1):
            assert xi_commutator_identity(n, label, sign) == 0.0
    # a+ then a- returns to the same label pair
    assert xi_label_action("a-", *xi_label_action("a+", 1, 1.5)) == (1, 1.5)


def test_vibrational_hamiltonian(p6):
    h = vibrational_hamiltonian(p6).data
    assert h[0, 0] == pytest.approx(-6.25, abs=1e-14)
    assert h[1, 1] == pytest.approx(-4.25, abs=1e-14)
    assert h[3, 3] == h[1, 1]


@pytest.mark.parametrize("nu", [6.0, 11.3, 29.5])
def test_hv_identity(p_nu, nu):
    p = p_nu(nu)
    a0 = phased_ladder_matrices(p).A0
    lhs = -p.hbar_Omega * (on_mode(a0 @ a0, 1) + on_mode(a0 @ a0, 2))
    e = levels(p)
    assert np.max(np.abs(lhs - np.diag(np.add.outer(e, e).ravel()))) < 1e-12
    assert np.max(np.abs(vibrational_hamiltonian(p).data - lhs)) < 1e-12


@pytest.mark.parametrize("nu", [6.0, 11.3, 29.5])
def test_differential_raise_lower(p_nu, nu):
    p = p_nu(nu)
    for n in range(p.size):
        if n + 1 < p.size:
            assert differential_consistency(p, n, "b+").residual < 1e-6
        assert differential_consistency(p, n, "b-").residual < 1e-6


def test_lowering_annihilates_ground(p6):
    rep = differential_consistency(p6, 0, "b-")
    assert rep.target is None and rep.output_norm < 1e-12


def test_differential_shape_under_unit_normalization(p_nu):
    # with unit L2(dx) states the forms still map psi_n onto psi_{n+-1};
    # only the coefficient changes
    p = p_nu(11.3)
    for n in range(p.size - 1):
        rep = differential_consistency(p, n, "b+", normalization="numeric")
        assert rep.shape_residual < 1e-8 * max(1.0, rep.output_norm)


def test_differential_b0_is_not_diagonal(p6):
    # documented finding: b0 psi_n = (y/4 + nu - 1 - s_n) psi_n, not s_n psi_n
    rep = differential_consistency(p6, 1, "b0")
    assert rep.residual > 0.1
    y = np.linspace(0.5, 20, 7)
    act = reduced_action(p6, "b0", 1, y, "closed")
    psi = eval_eigenfunction(p6, 1, y, normalization="closed")
    np.testing.assert_allclose(act, derived_b0_multiplier(p6, 1, y) * psi, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("op,n", [("b+", 0), ("b+", 1), ("b-", 2), ("b0", 1)])
def test_reduced_action_matches_finite_differences(p6, op, n):
    # independent check of the closed-form derivative algebra
    t = np.linspace(math.log(0.2), math.log(30.0), 3001)
    y = np.exp(t)
    psi = eval_eigenfunction(p6, n, y, normalization="closed")
    d1, d2 = finite_difference_derivatives(psi, t, y)
    raw = apply_differential(p6, op, p6.s(n), psi, d1, d2, y)
    ref = reduced_action(p6, op, n, y, "closed")
    inner = slice(4, -4)
    scale = np.max(np.abs(ref))
    assert np.max(np.abs(raw[inner] - ref[inner])) < 1e-7 * scale


def test_differential_bounds(p6):
    with pytest.raises(IndexOutOfBasis):
        differential_consistency(p6, 2, "b+")
    with pytest.raises(IndexOutOfBasis):
        differential_consistency(p6, 3, "b0")


@given(st.floats(3.2, 40))
@settings(max_examples=40, deadline=None)
def test_bminus_antitranspose_property(nu):
    p = MorseParams.from_reduced(nu, 1.0)
    lad = ladder_matrices(p)
    assert np.array_equal(lad.Bminus, -lad.Bplus.T)
    if p.size >= 3:
        assert check_commutators(p)["passed"]


def test_physical_units_do_not_change_algebra():
    p = derive_params(2.0, 7.3, 1.4, 0.9)
    q = MorseParams.from_reduced(p.nu, 1.0)
    np.testing.assert_allclose(ladder_matrices(p).Bplus, ladder_matrices(q).Bplus, rtol=1e-13)
