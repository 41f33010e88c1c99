import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexfloquet.core import Vorticities, whole_plane_gradient
from vortexfloquet.equilibria import (equilibrium_residual, frequency_of, make_equilateral_triangle,
                                      make_gamma_zero_rotor, make_rhombus, make_vortex_pair, predicted_multipliers,
                                      relative_equilibrium, rhombus_kappa)
from vortexfloquet.errors import InvalidInputError

nonzero = st.floats(-3, 3).filter(lambda g: abs(g) > 0.1)


@settings(max_examples=40, deadline=None)
@given(nonzero, nonzero, st.floats(0.2, 3.0))
def test_pair_is_relative_equilibrium(g1, g2, D):
    if abs(g1 + g2) < 0.1:
        return
    eq = make_vortex_pair(g1, g2, D)
    assert eq.nu == pytest.approx((g1 + g2) / (np.pi * D * D))
    assert eq.residual < 1e-10 * max(1.0, abs(eq.nu))
    assert np.allclose(eq.center_of_vorticity, 0.0, atol=1e-12)


def test_pair_identity_grad_plus_nu_mass():
    eq = make_vortex_pair(1.0, 2.0, 0.7)
    M = eq.vorticities.mass_diag
    assert np.allclose(whole_plane_gradient(eq.z0, eq.vorticities) + eq.nu * M * eq.z0, 0.0, atol=1e-13)


@pytest.mark.parametrize("gam", [(1, 2, 3), (1, 1, 0.1), (1, 1, -0.6), (1, 1, -0.5), (2, -1, 3)])
def test_triangle_frequency_is_gamma_over_three(gam):
    eq = make_equilateral_triangle(*gam)
    assert eq.nu == pytest.approx(sum(gam) / 3.0, rel=1e-12)
    assert eq.residual < 1e-12
    p = eq.z0.reshape(-1, 2)
    d = [np.linalg.norm(p[i] - p[j]) for i, j in ((0, 1), (1, 2), (0, 2))]
    assert np.ptp(d) < 1e-12


def test_triangle_flags():
    assert "LRE_stable_expected" in make_equilateral_triangle(1, 2, 3).flags
    assert "L_zero" in make_equilateral_triangle(1, 1, -0.5).flags
    assert "spectrally_unstable_expected" in make_equilateral_triangle(1, 1, -0.6).flags
    assert "equal_vorticities" in make_equilateral_triangle(1, 1, 1).flags


def test_triangle_predicted_multipliers():
    mult = predicted_multipliers(make_equilateral_triangle(1, 2, 3))
    expected = np.exp(np.array([1j, -1j]) * np.pi * np.sqrt(11 / 3))
    assert np.allclose(np.sort_complex(mult), np.sort_complex(expected), atol=1e-14)


@pytest.mark.parametrize("y", [0.8, 1.0, 1.1, 1.5])
def test_rhombus_is_relative_equilibrium(y):
    eq = make_rhombus(y)
    assert eq.residual < 1e-12
    assert eq.vorticities.gamma[2] == pytest.approx(rhombus_kappa(y))
    assert frequency_of(eq.z0, eq.vorticities) == pytest.approx(eq.nu, rel=1e-12)


def test_rhombus_at_one_is_regular_square():
    eq = make_rhombus(1.0)
    assert "regular_4gon" in eq.flags
    assert np.allclose(eq.vorticities.gamma, 1.0)


def test_rhombus_rejects_small_y():
    with pytest.raises(InvalidInputError):
        make_rhombus(0.5)


def test_gamma_zero_rotor():
    eq = make_gamma_zero_rotor(1.3)
    assert eq.vorticities.total == 0.0
    assert eq.residual < 1e-12


def test_scaling_law_of_frequency():
    eq = make_vortex_pair(1.0, 1.0)
    s = eq.scaled(2.0)
    assert s.nu == pytest.approx(eq.nu / 4.0)
    assert s.residual < 1e-12
    n = eq.normalized()
    assert abs(n.nu) == pytest.approx(1.0)
    assert n.period == pytest.approx(2 * np.pi)


def test_rotate_matches_counterclockwise_rotation():
    eq = make_vortex_pair(1.0, 1.0)
    t = 0.3
    p = eq.rotate(t).reshape(-1, 2)
    c, s = np.cos(eq.nu * t), np.sin(eq.nu * t)
    R = np.array([[c, -s], [s, c]])
    assert np.allclose(p, eq.z0.reshape(-1, 2) @ R.T)


def test_relabeling_preserves_residual():
    eq = make_equilateral_triangle(1, 2, 3)
    r = eq.relabeled([2, 0, 1])
    assert r.residual < 1e-12
    assert r.vorticities.gamma == (3.0, 1.0, 2.0)


def test_custom_equilibrium_validation():
    eq = make_vortex_pair(1.0, 3.0)
    rebuilt = relative_equilibrium((1.0, 3.0), eq.z0)
    assert rebuilt.nu == pytest.approx(eq.nu)
    with pytest.raises(InvalidInputError):
        relative_equilibrium((1.0, 3.0), [0.0, 0.0, 1.0, 0.3, 0.5, 0.1])


def test_zero_total_pair_rejected():
    with pytest.raises(InvalidInputError):
        make_vortex_pair(1.0, -1.0)


def test_residual_function():
    eq = make_equilateral_triangle(1, 2, 3)
    assert equilibrium_residual(eq.z0, eq.nu * 1.1, Vorticities((1, 2, 3))) > 1e-3


def test_unequal_pair_positions():
    eq = make_vortex_pair(1.0, 3.0, 1.0)
    assert eq.nu == pytest.approx(4 / np.pi)
    assert np.allclose(eq.z0, [-0.75, 0.0, 0.25, 0.0])


def test_regular_square_frequency():
    assert make_rhombus(1.0).nu == pytest.approx(1.5)


def test_zero_total_rhombus_flagged():
    eq = make_rhombus(np.sqrt(3 + np.sqrt(8)))
    assert eq.vorticities.gamma[2] == pytest.approx(-1.0, abs=1e-12)
    assert "Gamma_zero" in eq.flags


def test_residual_detects_perturbation_and_wrong_frequency():
    eq = make_vortex_pair(1.0, 1.0)
    z = eq.z0.copy()
    z[1] += 0.01
    assert equilibrium_residual(z, eq.nu, eq.vorticities) > 1e-4
    tri = make_equilateral_triangle(1, 2, 3)
    Mz = tri.vorticities.mass_diag * tri.z0
    res = equilibrium_residual(tri.z0, tri.nu + 0.1, tri.vorticities)
    assert res == pytest.approx(0.1 * np.linalg.norm(Mz), rel=1e-8)


@pytest.mark.parametrize("eq", [make_equilateral_triangle(1, 2, 3), make_equilateral_triangle(1, 1, -0.6),
                                make_rhombus(1.1), make_rhombus(0.8)], ids=["tri", "tri-unstable", "rh1.1", "rh0.8"])
def test_predicted_multipliers_come_in_inverse_pairs(eq):
    m = predicted_multipliers(eq)
    assert np.allclose(m[0::2] * m[1::2], 1.0, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(nonzero, nonzero, nonzero)
def test_lre_screen_rule(g1, g2, g3):
    vort = Vorticities((g1, g2, g3))
    if abs(vort.total) < 0.1:
        return
    L, sq = vort.momentum, g1 * g1 + g2 * g2 + g3 * g3
    equal = g1 == g2 == g3
    expected = L > 1e-9 and not equal and abs(10 * L - sq) > 1e-9
    assert ("LRE_stable_expected" in make_equilateral_triangle(g1, g2, g3).flags) == expected


def test_multipliers_are_scale_invariant():
    from vortexfloquet.floquet import equilibrium_spectrum

    eq = make_equilateral_triangle(1, 2, 3)
    a = np.sort_complex(equilibrium_spectrum(eq).eigenvalues)
    b = np.sort_complex(equilibrium_spectrum(eq.scaled(1.7)).eigenvalues)
    assert np.allclose(a, b, atol=1e-7)
