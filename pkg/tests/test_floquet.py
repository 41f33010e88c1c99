import numpy as np
import pytest
from scipy.linalg import expm

from vortexfloquet.core import ScaledHamiltonian, symplectic_j
from vortexfloquet.domains import WholePlane
from vortexfloquet.equilibria import (make_equilateral_triangle, make_gamma_zero_rotor, make_rhombus,
                                      make_vortex_pair, predicted_multipliers)
from vortexfloquet.errors import NotPeriodicError
from vortexfloquet.floquet import (classify, cluster_eigenvalues, equilibrium_monodromy, equilibrium_spectrum,
                                   monodromy, pair_closed_form_monodromy, pairing_defect, permute_blocks,
                                   rotating_frame_fundamental, spectrum, trivial_basis, trivial_images,
                                   unit_multiplier_multiplicity)


def _match(ev, target, tol):
    return all(np.min(np.abs(ev - t)) < tol for t in target)


def test_pair_monodromy_closed_form():
    eq = make_vortex_pair(1.0, 1.0)
    X = equilibrium_monodromy(eq)
    assert np.max(np.abs(X - pair_closed_form_monodromy(eq))) < 1e-8


@pytest.mark.parametrize("gam", [(1.0, 2.0), (3.0, -1.0)])
def test_trivial_basis_images(gam):
    eq = make_vortex_pair(*gam, 0.8)
    X = equilibrium_monodromy(eq)
    assert np.max(np.abs(X @ trivial_basis(eq) - trivial_images(eq, eq.period))) < 1e-8


def test_rotating_frame_oracle_matches_integration():
    # independent route: constant-coefficient problem in the co-rotating frame
    eq = make_equilateral_triangle(1, 2, 3)
    sh = ScaledHamiltonian(WholePlane(), eq.vorticities, 0.0)
    A = sh.linearization(eq.z0)
    assert np.max(np.abs(rotating_frame_fundamental(eq, 0.7)
                         - _rotating_oracle(eq, A, 0.7))) < 1e-12
    X = monodromy(sh, eq.z0, eq.period)
    assert np.max(np.abs(X - rotating_frame_fundamental(eq, eq.period))) < 1e-8


def _rotating_oracle(eq, A, t):
    n = eq.n
    c, s = np.cos(eq.nu * t), np.sin(eq.nu * t)
    R = np.kron(np.eye(n), np.array([[c, -s], [s, c]]))
    return R @ expm(t * (A + eq.nu * symplectic_j(n)))


def test_triangle_multipliers():
    spec = equilibrium_spectrum(make_equilateral_triangle(1, 2, 3))
    target = np.exp(np.array([1j, -1j]) * np.pi * np.sqrt(11 / 3))
    assert _match(spec.nontrivial(), target, 1e-6)
    assert spec.has("LRE_stable")
    assert spec.unit_multiplicity == 4


def test_unstable_triangle():
    spec = equilibrium_spectrum(make_equilateral_triangle(1, 1, -0.6))
    assert spec.has("spectrally_unstable")
    real_off = [z for z in spec.eigenvalues if abs(z.imag) < 1e-8 and abs(abs(z) - 1) > 1e-3]
    assert len(real_off) == 2
    assert real_off[0] * real_off[1] == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("y", [1.1, 1.3, 0.9])
def test_rhombus_multipliers(y):
    eq = make_rhombus(y)
    spec = equilibrium_spectrum(eq)
    assert _match(spec.eigenvalues, predicted_multipliers(eq), 1e-6)


def test_regular_square_is_degenerate():
    assert equilibrium_spectrum(make_rhombus(1.0)).unit_multiplicity >= 6


@pytest.mark.parametrize("eq", [make_equilateral_triangle(1, 1, -0.5), make_gamma_zero_rotor()],
                         ids=["L=0 triangle", "Gamma=0 rotor"])
def test_degeneracy_detection(eq):
    spec = equilibrium_spectrum(eq, degeneracy_tol=1e-4)
    assert spec.extra["unit_multiplicity_deflated"] >= 6


def test_nondegenerate_count_is_four():
    spec = equilibrium_spectrum(make_equilateral_triangle(1, 2, 3), degeneracy_tol=1e-4)
    assert spec.extra["unit_multiplicity_deflated"] == 4


@pytest.mark.parametrize("eq", [make_equilateral_triangle(1, 2, 3), make_rhombus(1.1),
                                make_equilateral_triangle(1, 1, -0.6)], ids=["tri", "rhombus", "unstable"])
def test_symplectic_spectrum_properties(eq):
    spec = spectrum(equilibrium_monodromy(eq))
    assert spec.pairing_defect < 1e-6
    assert spec.determinant == pytest.approx(1.0, abs=1e-8)
    conj = np.sort_complex(np.conj(spec.eigenvalues))
    assert np.allclose(conj, np.sort_complex(spec.eigenvalues), atol=1e-8)


def test_relabeling_permutes_monodromy():
    eq = make_equilateral_triangle(1, 2, 3)
    perm = [2, 0, 1]
    X = equilibrium_monodromy(eq)
    Y = equilibrium_monodromy(eq.relabeled(perm))
    assert np.max(np.abs(permute_blocks(X, perm) - Y)) < 1e-7


def test_clustering_is_transitive():
    ev = np.array([1.0, 1.0 + 0.8e-5, 1.0 + 1.6e-5, 2.0])
    ids = cluster_eigenvalues(ev, 1e-5)
    assert ids[0] == ids[1] == ids[2] != ids[3]


def test_labels_on_synthetic_spectra():
    ev = np.array([1, 1, np.exp(0.3j), np.exp(-0.3j)])
    labels = classify(ev, cluster_eigenvalues(ev, 1e-5), 1e-5)
    assert {"spectrally_stable", "L_stable"} <= labels
    ev = np.array([1, 1, -1, -1])
    labels = classify(ev, cluster_eigenvalues(ev, 1e-5), 1e-5)
    assert "L_stable" not in labels
    ev = np.array([1, 1, 2.0, 0.5])
    assert "spectrally_unstable" in classify(ev, cluster_eigenvalues(ev, 1e-5), 1e-5)


def test_pairing_defect_of_unpaired_set():
    assert pairing_defect(np.array([2.0, 2.0])) > 1.0


def test_deflated_count_on_jordan_block():
    # a 4x4 Jordan block at 1 perturbed at 1e-12 splits by ~1e-3; deflation recovers 4
    J = np.eye(4) + np.diag(np.ones(3), 1)
    J[3, 0] = 1e-12
    assert spectrum(J, 1e-4).unit_multiplicity < 4
    assert unit_multiplier_multiplicity(J, 1e-4, np.eye(4)[:, :2]) == 4


def test_non_periodic_orbit_rejected():
    eq = make_vortex_pair(1.0, 1.0)
    sh = ScaledHamiltonian(WholePlane(), eq.vorticities, 0.0)
    with pytest.raises(NotPeriodicError):
        monodromy(sh, eq.z0, 0.5 * eq.period)


def test_identity_and_diagonal_clusters():
    spec = spectrum(np.eye(4))
    assert spec.cluster_sizes == [4]
    spec = spectrum(np.diag([2.0, 0.5, 1.0, 1.0]))
    assert sorted(spec.cluster_sizes) == [1, 1, 2]
    assert spec.has("spectrally_unstable")


def test_shear_rotation_eigenvalues():
    from vortexfloquet.bifurcation import shear_rotation_matrix

    ev = np.sort_complex(np.linalg.eigvals(shear_rotation_matrix(0.3)))
    assert np.allclose(ev, np.sort_complex(np.exp([0.09j, -0.09j])), atol=1e-10)


def test_pair_unit_multiplicity_is_four():
    assert equilibrium_spectrum(make_vortex_pair(1.0, 1.0)).unit_multiplicity == 4


def test_classification_invariant_under_relabeling():
    eq = make_rhombus(1.1)
    perm = [3, 1, 0, 2]
    a = equilibrium_spectrum(eq)
    b = equilibrium_spectrum(eq.relabeled(perm))
    assert a.labels == b.labels
    assert np.allclose(np.sort_complex(a.eigenvalues), np.sort_complex(b.eigenvalues), atol=1e-7)


def test_whole_plane_expansion_target_vanishes():
    from vortexfloquet.floquet import expansion_target

    eq = make_vortex_pair(1.0, 1.0)
    assert np.all(expansion_target(WholePlane(), eq.vorticities) == 0.0)


def test_geometric_estimate_on_jordan_block():
    from vortexfloquet.floquet import geometric_multiplicity_estimate

    J = np.eye(4)
    J[0, 1] = 1.0
    assert geometric_multiplicity_estimate(J) == 3
