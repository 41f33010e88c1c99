import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vortexfloquet.checks import SAMPLE_DOMAINS, derivative_checks, fd_gradient, fd_jacobian, rel_err
from vortexfloquet.core import (ScaledHamiltonian, Vorticities, apply_j, check_collision, diagonal_vector,
                                omega, symplectic_j, totals, whole_plane_energy, whole_plane_gradient,
                                whole_plane_hessian)
from vortexfloquet.domains import (ConformalImage, SyntheticQuadratic, Translated, UnitDisc, WholePlane,
                                   domain_from_params, domain_to_params)
from vortexfloquet.errors import CollisionError, ConfigError, DomainError, InvalidInputError

strengths = st.lists(st.floats(-3, 3).filter(lambda g: abs(g) > 0.1), min_size=2, max_size=5)


def _spread_points(n, seed):
    rng = np.random.default_rng(seed)
    while True:
        z = rng.uniform(-1.0, 1.0, 2 * n)
        p = z.reshape(-1, 2)
        d = np.linalg.norm(p[:, None] - p[None], axis=2) + np.eye(n)
        if d.min() > 0.2:
            return z


def test_energy_matches_direct_pair_sum():
    gam = (1.0, -2.0, 0.5)
    z = np.array([0.0, 0.0, 1.0, 0.0, 0.3, 0.9])
    p = z.reshape(-1, 2)
    direct = 0.0
    for j in range(3):
        for k in range(3):
            if j != k:
                direct -= gam[j] * gam[k] * np.log(np.linalg.norm(p[j] - p[k])) / (2 * np.pi)
    assert whole_plane_energy(z, Vorticities(gam)) == pytest.approx(direct, rel=1e-14)


@settings(max_examples=30, deadline=None)
@given(strengths, st.integers(0, 2**16))
def test_whole_plane_identities(gam, seed):
    vort = Vorticities(tuple(gam))
    z = _spread_points(vort.n, seed)
    G, L = totals(gam)
    assert G**2 == pytest.approx(2 * L + sum(g * g for g in gam), abs=1e-12)
    grad = whole_plane_gradient(z, vort)
    assert np.dot(grad, z) == pytest.approx(-L / np.pi, abs=1e-10)
    for a in np.eye(2):
        assert abs(np.dot(grad, diagonal_vector(a, vort.n))) < 1e-10
    assert rel_err(grad, fd_gradient(lambda x: whole_plane_energy(x, vort), z)) < 1e-6
    hess = whole_plane_hessian(z, vort)
    assert rel_err(hess, fd_jacobian(lambda x: whole_plane_gradient(x, vort), z)) < 1e-6


@pytest.mark.parametrize("dom", SAMPLE_DOMAINS, ids=lambda d: type(d).__name__)
def test_scaled_hamiltonian_derivatives(dom):
    rng = np.random.default_rng(3)
    vort = Vorticities((1.0, 0.4, -1.3))
    for r in (0.0, 0.2, 0.6):
        sh = ScaledHamiltonian(dom, vort, r)
        u = _spread_points(3, int(rng.integers(1000)))
        assert rel_err(sh.gradient(u), fd_gradient(sh.energy, u)) < 1e-6
        assert rel_err(sh.hessian(u), fd_jacobian(sh.gradient, u)) < 1e-6


def test_derivative_check_suite_passes():
    failed = [c.name for c in derivative_checks() if not c.passed]
    assert failed == []


def test_scaled_hamiltonian_r0_is_whole_plane():
    vort = Vorticities((1.0, 2.0))
    z = np.array([-0.5, 0.1, 0.4, -0.2])
    sh = ScaledHamiltonian(UnitDisc(), vort, 0.0)
    assert sh.energy(z) == whole_plane_energy(z, vort)


def test_vector_field_is_mass_weighted_symplectic_gradient():
    vort = Vorticities((2.0, -1.0))
    z = np.array([0.3, 0.0, -0.4, 0.2])
    sh = ScaledHamiltonian(UnitDisc(), vort, 0.5)
    M = vort.mass_matrix
    assert np.allclose(M @ sh.vector_field(z), symplectic_j(2) @ sh.gradient(z), atol=1e-14)
    assert np.allclose(apply_j(z), symplectic_j(2) @ z)


def test_omega_is_antisymmetric():
    vort = Vorticities((1.0, 3.0))
    v, w = np.arange(4.0), np.array([1.0, -1.0, 0.5, 2.0])
    assert omega(vort, v, w) == pytest.approx(-omega(vort, w, v))


def test_disc_robin_matches_closed_form():
    # h(x) = -(1/2pi) log(1 - |x|^2) for the unit disc
    for x in ([0.0, 0.0], [0.3, 0.1], [-0.7, 0.2]):
        x = np.asarray(x)
        assert UnitDisc().h(x) == pytest.approx(-np.log(1 - x @ x) / (2 * np.pi), abs=1e-15)


def test_conformal_robin_matches_lifted_formula():
    c = ConformalImage((0.0, 1.0, 0.1))
    for w in (0.2 + 0.1j, -0.5 + 0.3j, 0.0):
        z = c.psi(w)
        expected = -np.log((1 - abs(w) ** 2) * abs(1 + 0.2 * w)) / (2 * np.pi)
        assert c.h(np.array([z.real, z.imag])) == pytest.approx(expected, abs=1e-13)


def test_identity_conformal_map_is_disc():
    c = ConformalImage((0.0, 1.0))
    x, y = np.array([0.2, -0.3]), np.array([-0.1, 0.5])
    assert c.g(x, y) == pytest.approx(UnitDisc().g(x, y), abs=1e-13)


def test_synthetic_quadratic_hessian_is_2s():
    s = ((1.0, 0.3), (0.3, -0.5))
    _, _, H = SyntheticQuadratic(s).robin(np.array([0.1, 0.2]))
    assert np.allclose(H, 2 * np.asarray(s))


def test_synthetic_quadratic_rejects_nonsymmetric():
    with pytest.raises(ConfigError):
        SyntheticQuadratic(((1.0, 0.2), (0.0, 1.0)))


def test_conformal_rejects_critical_point_of_map():
    with pytest.raises(ConfigError):
        ConformalImage((0.0, 1.0, 0.5))  # psi'(-1) = 0


def test_translated_shifts_origin():
    base = UnitDisc()
    t = Translated(base, (0.2, -0.1))
    x = np.array([0.1, 0.1])
    assert t.h(x) == pytest.approx(base.h(x + np.array([0.2, -0.1])))


@pytest.mark.parametrize("dom", list(SAMPLE_DOMAINS) + [Translated(UnitDisc(), (0.1, 0.2))],
                         ids=lambda d: type(d).__name__)
def test_domain_params_round_trip(dom):
    assert domain_from_params(domain_to_params(dom)) == dom


def test_collision_detected():
    with pytest.raises(CollisionError):
        check_collision(np.array([0.1, 0.2, 0.1, 0.2]))


def test_leaving_domain_raises():
    sh = ScaledHamiltonian(UnitDisc(), Vorticities((1.0, 1.0)), 1.5)
    with pytest.raises(DomainError):
        sh.energy(np.array([-0.8, 0.0, 0.8, 0.0]))


def test_negative_scale_rejected():
    with pytest.raises(InvalidInputError):
        ScaledHamiltonian(WholePlane(), Vorticities((1.0, 1.0)), -0.1)


def test_totals_examples():
    assert totals((1, 1)) == (2, 1)
    assert totals((1, 1, -0.5)) == (1.5, 0)


def test_unit_pair_at_distance_one_has_zero_energy():
    assert whole_plane_energy(np.array([0.0, 0.0, 1.0, 0.0]), Vorticities((1.0, 1.0))) == 0.0


@pytest.mark.parametrize("dom,hess", [(UnitDisc(), np.eye(2) / np.pi), (SyntheticQuadratic(), np.diag([2.0, -2.0])),
                                      (WholePlane(), np.zeros((2, 2)))], ids=["disc", "quadratic", "plane"])
def test_robin_at_origin(dom, hess):
    h, g, H = dom.robin(np.zeros(2))
    assert abs(h) < 1e-15
    assert np.allclose(g, 0.0)
    assert np.allclose(H, hess, atol=1e-15)


def test_disc_regular_part_is_harmonic_and_matches_boundary():
    d = UnitDisc()
    y = np.array([0.3, -0.2])
    x = np.array([-0.1, 0.25])
    lap = []
    for step in (1e-2, 5e-3, 2.5e-3):
        e = np.eye(2) * step
        val = sum(float(d.g(x + s * v, y)) for v in e for s in (1, -1)) - 4 * float(d.g(x, y))
        lap.append(abs(val) / step**2)
    assert lap[-1] < lap[0] and lap[-1] < 1e-5
    for t in np.linspace(0, 2 * np.pi, 9):
        b = np.array([np.cos(t), np.sin(t)])
        assert float(d.g(b, y)) == pytest.approx(-np.log(np.linalg.norm(b - y)) / (2 * np.pi), abs=1e-12)
