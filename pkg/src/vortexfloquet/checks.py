"""Fast invariant checks shared by the ``selftest`` subcommand and the test suite.

Each check returns a :class:`Check` holding the measured value and the
threshold it was compared against.  Finite-difference comparisons use
central differences, which are independent of the analytic derivative code.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (ScaledHamiltonian, Vorticities, apply_j, diagonal_vector, totals, whole_plane_energy,
                   whole_plane_gradient)
from .domains import ConformalImage, DomainModel, SyntheticQuadratic, UnitDisc, WholePlane
from .dynamics import flow, variational_flow
from .equilibria import make_equilateral_triangle, make_rhombus, make_vortex_pair
from .floquet import equilibrium_monodromy, pair_closed_form_monodromy, spectrum


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value < self.threshold)


def fd_gradient(fun, x, h: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (fun(x + e) - fun(x - e)) / (2.0 * h)
    return out


def fd_jacobian(fun, x, h: float = 1e-6) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        cols.append((np.asarray(fun(x + e)) - np.asarray(fun(x - e))) / (2.0 * h))
    return np.column_stack(cols)


def rel_err(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


SAMPLE_DOMAINS: tuple[DomainModel, ...] = (
    WholePlane(),
    UnitDisc(),
    SyntheticQuadratic(((1.0, 0.3), (0.3, -0.5))),
    ConformalImage((0.0, 1.0, 0.1)),
)


def derivative_checks(rng: np.random.Generator | None = None) -> list[Check]:
    """Analytic derivatives of ``h`` and ``H_r`` against central finite differences."""
    rng = np.random.default_rng(0) if rng is None else rng
    out = []
    vort = Vorticities((1.0, -0.7, 1.6))
    for dom in SAMPLE_DOMAINS:
        name = type(dom).__name__
        x = rng.uniform(-0.4, 0.4, 2)
        _, g, H = dom.robin(x)
        if np.linalg.norm(g) > 1e-12:
            out.append(Check(f"{name}: grad h vs FD", rel_err(g, fd_gradient(lambda p: float(dom.h(p)), x)), 1e-6))
        if np.linalg.norm(H) > 1e-12:
            out.append(Check(f"{name}: hess h vs FD",
                             rel_err(H, fd_jacobian(lambda p: dom.robin(p)[1], x)), 1e-6))
        u = rng.uniform(-0.8, 0.8, 6)
        sh = ScaledHamiltonian(dom, vort, 0.5)
        out.append(Check(f"{name}: grad H_r vs FD", rel_err(sh.gradient(u), fd_gradient(sh.energy, u)), 1e-6))
        out.append(Check(f"{name}: hess H_r vs FD", rel_err(sh.hessian(u), fd_jacobian(sh.gradient, u)), 1e-6))
        y = rng.uniform(-0.5, 0.5, 2)
        gxy, gyx = float(dom.g(x, y)), float(dom.g(y, x))
        out.append(Check(f"{name}: g symmetry", abs(gxy - gyx), 1e-13 * max(1.0, abs(gxy))))
    return out


def whole_plane_checks(rng: np.random.Generator | None = None) -> list[Check]:
    """Momentum and translation identities of ``H_0`` and its scaling law."""
    rng = np.random.default_rng(1) if rng is None else rng
    gam = (1.0, 2.0, -0.5, 0.8)
    vort = Vorticities(gam)
    G, L = totals(gam)
    z = rng.normal(size=8)
    grad = whole_plane_gradient(z, vort)
    out = [
        Check("Gamma^2 = 2L + sum Gamma_j^2", abs(G**2 - 2 * L - float(np.sum(np.square(gam)))), 1e-12),
        Check("<grad H_0(z), z> = -L/pi", abs(float(np.dot(grad, z)) + L / np.pi), 1e-10),
        Check("grad H_0 orthogonal to translations",
              max(abs(float(np.dot(grad, diagonal_vector(a, 4)))) for a in np.eye(2)), 1e-10),
    ]
    H = whole_plane_energy(z, vort)
    dev = max(abs(whole_plane_energy(lam * z, vort) - (H - L / np.pi * np.log(lam))) for lam in (0.5, 2.0, 10.0))
    out.append(Check("H_0(lambda z) = H_0(z) - (L/pi) log lambda", dev, 1e-10))
    return out


def dynamics_checks() -> list[Check]:
    pair = make_vortex_pair(1.0, 1.0).normalized()
    sh = ScaledHamiltonian(WholePlane(), pair.vorticities, 0.0)
    var = variational_flow(sh, pair.z0, 2.0 * np.pi, rtol=1e-13, atol=1e-13)
    X = var.final_matrix
    tri = make_equilateral_triangle(1.0, 2.0, 3.0).normalized()
    sh3 = ScaledHamiltonian(WholePlane(), tri.vorticities, 0.0)
    traj = flow(sh3, tri.z0, 2.0 * np.pi)
    disc = ScaledHamiltonian(UnitDisc(), tri.vorticities, 0.3)
    fwd = flow(disc, tri.z0, 1.5).final
    back = flow(disc, fwd, -1.5).final
    mid = flow(sh, pair.z0, np.pi / 3).final
    return [
        Check("pair monodromy vs closed form", float(np.max(np.abs(X - pair_closed_form_monodromy(pair)))), 1e-8),
        Check("symplecticity defect (pair)", var.symplectic_defect, 1e-8),
        Check("energy drift (triangle 1,2,3)", traj.energy_drift, 1e-9),
        Check("rigid rotation at t = pi/3", float(np.max(np.abs(mid - pair.rotate(np.pi / 3)))), 1e-9),
        Check("time reversal (disc, r = 0.3)", float(np.max(np.abs(back - tri.z0))), 1e-8),
    ]


def spectrum_checks() -> list[Check]:
    out = []
    tri = make_equilateral_triangle(1.0, 2.0, 3.0)
    rh = make_rhombus(1.1)
    for name, eq in (("triangle 1,2,3", tri), ("rhombus 1.1", rh)):
        spec = spectrum(equilibrium_monodromy(eq))
        out.append(Check(f"pairing lambda <-> 1/lambda ({name})", spec.pairing_defect, 1e-6))
        out.append(Check(f"det monodromy - 1 ({name})", abs(spec.determinant - 1.0), 1e-8))
        out.append(Check(f"unit cluster == 4 ({name})", abs(spec.unit_multiplicity - 4), 0.5))
    return out


def run_all() -> list[Check]:
    from .bifurcation import counterexample_suite

    checks = derivative_checks() + whole_plane_checks() + dynamics_checks() + spectrum_checks()
    for item in counterexample_suite().items:
        checks.append(Check(f"bifurcation: {item.name}", 0.0 if item.passed else 1.0, 0.5))
    return checks
