"""Continuation of the scaled periodic family ``u_r`` and its Poincare-section analysis.

For a domain whose Robin function has a nondegenerate critical point at the
origin, the relative equilibrium ``z0`` (normalized to ``|nu| = 1``) continues
to ``2 pi``-periodic solutions ``u_r`` of ``M u' = J_N grad H_r(u)``.  Each
point is found by Gauss-Newton on ``phi_r(2 pi, u) - u = 0`` with a phase
anchor, then shifted in time onto the section ``omega(z0, u) = 0``.

The section machinery reduces the monodromy to the ``(2N-2)``-dimensional
tangent space ``T = {u : <M z0, u> = 0, <J M z0, u> = 0}``, which contains the
translation plane ``D``.  The reduced map is the linearized return map
expressed in the energy-preserving chart ``psi_r(u) = u + s(r, u) z0``.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .core import ScaledHamiltonian, Vorticities, apply_j, diagonal_vector, whole_plane_gradient
from .domains import DomainModel, domain_h
from .dynamics import flow, variational_flow
from .equilibria import RelativeEquilibrium
from .errors import (ContinuationError, DomainError, InvalidInputError, PreconditionError,
                     SectionMissError, VortexError)
from .floquet import CLUSTER_TOL, MONODROMY_TOL, FloquetSpectrum, equilibrium_spectrum, spectrum

TWO_PI = 2.0 * np.pi
NEWTON_TOL = 1e-12
FAMILY_TOL = 1e-9
SECTION_TOL = 1e-10
ROOT_XTOL = 1e-13


# -- section chart -------------------------------------------------------------


@dataclass(frozen=True)
class SectionChart:
    """Section ``{omega(z0, .) = 0}``, tangent basis and the chart inverse at ``z0``."""

    z0: np.ndarray
    vorticities: Vorticities
    normal: np.ndarray  # n with omega(z0, u) = <n, u>
    grad0: np.ndarray  # grad H_0(z0)
    basis: np.ndarray  # orthonormal columns spanning T, the first two spanning D
    momentum: float

    @classmethod
    def build(cls, z0, vorticities: Vorticities, *, l_tol: float = 1e-10) -> "SectionChart":
        z0 = np.asarray(z0, dtype=float)
        L = vorticities.momentum
        if abs(L) <= l_tol * float(np.sum(vorticities.array**2)):
            raise PreconditionError("section chart is degenerate: L = 0")
        mz = vorticities.mass_diag * z0
        normal = -apply_j(mz)
        n = vorticities.n
        d = np.column_stack([diagonal_vector([1.0, 0.0], n), diagonal_vector([0.0, 1.0], n)]) / np.sqrt(n)
        constraints = np.column_stack([mz, apply_j(mz)])
        Q, _ = np.linalg.qr(np.column_stack([d, constraints]), mode="complete")
        rest = Q[:, 4:]
        # Q[:, :2] spans D (up to sign); keep the plain normalized diagonal vectors
        basis = np.column_stack([d, rest])
        return cls(z0, vorticities, normal, whole_plane_gradient(z0, vorticities), basis, L)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def omega(self, u) -> float:
        return float(np.dot(self.normal, u))

    def tangent_residuals(self, u) -> tuple[float, float]:
        """Values of ``omega(z0, u)`` and ``<grad H_0(z0), u>``."""
        return self.omega(u), float(np.dot(self.grad0, u))

    def psi_inverse(self, w) -> np.ndarray:
        """``w + (pi / L) <grad H_0(z0), w> z0``: projection onto ``T`` along ``z0``."""
        w = np.asarray(w, dtype=float)
        return w + (np.pi / self.momentum) * float(np.dot(self.grad0, w)) * self.z0

    def psi(self, sh: ScaledHamiltonian, u, level: float, *, tol: float = 1e-14,
            max_iter: int = 50) -> np.ndarray:
        """``u + s z0`` with ``s`` solving ``H_r(u + s z0) = level`` by scalar Newton."""
        u = np.asarray(u, dtype=float)
        # start where <grad H_0(z0), u + s z0> matches its value at z0 (s = 1 on T)
        s = 1.0 + (np.pi / self.momentum) * float(np.dot(self.grad0, u))
        for _ in range(max_iter):
            w = u + s * self.z0
            H = sh.energy(w)
            dH = float(np.dot(sh.gradient(w), self.z0))
            step = (H - level) / dH
            s -= step
            if abs(step) <= tol * max(1.0, abs(s)):
                return u + s * self.z0
        raise ContinuationError("chart Newton iteration did not converge")

    def psi_derivative(self, sh: ScaledHamiltonian, w) -> np.ndarray:
        """Differential of ``psi_r`` at the preimage of the section point ``w``."""
        g = sh.gradient(w)
        return np.eye(w.size) - np.outer(self.z0, g) / float(np.dot(g, self.z0))

    def psi_inverse_matrix(self) -> np.ndarray:
        return np.eye(self.z0.size) + (np.pi / self.momentum) * np.outer(self.z0, self.grad0)

    def coordinates(self, v) -> np.ndarray:
        return self.basis.T @ v


# -- family --------------------------------------------------------------------


@dataclass(frozen=True)
class FamilyPoint:
    r: float
    u0: np.ndarray
    energy: float
    residual: float
    monodromy: np.ndarray
    section_value: float
    iterations: int
    time_shift: float

    def spectrum(self, cluster_tol: float = CLUSTER_TOL) -> FloquetSpectrum:
        return spectrum(self.monodromy, cluster_tol)


@dataclass
class Family:
    domain: DomainModel
    equilibrium: RelativeEquilibrium  # normalized to |nu| = 1
    r_grid: np.ndarray
    points: list[FamilyPoint] = field(default_factory=list)
    failed_at: float | None = None
    diagnostic: str = ""
    error_class: str = ""

    @property
    def complete(self) -> bool:
        return self.failed_at is None and len(self.points) == len(self.r_grid)

    @property
    def r(self) -> np.ndarray:
        return np.array([p.r for p in self.points])

    def raise_if_failed(self) -> None:
        if not self.complete:
            raise ContinuationError(f"continuation broke at r={self.failed_at}: {self.diagnostic}")

    def hamiltonian(self, r: float) -> ScaledHamiltonian:
        return ScaledHamiltonian(self.domain, self.equilibrium.vorticities, r)

    def chart(self) -> SectionChart:
        return SectionChart.build(self.equilibrium.z0, self.equilibrium.vorticities)


def check_preconditions(domain: DomainModel, eq: RelativeEquilibrium, r_grid) -> np.ndarray:
    r_grid = np.asarray(r_grid, dtype=float).ravel()
    if r_grid.size == 0 or np.any(r_grid <= 0) or np.any(np.diff(r_grid) <= 0):
        raise InvalidInputError("r grid must be strictly increasing positive values")
    vort = eq.vorticities
    if abs(vort.total) < 1e-12 or abs(vort.momentum) < 1e-12 * float(np.sum(vort.array**2)):
        raise PreconditionError("continuation needs Gamma != 0 and L != 0")
    if not domain.is_trivial:
        _, grad, hess = domain_h(domain, np.zeros(2))
        if np.linalg.norm(grad) >= 1e-10:
            raise PreconditionError(f"origin is not a critical point of h (|grad h| = {np.linalg.norm(grad):.2e})")
        if abs(np.linalg.det(hess)) < 1e-8 * np.linalg.norm(hess) ** 2 or not np.any(hess):
            raise PreconditionError("critical point of h at the origin is degenerate")
        if not np.all(domain.contains(r_grid[-1] * eq.z0.reshape(-1, 2))):
            raise DomainError(f"r * z0 leaves the domain at r = {r_grid[-1]}")
    spec = equilibrium_spectrum(eq)
    if spec.unit_multiplicity != 4:
        raise PreconditionError(
            f"equilibrium is not algebraically nondegenerate (unit cluster {spec.unit_multiplicity})")
    return r_grid


def _section_shift(sh: ScaledHamiltonian, u, chart: SectionChart, tol: float) -> tuple[np.ndarray, float]:
    """Move ``u`` along its orbit to the section crossing nearest ``t = 0`` in ``[-1, 1]``."""
    if abs(chart.omega(u)) <= 1e-15 * max(1.0, np.linalg.norm(u)):
        return np.asarray(u, dtype=float), 0.0
    best = None
    for T in (1.0, -1.0):
        traj = flow(sh, u, T, rtol=tol, atol=tol, dense=True)
        ts = np.linspace(0.0, T, 201)
        vals = np.array([chart.omega(traj.state_at(t)) for t in ts])
        idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        if idx.size:
            i = idx[0]
            root = brentq(lambda t: chart.omega(traj.state_at(t)), ts[i], ts[i + 1], xtol=ROOT_XTOL)
            if best is None or abs(root) < abs(best[1]):
                best = (traj.state_at(root), root)
    if best is None:
        raise SectionMissError("orbit does not cross the section within |t| <= 1")
    return np.asarray(best[0], dtype=float), float(best[1])


def correct_point(sh: ScaledHamiltonian, seed, chart: SectionChart, *, newton_tol: float = NEWTON_TOL,
                  max_iter: int = 15, tol: float = MONODROMY_TOL) -> FamilyPoint:
    """Gauss-Newton for a ``2 pi``-periodic point near ``seed``, normalized onto the section."""
    u_pred = np.asarray(seed, dtype=float)
    v_pred = sh.vector_field(u_pred)
    v_pred = v_pred / np.linalg.norm(v_pred)
    u = u_pred.copy()
    m = u.size
    res = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        var = variational_flow(sh, u, TWO_PI, rtol=tol, atol=tol)
        F = var.final_state - u
        res = float(np.linalg.norm(F))
        if res <= newton_tol:
            break
        A = np.vstack([var.final_matrix - np.eye(m), v_pred[None, :]])
        b = -np.concatenate([F, [np.dot(u - u_pred, v_pred)]])
        delta = np.linalg.lstsq(A, b, rcond=None)[0]
        u = u + delta
        if np.linalg.norm(delta) <= 1e-3 * newton_tol:
            break
    else:
        if res > FAMILY_TOL:
            raise ContinuationError(f"Gauss-Newton stalled at residual {res:.3e} after {max_iter} iterations")
    u, shift = _section_shift(sh, u, chart, tol)
    # one polishing step with the section itself as phase condition
    var = variational_flow(sh, u, TWO_PI, rtol=tol, atol=tol)
    F = var.final_state - u
    A = np.vstack([var.final_matrix - np.eye(m), chart.normal[None, :] / np.linalg.norm(chart.normal)])
    b = -np.concatenate([F, [chart.omega(u) / np.linalg.norm(chart.normal)]])
    u_new = u + np.linalg.lstsq(A, b, rcond=None)[0]
    var_new = variational_flow(sh, u_new, TWO_PI, rtol=tol, atol=tol)
    res_new = float(np.linalg.norm(var_new.final_state - u_new))
    if res_new <= float(np.linalg.norm(F)):
        u, var = u_new, var_new
        res = res_new
    else:
        res = float(np.linalg.norm(F))
    if res > FAMILY_TOL:
        raise ContinuationError(f"periodicity residual {res:.3e} exceeds {FAMILY_TOL:.0e}")
    return FamilyPoint(sh.r, u, sh.energy(u), res, var.final_matrix, chart.omega(u), it, shift)


def _worker(args):
    domain, eq, r, seed, newton_tol, tol = args
    sh = ScaledHamiltonian(domain, eq.vorticities, r)
    chart = SectionChart.build(eq.z0, eq.vorticities)
    try:
        return correct_point(sh, seed, chart, newton_tol=newton_tol, tol=tol)
    except VortexError as exc:
        return exc


def continue_family(domain: DomainModel, equilibrium: RelativeEquilibrium, r_grid, *,
                    newton_tol: float = NEWTON_TOL, tol: float = MONODROMY_TOL, jobs: int = 1,
                    check: bool = True) -> Family:
    """Continue ``z0`` along the grid of ``r`` values.

    The equilibrium is first rescaled to ``|nu| = 1`` so that the family has
    period ``2 pi``.  In serial mode (``jobs=1``) each point is seeded by its
    predecessor.  With ``jobs > 1`` the first point is computed serially and
    the rest are seeded by quadratic extrapolation ``z0 + (u_1 - z0)(r/r_1)^2``
    and corrected concurrently.  A Newton failure stops the family; the points
    computed so far are returned together with a diagnostic.
    """
    eq = equilibrium.normalized()
    r_grid = check_preconditions(domain, eq, r_grid) if check else np.asarray(r_grid, dtype=float)
    fam = Family(domain, eq, r_grid)
    chart = SectionChart.build(eq.z0, eq.vorticities)
    seed = eq.z0.copy()

    def fail(r, exc):
        fam.failed_at = float(r)
        fam.diagnostic = str(exc)
        fam.error_class = getattr(exc, "error_class", "continuation_failure")

    if jobs <= 1:
        for r in r_grid:
            sh = ScaledHamiltonian(domain, eq.vorticities, float(r))
            try:
                pt = correct_point(sh, seed, chart, newton_tol=newton_tol, tol=tol)
            except VortexError as exc:
                fail(r, exc)
                break
            fam.points.append(pt)
            seed = pt.u0
        return fam

    first = _worker((domain, eq, float(r_grid[0]), seed, newton_tol, tol))
    if isinstance(first, Exception):
        fail(r_grid[0], first)
        return fam
    fam.points.append(first)
    du = first.u0 - eq.z0
    tasks = [(domain, eq, float(r), eq.z0 + du * (r / r_grid[0]) ** 2, newton_tol, tol) for r in r_grid[1:]]
    workers = min(jobs, len(tasks), os.cpu_count() or 1) or 1
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(_worker, tasks))
    for r, out in zip(r_grid[1:], results):
        if isinstance(out, Exception):
            fail(r, out)
            break
        fam.points.append(out)
    return fam


# -- hitting time and reduced monodromy ------------------------------------------


def hitting_time(sh: ScaledHamiltonian, u, z0=None, *, chart: SectionChart | None = None,
                 window: float = 1.0, tol: float = MONODROMY_TOL) -> float:
    """First return time near ``2 pi`` to the section ``omega(z0, .) = 0``."""
    if chart is None:
        if z0 is None:
            raise InvalidInputError("need z0 or a section chart")
        chart = SectionChart.build(z0, sh.vorticities)
    lo, hi = TWO_PI - window, TWO_PI + window
    traj = flow(sh, u, hi, rtol=tol, atol=tol, dense=True)
    ts = np.linspace(lo, hi, 401)
    vals = np.array([chart.omega(traj.state_at(t)) for t in ts])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if idx.size == 0:
        raise SectionMissError(f"no section crossing in ({lo:.3f}, {hi:.3f})")
    i = idx[np.argmin(np.abs(ts[idx] - TWO_PI))]
    return float(brentq(lambda t: chart.omega(traj.state_at(t)), ts[i], ts[i + 1], xtol=ROOT_XTOL))


def hitting_time_gradient(sh: ScaledHamiltonian, point: FamilyPoint, chart: SectionChart) -> np.ndarray:
    """``D_u tau`` at a section point of the family: ``-<n, X v> / <n, f>``."""
    f = sh.vector_field(point.u0)
    return -(point.monodromy.T @ chart.normal) / float(np.dot(chart.normal, f))


def poincare_map(sh: ScaledHamiltonian, u, chart: SectionChart, *, tol: float = MONODROMY_TOL) -> np.ndarray:
    tau = hitting_time(sh, u, chart=chart, tol=tol)
    return flow(sh, u, tau, rtol=tol, atol=tol).final


@dataclass(frozen=True)
class ReducedMonodromy:
    r: float
    matrix: np.ndarray  # in the chart basis coordinates
    ambient: np.ndarray  # the same map as a 2N x 2N operator, zero off T
    eigenvalues: np.ndarray


def reduced_monodromy(point: FamilyPoint, chart: SectionChart, domain: DomainModel) -> ReducedMonodromy:
    """Linearized return map in the chart: ``Dpsi^{-1} (X + f D tau) Dpsi`` restricted to ``T``."""
    sh = ScaledHamiltonian(domain, chart.vorticities, point.r)
    u = point.u0
    f = sh.vector_field(u)
    dtau = hitting_time_gradient(sh, point, chart)
    dP = point.monodromy + np.outer(f, dtau)
    op = chart.psi_inverse_matrix() @ dP @ chart.psi_derivative(sh, u)
    E = chart.basis
    M = E.T @ op @ E
    return ReducedMonodromy(point.r, M, E @ M @ E.T, np.linalg.eigvals(M))


def reduced_monodromy_fd(point: FamilyPoint, chart: SectionChart, domain: DomainModel, *,
                         eps: float = 1e-5, tol: float = MONODROMY_TOL) -> np.ndarray:
    """Central finite differences of ``psi^{-1} o P_r o psi`` in the chart basis."""
    sh = ScaledHamiltonian(domain, chart.vorticities, point.r)
    level = point.energy
    base = chart.psi_inverse(point.u0)
    cols = []
    for e in chart.basis.T:
        vals = []
        for sgn in (1.0, -1.0):
            w = chart.psi(sh, base + sgn * eps * e, level)
            vals.append(chart.psi_inverse(poincare_map(sh, w, chart, tol=tol)))
        cols.append(chart.coordinates((vals[0] - vals[1]) / (2.0 * eps)))
    return np.column_stack(cols)


# -- multiplier and trace curves ---------------------------------------------------


def predicted_coefficient(domain: DomainModel, total: float) -> complex:
    """``2 pi Gamma sqrt(-det hess h(0))`` with the principal complex square root."""
    if domain.is_trivial:
        return 0j
    hess = domain_h(domain, np.zeros(2))[2]
    return complex(TWO_PI * total * np.sqrt(complex(-np.linalg.det(hess))))


def _split_pair(a: complex, b: complex, tol: float) -> tuple[complex, complex]:
    """Order a reciprocal pair as ``(lambda+, lambda-)``: larger modulus first, else positive imaginary part."""
    if abs(abs(a) - abs(b)) > tol:
        return (a, b) if abs(a) > abs(b) else (b, a)
    return (a, b) if a.imag >= b.imag else (b, a)


def pinned_fit(r, y, power: float) -> tuple[complex, complex]:
    """Least squares ``y / r^p = C + D r^2``; returns ``(C, D)``."""
    A = np.column_stack([np.ones_like(r), r**2]).astype(complex)
    sol = np.linalg.lstsq(A, y / r**power, rcond=None)[0]
    return complex(sol[0]), complex(sol[1])


def loglog_exponent(r, y) -> float:
    y = np.abs(y)
    ok = y > 0
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(r[ok]), np.log(y[ok]), 1)[0])


@dataclass(frozen=True)
class MultiplierCurve:
    r: np.ndarray
    lam_plus: np.ndarray
    lam_minus: np.ndarray
    predicted: complex
    fitted: complex  # C from (lambda+ - 1)/r^2 = C + D r^2
    exponent: float  # p from log|lambda+ - 1| = log|C| + p log r
    ambiguous: np.ndarray
    full_mismatch: np.ndarray  # |lambda+- (reduced) - lambda+- (full monodromy)|
    labels: list
    reduced: list

    @property
    def ratio(self) -> np.ndarray:
        return (self.lam_plus - 1.0) / self.r**2

    @property
    def pairing_defect(self) -> np.ndarray:
        return np.abs(self.lam_plus * self.lam_minus - 1.0)

    @property
    def smallest_r_ratio(self) -> complex:
        return complex(self.ratio[np.argmin(self.r)])


def _full_monodromy_pair(point: FamilyPoint, sh: ScaledHamiltonian, z0) -> tuple[complex, complex]:
    """Nontrivial pair nearest 1 of ``X_r(2 pi)`` after removing the trivial pair.

    The trivial pair is the two eigenvalues whose eigenvectors overlap most
    with ``span{u', z0}``.
    """
    X = point.monodromy
    w, V = np.linalg.eig(X)
    S = np.column_stack([sh.vector_field(point.u0), z0])
    Q, _ = np.linalg.qr(S)
    overlap = np.linalg.norm(Q.conj().T @ V, axis=0) / np.linalg.norm(V, axis=0)
    keep = np.argsort(overlap)[:-2]
    rest = w[keep]
    order = np.argsort(np.abs(rest - 1.0))
    return complex(rest[order[0]]), complex(rest[order[1]])


def multiplier_curve(domain: DomainModel, equilibrium: RelativeEquilibrium, r_grid, *,
                     family: Family | None = None, cluster_tol: float = CLUSTER_TOL, **kw) -> MultiplierCurve:
    """Bifurcating pair ``lambda+-(r)`` from the reduced monodromy along the family."""
    fam = family if family is not None else continue_family(domain, equilibrium, r_grid, **kw)
    fam.raise_if_failed()
    chart = fam.chart()
    lp, lm, amb, mism, labels, reds = [], [], [], [], [], []
    for pt in fam.points:
        red = reduced_monodromy(pt, chart, domain)
        ev = red.eigenvalues
        order = np.argsort(np.abs(ev - 1.0))
        a, b = complex(ev[order[0]]), complex(ev[order[1]])
        ambiguous = ev.size > 2 and abs(ev[order[2]] - 1.0) - abs(b - 1.0) < cluster_tol
        plus, minus = _split_pair(a, b, cluster_tol)
        fa, fb = _split_pair(*_full_monodromy_pair(pt, fam.hamiltonian(pt.r), chart.z0), cluster_tol)
        lp.append(plus)
        lm.append(minus)
        amb.append(bool(ambiguous))
        mism.append(max(abs(plus - fa), abs(minus - fb)))
        labels.append(pt.spectrum(cluster_tol).labels)
        reds.append(red)
    r = fam.r
    lp, lm = np.array(lp), np.array(lm)
    C, _ = pinned_fit(r, lp - 1.0, 2.0)
    return MultiplierCurve(r, lp, lm, predicted_coefficient(domain, equilibrium.vorticities.total), C,
                           loglog_exponent(r, lp - 1.0), np.array(amb), np.array(mism), labels, reds)


@dataclass(frozen=True)
class TraceCurve:
    r: np.ndarray
    traces: np.ndarray
    predicted: float  # c^2 = (2 pi Gamma)^2 det hess h(0)
    fitted: float  # from (4 - tr)/r^4 = c^2 + d r^2
    exponent: float

    @property
    def ratio(self) -> np.ndarray:
        return (4.0 - self.traces) / self.r**4


def trace_curve(domain: DomainModel, pair: RelativeEquilibrium, r_grid, *, family: Family | None = None,
                **kw) -> TraceCurve:
    """Traces of ``X_r(2 pi)`` for a two-vortex family against ``4 - c^2 r^4``."""
    if pair.n != 2:
        raise InvalidInputError("trace formula applies to two vortices")
    fam = family if family is not None else continue_family(domain, pair, r_grid, **kw)
    fam.raise_if_failed()
    r = fam.r
    tr = np.array([np.trace(p.monodromy) for p in fam.points])
    if domain.is_trivial:
        c2 = 0.0
    else:
        hess = domain_h(domain, np.zeros(2))[2]
        c2 = float((TWO_PI * pair.vorticities.total) ** 2 * np.linalg.det(hess))
    C, _ = pinned_fit(r, (4.0 - tr).astype(complex), 4.0)
    return TraceCurve(r, tr, c2, float(C.real), loglog_exponent(r, 4.0 - tr))


def reduced_expansion_report(domain: DomainModel, family: Family):
    """Translation-plane expansion check on the reduced monodromies of a family."""
    from .floquet import expansion_report

    chart = family.chart()
    mats = [reduced_monodromy(p, chart, domain).ambient for p in family.points]
    return expansion_report(family.r, mats, family.equilibrium.vorticities, domain)
