"""Monodromy matrices, Floquet spectra with multiplicity clustering, stability labels.

Eigenvalues near 1 are typically defective (a Jordan chain spanned by the
orbit direction and the energy/scaling direction), so they split like
``perturbation**(1/k)``.  Labels are therefore read off clusters formed by
transitive closure at ``cluster_tol``, never off raw eigenvalues.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage
from scipy.linalg import expm

from .core import ScaledHamiltonian, apply_j, diagonal_vector, symplectic_j
from .domains import DomainModel, WholePlane
from .dynamics import variational_flow
from .equilibria import RelativeEquilibrium
from .errors import EigenSolverError, InvalidInputError, NotPeriodicError

CLUSTER_TOL = 1e-5
DEGENERACY_TOL = 1e-4
GEOMETRIC_TOL = 1e-6
PERIODIC_TOL = 1e-8
#: integration tolerance for monodromy matrices; tighter than the flow default
#: because the defective unit multiplier splits like sqrt(error)
MONODROMY_TOL = 1e-13

LABELS = ("spectrally_stable", "spectrally_unstable", "L_stable", "algebraic_nondegenerate", "LRE_stable")


def monodromy_result(sh: ScaledHamiltonian, u0, period: float = 2.0 * np.pi, *,
                     periodic_tol: float = PERIODIC_TOL, tol: float = MONODROMY_TOL):
    """Variational integration over one period, checking that ``u0`` is periodic."""
    res = variational_flow(sh, u0, period, rtol=tol, atol=tol)
    defect = float(np.linalg.norm(res.final_state - np.asarray(u0, dtype=float)))
    if defect > periodic_tol:
        raise NotPeriodicError(f"|phi(T,u0) - u0| = {defect:.3e} exceeds {periodic_tol:.1e}")
    return res


def monodromy(sh: ScaledHamiltonian, u0, period: float = 2.0 * np.pi, *,
              periodic_tol: float = PERIODIC_TOL, tol: float = MONODROMY_TOL) -> np.ndarray:
    """``X(T)`` for a ``T``-periodic initial condition ``u0``."""
    return monodromy_result(sh, u0, period, periodic_tol=periodic_tol, tol=tol).final_matrix


def equilibrium_monodromy(eq: RelativeEquilibrium, *, tol: float = MONODROMY_TOL) -> np.ndarray:
    """Whole-plane monodromy of a relative equilibrium over its own period ``2 pi / |nu|``."""
    sh = ScaledHamiltonian(WholePlane(), eq.vorticities, 0.0)
    return monodromy(sh, eq.z0, eq.period, tol=tol)


def rotation_matrix(nu: float, t: float, n: int) -> np.ndarray:
    """``exp(-nu J_N t)``: counter-clockwise rotation of every vortex by ``nu t``."""
    c, s = np.cos(nu * t), np.sin(nu * t)
    return np.kron(np.eye(n), np.array([[c, -s], [s, c]]))


def rotating_frame_fundamental(eq: RelativeEquilibrium, t: float) -> np.ndarray:
    """``X_0(t) = exp(-nu J t) expm(t (A(z0) + nu J))``, an integration-free oracle."""
    sh = ScaledHamiltonian(WholePlane(), eq.vorticities, 0.0)
    B = sh.linearization(eq.z0) + eq.nu * symplectic_j(eq.n)
    return rotation_matrix(eq.nu, t, eq.n) @ expm(t * B)


def trivial_basis(eq: RelativeEquilibrium) -> np.ndarray:
    """Columns ``e1_hat, e2_hat, J z0, z0`` spanning the trivial Floquet subspace."""
    n = eq.n
    return np.column_stack([diagonal_vector([1.0, 0.0], n), diagonal_vector([0.0, 1.0], n),
                            apply_j(eq.z0), eq.z0])


def trivial_images(eq: RelativeEquilibrium, t: float) -> np.ndarray:
    """Closed-form images of :func:`trivial_basis` under ``X_0(t)``.

    ``X a_hat = a_hat``, ``X J z0 = R(t) J z0`` and
    ``X z0 = R(t)(z0 + 2 t nu J z0)`` with ``R(t) = exp(-nu J t)``.
    """
    R = rotation_matrix(eq.nu, t, eq.n)
    B = trivial_basis(eq)
    jz = apply_j(eq.z0)
    return np.column_stack([B[:, 0], B[:, 1], R @ jz, R @ (eq.z0 + 2.0 * t * eq.nu * jz)])


def pair_closed_form_monodromy(eq: RelativeEquilibrium, t: float | None = None) -> np.ndarray:
    """Full ``X_0(t)`` of a vortex pair assembled from the trivial solutions."""
    if eq.n != 2:
        raise InvalidInputError("closed-form monodromy is only complete for two vortices")
    t = eq.period if t is None else t
    return trivial_images(eq, t) @ np.linalg.inv(trivial_basis(eq))


# -- spectra ------------------------------------------------------------------


def eigenvalues(X) -> np.ndarray:
    X = np.asarray(X)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise InvalidInputError(f"need a square matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InvalidInputError("matrix has non-finite entries")
    try:
        return np.linalg.eigvals(X)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(str(exc)) from exc


def cluster_eigenvalues(ev, tol: float) -> np.ndarray:
    """Cluster ids (0-based, ordered by first appearance) from single linkage at ``tol``."""
    ev = np.asarray(ev, dtype=complex)
    if ev.size == 1:
        return np.zeros(1, dtype=int)
    pts = np.column_stack([ev.real, ev.imag])
    ids = fcluster(linkage(pts, method="single"), t=tol, criterion="distance")
    _, first, inv = np.unique(ids, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inv]


def _cluster_at(ev, ids, target, tol) -> np.ndarray:
    """Indices of the cluster containing an eigenvalue within ``tol`` of ``target``."""
    d = np.abs(ev - target)
    k = int(np.argmin(d))
    if d[k] > tol:
        return np.empty(0, dtype=int)
    return np.nonzero(ids == ids[k])[0]


def geometric_multiplicity_estimate(X, tol: float = GEOMETRIC_TOL) -> int:
    """Numerical nullity of ``X - I`` (singular values below ``tol * max(1, |X|)``)."""
    X = np.asarray(X, dtype=float)
    s = np.linalg.svd(X - np.eye(X.shape[0]), compute_uv=False)
    return int(np.sum(s <= tol * max(1.0, np.linalg.norm(X, 2))))


@dataclass(frozen=True)
class FloquetSpectrum:
    monodromy: np.ndarray
    eigenvalues: np.ndarray
    cluster_ids: np.ndarray
    cluster_tol: float
    unit_multiplicity: int
    labels: frozenset
    geometric_unit_estimate: int
    determinant: float
    pairing_defect: float
    extra: dict = field(default_factory=dict)

    @property
    def clusters(self) -> list[np.ndarray]:
        return [self.eigenvalues[self.cluster_ids == k] for k in range(int(self.cluster_ids.max()) + 1)]

    @property
    def cluster_sizes(self) -> list[int]:
        return [int(np.sum(self.cluster_ids == k)) for k in range(int(self.cluster_ids.max()) + 1)]

    def has(self, label: str) -> bool:
        return label in self.labels

    def nontrivial(self, count: int | None = None) -> np.ndarray:
        """Eigenvalues outside the unit cluster, or the ``count`` farthest from 1."""
        if count is not None:
            order = np.argsort(-np.abs(self.eigenvalues - 1.0))
            return self.eigenvalues[order[:count]]
        unit = _cluster_at(self.eigenvalues, self.cluster_ids, 1.0, self.cluster_tol)
        mask = np.ones(self.eigenvalues.size, dtype=bool)
        mask[unit] = False
        return self.eigenvalues[mask]


def pairing_defect(ev) -> float:
    """Largest distance from ``1/lambda`` to the nearest eigenvalue."""
    ev = np.asarray(ev, dtype=complex)
    inv = 1.0 / ev
    return float(max(np.min(np.abs(ev - w)) for w in inv))


def classify(ev, ids, tol: float) -> frozenset:
    ev = np.asarray(ev, dtype=complex)
    sizes = np.bincount(ids)
    unit = _cluster_at(ev, ids, 1.0, tol)
    minus = _cluster_at(ev, ids, -1.0, tol)
    k_unit = unit.size
    mask = np.ones(ev.size, dtype=bool)
    mask[unit] = False
    others_simple = bool(np.all(sizes[np.unique(ids[mask])] == 1)) if mask.any() else True
    labels = set()
    stable = bool(np.all(np.abs(np.abs(ev) - 1.0) <= tol))
    labels.add("spectrally_stable" if stable else "spectrally_unstable")
    if k_unit == 4:
        labels.add("algebraic_nondegenerate")
    if stable and others_simple and minus.size == 0:
        if k_unit == 2:
            labels.add("L_stable")
        if k_unit == 4:
            labels.add("LRE_stable")
    return frozenset(labels)


def spectrum(X, cluster_tol: float = CLUSTER_TOL) -> FloquetSpectrum:
    """Eigen-data, clusters and stability labels of a monodromy matrix."""
    X = np.asarray(X, dtype=float)
    ev = eigenvalues(X)
    ids = cluster_eigenvalues(ev, cluster_tol)
    unit = _cluster_at(ev, ids, 1.0, cluster_tol)
    return FloquetSpectrum(
        monodromy=X,
        eigenvalues=ev,
        cluster_ids=ids,
        cluster_tol=cluster_tol,
        unit_multiplicity=int(unit.size),
        labels=classify(ev, ids, cluster_tol),
        geometric_unit_estimate=geometric_multiplicity_estimate(X),
        determinant=float(np.linalg.det(X)),
        pairing_defect=pairing_defect(ev),
    )


def quotient_matrix(X, invariant) -> np.ndarray:
    """Map induced by ``X`` on ``R^n / span(invariant)`` in an orthonormal complement basis."""
    X = np.asarray(X, dtype=float)
    W = np.asarray(invariant, dtype=float)
    Q, _ = np.linalg.qr(W, mode="complete")
    Qc = Q[:, W.shape[1]:]
    return Qc.T @ X @ Qc


def unit_multiplier_multiplicity(X, tol: float = CLUSTER_TOL, invariant=None) -> int:
    """Size of the eigenvalue cluster containing 1.

    If the columns of ``invariant`` span an ``X``-invariant subspace on which
    every eigenvalue is 1 (for relative equilibria, :func:`trivial_basis`),
    the count is ``dim`` of that subspace plus the unit cluster of the
    quotient map.  This avoids the ``perturbation**(1/k)`` splitting that a
    long Jordan chain through the trivial directions would otherwise cause.
    """
    if invariant is None:
        return spectrum(X, tol).unit_multiplicity
    W = np.asarray(invariant, dtype=float)
    k = W.shape[1]
    if k == np.asarray(X).shape[0]:
        return k
    Y = quotient_matrix(X, W)
    ev = eigenvalues(Y)
    ids = cluster_eigenvalues(ev, tol)
    return k + int(_cluster_at(ev, ids, 1.0, tol).size)


def equilibrium_spectrum(eq: RelativeEquilibrium, cluster_tol: float = CLUSTER_TOL,
                         degeneracy_tol: float = DEGENERACY_TOL) -> FloquetSpectrum:
    """Spectrum of the whole-plane monodromy of ``eq`` plus a degeneracy count.

    ``extra['unit_multiplicity_deflated']`` is the unit multiplicity at
    ``degeneracy_tol`` computed on the quotient by the trivial subspace.
    """
    X = equilibrium_monodromy(eq)
    spec = spectrum(X, cluster_tol)
    W = trivial_basis(eq)
    if np.linalg.matrix_rank(W, tol=1e-10 * np.linalg.norm(W)) == W.shape[1]:
        spec.extra["unit_multiplicity_deflated"] = unit_multiplier_multiplicity(X, degeneracy_tol, W)
    else:
        spec.extra["unit_multiplicity_deflated"] = unit_multiplier_multiplicity(X, degeneracy_tol)
    spec.extra["trivial_residual"] = float(np.max(np.abs(X @ W - trivial_images(eq, eq.period))))
    return spec


def permute_blocks(X, perm) -> np.ndarray:
    """Conjugate ``X`` by the permutation of vortex blocks ``perm``."""
    perm = np.asarray(perm)
    idx = np.stack([2 * perm, 2 * perm + 1], axis=1).ravel()
    return np.asarray(X)[np.ix_(idx, idx)]


# -- expansion of X_r on the translation subspace ------------------------------


@dataclass(frozen=True)
class ExpansionCheck:
    r: np.ndarray
    target: np.ndarray  # shape (2, 2N): -2 pi Gamma (J hess h(0) a)^ for a = e1, e2
    deltas: np.ndarray  # shape (len(r), 2, 2N)
    deviations: np.ndarray  # shape (len(r), 2), absolute
    relative: np.ndarray  # deviations / |target| (or absolute if target vanishes)
    order: np.ndarray  # fitted convergence order per basis vector

    @property
    def max_deviation(self) -> float:
        return float(self.deviations.max())


def expansion_target(domain: DomainModel, vorticities, period: float = 2.0 * np.pi) -> np.ndarray:
    """``-Gamma t (J hess h(0) a)^`` at ``t = period`` for ``a = e1, e2`` (rows)."""
    from .domains import domain_h

    if domain.is_trivial:
        hess = np.zeros((2, 2))
    else:
        hess = domain_h(domain, np.zeros(2))[2]
    J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])
    n = vorticities.n
    rows = [-vorticities.total * period * diagonal_vector(J2 @ hess @ a, n) for a in np.eye(2)]
    return np.array(rows)


def _order_fit(r, dev) -> float:
    ok = dev > 0
    if ok.sum() < 2:
        return float("inf")
    return float(np.polyfit(np.log(r[ok]), np.log(dev[ok]), 1)[0])


def expansion_report(r, matrices, vorticities, domain, period: float = 2.0 * np.pi) -> ExpansionCheck:
    """Compare ``(X_r a_hat - a_hat)/r^2`` with its predicted limit for a list of matrices."""
    r = np.asarray(r, dtype=float)
    n = vorticities.n
    target = expansion_target(domain, vorticities, period)
    basis = [diagonal_vector(a, n) for a in np.eye(2)]
    deltas = np.array([[(X @ b - b) / ri**2 for b in basis] for ri, X in zip(r, matrices)])
    dev = np.linalg.norm(deltas - target[None], axis=2)
    scale = np.linalg.norm(target, axis=1)
    rel = np.where(scale > 0, dev / np.where(scale > 0, scale, 1.0), dev)
    order = np.array([_order_fit(r, dev[:, i]) for i in range(2)])
    return ExpansionCheck(r, target, deltas, dev, rel, order)


def check_monodromy_expansion(domain: DomainModel, equilibrium: RelativeEquilibrium, r_list,
                              **continuation_kw) -> ExpansionCheck:
    """Continue the family over ``r_list`` and test ``X_r(2 pi) a_hat = a_hat - 2 pi Gamma r^2 (J hess h(0) a)^``."""
    from .continuation import continue_family

    fam = continue_family(domain, equilibrium, r_list, **continuation_kw)
    fam.raise_if_failed()
    rs = np.array([p.r for p in fam.points])
    mats = [p.monodromy for p in fam.points]
    return expansion_report(rs, mats, equilibrium.vorticities, domain)
