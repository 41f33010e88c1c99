"""Vorticities, the whole-plane Hamiltonian and the scaled domain Hamiltonian.

Configurations are flat vectors ``z = (x1, y1, ..., xN, yN)``.  The equations
of motion read ``M u' = J_N grad H_r(u)`` with ``M = diag(G1, G1, ..., GN, GN)``
and ``J_N`` the block-diagonal rotation by ``-pi/2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .domains import DomainModel, WholePlane
from .errors import CollisionError, DomainError, InvalidInputError

#: rotation by -pi/2 acting on one vortex
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])

COLLISION_GUARD = 1e-8


@dataclass(frozen=True)
class Vorticities:
    """Vortex strengths with the derived totals ``Gamma`` and ``L``."""

    gamma: tuple[float, ...]

    def __post_init__(self):
        g = tuple(float(v) for v in np.asarray(self.gamma, dtype=float).ravel())
        if len(g) == 0:
            raise InvalidInputError("need at least one vortex")
        if any(v == 0.0 for v in g) or not all(np.isfinite(g)):
            raise InvalidInputError(f"vortex strengths must be finite and nonzero, got {g}")
        object.__setattr__(self, "gamma", g)

    @property
    def n(self) -> int:
        return len(self.gamma)

    @cached_property
    def array(self) -> np.ndarray:
        return np.asarray(self.gamma)

    @property
    def total(self) -> float:
        return float(np.sum(self.array))

    @property
    def momentum(self) -> float:
        g = self.array
        return float((g.sum() ** 2 - np.sum(g * g)) / 2.0)

    @cached_property
    def mass_matrix(self) -> np.ndarray:
        """``M_Gamma`` as a dense ``2N x 2N`` matrix."""
        return np.diag(np.repeat(self.array, 2))

    @cached_property
    def mass_diag(self) -> np.ndarray:
        return np.repeat(self.array, 2)


def totals(gamma: Sequence[float]) -> tuple[float, float]:
    """Return ``(Gamma, L)``: total vorticity and total vortex angular momentum."""
    v = Vorticities(tuple(gamma))
    g = v.array
    L = float(sum(g[j] * g[k] for j in range(v.n) for k in range(j + 1, v.n)))
    return v.total, L


def symplectic_j(n: int) -> np.ndarray:
    """Block-diagonal ``J_N`` for ``n`` vortices."""
    return np.kron(np.eye(n), J2)


def apply_j(v: np.ndarray) -> np.ndarray:
    """``J_N v`` without forming the matrix: ``(x, y) -> (y, -x)`` per vortex."""
    v = np.asarray(v, dtype=float)
    out = np.empty_like(v)
    out[0::2] = v[1::2]
    out[1::2] = -v[0::2]
    return out


def diagonal_vector(a, n: int) -> np.ndarray:
    """The translation ``a_hat = (a, ..., a)`` in the diagonal subspace ``D``."""
    return np.tile(np.asarray(a, dtype=float).reshape(2), n)


def omega(gamma: Vorticities, v, w) -> float:
    """Symplectic form ``<M v, J_N w>``."""
    return float(np.dot(gamma.mass_diag * np.asarray(v), apply_j(np.asarray(w))))


def _positions(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if z.ndim != 1 or z.size % 2:
        raise InvalidInputError(f"configuration must be a flat vector of even length, got shape {z.shape}")
    return z.reshape(-1, 2)


def pairwise_distances(z) -> np.ndarray:
    p = _positions(z)
    d = p[:, None, :] - p[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", d, d))


def check_collision(z, guard: float = COLLISION_GUARD) -> float:
    """Return the minimal pairwise distance, raising if it is below the guard."""
    dist = pairwise_distances(z)
    n = dist.shape[0]
    if n < 2:
        return np.inf
    off = dist[~np.eye(n, dtype=bool)]
    dmin = float(off.min())
    diameter = float(off.max())
    if not np.isfinite(dmin) or dmin <= guard * max(diameter, np.finfo(float).tiny):
        raise CollisionError(f"near-collision: min distance {dmin:.3e}, diameter {diameter:.3e}")
    return dmin


# -- whole-plane Hamiltonian ------------------------------------------------


def whole_plane_energy(z, vorticities: Vorticities) -> float:
    """``H_0(z) = -(1/2pi) sum_{j != k} G_j G_k log|z_j - z_k|``."""
    check_collision(z)
    p = _positions(z)
    g = vorticities.array
    total = 0.0
    for j in range(len(g)):
        d = p[j + 1:] - p[j]
        total += float(np.sum(g[j] * g[j + 1:] * np.log(np.hypot(d[:, 0], d[:, 1]))))
    return -total / np.pi


def whole_plane_gradient(z, vorticities: Vorticities) -> np.ndarray:
    check_collision(z)
    p = _positions(z)
    g = vorticities.array
    d = p[:, None, :] - p[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, 1.0)
    w = np.outer(g, g)
    np.fill_diagonal(w, 0.0)
    grad = -np.einsum("ij,ijk->ik", w / r2, d) / np.pi
    return grad.ravel()


def whole_plane_hessian(z, vorticities: Vorticities) -> np.ndarray:
    check_collision(z)
    p = _positions(z)
    n = p.shape[0]
    g = vorticities.array
    d = p[:, None, :] - p[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, 1.0)
    # derivative of d/|d|^2 with respect to d
    K = (np.eye(2) * r2[:, :, None, None] - 2.0 * np.einsum("ija,ijb->ijab", d, d)) / (r2**2)[:, :, None, None]
    w = np.outer(g, g) / np.pi
    np.fill_diagonal(w, 0.0)
    blocks = w[:, :, None, None] * K
    diag = -blocks.sum(axis=1)
    idx = np.arange(n)
    blocks[idx, idx] = diag
    return blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


# -- domain interaction F(z) = sum_{j,k} G_j G_k g(z_j, z_k) -----------------


def _pair_indices(n: int):
    j, k = np.nonzero(~np.eye(n, dtype=bool))
    return j, k


def interaction_energy(domain: DomainModel, z, vorticities: Vorticities) -> float:
    p = _positions(z)
    g = vorticities.array
    h = domain.robin(p)[0]
    total = float(np.sum(g * g * h))
    if p.shape[0] > 1:
        j, k = _pair_indices(p.shape[0])
        gv = domain.g_derivs(p[j], p[k])[0]
        total += float(np.sum(g[j] * g[k] * gv))
    return total


def interaction_derivatives(domain: DomainModel, z, vorticities: Vorticities, *, hessian: bool = True):
    """Gradient (and Hessian) of ``F`` at ``z``."""
    p = _positions(z)
    n = p.shape[0]
    g = vorticities.array
    _, hg, hh = domain.robin(p)
    grad = (g * g)[:, None] * hg
    blocks = np.zeros((n, n, 2, 2))
    idx = np.arange(n)
    blocks[idx, idx] = (g * g)[:, None, None] * hh
    if n > 1:
        j, k = _pair_indices(n)
        _, g1, g11, g12 = domain.g_derivs(p[j], p[k])
        wjk = 2.0 * g[j] * g[k]
        np.add.at(grad, j, wjk[:, None] * g1)
        if hessian:
            np.add.at(blocks, (j, j), wjk[:, None, None] * g11)
            blocks[j, k] = wjk[:, None, None] * g12
    grad = grad.ravel()
    if not hessian:
        return grad, None
    return grad, blocks.transpose(0, 2, 1, 3).reshape(2 * n, 2 * n)


@dataclass(frozen=True)
class ScaledHamiltonian:
    """``H_r(u) = H_0(u) - F(r u) + F(0)`` for a domain model and vorticities."""

    domain: DomainModel = field(default_factory=WholePlane)
    vorticities: Vorticities = field(default_factory=lambda: Vorticities((1.0, 1.0)))
    r: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.r) or self.r < 0.0:
            raise InvalidInputError(f"scale parameter r must be >= 0, got {self.r}")
        object.__setattr__(self, "r", float(self.r))

    @property
    def n(self) -> int:
        return self.vorticities.n

    @property
    def uses_domain(self) -> bool:
        return self.r > 0.0 and not self.domain.is_trivial

    def with_r(self, r: float) -> "ScaledHamiltonian":
        return ScaledHamiltonian(self.domain, self.vorticities, r)

    def _check_domain(self, u) -> None:
        if self.uses_domain:
            pts = self.r * _positions(u)
            inside = self.domain.contains(pts)
            if not np.all(inside):
                raise DomainError(f"vortex left the domain at r={self.r}: {pts[~inside].tolist()}")

    @cached_property
    def f_zero(self) -> float:
        """``F(0) = Gamma^2 h(0)``."""
        if self.domain.is_trivial:
            return 0.0
        h0 = float(self.domain.robin(np.zeros(2))[0])
        return self.vorticities.total ** 2 * h0

    def interaction(self, z) -> float:
        """``F(z)`` in unscaled coordinates."""
        if self.domain.is_trivial:
            return 0.0
        return interaction_energy(self.domain, z, self.vorticities)

    def energy(self, u) -> float:
        H = whole_plane_energy(u, self.vorticities)
        if self.uses_domain:
            self._check_domain(u)
            H += -self.interaction(self.r * np.asarray(u, dtype=float)) + self.f_zero
        return H

    def gradient(self, u) -> np.ndarray:
        grad = whole_plane_gradient(u, self.vorticities)
        if self.uses_domain:
            self._check_domain(u)
            gF, _ = interaction_derivatives(self.domain, self.r * np.asarray(u, dtype=float),
                                            self.vorticities, hessian=False)
            grad = grad - self.r * gF
        return grad

    def hessian(self, u) -> np.ndarray:
        hess = whole_plane_hessian(u, self.vorticities)
        if self.uses_domain:
            self._check_domain(u)
            _, hF = interaction_derivatives(self.domain, self.r * np.asarray(u, dtype=float),
                                            self.vorticities)
            hess = hess - self.r**2 * hF
        return hess

    def evaluate(self, u):
        """Return ``(H_r, grad H_r, hess H_r)`` at ``u``."""
        return self.energy(u), self.gradient(u), self.hessian(u)

    def vector_field(self, u) -> np.ndarray:
        """``u' = M^{-1} J_N grad H_r(u)``."""
        return apply_j(self.gradient(u)) / self.vorticities.mass_diag

    def linearization(self, u) -> np.ndarray:
        """``A(u) = M^{-1} J_N hess H_r(u)``."""
        hess = self.hessian(u)
        A = np.empty_like(hess)
        A[0::2] = hess[1::2]
        A[1::2] = -hess[0::2]
        return A / self.vorticities.mass_diag[:, None]


def scaled_hamiltonian_eval(sh: ScaledHamiltonian, u):
    return sh.evaluate(u)
