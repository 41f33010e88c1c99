"""Critical points of the Robin function ``h`` and the multiplier prediction they imply."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domains import ConformalImage, DomainModel, Translated, UnitDisc
from .errors import DomainError, InversionError, PreconditionError

GRAD_TOL = 1e-10
DEDUP_TOL = 1e-8
DEGENERATE_TOL = 1e-8


@dataclass(frozen=True)
class CriticalPoint:
    a0: np.ndarray
    h: float
    gradient: np.ndarray
    hessian: np.ndarray
    classification: str  # "min", "max", "saddle" or "degenerate"
    nondegenerate: bool
    last_step: float

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.hessian))

    def prediction_coefficient(self, total: float) -> complex:
        """``2 pi Gamma sqrt(-det hess h(a0))``: imaginary at extrema, real at saddles."""
        return complex(2.0 * np.pi * total * np.sqrt(complex(-self.det)))


def classify_hessian(hess, tol: float = DEGENERATE_TOL) -> tuple[str, bool]:
    hess = np.asarray(hess, dtype=float)
    scale = float(np.linalg.norm(hess))
    if scale == 0.0 or abs(np.linalg.det(hess)) < tol * scale**2:
        return "degenerate", False
    ev = np.linalg.eigvalsh(0.5 * (hess + hess.T))
    if np.all(ev > 0):
        return "min", True
    if np.all(ev < 0):
        return "max", True
    return "saddle", True


def default_seeds(domain: DomainModel, n: int = 7) -> np.ndarray:
    """Regular seed grid in a conservative interior region (``|phi(x)| < 0.9`` in disc coordinates)."""
    if isinstance(domain, Translated):
        return default_seeds(domain.base, n) - np.asarray(domain.center)
    if isinstance(domain, (UnitDisc, ConformalImage)):
        rad = np.linspace(0.0, 0.9, n)[1:]
        ang = np.linspace(0.0, 2.0 * np.pi, 2 * n, endpoint=False)
        w = np.concatenate([[0.0], (rad[:, None] * np.exp(1j * ang[None, :])).ravel()])
        z = domain.psi(w) if isinstance(domain, ConformalImage) else w
        return np.stack([z.real, z.imag], axis=1)
    t = np.linspace(-1.0, 1.0, n)
    X, Y = np.meshgrid(t, t)
    return np.stack([X.ravel(), Y.ravel()], axis=1)


def newton_critical_point(domain: DomainModel, seed, *, tol: float = 1e-13, max_iter: int = 60):
    """Damped Newton on ``grad h``; returns ``(x, converged)``."""
    x = np.asarray(seed, dtype=float).reshape(2)
    try:
        _, g, H = domain.robin(x)
    except (DomainError, InversionError):
        return x, False
    for _ in range(max_iter):
        gn = float(np.linalg.norm(g))
        if gn <= tol:
            return x, True
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            return x, False
        lam = 1.0
        for _ in range(30):
            trial = x - lam * step
            if np.all(domain.contains(trial)):
                try:
                    _, gt, Ht = domain.robin(trial)
                except (DomainError, InversionError):
                    gt = None
                if gt is not None and np.linalg.norm(gt) < gn:
                    x, g, H = trial, gt, Ht
                    break
            lam *= 0.5
        else:
            return x, gn <= GRAD_TOL
    return x, float(np.linalg.norm(g)) <= GRAD_TOL


def find_critical_points(domain: DomainModel, seeds=None, *, dedup_tol: float = DEDUP_TOL,
                         return_failures: bool = False):
    """Newton from every seed; converged points deduplicated and classified.

    Seeds that diverge or leave the domain are collected as failures instead
    of aborting the search.
    """
    if domain.is_trivial:
        raise PreconditionError("Robin function vanishes identically: every point is critical")
    seeds = default_seeds(domain) if seeds is None else np.atleast_2d(np.asarray(seeds, dtype=float))
    found: list[CriticalPoint] = []
    failures = []
    for s in seeds:
        if not np.all(domain.contains(s)):
            failures.append(s)
            continue
        x, ok = newton_critical_point(domain, s)
        if not ok:
            failures.append(s)
            continue
        if any(np.linalg.norm(x - c.a0) <= dedup_tol for c in found):
            continue
        h, g, H = domain.robin(x)
        step = float(np.linalg.norm(np.linalg.solve(H, g))) if np.linalg.det(H) != 0 else np.inf
        cls, nondeg = classify_hessian(H)
        found.append(CriticalPoint(x, float(h), np.asarray(g), np.asarray(H), cls, nondeg, step))
    found.sort(key=lambda c: (round(float(c.a0[0]), 9), round(float(c.a0[1]), 9)))
    if return_failures:
        return found, failures
    return found


def prediction_coefficient(domain: DomainModel, a0, total: float) -> complex:
    _, _, H = domain.robin(np.asarray(a0, dtype=float))
    return complex(2.0 * np.pi * total * np.sqrt(complex(-np.linalg.det(H))))
