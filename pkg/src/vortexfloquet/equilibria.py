"""Rigidly rotating configurations of the whole-plane system and their known multipliers.

A relative equilibrium ``Z(t) = exp(-nu J_N t) z0`` satisfies
``grad H_0(z0) + nu M z0 = 0``.  With ``J`` the rotation by ``-pi/2`` this is a
counter-clockwise rotation with angular speed ``nu``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .core import Vorticities, check_collision, whole_plane_gradient
from .errors import InvalidInputError

CATALOG_KINDS = ("pair", "triangle", "rhombus")


@dataclass(frozen=True)
class RelativeEquilibrium:
    z0: np.ndarray
    nu: float
    vorticities: Vorticities
    kind: str = "custom"
    flags: tuple[str, ...] = ()
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        z0 = np.array(self.z0, dtype=float).ravel()
        z0.setflags(write=False)
        object.__setattr__(self, "z0", z0)
        if z0.size != 2 * self.vorticities.n:
            raise InvalidInputError("z0 length does not match the number of vortices")
        if self.nu == 0.0 or not np.isfinite(self.nu):
            raise InvalidInputError("rotation frequency must be finite and nonzero")

    @property
    def n(self) -> int:
        return self.vorticities.n

    @property
    def period(self) -> float:
        return 2.0 * np.pi / abs(self.nu)

    @property
    def residual(self) -> float:
        return equilibrium_residual(self.z0, self.nu, self.vorticities)

    @property
    def center_of_vorticity(self) -> np.ndarray:
        return self.z0.reshape(-1, 2).T @ self.vorticities.array

    def rotate(self, t: float) -> np.ndarray:
        """Position on the orbit at time ``t``: ``exp(-nu J_N t) z0``."""
        c, s = np.cos(self.nu * t), np.sin(self.nu * t)
        R = np.array([[c, -s], [s, c]])
        return (self.z0.reshape(-1, 2) @ R.T).ravel()

    def scaled(self, factor: float) -> "RelativeEquilibrium":
        """Radial rescaling ``z0 -> factor z0``; the frequency scales as ``factor**-2``."""
        return replace(self, z0=factor * self.z0, nu=self.nu / factor**2)

    def normalized(self) -> "RelativeEquilibrium":
        """Rescale so that ``|nu| = 1`` and the orbit is ``2 pi``-periodic."""
        return self.scaled(np.sqrt(abs(self.nu)))

    def relabeled(self, perm) -> "RelativeEquilibrium":
        perm = np.asarray(perm)
        gam = Vorticities(tuple(self.vorticities.array[perm]))
        z = self.z0.reshape(-1, 2)[perm].ravel()
        return replace(self, z0=z, vorticities=gam)


def frequency_of(z0, vorticities: Vorticities) -> float:
    """Best-fit rotation frequency ``-<grad H_0, M z0> / |M z0|^2``."""
    Mz = vorticities.mass_diag * np.asarray(z0, dtype=float)
    return float(-np.dot(whole_plane_gradient(z0, vorticities), Mz) / np.dot(Mz, Mz))


def equilibrium_residual(z0, nu: float, vorticities: Vorticities) -> float:
    """``|grad H_0(z0) + nu M z0|``; zero exactly for a relative equilibrium of frequency ``nu``."""
    z0 = np.asarray(z0, dtype=float)
    return float(np.linalg.norm(whole_plane_gradient(z0, vorticities) + nu * vorticities.mass_diag * z0))


def relative_equilibrium(gamma, positions, *, kind: str = "custom", tol: float = 1e-10,
                         flags: tuple[str, ...] = (), params: dict | None = None) -> RelativeEquilibrium:
    """Wrap given positions, extracting the frequency and verifying the rotation identity."""
    vort = gamma if isinstance(gamma, Vorticities) else Vorticities(tuple(gamma))
    z0 = np.asarray(positions, dtype=float).ravel()
    if z0.size != 2 * vort.n:
        raise InvalidInputError(f"need {2 * vort.n} coordinates for {vort.n} vortices, got {z0.size}")
    check_collision(z0)
    nu = frequency_of(z0, vort)
    res = equilibrium_residual(z0, nu, vort)
    scale = np.linalg.norm(vort.mass_diag * z0) * max(abs(nu), 1.0)
    if res > tol * max(scale, 1.0):
        raise InvalidInputError(f"positions are not a relative equilibrium (residual {res:.3e})")
    if abs(nu) < 1e-14:
        raise InvalidInputError("configuration does not rotate (nu = 0)")
    return RelativeEquilibrium(z0, nu, vort, kind, tuple(flags), dict(params or {}))


def make_vortex_pair(gamma1: float, gamma2: float, separation: float = 1.0) -> RelativeEquilibrium:
    """Two vortices on the x-axis, centre of vorticity at the origin, ``nu = Gamma/(pi D^2)``."""
    vort = Vorticities((gamma1, gamma2))
    G = vort.total
    if G == 0.0:
        raise InvalidInputError("Gamma1 + Gamma2 = 0: the pair translates instead of rotating")
    if not separation > 0.0:
        raise InvalidInputError("separation must be positive")
    x1 = -gamma2 * separation / G
    x2 = gamma1 * separation / G
    z0 = np.array([x1, 0.0, x2, 0.0])
    nu = G / (np.pi * separation**2)
    return RelativeEquilibrium(z0, nu, vort, "pair", (), {"separation": float(separation)})


def triangle_flags(vort: Vorticities) -> tuple[str, ...]:
    g = vort.array
    L = vort.momentum
    sq = float(np.sum(g * g))
    tol = 1e-12 * max(sq, 1.0)
    flags = []
    if abs(L) <= tol:
        flags.append("L_zero")
    if np.allclose(g, g[0], rtol=1e-12, atol=0.0):
        flags.append("equal_vorticities")
    if flags:
        flags.append("algebraically_degenerate_expected")
    if L < -tol:
        flags.append("spectrally_unstable_expected")
    if L > tol and "equal_vorticities" not in flags and abs(10.0 * L - sq) > tol:
        flags.append("LRE_stable_expected")
    return tuple(flags)


def make_equilateral_triangle(gamma1: float, gamma2: float, gamma3: float) -> RelativeEquilibrium:
    """Equilateral triangle centred at the centre of vorticity, scaled to ``nu = Gamma/3``."""
    vort = Vorticities((gamma1, gamma2, gamma3))
    G = vort.total
    if G == 0.0:
        raise InvalidInputError("total vorticity is zero")
    ang = np.pi / 2.0 + 2.0 * np.pi * np.arange(3) / 3.0
    p = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    p -= (vort.array @ p) / G
    z = p.ravel()
    nu1 = frequency_of(z, vort)
    target = G / 3.0
    if nu1 / target <= 0.0:
        raise InvalidInputError("cannot scale triangle to nu = Gamma/3 (sign mismatch)")
    eq = relative_equilibrium(vort, z, kind="triangle")
    eq = eq.scaled(np.sqrt(nu1 / target))
    return replace(eq, nu=target, flags=triangle_flags(vort))


def rhombus_kappa(y: float) -> float:
    return (3.0 * y**2 - y**4) / (3.0 * y**2 - 1.0)


def rhombus_nu(y: float) -> float:
    return 0.5 + 2.0 * rhombus_kappa(y) / (y**2 + 1.0)


def rhombus_mu(y: float) -> tuple[float, float]:
    y2 = y * y
    mu1 = (7.0 * y2**2 - 18.0 * y2 + 7.0) / (2.0 * (y2 + 1.0) * (3.0 * y2 - 1.0))
    mu2 = (2.0 * (y2 - 1.0) * (y2 + 2.0 * y - 1.0) * (y2 - 2.0 * y - 1.0)
           / ((y2 + 1.0) ** 2 * (3.0 * y2 - 1.0)))
    return mu1, mu2


def make_rhombus(y: float) -> RelativeEquilibrium:
    """Rhombus with strengths ``(1, 1, kappa, kappa)`` at ``pi^{-1/2}(-+1, 0), pi^{-1/2}(0, -+y)``."""
    if not y > 1.0 / np.sqrt(3.0):
        raise InvalidInputError("rhombus parameter must satisfy y > 1/sqrt(3)")
    k = rhombus_kappa(y)
    vort = Vorticities((1.0, 1.0, k, k))
    z0 = np.array([-1.0, 0.0, 1.0, 0.0, 0.0, -y, 0.0, y]) / np.sqrt(np.pi)
    flags = []
    if abs(vort.total) < 1e-12:
        flags += ["Gamma_zero", "algebraically_degenerate_expected"]
    if abs(y - 1.0) < 1e-12:
        flags += ["regular_4gon", "degenerate_expected"]
    return RelativeEquilibrium(z0, rhombus_nu(y), vort, "rhombus", tuple(flags), {"y": float(y)})


def make_gamma_zero_rotor(rho: float = 1.0) -> RelativeEquilibrium:
    """Strengths ``(1, -1/2, -1/2)`` at ``0, (rho, 0), (-rho, 0)``: a rotor with ``Gamma = 0``."""
    eq = relative_equilibrium((1.0, -0.5, -0.5), [0.0, 0.0, rho, 0.0, -rho, 0.0], kind="custom",
                              flags=("Gamma_zero", "algebraically_degenerate_expected"),
                              params={"rho": float(rho)})
    return eq


def predicted_multipliers(eq: RelativeEquilibrium) -> np.ndarray:
    """Closed-form nontrivial Floquet multipliers over one period.

    Pairs have none; the triangle uses ``nu = Gamma/3`` and the rhombus its
    ``nu(y)``, ``mu_j(y)``.  Complex square roots carry both signs of ``L``.
    """
    if eq.kind == "pair":
        return np.empty(0, dtype=complex)
    if eq.kind == "triangle":
        nu = eq.vorticities.total / 3.0
        root = np.sqrt(complex(-eq.vorticities.momentum / 3.0))
        ex = (2.0 * np.pi / nu) * root
        return np.array([np.exp(ex), np.exp(-ex)])
    if eq.kind == "rhombus":
        y = eq.params["y"]
        nu = rhombus_nu(y)
        out = []
        for mu in rhombus_mu(y):
            ex = (2j * np.pi / nu) * np.sqrt(complex(nu**2 - mu**2))
            out += [np.exp(ex), np.exp(-ex)]
        return np.array(out)
    raise InvalidInputError(f"no closed-form multipliers for kind {eq.kind!r}")


def catalog_equilibrium(kind: str, *args: float) -> RelativeEquilibrium:
    if kind == "pair":
        return make_vortex_pair(*args)
    if kind == "triangle":
        return make_equilateral_triangle(*args)
    if kind == "rhombus":
        return make_rhombus(*args)
    raise InvalidInputError(f"unknown equilibrium kind {kind!r}")
