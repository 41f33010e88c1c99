"""Domain models: the regular part ``g`` of a Green's function and its Robin function.

Every model supplies, vectorised over leading axes,

* ``g_derivs(x, y)`` -> ``(g, grad_x g, d2g/dx dx, d2g/dx dy)`` for ``x != y``,
* ``robin(x)`` -> ``(h, grad h, hess h)`` with ``h(x) = g(x, x)``,
* ``contains(x)`` -> boolean mask of interior points.

Points are arrays whose last axis has length 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConfigError, DomainError, InversionError

_FOUR_PI = 4.0 * np.pi
_TWO_PI = 2.0 * np.pi


def _as_points(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1] != 2:
        raise ValueError(f"points must have a trailing axis of length 2, got shape {arr.shape}")
    return arr


def _harmonic_hessian(c: np.ndarray) -> np.ndarray:
    """Real Hessian of ``Re f`` given the complex second derivative ``f''``."""
    out = np.empty(c.shape + (2, 2))
    out[..., 0, 0] = c.real
    out[..., 0, 1] = -c.imag
    out[..., 1, 0] = -c.imag
    out[..., 1, 1] = -c.real
    return out


class DomainModel:
    """Base class. Subclasses override the evaluation methods."""

    kind: str = "abstract"

    def contains(self, x) -> np.ndarray:
        x = _as_points(x)
        return np.ones(x.shape[:-1], dtype=bool)

    def check_inside(self, x) -> None:
        inside = self.contains(x)
        if not np.all(inside):
            bad = _as_points(x)[~inside]
            raise DomainError(f"{self.kind}: points outside the domain: {bad.tolist()}")

    def g(self, x, y) -> np.ndarray:
        return self.g_derivs(x, y)[0]

    def g_derivs(self, x, y):
        raise NotImplementedError

    def robin(self, x):
        raise NotImplementedError

    def h(self, x) -> np.ndarray:
        return self.robin(x)[0]

    def params(self) -> dict[str, str]:
        return {}

    def recentered(self, center) -> "DomainModel":
        """Return the same domain expressed in coordinates where ``center`` is the origin."""
        c = np.asarray(center, dtype=float).reshape(2)
        if np.all(c == 0.0):
            return self
        return Translated(self, c)

    @property
    def is_trivial(self) -> bool:
        """True when ``g`` vanishes identically."""
        return False


@dataclass(frozen=True)
class WholePlane(DomainModel):
    kind = "whole-plane"

    def g_derivs(self, x, y):
        x = _as_points(x)
        shape = np.broadcast_shapes(x.shape[:-1], _as_points(y).shape[:-1])
        return (np.zeros(shape), np.zeros(shape + (2,)),
                np.zeros(shape + (2, 2)), np.zeros(shape + (2, 2)))

    def robin(self, x):
        x = _as_points(x)
        shape = x.shape[:-1]
        return np.zeros(shape), np.zeros(shape + (2,)), np.zeros(shape + (2, 2))

    @property
    def is_trivial(self) -> bool:
        return True


@dataclass(frozen=True)
class UnitDisc(DomainModel):
    """Dirichlet regular part of the unit disc (image-charge construction).

    ``g(x, y) = -(1/4pi) log(1 - 2 x.y + |x|^2 |y|^2)``, which equals
    ``-(1/2pi) log(|x| |y - x/|x|^2|)`` and is smooth through ``x = 0``.
    """

    kind = "unit-disc"

    def contains(self, x) -> np.ndarray:
        x = _as_points(x)
        return np.einsum("...i,...i->...", x, x) < 1.0

    def g_derivs(self, x, y):
        x, y = np.broadcast_arrays(_as_points(x), _as_points(y))
        xx = np.einsum("...i,...i->...", x, x)
        yy = np.einsum("...i,...i->...", y, y)
        xy = np.einsum("...i,...i->...", x, y)
        q = 1.0 - 2.0 * xy + xx * yy
        qx = -2.0 * y + 2.0 * yy[..., None] * x
        qy = -2.0 * x + 2.0 * xx[..., None] * y
        eye = np.eye(2)
        g = -np.log(q) / _FOUR_PI
        grad = -qx / (_FOUR_PI * q[..., None])
        qq = q[..., None, None]
        g11 = -(2.0 * yy[..., None, None] * eye / qq
                - np.einsum("...i,...j->...ij", qx, qx) / qq**2) / _FOUR_PI
        qxy = -2.0 * eye + 4.0 * np.einsum("...i,...j->...ij", x, y)
        g12 = -(qxy / qq - np.einsum("...i,...j->...ij", qx, qy) / qq**2) / _FOUR_PI
        return g, grad, g11, g12

    def robin(self, x):
        x = _as_points(x)
        s = np.einsum("...i,...i->...", x, x)
        if np.any(s >= 1.0):
            raise DomainError("unit-disc: Robin function evaluated on or outside the boundary")
        one_m = 1.0 - s
        h = -np.log(one_m) / _TWO_PI
        grad = x / (np.pi * one_m[..., None])
        hess = (np.eye(2) / one_m[..., None, None]
                + 2.0 * np.einsum("...i,...j->...ij", x, x) / one_m[..., None, None] ** 2) / np.pi
        return h, grad, hess


@dataclass(frozen=True)
class SyntheticQuadratic(DomainModel):
    """``g(x, y) = x^T S y`` on the whole plane; Robin Hessian is exactly ``2 S``."""

    s: tuple[tuple[float, float], tuple[float, float]] = ((1.0, 0.0), (0.0, -1.0))
    kind = "synthetic-quadratic"

    def __post_init__(self):
        mat = np.asarray(self.s, dtype=float)
        if mat.shape != (2, 2) or not np.allclose(mat, mat.T, rtol=0.0, atol=0.0):
            raise ConfigError("synthetic-quadratic: S must be a symmetric 2x2 matrix")
        object.__setattr__(self, "s", tuple(map(tuple, mat.tolist())))

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.s, dtype=float)

    def g_derivs(self, x, y):
        x, y = np.broadcast_arrays(_as_points(x), _as_points(y))
        S = self.matrix
        g = np.einsum("...i,ij,...j->...", x, S, y)
        grad = y @ S.T
        shape = x.shape[:-1] + (2, 2)
        return g, grad, np.zeros(shape), np.broadcast_to(S, shape).copy()

    def robin(self, x):
        x = _as_points(x)
        S = self.matrix
        h = np.einsum("...i,ij,...j->...", x, S, x)
        return h, 2.0 * x @ S.T, np.broadcast_to(2.0 * S, x.shape[:-1] + (2, 2)).copy()

    def params(self) -> dict[str, str]:
        (a, b), (_, d) = self.s
        return {"s11": repr(float(a)), "s12": repr(float(b)), "s22": repr(float(d))}


@dataclass(frozen=True)
class ConformalImage(DomainModel):
    """Image of the unit disc under a univalent polynomial ``psi(w) = sum c_k w^k``.

    ``g`` is transported from the disc:
    ``g(x, y) = g_D(phi x, phi y) + (1/2pi) log(|phi x - phi y| / |x - y|)``
    with ``phi = psi^{-1}``.  Derivatives are evaluated analytically through
    complex calculus on ``phi``, which is inverted by damped Newton.
    """

    coefficients: tuple[complex, ...] = (0.0, 1.0)
    grid_radii: int = 40
    grid_angles: int = 72
    kind = "conformal"

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 1 or c.size < 2:
            raise ConfigError("conformal: need at least a constant and a linear coefficient")
        object.__setattr__(self, "coefficients", tuple(complex(v) for v in c))
        self._check_univalent()

    @cached_property
    def _polys(self):
        c = np.asarray(self.coefficients, dtype=complex)
        d1 = npoly.polyder(c)
        d2 = npoly.polyder(d1) if d1.size > 1 else np.zeros(1, dtype=complex)
        d3 = npoly.polyder(d2) if d2.size > 1 else np.zeros(1, dtype=complex)
        return c, d1, d2, d3

    def psi(self, w):
        return npoly.polyval(w, self._polys[0])

    def dpsi(self, w, order: int = 1):
        return npoly.polyval(w, self._polys[order])

    def _check_univalent(self) -> None:
        rad = np.linspace(0.0, 1.0, 41)
        ang = np.linspace(0.0, 2.0 * np.pi, 181)
        w = (rad[:, None] * np.exp(1j * ang[None, :])).ravel()
        d = np.abs(self.dpsi(w))
        if d.min() <= 1e-8 * max(d.max(), 1.0):
            raise ConfigError("conformal: psi' vanishes on the closed disc; map is not univalent")

    @cached_property
    def _seed_grid(self):
        rad = np.linspace(0.0, 0.995, self.grid_radii)
        ang = np.linspace(0.0, 2.0 * np.pi, self.grid_angles, endpoint=False)
        w = (rad[:, None] * np.exp(1j * ang[None, :])).ravel()
        return w, self.psi(w)

    def invert(self, x, *, strict: bool = True):
        """Return ``(w, ok)`` with ``psi(w) = x`` for each point.

        With ``strict`` set, a point outside the image raises ``DomainError``
        and a non-converged interior solve raises ``InversionError``.
        """
        x = _as_points(x)
        z = (x[..., 0] + 1j * x[..., 1]).ravel()
        wg, pg = self._seed_grid
        w = wg[np.argmin(np.abs(z[:, None] - pg[None, :]), axis=1)].copy()
        scale = 1.0 + np.abs(z)
        res = self.psi(w) - z
        done = np.abs(res) <= 1e-15 * scale
        for _ in range(80):
            if done.all():
                break
            act = ~done
            step = res[act] / self.dpsi(w[act])
            lam = np.ones(step.shape)
            w_act = w[act]
            r_act = np.abs(res[act])
            accepted = np.zeros(step.shape, dtype=bool)
            w_new = w_act.copy()
            r_new = r_act.copy()
            for _ in range(40):
                trial = w_act - lam * step
                rt = np.abs(self.psi(trial) - z[act])
                ok = (np.abs(trial) < 1.0) & (rt < r_act) & ~accepted
                w_new[ok] = trial[ok]
                r_new[ok] = rt[ok]
                accepted |= ok
                if accepted.all():
                    break
                lam = np.where(accepted, lam, 0.5 * lam)
            w[act] = w_new
            res[act] = self.psi(w_new) - z[act]
            stalled = ~accepted
            newly = np.abs(res[act]) <= 1e-14 * scale[act]
            idx = np.flatnonzero(act)
            done[idx[newly | stalled]] = True
        ok = (np.abs(res) <= 1e-12 * scale) & (np.abs(w) < 1.0)
        if strict and not ok.all():
            outside = (~ok) & (np.abs(w) > 0.999)
            if outside.any():
                raise DomainError(f"conformal: points outside the domain: {x.reshape(-1, 2)[outside].tolist()}")
            raise InversionError(
                f"conformal: inversion did not converge (residual {np.abs(res[~ok]).max():.3e})")
        return w.reshape(x.shape[:-1]), ok.reshape(x.shape[:-1])

    def contains(self, x) -> np.ndarray:
        _, ok = self.invert(x, strict=False)
        return ok

    def g_derivs(self, x, y):
        x, y = np.broadcast_arrays(_as_points(x), _as_points(y))
        X = x[..., 0] + 1j * x[..., 1]
        Y = y[..., 0] + 1j * y[..., 1]
        w, _ = self.invert(x)
        v, _ = self.invert(y)
        pw = self.dpsi(w)
        pv = self.dpsi(v)
        ax = 1.0 / pw
        ay = 1.0 / pv
        bx = -self.dpsi(w, 2) / pw**3
        vb = np.conj(v)
        dwv = w - v
        dxy = X - Y
        one = 1.0 - w * vb
        g = (np.log(np.abs(dwv)) - np.log(np.abs(dxy)) - np.log(np.abs(one))) / _TWO_PI
        A_x = ax / dwv - 1.0 / dxy + ax * vb / one
        grad = np.stack([A_x.real, -A_x.imag], axis=-1) / _TWO_PI
        A_xx = (bx / dwv - ax**2 / dwv**2 + 1.0 / dxy**2
                + bx * vb / one + ax**2 * vb**2 / one**2)
        g11 = _harmonic_hessian(A_xx) / _TWO_PI
        K = ax * ay / dwv**2 - 1.0 / dxy**2
        Kb = ax * np.conj(ay) / one**2
        g12 = _harmonic_hessian(K)
        g12[..., 0, 0] += Kb.real
        g12[..., 0, 1] += Kb.imag
        g12[..., 1, 0] += -Kb.imag
        g12[..., 1, 1] += Kb.real
        return g, grad, g11, g12 / _TWO_PI

    def robin(self, x):
        x = _as_points(x)
        w, _ = self.invert(x)
        p1 = self.dpsi(w)
        p2 = self.dpsi(w, 2)
        p3 = self.dpsi(w, 3)
        s = np.abs(w) ** 2
        one_m = 1.0 - s
        wv = np.stack([w.real, w.imag], axis=-1)
        h = -(np.log(one_m) + np.log(np.abs(p1))) / _TWO_PI
        b1 = p2 / p1
        b2 = p3 / p1 - b1**2
        grad_w = -(-2.0 * wv / one_m[..., None] + np.stack([b1.real, -b1.imag], axis=-1)) / _TWO_PI
        hess_w = -(-2.0 * np.eye(2) / one_m[..., None, None]
                   - 4.0 * np.einsum("...i,...j->...ij", wv, wv) / one_m[..., None, None] ** 2
                   + _harmonic_hessian(b2)) / _TWO_PI
        a = 1.0 / p1
        b = -p2 / p1**3
        jac = np.empty(w.shape + (2, 2))
        jac[..., 0, 0] = a.real
        jac[..., 0, 1] = -a.imag
        jac[..., 1, 0] = a.imag
        jac[..., 1, 1] = a.real
        grad = np.einsum("...ji,...j->...i", jac, grad_w)
        hess_re = _harmonic_hessian(b)
        hess_im = _harmonic_hessian(-1j * b)
        hess = (np.einsum("...ki,...kl,...lj->...ij", jac, hess_w, jac)
                + grad_w[..., 0, None, None] * hess_re
                + grad_w[..., 1, None, None] * hess_im)
        return h, grad, hess

    def params(self) -> dict[str, str]:
        c = self.coefficients
        return {
            "coeff_re": ", ".join(repr(float(v.real)) for v in c),
            "coeff_im": ", ".join(repr(float(v.imag)) for v in c),
        }


@dataclass(frozen=True)
class Translated(DomainModel):
    """``base`` viewed in coordinates centred at ``center``."""

    base: DomainModel = field(default_factory=WholePlane)
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.asarray(self.center).reshape(2)))

    @property
    def kind(self) -> str:
        return self.base.kind

    @property
    def is_trivial(self) -> bool:
        return self.base.is_trivial

    def _shift(self, x):
        return _as_points(x) + np.asarray(self.center)

    def contains(self, x):
        return self.base.contains(self._shift(x))

    def g_derivs(self, x, y):
        return self.base.g_derivs(self._shift(x), self._shift(y))

    def robin(self, x):
        return self.base.robin(self._shift(x))

    def params(self) -> dict[str, str]:
        return self.base.params()

    def recentered(self, center) -> DomainModel:
        c = np.asarray(self.center) + np.asarray(center, dtype=float).reshape(2)
        return self.base.recentered(c)


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.replace(";", ",").split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse float list {text!r}") from exc


def domain_to_params(domain: DomainModel) -> dict[str, str]:
    """Key/value representation; floats use shortest round-trip ``repr``."""
    out = {"kind": domain.kind}
    out.update(domain.params())
    if isinstance(domain, Translated):
        out["center"] = ", ".join(repr(float(v)) for v in domain.center)
    return out


def domain_from_params(params: dict[str, str]) -> DomainModel:
    kind = params.get("kind", "").strip()
    if kind == "whole-plane":
        dom: DomainModel = WholePlane()
    elif kind == "unit-disc":
        dom = UnitDisc()
    elif kind == "synthetic-quadratic":
        try:
            a = float(params["s11"])
            b = float(params.get("s12", "0.0"))
            d = float(params["s22"])
        except (KeyError, ValueError) as exc:
            raise ConfigError("synthetic-quadratic needs numeric s11, s12, s22") from exc
        dom = SyntheticQuadratic(((a, b), (b, d)))
    elif kind == "conformal":
        re = _parse_floats(params.get("coeff_re", ""))
        im = _parse_floats(params.get("coeff_im", "")) or [0.0] * len(re)
        if len(re) != len(im):
            raise ConfigError("conformal: coeff_re and coeff_im lengths differ")
        dom = ConformalImage(tuple(complex(a, b) for a, b in zip(re, im)))
    else:
        raise ConfigError(f"unknown domain kind {kind!r}")
    if "center" in params:
        center = _parse_floats(params["center"])
        if len(center) != 2:
            raise ConfigError("center must have two components")
        dom = dom.recentered(center)
    return dom


def domain_h(domain: DomainModel, x):
    """Robin function with gradient and Hessian at a single interior point."""
    x = _as_points(x)
    domain.check_inside(x)
    h, grad, hess = domain.robin(x)
    return float(h), np.asarray(grad, dtype=float), np.asarray(hess, dtype=float)
