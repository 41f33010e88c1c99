"""Approximately simple multiple eigenvalues of matrix families ``r -> M_r``.

A multiple eigenvalue ``lambda0`` of ``M_0`` with eigenspace ``V0`` is
approximately simple if ``M_r|V0 = lambda0 + f(r) B0 + o(f(r))`` for some
``B0`` with distinct eigenvalues.  Then each ``mu0`` in the spectrum of ``B0``
predicts an eigenvalue branch ``lambda0 + f(r) mu0 + o(f(r))``.

The ``o(f(r))`` condition is made falsifiable on a finite grid: the remainder
ratio ``|M_r E - lambda0 E - f(r) E B0| / |f(r)|`` must shrink toward the small
end of the grid (below ``decay_factor`` times its value at the large end and
below ``decay_abs``).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError, NotApproximatelySimpleError

DECAY_FACTOR = 0.5
DECAY_ABS = 0.1
EXACT_TOL = 1e-12
CLUSTER_TOL = 1e-8
DISTINCT_TOL = 1e-6
DEFAULT_GRID = (0.2, 0.1, 0.05, 0.025, 0.0125)


@dataclass(frozen=True)
class MatrixFamily:
    """``r -> M_r`` of fixed dimension, either a callable or a table of samples."""

    evaluator: Callable[[float], np.ndarray]
    dim: int
    r_max: float = np.inf
    name: str = ""

    def __call__(self, r: float) -> np.ndarray:
        if r < 0 or r > self.r_max:
            raise InvalidInputError(f"r = {r} outside the family range [0, {self.r_max}]")
        M = np.asarray(self.evaluator(float(r)))
        if M.shape != (self.dim, self.dim):
            raise InvalidInputError(f"family returned shape {M.shape}, expected {(self.dim, self.dim)}")
        return M

    @classmethod
    def from_callable(cls, fn, name: str = "", r_max: float = np.inf) -> "MatrixFamily":
        dim = np.asarray(fn(0.0)).shape[0]
        return cls(fn, dim, r_max, name)

    @classmethod
    def from_samples(cls, rs, matrices, name: str = "samples") -> "MatrixFamily":
        """Family known only at the sample points ``rs`` (which must include 0)."""
        table = {float(r): np.asarray(M) for r, M in zip(rs, matrices)}
        if 0.0 not in table:
            raise InvalidInputError("sampled family needs the r = 0 matrix")
        dims = {M.shape for M in table.values()}
        if len(dims) != 1:
            raise InvalidInputError("sampled matrices differ in shape")

        def lookup(r):
            try:
                return table[r]
            except KeyError:
                raise InvalidInputError(f"family was not sampled at r = {r}") from None

        return cls(lookup, next(iter(dims))[0], max(table), name)

    @property
    def samples(self) -> list[float]:
        return []


@dataclass(frozen=True)
class ExpansionFit:
    lam0: complex
    basis: np.ndarray  # E, columns spanning V0
    projector: np.ndarray  # P with P E = I, vanishing on the complement
    exponent: float
    r: np.ndarray  # grid, sorted from large to small
    B0: np.ndarray
    B1: np.ndarray
    remainder_ratios: np.ndarray
    accepted: bool
    reasons: tuple[str, ...] = ()
    gauge: Callable | None = None

    @property
    def mu(self) -> np.ndarray:
        return np.linalg.eigvals(self.B0)

    def f(self, r):
        return np.asarray(r, dtype=float) ** self.exponent


@dataclass(frozen=True)
class EigBranch:
    mu0: complex
    r: np.ndarray
    predicted: np.ndarray
    matched: np.ndarray
    deviation: np.ndarray  # |lambda(r) - lambda0 - f mu0| / |f|
    ambiguous: np.ndarray
    angle_to_v0: np.ndarray  # principal angle between matched eigenvector and V0

    @property
    def decays(self) -> bool:
        return _decays(self.deviation)

    @property
    def tail_monotone(self) -> bool:
        tail = self.deviation[-3:]
        return bool(np.all(np.diff(tail) <= 1e-14 * max(1.0, tail.max())))


def _decays(ratios, factor: float = DECAY_FACTOR, absolute: float = DECAY_ABS) -> bool:
    ratios = np.asarray(ratios, dtype=float)
    if np.all(ratios <= EXACT_TOL):
        return True
    return bool(ratios[-1] < factor * ratios[0] and ratios[-1] < absolute)


def _eigenspace(M0, lam0, cluster_tol: float, geometric_tol: float):
    """Orthonormal eigenspace basis, invariant complement and algebraic multiplicity."""
    n = M0.shape[0]
    ev = np.linalg.eigvals(M0)
    alg = int(np.sum(np.abs(ev - lam0) <= cluster_tol))
    if alg == 0:
        raise InvalidInputError(f"{lam0} is not an eigenvalue of M_0")
    U, s, Vh = np.linalg.svd(M0 - lam0 * np.eye(n))
    scale = max(1.0, float(np.linalg.norm(M0, 2)))
    null = s <= geometric_tol * scale
    geo = int(np.sum(null))
    if geo < alg:
        raise NotApproximatelySimpleError(
            f"not approximately simple: eigenspace deficient (geometric {geo} < algebraic {alg})")
    E = Vh[null].conj().T
    W = U[:, ~null]  # range of M0 - lam0, an invariant complement when lam0 is semisimple
    return E, W, alg


def fit_expansion(family: MatrixFamily, lam0: complex, exponent: float, r_grid, *, basis=None,
                  gauge: Callable | None = None, cluster_tol: float = CLUSTER_TOL,
                  geometric_tol: float = 1e-8, decay_factor: float = DECAY_FACTOR,
                  decay_abs: float = DECAY_ABS, distinct_tol: float = DISTINCT_TOL) -> ExpansionFit:
    """Least-squares fit of ``M_r|V0 = lambda0 + f(r) B0 + f(r)^2 B1`` over ``r_grid``.

    ``basis`` overrides the eigenspace basis of ``M_0`` (its span must be the
    eigenspace).  ``gauge`` is an optional ``r``-dependent change of
    coordinates ``T(r)``; the fit is then applied to ``T(r)^{-1} M_r T(r)``.
    """
    r = np.sort(np.asarray(r_grid, dtype=float).ravel())[::-1]
    if r.size < 2 or np.any(r <= 0):
        raise InvalidInputError("need at least two positive grid values")
    if exponent <= 0:
        raise InvalidInputError("gauge exponent must be positive")

    def mat(rr):
        M = family(rr).astype(complex)
        if gauge is not None:
            T = np.asarray(gauge(rr), dtype=complex)
            M = np.linalg.solve(T, M @ T)
        return M

    M0 = mat(0.0) if gauge is None else family(0.0).astype(complex)
    E, W, alg = _eigenspace(M0, lam0, cluster_tol, geometric_tol)
    if basis is not None:
        B = np.asarray(basis, dtype=complex)
        if B.shape != E.shape:
            raise InvalidInputError(f"basis has shape {B.shape}, eigenspace needs {E.shape}")
        if np.linalg.norm(E @ (E.conj().T @ B) - B) > 1e-8 * np.linalg.norm(B):
            raise InvalidInputError("supplied basis does not span the eigenspace of M_0")
        E = B
    k = E.shape[1]
    P = np.linalg.inv(np.column_stack([E, W]))[:k]
    f = r**exponent
    Y = np.array([(P @ mat(ri) @ E - lam0 * np.eye(k)) / fi for ri, fi in zip(r, f)])
    # Y_r = B0 + f(r) B1, solved entrywise
    A = np.column_stack([np.ones_like(f), f])
    coef = np.linalg.lstsq(A, Y.reshape(len(r), -1), rcond=None)[0]
    B0 = coef[0].reshape(k, k)
    B1 = coef[1].reshape(k, k)
    ratios = np.array([np.linalg.norm(mat(ri) @ E - lam0 * E - fi * E @ B0, 2) / fi for ri, fi in zip(r, f)])

    reasons = []
    if not _decays(ratios, decay_factor, decay_abs):
        reasons.append("remainder does not decay")
    mu = np.linalg.eigvals(B0)
    gaps = np.abs(mu[:, None] - mu[None, :])[~np.eye(k, dtype=bool)]
    if k > 1 and gaps.min() <= distinct_tol * max(1.0, float(np.abs(mu).max())):
        reasons.append("B0 eigenvalues are not distinct")
    if k != alg:
        reasons.append("eigenspace dimension differs from algebraic multiplicity")
    if np.all(np.isreal(B0)):
        B0, B1 = B0.real, B1.real
    return ExpansionFit(complex(lam0), E, P, float(exponent), r, B0, B1, ratios, not reasons,
                        tuple(reasons), gauge)


def predict_and_match(fit: ExpansionFit, family: MatrixFamily, r_grid=None, *,
                      tie_tol: float = 1e-9) -> list[EigBranch]:
    """Match each predicted branch ``lambda0 + f(r) mu0`` to the nearest true eigenvalue."""
    r = fit.r if r_grid is None else np.sort(np.asarray(r_grid, dtype=float))[::-1]
    f = r**fit.exponent
    Q, _ = np.linalg.qr(fit.basis)
    branches = []
    eig = [np.linalg.eig(family(ri)) for ri in r]
    for mu0 in np.linalg.eigvals(fit.B0):
        pred = fit.lam0 + f * mu0
        matched, dev, amb, ang = [], [], [], []
        for (w, V), p, fi in zip(eig, pred, f):
            d = np.abs(w - p)
            order = np.argsort(d)
            j = order[0]
            matched.append(w[j])
            dev.append(d[j] / fi)
            amb.append(bool(w.size > 1 and d[order[1]] - d[j] <= tie_tol * max(fi, d[j])))
            v = V[:, j] / np.linalg.norm(V[:, j])
            ang.append(float(np.arccos(min(1.0, np.linalg.norm(Q.conj().T @ v)))))
        branches.append(EigBranch(complex(mu0), r, pred, np.array(matched), np.array(dev),
                                  np.array(amb), np.array(ang)))
    return branches


@dataclass(frozen=True)
class NaiveCheck:
    """A single vector ``e`` with ``M_r e = (lambda0 + f) e + o(f)`` versus the true spectrum."""

    r: np.ndarray
    defect: np.ndarray  # |M_r e - (lambda0 + f) e| / |f|
    mismatch: np.ndarray  # min |lambda - lambda0 - f| / |f| over true eigenvalues

    @property
    def defect_decays(self) -> bool:
        return _decays(self.defect)

    @property
    def branch_found(self) -> bool:
        return _decays(self.mismatch)


def naive_direction_check(family: MatrixFamily, e, lam0: complex, exponent: float, r_grid) -> NaiveCheck:
    r = np.sort(np.asarray(r_grid, dtype=float))[::-1]
    e = np.asarray(e, dtype=complex)
    e = e / np.linalg.norm(e)
    f = r**exponent
    defect, mismatch = [], []
    for ri, fi in zip(r, f):
        M = family(ri)
        defect.append(np.linalg.norm(M @ e - (lam0 + fi) * e) / fi)
        mismatch.append(np.min(np.abs(np.linalg.eigvals(M) - (lam0 + fi))) / fi)
    return NaiveCheck(r, np.array(defect), np.array(mismatch))


# -- example families ------------------------------------------------------------


def rotation(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def shear_rotation_matrix(r: float) -> np.ndarray:
    """Symplectic ``2x2`` family with spectrum ``exp(+-i r^2)`` and ``M_r e1 = (1+r^2) e1 + o(r^2)``."""
    t = r * r
    low = 0.0 if r == 0.0 else np.sin(t) ** 2 / r
    return np.array([[np.cos(t) + np.sin(t), -2.0 * r], [low, np.cos(t) - np.sin(t)]])


def shear_rotation_gauge(r: float) -> np.ndarray:
    """``diag(1, r)``: rescales the second coordinate so the family becomes ``I + r^2 B0 + o(r^2)``."""
    return np.diag([1.0, r])


def rotating_hyperbolic_matrix(r: float) -> np.ndarray:
    """``R(1/r) diag(1+r, 1/(1+r)) R(1/r)^{-1}``; eigenvectors spin without limit as ``r -> 0``."""
    if r == 0.0:
        return np.eye(2)
    R = rotation(1.0 / r)
    return R @ np.diag([1.0 + r, 1.0 / (1.0 + r)]) @ R.T


def split_diagonal_matrix(r: float) -> np.ndarray:
    return np.eye(2) + r * r * np.diag([1.0, -1.0])


def identity_matrix(r: float) -> np.ndarray:
    return np.eye(2)


SHEAR_ROTATION = MatrixFamily(shear_rotation_matrix, 2, name="shear-rotation")
ROTATING_HYPERBOLIC = MatrixFamily(rotating_hyperbolic_matrix, 2, name="rotating-hyperbolic")
SPLIT_DIAGONAL = MatrixFamily(split_diagonal_matrix, 2, name="split-diagonal")
IDENTITY = MatrixFamily(identity_matrix, 2, name="identity")


# -- counterexample suite ----------------------------------------------------------


@dataclass
class SuiteItem:
    name: str
    passed: bool
    detail: str


@dataclass
class SuiteReport:
    items: list[SuiteItem] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(i.passed for i in self.items)

    def add(self, name: str, passed: bool, detail: str) -> None:
        self.items.append(SuiteItem(name, bool(passed), detail))


def counterexample_suite(r_grid=DEFAULT_GRID) -> SuiteReport:
    """Run the documented behaviours of the example families and record pass/fail."""
    rep = SuiteReport()
    r = np.asarray(r_grid, dtype=float)

    # a single approximate eigenvector does not give an eigenvalue branch
    naive = naive_direction_check(SHEAR_ROTATION, [1.0, 0.0], 1.0, 2, r)
    rep.add("shear-rotation: e1 defect is o(r^2)", naive.defect_decays,
            f"defect/r^2 = {naive.defect.tolist()}")
    rep.add("shear-rotation: no eigenvalue within o(r^2) of 1 + r^2", not naive.branch_found,
            f"mismatch/r^2 = {naive.mismatch.tolist()}")
    spec_err = max(np.min(np.abs(np.linalg.eigvals(shear_rotation_matrix(x)) - np.exp(1j * x * x)))
                   for x in r)
    rep.add("shear-rotation: spectrum is exp(+-i r^2)", spec_err < 1e-10, f"max error {spec_err:.2e}")

    # untransformed fit is rejected, gauged fit accepted with B0 eigenvalues +-i
    raw = fit_expansion(SHEAR_ROTATION, 1.0, 2, r)
    rep.add("shear-rotation: fixed-basis fit rejected", not raw.accepted, "; ".join(raw.reasons))
    gauged = fit_expansion(SHEAR_ROTATION, 1.0, 2, r, gauge=shear_rotation_gauge)
    mu = np.sort_complex(gauged.mu)
    ok_mu = np.allclose(mu, [-1j, 1j], atol=1e-2)
    rep.add("shear-rotation: gauged fit accepted with B0 eigenvalues +-i", gauged.accepted and ok_mu,
            f"mu = {mu.tolist()}, ratios = {gauged.remainder_ratios.tolist()}")
    if gauged.accepted:
        branches = predict_and_match(gauged, SHEAR_ROTATION)
        ok = all(b.decays for b in branches)
        rep.add("shear-rotation: branches 1 +- i r^2 match exp(+-i r^2)", ok,
                "; ".join(f"mu={b.mu0:.3f}: {b.deviation.tolist()}" for b in branches))

    # rotating eigenvectors: eigenvalues continue, expansion rejected
    rot_ev_err = max(np.max(np.abs(np.sort(np.linalg.eigvals(rotating_hyperbolic_matrix(x)).real)
                                   - np.sort([1.0 + x, 1.0 / (1.0 + x)]))) for x in r)
    rep.add("rotating-hyperbolic: eigenvalues are 1+r, 1/(1+r)", rot_ev_err < 1e-12,
            f"max error {rot_ev_err:.2e}")
    rot = fit_expansion(ROTATING_HYPERBOLIC, 1.0, 1, r)
    rep.add("rotating-hyperbolic: expansion fit rejected", not rot.accepted,
            f"branches continuable, expansion fit rejected ({'; '.join(rot.reasons)})")

    ident = fit_expansion(IDENTITY, 1.0, 1, r)
    rep.add("identity: fit rejected (B0 = 0)", not ident.accepted, "; ".join(ident.reasons))
    diag = fit_expansion(SPLIT_DIAGONAL, 1.0, 2, r)
    rep.add("split-diagonal: fit accepted with B0 = diag(1, -1)",
            diag.accepted and np.allclose(diag.B0, np.diag([1.0, -1.0]), atol=1e-10),
            f"B0 = {np.round(diag.B0, 12).tolist()}")
    return rep


# -- sampled families on disk ------------------------------------------------------


def write_family_csv(path, rs, matrices) -> None:
    """Columns ``r`` then ``re_i_j, im_i_j`` for every entry in row-major order."""
    mats = [np.asarray(M, dtype=complex) for M in matrices]
    n = mats[0].shape[0]
    header = ["r"] + [f"{p}_{i}_{j}" for i in range(n) for j in range(n) for p in ("re", "im")]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r, M in zip(rs, mats):
            row = [repr(float(r))]
            for z in M.ravel():
                row += [repr(float(z.real)), repr(float(z.imag))]
            w.writerow(row)


def read_family_csv(path) -> MatrixFamily:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0][0] != "r":
        raise InvalidInputError("matrix CSV must start with an 'r' column")
    header = rows[0]
    m = len(header) - 1
    n = int(round(np.sqrt(m / 2)))
    if 2 * n * n != m:
        raise InvalidInputError("matrix CSV must hold re/im pairs of a square matrix")
    rs, mats = [], []
    for row in rows[1:]:
        if not row:
            continue
        vals = np.array([float(v) for v in row])
        rs.append(vals[0])
        z = vals[1::2] + 1j * vals[2::2]
        mats.append(z.reshape(n, n))
    return MatrixFamily.from_samples(rs, mats, name=str(path))
