"""Time integration of ``M u' = J_N grad H_r(u)`` and of its variational equation.

Both use scipy's DOP853 (embedded 8(5,3) Runge-Kutta with dense output).  The
variational equation is integrated jointly with the state as one extended
vector so that ``X(t)`` and ``u(t)`` share the same step sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .core import ScaledHamiltonian, apply_j, check_collision
from .errors import IntegrationError, InvalidInputError

DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-11
ENERGY_TOL = 1e-9
METHOD = "DOP853"


@dataclass(frozen=True)
class TrajectoryResult:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), 2N)
    energies: np.ndarray
    energy_drift: float
    min_distance: float
    ok: bool
    message: str = ""
    dense: object = None  # scipy OdeSolution restricted to the state, if requested

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def state_at(self, t) -> np.ndarray:
        if self.dense is None:
            raise InvalidInputError("trajectory was computed without dense output")
        return self.dense(t)


@dataclass(frozen=True)
class VariationalResult:
    trajectory: TrajectoryResult
    matrices: np.ndarray  # shape (len(times), 2N, 2N)
    symplectic_defect: float

    @property
    def times(self) -> np.ndarray:
        return self.trajectory.times

    @property
    def final_matrix(self) -> np.ndarray:
        return self.matrices[-1]

    @property
    def final_state(self) -> np.ndarray:
        return self.trajectory.final


def _check_inputs(sh: ScaledHamiltonian, u0, T) -> np.ndarray:
    u0 = np.asarray(u0, dtype=float).ravel()
    if u0.size != 2 * sh.n:
        raise InvalidInputError(f"initial state has length {u0.size}, expected {2 * sh.n}")
    if not np.isfinite(T) or not np.all(np.isfinite(u0)):
        raise InvalidInputError("non-finite time or initial state")
    check_collision(u0)
    sh._check_domain(u0)
    return u0


def _sample_times(T: float, t_eval) -> np.ndarray:
    if t_eval is None:
        return np.array([0.0, T])
    ts = np.asarray(t_eval, dtype=float).ravel()
    lo, hi = min(0.0, T), max(0.0, T)
    if ts.size == 0 or ts.min() < lo - 1e-14 or ts.max() > hi + 1e-14:
        raise InvalidInputError("sample times must lie within [0, T]")
    return np.clip(ts, lo, hi)


def _solve(fun, y0, T, t_eval, rtol, atol, dense):
    if T == 0.0:
        return None
    try:
        sol = solve_ivp(fun, (0.0, T), y0, method=METHOD, t_eval=t_eval, rtol=rtol, atol=atol,
                        dense_output=dense)
    except FloatingPointError as exc:
        raise IntegrationError(f"floating point failure during integration: {exc}") from exc
    if sol.status != 0:
        raise IntegrationError(f"integration failed: {sol.message}")
    return sol


def _trajectory(sh, times, states, sol_dense, n_state, energy_tol) -> TrajectoryResult:
    energies = np.array([sh.energy(u) for u in states])
    drift = float(np.max(np.abs(energies - energies[0])))
    dmin = min(check_collision(u) for u in states)
    ok = drift <= energy_tol
    msg = "" if ok else f"energy drift {drift:.3e} exceeds tolerance {energy_tol:.1e}"
    dense = None
    if sol_dense is not None:
        def dense(t, _s=sol_dense):
            return np.asarray(_s(t))[:n_state]
    return TrajectoryResult(times, states, energies, drift, float(dmin), ok, msg, dense)


def flow(sh: ScaledHamiltonian, u0, T: float, *, t_eval=None, rtol: float = DEFAULT_RTOL,
         atol: float = DEFAULT_ATOL, dense: bool = False,
         energy_tol: float = ENERGY_TOL) -> TrajectoryResult:
    """Integrate the scaled vortex system from ``u0`` over ``[0, T]`` (``T`` may be negative)."""
    u0 = _check_inputs(sh, u0, T)
    times = _sample_times(T, t_eval)
    sol = _solve(lambda t, u: sh.vector_field(u), u0, T, times, rtol, atol, dense)
    if sol is None:
        states = np.tile(u0, (times.size, 1))
        return _trajectory(sh, times, states, None, u0.size, energy_tol)
    return _trajectory(sh, sol.t, sol.y.T.copy(), sol.sol if dense else None, u0.size, energy_tol)


def symplectic_defect(X, mass_diag) -> float:
    """``|X^T M J X - M J|`` (max entry), with ``M J`` the symplectic form matrix."""
    n = mass_diag.size
    MJ = mass_diag[:, None] * np.kron(np.eye(n // 2), np.array([[0.0, 1.0], [-1.0, 0.0]]))
    return float(np.max(np.abs(X.T @ MJ @ X - MJ)))


def variational_flow(sh: ScaledHamiltonian, u0, T: float, *, t_eval=None, rtol: float = DEFAULT_RTOL,
                     atol: float = DEFAULT_ATOL, dense: bool = False,
                     energy_tol: float = ENERGY_TOL) -> VariationalResult:
    """Integrate state and fundamental matrix ``X' = A(u) X``, ``X(0) = I`` together."""
    u0 = _check_inputs(sh, u0, T)
    m = u0.size
    times = _sample_times(T, t_eval)
    mass = sh.vorticities.mass_diag

    def rhs(t, y):
        u = y[:m]
        X = y[m:].reshape(m, m)
        grad = sh.gradient(u)
        A = sh.linearization(u)
        return np.concatenate([apply_j(grad) / mass, (A @ X).ravel()])

    y0 = np.concatenate([u0, np.eye(m).ravel()])
    sol = _solve(rhs, y0, T, times, rtol, atol, dense)
    if sol is None:
        traj = _trajectory(sh, times, np.tile(u0, (times.size, 1)), None, m, energy_tol)
        mats = np.tile(np.eye(m), (times.size, 1, 1))
        return VariationalResult(traj, mats, 0.0)
    Y = sol.y.T
    traj = _trajectory(sh, sol.t, Y[:, :m].copy(), sol.sol if dense else None, m, energy_tol)
    mats = Y[:, m:].reshape(-1, m, m).copy()
    defect = max(symplectic_defect(X, mass) for X in mats)
    return VariationalResult(traj, mats, defect)


def flow_map(sh: ScaledHamiltonian, u0, T: float, **kw) -> np.ndarray:
    """``phi_r(T, u0)``."""
    return flow(sh, u0, T, **kw).final
