"""
Planar three-body dynamics under the inverse cube force.

Three unit masses, potential U = sum_{j<k} |q_j - q_k|^-2, equations of motion
q''_j = dU/dq_j. Positions and velocities are complex numbers (the plane is C);
gradients are taken in real coordinates and packed back as x + iy.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional
import logging

import numpy as np
from scipy.integrate import solve_ivp

from .exceptions import DegenerateConfigurationError

logger = logging.getLogger(__name__)

COLLISION_GUARD = 1e-6
CENTERED_TOL = 1e-12
PAIRS = ((0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class PlanarConfig:
    """Positions of the three bodies as a complex array of shape (3,)."""
    q: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q, dtype=complex).reshape(3)
        q.setflags(write=False)
        object.__setattr__(self, 'q', q)
        for j, k in PAIRS:
            if q[j] == q[k]:
                raise DegenerateConfigurationError(f"bodies {j + 1} and {k + 1} coincide")

    @classmethod
    def from_xy(cls, xy) -> 'PlanarConfig':
        xy = np.asarray(xy, dtype=float).reshape(3, 2)
        return cls(xy[:, 0] + 1j * xy[:, 1])

    @property
    def centered(self) -> bool:
        return abs(self.q.sum()) <= CENTERED_TOL

    def pair_distances(self) -> np.ndarray:
        return np.array([abs(self.q[j] - self.q[k]) for j, k in PAIRS])

    def scaled(self, factor: complex) -> 'PlanarConfig':
        return PlanarConfig(self.q * factor)

    def translated(self, shift: complex) -> 'PlanarConfig':
        return PlanarConfig(self.q + shift)


def center(config: PlanarConfig) -> PlanarConfig:
    """Translate so the center of mass is at the origin."""
    return PlanarConfig(config.q - config.q.mean())


@dataclass(frozen=True)
class PlanarState:
    config: PlanarConfig
    v: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.v, dtype=complex).reshape(3)
        v.setflags(write=False)
        object.__setattr__(self, 'v', v)

    @classmethod
    def from_vector(cls, y: np.ndarray) -> 'PlanarState':
        """Inverse of as_vector: (x1, y1, x2, y2, x3, y3, vx1, ..., vy3)."""
        q = y[0:6:2] + 1j * y[1:6:2]
        v = y[6:12:2] + 1j * y[7:12:2]
        return cls(PlanarConfig(q), v)

    def as_vector(self) -> np.ndarray:
        y = np.empty(12)
        y[0:6:2], y[1:6:2] = self.config.q.real, self.config.q.imag
        y[6:12:2], y[7:12:2] = self.v.real, self.v.imag
        return y


def _check_guard(q: np.ndarray, guard: float) -> None:
    for j, k in PAIRS:
        r = abs(q[j] - q[k])
        if r < guard:
            raise DegenerateConfigurationError(
                f"pair ({j + 1},{k + 1}) at distance {r:.3e} is inside the collision guard {guard:.1e}"
            )


def potential(config: PlanarConfig, guard: float = COLLISION_GUARD) -> float:
    """U(q) = sum over pairs of |q_j - q_k|^-2."""
    q = config.q
    _check_guard(q, guard)
    return float(sum(1.0 / abs(q[j] - q[k]) ** 2 for j, k in PAIRS))


def _acceleration_array(q: np.ndarray) -> np.ndarray:
    # d/dx_j |q_j - q_k|^-2 = -2 (x_j - x_k) |q_j - q_k|^-4, same for y
    a = np.zeros(3, dtype=complex)
    for j, k in PAIRS:
        d = q[j] - q[k]
        r2 = d.real * d.real + d.imag * d.imag
        g = -2.0 * d / (r2 * r2)
        a[j] += g
        a[k] -= g
    return a


def acceleration(config: PlanarConfig, guard: float = COLLISION_GUARD) -> np.ndarray:
    """Real gradient of U for each body packed as complex numbers (q''_j = dU/dq_j)."""
    _check_guard(config.q, guard)
    return _acceleration_array(config.q)


def invariants(state: PlanarState) -> Dict[str, float]:
    """Energy E, angular momentum C, moment of inertia I and its derivative Idot."""
    q, v = state.config.q, state.v
    kinetic = 0.5 * float(np.sum(np.abs(v) ** 2))
    return {
        'E': kinetic - potential(state.config, guard=0.0),
        'C': float(np.sum((np.conj(q) * v).imag)),
        'I': float(np.sum(np.abs(q) ** 2)),
        'Idot': 2.0 * float(np.sum((np.conj(q) * v).real)),
    }


def _rhs(_t: float, y: np.ndarray) -> np.ndarray:
    q = y[0:6:2] + 1j * y[1:6:2]
    a = _acceleration_array(q)
    dy = np.empty(12)
    dy[0:6] = y[6:12]
    dy[6:12:2], dy[7:12:2] = a.real, a.imag
    return dy


@dataclass(frozen=True)
class Trajectory:
    """
    Time samples of planar states.

    t has shape (N,); q and v have shape (N, 3) and are complex.
    """
    t: np.ndarray
    q: np.ndarray
    v: np.ndarray
    meta: Dict[str, object] = field(default_factory=dict)
    dense: Optional[object] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        if t.ndim != 1 or len(t) != len(self.q) or len(t) != len(self.v):
            raise ValueError("t, q and v must have matching lengths")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("trajectory times must be strictly increasing")
        object.__setattr__(self, 't', t)

    def __len__(self) -> int:
        return len(self.t)

    def state(self, i: int) -> PlanarState:
        return PlanarState(PlanarConfig(self.q[i]), self.v[i])

    def states(self):
        for i in range(len(self)):
            yield self.state(i)

    def invariant_series(self) -> Dict[str, np.ndarray]:
        rows = [invariants(s) for s in self.states()]
        return {key: np.array([r[key] for r in rows]) for key in ('E', 'C', 'I', 'Idot')}

    def at(self, t: float) -> PlanarState:
        """Evaluate the solver's dense output at time t (integrate() trajectories only)."""
        if self.dense is None:
            raise ValueError("trajectory has no dense output")
        return PlanarState.from_vector(self.dense(t))

    @property
    def collision_approach(self) -> bool:
        return bool(self.meta.get('collision_approach', False))


def integrate(state: PlanarState, t_end: float, tol: float = 1e-10,
              guard: float = COLLISION_GUARD, method: str = 'DOP853') -> Trajectory:
    """
    Integrate the equations of motion from state over [0, t_end]

    Args:
        state: Initial state (outside the collision guard)
        t_end: Final time (> 0)
        tol: Relative and absolute local error tolerance of the embedded pair
        guard: Collision guard radius; integration stops early when a pair gets closer

    Returns:
        Trajectory at the solver's accepted steps; meta['collision_approach']
        is set when the run stopped at the guard or the step size underflowed.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    _check_guard(state.config.q, guard)

    def make_event(j, k):
        def event(_t, y):
            return np.hypot(y[2 * j] - y[2 * k], y[2 * j + 1] - y[2 * k + 1]) - guard
        event.terminal = True
        event.direction = -1
        return event

    events = [make_event(j, k) for j, k in PAIRS]
    sol = solve_ivp(_rhs, (0.0, t_end), state.as_vector(), method=method,
                    rtol=tol, atol=tol, events=events, dense_output=True)

    collided = sol.status == 1
    underflow = sol.status == -1
    if underflow:
        logger.warning(f"Integration stopped at t={sol.t[-1]:.6g}: {sol.message}")
    if collided:
        logger.warning(f"Collision guard reached at t={sol.t[-1]:.6g}")

    y = sol.y.T
    q = y[:, 0:6:2] + 1j * y[:, 1:6:2]
    v = y[:, 6:12:2] + 1j * y[:, 7:12:2]
    meta = {
        'method': method,
        'tol': tol,
        'guard': guard,
        'nfev': int(sol.nfev),
        'steps': int(len(sol.t) - 1),
        'status': int(sol.status),
        'collision_approach': bool(collided or underflow),
    }
    return Trajectory(sol.t, q, v, meta=meta, dense=sol.sol)


def lagrange_jacobi_residual(traj: Trajectory) -> float:
    """max over samples of |I'' - 4E| with I'' = 2 sum|v|^2 + 2 sum Re(conj(q) q'')."""
    if len(traj) < 3:
        raise ValueError("need at least 3 samples")
    worst = 0.0
    for state in traj.states():
        q, v = state.config.q, state.v
        a = _acceleration_array(q)
        iddot = 2.0 * np.sum(np.abs(v) ** 2) + 2.0 * np.sum((np.conj(q) * a).real)
        energy = invariants(state)['E']
        worst = max(worst, abs(iddot - 4.0 * energy))
    return float(worst)


def equilateral(side: float = 1.0, clockwise: bool = True) -> PlanarConfig:
    """Centered equilateral triangle; clockwise labelling maps to the north pole of the shape sphere."""
    sign = -1.0 if clockwise else 1.0
    angles = sign * 2.0 * np.pi * np.arange(3) / 3.0
    return PlanarConfig(side / np.sqrt(3.0) * np.exp(1j * angles))
