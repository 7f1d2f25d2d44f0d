"""
Shape sphere reduction.

Centered configurations modulo rotation and scaling are points u of the unit
sphere (Hopf map of the Jacobi coordinates). The three binary collisions are
the equator points B12, B13, B23. The reduced zero-energy JM metric is
lambda(u) times the round metric of radius 1/2, with lambda = I * U.

For equal masses |q_i - q_j|^2 = I (1 - u . B_ij), hence the closed form
lambda(u) = sum_ij 1 / (1 - u . B_ij); all derivatives below are analytic.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Iterator, Optional, Tuple
import logging

import numpy as np

from .dynamics import PlanarConfig, potential, CENTERED_TOL
from .exceptions import (
    CuspGuardError, DegenerateConfigurationError, NotCenteredError, NotHorizontalError,
)

logger = logging.getLogger(__name__)

K0 = 4.0  # curvature of the round sphere of radius 1/2
METRIC_GUARD = 1e-3
UNIT_TOL = 1e-12
HORIZONTAL_TOL = 1e-10

SQRT3_2 = np.sqrt(3.0) / 2.0
COLLISION_POINTS: Dict[str, np.ndarray] = {
    'B12': np.array([-1.0, 0.0, 0.0]),
    'B13': np.array([0.5, -SQRT3_2, 0.0]),
    'B23': np.array([0.5, SQRT3_2, 0.0]),
}
# body pair of each end, by label
END_BODIES = {'B12': (1, 2), 'B13': (1, 3), 'B23': (2, 3)}
# arc m is bounded by the two collision points involving body m
ARC_ENDS = {1: ('B12', 'B13'), 2: ('B12', 'B23'), 3: ('B13', 'B23')}


@dataclass(frozen=True)
class ShapePoint:
    u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(3)
        norm = np.linalg.norm(u)
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"shape point must be a unit vector (|u| = {norm!r})")
        for label, b in COLLISION_POINTS.items():
            if np.array_equal(u, b):
                raise DegenerateConfigurationError(f"{label} is not a point of the pants")
        u = u.copy()
        u.setflags(write=False)
        object.__setattr__(self, 'u', u)

    @classmethod
    def normalized(cls, u) -> 'ShapePoint':
        u = np.asarray(u, dtype=float)
        return cls(u / np.linalg.norm(u))

    @property
    def collinear(self) -> bool:
        return self.u[2] == 0.0

    def mirror(self) -> 'ShapePoint':
        return ShapePoint(self.u * np.array([1.0, 1.0, -1.0]))


@dataclass(frozen=True)
class MetricData:
    """
    Conformal factor lambda at a shape point with first and second data of log lambda.

    grad_log is the gradient of log lambda for the unit-sphere metric as a tangent
    vector in R^3; laplacian_log is the radius-1/2 Laplace-Beltrami of log lambda.
    """
    lam: float
    grad_log: np.ndarray
    laplacian_log: float


def angular_distance(u: np.ndarray, b: np.ndarray) -> float:
    return float(np.arctan2(np.linalg.norm(np.cross(b, u)), np.dot(b, u)))


def nearest_end(u: np.ndarray) -> Tuple[str, float]:
    """Closest collision point and its angular distance."""
    dists = {label: angular_distance(u, b) for label, b in COLLISION_POINTS.items()}
    label = min(dists, key=dists.get)
    return label, dists[label]


def jacobi_coords(config: PlanarConfig) -> Tuple[complex, complex]:
    """Equal-mass Jacobi coordinates; |z1|^2 + |z2|^2 = I for centered configs."""
    q = config.q
    if abs(q.sum()) > CENTERED_TOL * max(1.0, float(np.abs(q).max())):
        raise NotCenteredError(f"configuration is not centered (sum = {q.sum()!r})")
    z1 = (q[0] - q[1]) / np.sqrt(2.0)
    z2 = (q[0] + q[1] - 2.0 * q[2]) / np.sqrt(6.0)
    return complex(z1), complex(z2)


def from_jacobi(z1: complex, z2: complex) -> PlanarConfig:
    """Centered configuration with the given Jacobi coordinates."""
    q3 = -np.sqrt(2.0 / 3.0) * z2
    q1 = (-q3 + np.sqrt(2.0) * z1) / 2.0
    q2 = (-q3 - np.sqrt(2.0) * z1) / 2.0
    return PlanarConfig(np.array([q1, q2, q3]))


def hopf(z1: complex, z2: complex) -> np.ndarray:
    w = z1 * np.conj(z2)
    inertia = abs(z1) ** 2 + abs(z2) ** 2
    return np.array([abs(z1) ** 2 - abs(z2) ** 2, 2.0 * w.real, 2.0 * w.imag]) / inertia


def shape_map(config: PlanarConfig) -> ShapePoint:
    """Hopf image of the Jacobi coordinates, normalized by I."""
    z1, z2 = jacobi_coords(config)
    return ShapePoint.normalized(hopf(z1, z2))


def section(u, near_b12: Optional[bool] = None) -> Tuple[complex, complex]:
    """
    A unit representative (z1, z2) of u

    z1 is taken real and nonnegative, except near B12 (u1 < -0.5, or when
    near_b12 is forced) where z2 is taken real and nonnegative.
    """
    u = np.asarray(getattr(u, 'u', u), dtype=float)
    if near_b12 is None:
        near_b12 = u[0] < -0.5
    if near_b12:
        b = np.sqrt((1.0 - u[0]) / 2.0)
        return complex((u[1] + 1j * u[2]) / (2.0 * b)), complex(b)
    a = np.sqrt((1.0 + u[0]) / 2.0)
    return complex(a), complex((u[1] - 1j * u[2]) / (2.0 * a))


def representative(u, scale: float = 1.0, phase: float = 0.0) -> PlanarConfig:
    """Centered configuration with moment of inertia scale^2 mapping to u."""
    z1, z2 = section(u)
    factor = scale * np.exp(1j * phase)
    return from_jacobi(factor * z1, factor * z2)


def arc_of(u) -> int:
    """Label of the equator arc below u (the arc with the same longitude)."""
    u = np.asarray(getattr(u, 'u', u), dtype=float)
    longitude = np.degrees(np.arctan2(u[1], u[0]))
    if -60.0 < longitude < 60.0:
        return 3
    if 60.0 < longitude < 180.0:
        return 2
    if -180.0 < longitude < -60.0:
        return 1
    raise DegenerateConfigurationError(f"longitude {longitude} is a collision point")


def collision_points_and_arcs() -> Dict[str, object]:
    """Collision points with their adjacent arcs, and the arcs with their bounding ends."""
    adjacent = {label: tuple(sorted(m for m, ends in ARC_ENDS.items() if label in ends))
                for label in COLLISION_POINTS}
    return {
        'points': dict(COLLISION_POINTS),
        'arcs': dict(ARC_ENDS),
        'adjacent_arcs': adjacent,
    }


def opposite_end(arc: int) -> str:
    """The end not adjacent to the given arc (the end made of the two other bodies)."""
    others = sorted({1, 2, 3} - {arc})
    return f"B{others[0]}{others[1]}"


def end_arcs(label: str) -> Tuple[int, int]:
    return END_BODIES[label]


def _guard(u: np.ndarray, guard: float) -> None:
    label, dist = nearest_end(u)
    if dist <= guard:
        raise CuspGuardError(
            f"shape point at angular distance {dist:.3e} from {label} is inside the metric guard "
            f"{guard:.1e}; evaluate in the cusp chart of {label}"
        )


def lam_value(u: np.ndarray) -> float:
    """lambda(u) = sum 1/(1 - u . B_ij) without guard checks."""
    return float(sum(1.0 / (1.0 - np.dot(b, u)) for b in COLLISION_POINTS.values()))


def _zonal_terms(u: np.ndarray):
    f = 0.0
    grad = np.zeros(3)
    lap = 0.0
    for b in COLLISION_POINTS.values():
        x = float(np.dot(b, u))
        h = 1.0 / (1.0 - x)
        h1 = h * h
        h2 = 2.0 * h1 * h
        f += h
        grad += h1 * (b - x * u)
        # unit-sphere Laplacian of a function of x = b.u
        lap += (1.0 - x * x) * h2 - 2.0 * x * h1
    return f, grad, lap


def conformal_factor(u, guard: float = METRIC_GUARD) -> MetricData:
    """
    lambda(u) = (I U)(c) for any centered representative c, with analytic derivatives of log lambda.
    """
    u = np.asarray(getattr(u, 'u', u), dtype=float)
    _guard(u, guard)
    f, grad_f, lap_f = _zonal_terms(u)
    grad_log = grad_f / f
    lap_log_unit = lap_f / f - np.dot(grad_log, grad_log)
    return MetricData(lam=f, grad_log=grad_log, laplacian_log=4.0 * lap_log_unit)


def curvature(u, guard: float = METRIC_GUARD,
              factor: Optional[Callable[[np.ndarray], MetricData]] = None) -> float:
    """
    Gaussian curvature of lambda * g0, g0 the round metric of radius 1/2

    K = (K0 - 1/2 Laplacian0(log lambda)) / lambda with K0 = 4. The factor hook
    replaces the conformal factor (a constant factor gives K = 4 / lambda).
    """
    u = np.asarray(getattr(u, 'u', u), dtype=float)
    data = factor(u) if factor is not None else conformal_factor(u, guard=guard)
    return float((K0 - 0.5 * data.laplacian_log) / data.lam)


def unit_factor(_u: np.ndarray) -> MetricData:
    return MetricData(lam=1.0, grad_log=np.zeros(3), laplacian_log=0.0)


def shape_differential(config: PlanarConfig, w: np.ndarray) -> np.ndarray:
    """Derivative of shape_map at config in the direction w (complex (3,))."""
    z1, z2 = jacobi_coords(config)
    w = np.asarray(w, dtype=complex)
    dz1 = (w[0] - w[1]) / np.sqrt(2.0)
    dz2 = (w[0] + w[1] - 2.0 * w[2]) / np.sqrt(6.0)
    inertia = abs(z1) ** 2 + abs(z2) ** 2
    h = np.array([abs(z1) ** 2 - abs(z2) ** 2, 2.0 * (z1 * np.conj(z2)).real,
                  2.0 * (z1 * np.conj(z2)).imag])
    dw = dz1 * np.conj(z2) + z1 * np.conj(dz2)
    dh = np.array([2.0 * (np.conj(z1) * dz1).real - 2.0 * (np.conj(z2) * dz2).real,
                   2.0 * dw.real, 2.0 * dw.imag])
    dinertia = 2.0 * ((np.conj(z1) * dz1).real + (np.conj(z2) * dz2).real)
    return dh / inertia - h * dinertia / inertia ** 2


def _real_dot(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.sum((np.conj(a) * b).real))


def horizontal_part(config: PlanarConfig, w: np.ndarray) -> np.ndarray:
    """Project a centered displacement off the scaling and rotation directions."""
    q = config.q
    w = np.asarray(w, dtype=complex) - np.mean(w)
    for d in (q, 1j * q):
        w = w - _real_dot(d, w) / _real_dot(d, d) * d
    return w


def submersion_check(config: PlanarConfig, w: np.ndarray) -> float:
    """
    Relative discrepancy between the JM norm U|w|^2 upstairs and the reduced norm
    lambda/4 |du|^2 of the pushforward of a horizontal vector w.
    """
    q = config.q
    w = np.asarray(w, dtype=complex)
    scale = np.linalg.norm(w) * np.linalg.norm(q)
    residual = max(abs(np.sum(w)), abs(_real_dot(q, w)), abs(_real_dot(1j * q, w)))
    if residual > HORIZONTAL_TOL * max(scale, 1.0):
        raise NotHorizontalError(f"vector is not horizontal (projection residual {residual:.3e})")
    upstairs = potential(config) * float(np.sum(np.abs(w) ** 2))
    u = shape_map(config).u
    du = shape_differential(config, w)
    reduced = lam_value(u) / 4.0 * float(np.dot(du, du))
    return abs(upstairs - reduced) / upstairs


def curvature_grid(n_theta: int, n_phi: int, exclude: float = METRIC_GUARD) -> Iterator[Tuple[float, float, float, float]]:
    """
    Yield (theta, phi, lambda, K) on a cell-centered spherical grid

    theta is the polar angle from the north pole, phi the longitude; points within
    `exclude` of a collision point are skipped.
    """
    for i in range(n_theta):
        theta = (i + 0.5) * np.pi / n_theta
        for j in range(n_phi):
            phi = 2.0 * np.pi * j / n_phi
            u = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
            if nearest_end(u)[1] <= exclude:
                continue
            data = conformal_factor(u, guard=0.0)
            yield theta, phi, data.lam, float((K0 - 0.5 * data.laplacian_log) / data.lam)
