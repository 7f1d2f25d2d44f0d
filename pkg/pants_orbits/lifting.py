"""
Lifting reduced geodesics back to planar motions.

A path on the pants is lifted to centered configurations with I = 1 by a
section of the shape map followed by a fiber rotation e^{i alpha} chosen so the
lift stays orthogonal to the rotation orbits. On I = 1 the potential equals the
conformal factor, and the zero-energy time is dt = |dc| / sqrt(2 U).
"""

from dataclasses import dataclass, field, asdict
from typing import Dict, List, Optional, Tuple
import logging

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .dynamics import PAIRS, PlanarConfig, Trajectory, acceleration, invariants
from .exceptions import CuspGuardError
from .geodesics import ReducedPath, lambda_along
from .shape import END_BODIES, METRIC_GUARD, nearest_end

logger = logging.getLogger(__name__)

NEAR_B12 = -0.5
ENERGY_TOL = 1e-8
MOMENTUM_TOL = 1e-10
INERTIA_TOL = 1e-8


@dataclass(frozen=True)
class HorizontalLift:
    """
    Lift of a path segment, parametrized by reduced arclength

    c and dc hold the configurations (N, 3) and their sigma-derivatives.
    start and stop index the lifted samples in the source path.
    """
    sigma: np.ndarray
    c: np.ndarray
    dc: np.ndarray
    alpha: np.ndarray
    lam: np.ndarray
    source: ReducedPath
    start: int
    stop: int
    truncated_start: bool = False
    truncated_end: bool = False

    def __len__(self) -> int:
        return len(self.sigma)

    def horizontality(self) -> Tuple[float, float]:
        """Largest |<dc, ic>| and |<dc, c>| over the samples."""
        inner = np.sum(np.conj(self.c) * self.dc, axis=1)
        return float(np.max(np.abs(inner.imag))), float(np.max(np.abs(inner.real)))

    def jm_length(self) -> float:
        speed = np.sqrt(self.lam) * np.linalg.norm(self.dc, axis=1)
        if len(self) < 2:
            return 0.0
        return float(np.trapezoid(speed, self.sigma))


@dataclass
class VerificationReport:
    eq1_residual: float
    eq1_relative: float
    max_abs_E: float
    max_abs_C: float
    max_abs_I_minus_1: float
    max_abs_Idot: float
    horizontality: float
    samples: int
    status: str
    offending_index: Optional[int] = None
    finish_pair: Optional[Tuple[int, int]] = None
    final_pair_distance: Optional[float] = None
    pair_distance_decreasing: Optional[bool] = None
    t_collision: Optional[float] = None
    t_increments: List[float] = field(default_factory=list)
    truncation_depth: Optional[float] = None

    @property
    def ok(self) -> bool:
        return self.status == 'ok'

    def as_dict(self) -> Dict[str, object]:
        data = asdict(self)
        if self.finish_pair is not None:
            data['finish_pair'] = list(self.finish_pair)
        return data


@dataclass
class LiftedOrbit:
    trajectory: Trajectory
    lift: HorizontalLift
    report: Optional[VerificationReport] = None

    @property
    def source(self) -> ReducedPath:
        return self.lift.source


def _unjacobi(z1: np.ndarray, z2: np.ndarray) -> np.ndarray:
    """Linear inverse of the Jacobi map, for positions and velocities alike."""
    q3 = -np.sqrt(2.0 / 3.0) * z2
    q1 = (-q3 + np.sqrt(2.0) * z1) / 2.0
    q2 = (-q3 - np.sqrt(2.0) * z1) / 2.0
    return np.stack([q1, q2, q3], axis=-1)


def _section_velocity(u: np.ndarray, du: np.ndarray, near_b12: bool):
    """Section (z1, z2) at u, its derivative along du, and the horizontal phase rate."""
    if near_b12:
        b = np.sqrt((1.0 - u[0]) / 2.0)
        db = -du[0] / (4.0 * b)
        w, dw = u[1] + 1j * u[2], du[1] + 1j * du[2]
        z1, z2 = w / (2.0 * b), complex(b)
        dz1, dz2 = dw / (2.0 * b) - w * db / (2.0 * b * b), complex(db)
        rate = (u[2] * du[1] - u[1] * du[2]) / (2.0 * (1.0 - u[0]))
    else:
        a = np.sqrt((1.0 + u[0]) / 2.0)
        da = du[0] / (4.0 * a)
        w, dw = u[1] - 1j * u[2], du[1] - 1j * du[2]
        z1, z2 = complex(a), w / (2.0 * a)
        dz1, dz2 = complex(da), dw / (2.0 * a) - w * da / (2.0 * a * a)
        rate = (u[1] * du[2] - u[2] * du[1]) / (2.0 * (1.0 + u[0]))
    return np.array([z1, z2]), np.array([dz1, dz2]), rate


def _cumulative(values: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    if len(sigma) < 2:
        return np.zeros(len(sigma))
    if len(sigma) < 3:
        return cumulative_trapezoid(values, sigma, initial=0.0)
    return cumulative_simpson(values, x=sigma, initial=0.0)


def _potential_rows(c: np.ndarray) -> np.ndarray:
    """U at every configuration row of c."""
    return sum(1.0 / np.abs(c[:, j] - c[:, k]) ** 2 for j, k in PAIRS)


def path_times(path: ReducedPath) -> np.ndarray:
    """Zero-energy physical time along a unit-speed path on the I = 1 sphere, from its first sample."""
    return _cumulative(1.0 / (np.sqrt(2.0) * lambda_along(path)), path.sigma)


def _lift_window(path: ReducedPath, metric_guard: float) -> Tuple[int, int, bool, bool]:
    gaps = np.array([nearest_end(u)[1] for u in path.points])
    clear = gaps >= metric_guard
    if not np.any(clear):
        raise CuspGuardError(f"every sample of the path is within the metric guard {metric_guard:.1e}")
    centre = int(np.argmax(gaps))
    lo = centre
    while lo > 0 and clear[lo - 1]:
        lo -= 1
    hi = centre
    while hi < len(path) - 1 and clear[hi + 1]:
        hi += 1
    truncated_start, truncated_end = lo > 0, hi < len(path) - 1
    # keep the first sample past the guard so the lift ends below it
    return max(lo - 1, 0), min(hi + 1, len(path) - 1), truncated_start, truncated_end


def horizontal_lift(path: ReducedPath, metric_guard: float = METRIC_GUARD,
                    phase: float = 0.0) -> HorizontalLift:
    """
    Horizontal lift of a reduced path to I = 1 configurations

    Args:
        path: Reduced path (any parametrization)
        metric_guard: Lifting stops within this angle of a collision point
        phase: Fiber phase of the first lifted sample relative to the section

    Returns:
        HorizontalLift over the samples between the guard crossings
    """
    start, stop, cut_start, cut_end = _lift_window(path, metric_guard)
    idx = np.arange(start, stop + 1)
    sigma = path.sigma[idx]
    u = path.points[idx] / np.linalg.norm(path.points[idx], axis=1)[:, None]
    du = path.tangents[idx] - np.sum(path.tangents[idx] * u, axis=1)[:, None] * u
    n = len(idx)
    near = u[:, 0] < NEAR_B12

    z = np.empty((n, 2), dtype=complex)
    dz = np.empty((n, 2), dtype=complex)
    rate = np.empty(n)
    for i in range(n):
        z[i], dz[i], rate[i] = _section_velocity(u[i], du[i], bool(near[i]))

    alpha = np.empty(n)
    alpha[0] = phase
    i0 = 0
    while i0 < n - 1:
        i1 = i0 + 1
        while i1 < n - 1 and near[i1] == near[i0]:
            i1 += 1
        rates = rate[i0:i1 + 1].copy()
        if near[i1] != near[i0]:
            # rate and section at the switch sample are those of the run being closed
            _, _, rates[-1] = _section_velocity(u[i1], du[i1], bool(near[i0]))
        alpha[i0:i1 + 1] = alpha[i0] + _cumulative(rates, sigma[i0:i1 + 1])
        if near[i1] != near[i0]:
            s_old, _, _ = _section_velocity(u[i1], du[i1], bool(near[i0]))
            c_old = np.exp(1j * alpha[i1]) * s_old
            alpha[i1] = float(np.angle(np.sum(c_old * np.conj(z[i1]))))
        i0 = i1

    turn = np.exp(1j * alpha)[:, None]
    zc = turn * z
    dzc = turn * (1j * rate[:, None] * z + dz)
    c = _unjacobi(zc[:, 0], zc[:, 1])
    dc = _unjacobi(dzc[:, 0], dzc[:, 1])
    lam = _potential_rows(c)
    if cut_start or cut_end:
        logger.info(f"Lift truncated at the metric guard (samples {start}..{stop} of {len(path)})")
    return HorizontalLift(sigma, c, dc, alpha, lam, path, int(start), int(stop), cut_start, cut_end)


def time_reparam(lift: HorizontalLift) -> Trajectory:
    """
    Physical-time trajectory of a lift

    dt/dsigma = |dc/dsigma| / sqrt(2 U) with U = lambda on I = 1, which makes the
    result independent of how the lift is parametrized.
    """
    speed = np.linalg.norm(lift.dc, axis=1)
    rate = speed / np.sqrt(2.0 * lift.lam)
    t = _cumulative(rate, lift.sigma)
    with np.errstate(divide='ignore', invalid='ignore'):
        v = np.where(rate[:, None] > 0, lift.dc / rate[:, None], 0.0)
    meta = {'source': 'lift', 'truncated_start': lift.truncated_start,
            'truncated_end': lift.truncated_end, 'sigma0': float(lift.sigma[0])}
    return Trajectory(t, lift.c.copy(), v, meta=meta)


def fornberg_weights(x0: float, x: np.ndarray, order: int) -> np.ndarray:
    """Finite-difference weights for the derivative of given order at x0 on nodes x."""
    n = len(x)
    c = np.zeros((n, order + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _time_derivative(t: np.ndarray, f: np.ndarray, i: int) -> np.ndarray:
    nodes = slice(i - 2, i + 3)
    w = fornberg_weights(t[i], t[nodes], 1)
    return np.tensordot(w, f[nodes], axes=1)


def collision_time(path: ReducedPath) -> Tuple[Optional[float], List[float]]:
    """
    Collision time of a path finishing down a leg

    t(sigma) accumulates dsigma / (sqrt(2) lambda) over the full path; t is read
    at unit depth steps down the final leg and extrapolated with Aitken's delta
    squared. Returns (t_c, increments); t_c is None without three depth levels.
    """
    if len(path) < 2 or not path.ends[-1]:
        return None, []
    t = path_times(path)
    run = len(path) - 1
    while run > 0 and path.ends[run - 1] == path.ends[-1]:
        run -= 1
    depth = path.depth[run:]
    times = t[run:]
    levels = np.arange(1.0, np.floor(np.nanmax(depth)) + 1.0)
    readings = []
    for level in levels:
        hit = np.nonzero(depth >= level)[0]
        if not len(hit) or hit[0] == 0:
            continue
        k = hit[0]
        frac = (level - depth[k - 1]) / (depth[k] - depth[k - 1])
        readings.append(times[k - 1] + frac * (times[k] - times[k - 1]))
    increments = list(np.diff(readings)) if len(readings) > 1 else []
    if len(readings) < 3:
        return None, [float(d) for d in increments]
    t2, t1, t0 = readings[-3], readings[-2], readings[-1]
    denom = t0 - 2.0 * t1 + t2
    t_c = t0 if denom == 0 else t0 - (t0 - t1) ** 2 / denom
    return float(t_c), [float(d) for d in increments]


def verify_solution(lifted: LiftedOrbit, tol: float = 1e-5) -> VerificationReport:
    """
    Check a lifted trajectory against the equations of motion

    The acceleration is the fourth-order finite difference of the velocities on
    the non-uniform time grid, compared with the inverse cube force at interior
    samples. The relative residual is normalized by |acceleration| per sample.
    """
    traj = lifted.trajectory
    if len(traj) < 10:
        raise ValueError("verification needs at least 10 samples")
    t, q, v = traj.t, traj.q, traj.v

    residual = np.zeros(len(t))
    relative = np.zeros(len(t))
    for i in range(2, len(t) - 2):
        a = acceleration(PlanarConfig(q[i]), guard=0.0)
        diff = np.linalg.norm(_time_derivative(t, v, i) - a)
        residual[i] = diff
        relative[i] = diff / max(np.linalg.norm(a), 1.0)

    series = {key: [] for key in ('E', 'C', 'I', 'Idot')}
    for state in traj.states():
        for key, value in invariants(state).items():
            series[key].append(value)
    max_e = float(np.max(np.abs(series['E'])))
    max_c = float(np.max(np.abs(series['C'])))
    max_i = float(np.max(np.abs(np.array(series['I']) - 1.0)))
    max_idot = float(np.max(np.abs(series['Idot'])))

    worst = int(np.argmax(relative))
    failures = []
    if relative[worst] > tol:
        failures.append(worst)
    for key, values, limit in (('E', series['E'], ENERGY_TOL), ('C', series['C'], MOMENTUM_TOL)):
        bad = np.nonzero(np.abs(values) > limit)[0]
        if len(bad):
            failures.append(int(bad[0]))
    bad = np.nonzero(np.abs(np.array(series['I']) - 1.0) > INERTIA_TOL)[0]
    if len(bad):
        failures.append(int(bad[0]))

    report = VerificationReport(
        eq1_residual=float(residual.max()),
        eq1_relative=float(relative[worst]),
        max_abs_E=max_e, max_abs_C=max_c, max_abs_I_minus_1=max_i, max_abs_Idot=max_idot,
        horizontality=max(lifted.lift.horizontality()),
        samples=len(t),
        status='failed' if failures else 'ok',
        offending_index=min(failures) if failures else None,
    )

    source = lifted.source
    end = source.ends[-1]
    if end:
        pair = END_BODIES[str(end)]
        j, k = pair[0] - 1, pair[1] - 1
        run = lifted.lift.stop
        while run > lifted.lift.start and source.ends[run - 1] == end:
            run -= 1
        tail = slice(run - lifted.lift.start, None)
        gaps = np.abs(q[tail, j] - q[tail, k])
        report.finish_pair = pair
        report.final_pair_distance = float(gaps[-1])
        report.pair_distance_decreasing = bool(len(gaps) < 2 or np.all(np.diff(gaps) < 0))
        t_c, report.t_increments = collision_time(source)
        if t_c is not None:
            # on the clock of the lifted trajectory, which starts at the first lifted sample
            report.t_collision = t_c - float(path_times(source)[lifted.lift.start])
        if lifted.lift.truncated_end:
            report.truncation_depth = float(source.depth[lifted.lift.stop])

    if failures:
        logger.warning(f"Verification failed at sample {report.offending_index} "
                       f"(eq1 relative residual {report.eq1_relative:.2e})")
    else:
        logger.info(f"Verification passed: eq1 relative residual {report.eq1_relative:.2e}")
    return report


def lift_orbit(path: ReducedPath, metric_guard: float = METRIC_GUARD, tol: float = 1e-5,
               verify: bool = True) -> LiftedOrbit:
    """Lift, reparametrize by time and (optionally) verify a reduced path."""
    lift = horizontal_lift(path, metric_guard)
    trajectory = time_reparam(lift)
    lifted = LiftedOrbit(trajectory, lift)
    if verify and len(trajectory) >= 10:
        lifted.report = verify_solution(lifted, tol)
    return lifted
