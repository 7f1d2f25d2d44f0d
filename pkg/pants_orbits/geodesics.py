"""
Unit-speed geodesics of the reduced JM metric on the pair of pants.

Away from the collision points the flow is integrated in extrinsic coordinates
of the unit sphere: the reduced metric is mu * g_S with mu = lambda / 4 and the
geodesic equation of a conformal metric e^{2 phi} g_S reads

    u'' = -|v|^2 u - 2 <grad phi, v> v + |v|^2 grad phi,    phi = log(lambda) / 2.

Within `chart_guard` of a collision point b the flow switches to the cusp chart
w = x + iy = log(tan(theta/2)) + i psi, theta the angle from b and psi the angle
around b measured from the equator (psi in (0, pi) is the upper half). There the
metric is m(w) |dw|^2 with m -> 1/2 down the leg, i.e. the end is a flat cylinder
of circumference pi sqrt(2) to leading order, and the same conformal geodesic
equation holds with the flat background. Depth below the reference cross-section
theta = chart_guard is (x0 - x) / sqrt(2).
"""

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple
import logging

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .exceptions import AmbiguousCrossingError, NotInCuspError
from .shape import (
    COLLISION_POINTS, ShapePoint, angular_distance, arc_of, end_arcs, lam_value, nearest_end,
)

logger = logging.getLogger(__name__)

CHART_GUARD = 0.05
CHART_EXIT = 0.06
HORIZON_DEPTH = 8.0
FLAT_DEPTH = 10.0
TAIL_DEPTH = 1.0
SAMPLE_STEP = 0.01
CHUNK = 0.5
GRAZING = 1e-9
AMBIGUOUS = 1e-6
SQRT2 = np.sqrt(2.0)

ZHAT = np.array([0.0, 0.0, 1.0])


def _frame(end: str) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    b = COLLISION_POINTS[end]
    e1 = np.cross(ZHAT, b)
    return b, e1, ZHAT


def reference_x(chart_guard: float = CHART_GUARD) -> float:
    return float(np.log(np.tan(chart_guard / 2.0)))


def depth_from_x(x, chart_guard: float = CHART_GUARD):
    return (reference_x(chart_guard) - x) / SQRT2


def x_from_depth(depth, chart_guard: float = CHART_GUARD):
    return reference_x(chart_guard) - SQRT2 * depth


@dataclass(frozen=True)
class CuspCoords:
    """Exact position and velocity in the cusp chart of an end."""
    end: str
    x: float
    y: float
    xdot: float
    ydot: float


@dataclass(frozen=True)
class CuspChart:
    end: str
    depth: float
    phi: float


@dataclass(frozen=True)
class GeodesicState:
    u: np.ndarray
    tangent: np.ndarray
    cusp: Optional[CuspCoords] = None

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float).reshape(3)
        t = np.asarray(self.tangent, dtype=float).reshape(3)
        if abs(np.linalg.norm(u) - 1.0) > 1e-10:
            raise ValueError("geodesic state point must lie on the unit sphere")
        if abs(np.dot(u, t)) > 1e-8 * np.linalg.norm(t) + 1e-14:
            raise ValueError("tangent is not tangent to the sphere")
        object.__setattr__(self, 'u', u)
        object.__setattr__(self, 'tangent', t)

    @property
    def point(self) -> ShapePoint:
        return ShapePoint(self.u)

    def speed(self) -> float:
        """Reduced speed; unit for states on a unit-speed geodesic."""
        if self.cusp is not None:
            m = _cusp_metric(self.cusp.end, self.cusp.x, self.cusp.y)[0]
            return float(np.sqrt(m * (self.cusp.xdot ** 2 + self.cusp.ydot ** 2)))
        return float(np.sqrt(lam_value(self.u) / 4.0 * np.dot(self.tangent, self.tangent)))

    def reversed(self) -> 'GeodesicState':
        cusp = None
        if self.cusp is not None:
            c = self.cusp
            cusp = CuspCoords(c.end, c.x, c.y, -c.xdot, -c.ydot)
        return GeodesicState(self.u, -self.tangent, cusp)

    def mirrored(self) -> 'GeodesicState':
        flip = np.array([1.0, 1.0, -1.0])
        cusp = None
        if self.cusp is not None:
            c = self.cusp
            cusp = CuspCoords(c.end, c.x, -c.y, c.xdot, -c.ydot)
        return GeodesicState(self.u * flip, self.tangent * flip, cusp)


def _cusp_point(end: str, x: float, y: float):
    b, e1, e2 = _frame(end)
    t = np.exp(x)
    denom = 1.0 + t * t
    cos_t = (1.0 - t * t) / denom
    sin_t = 2.0 * t / denom
    n = np.cos(y) * e1 + np.sin(y) * e2
    u = cos_t * b + sin_t * n
    du_dx = sin_t * (-sin_t * b + cos_t * n)
    du_dy = sin_t * (-np.sin(y) * e1 + np.cos(y) * e2)
    return u, du_dx, du_dy, t, cos_t, sin_t


def _cusp_metric(end: str, x: float, y: float):
    """m, dm/dx, dm/dy of the cusp-chart metric m |dw|^2, plus the sphere point."""
    u, du_dx, du_dy, t, cos_t, _sin_t = _cusp_point(end, x, y)
    denom = 1.0 + t * t
    a = 0.5 / denom
    bb = t * t / (denom * denom)
    s = s_x = s_y = 0.0
    for label, other in COLLISION_POINTS.items():
        if label == end:
            continue
        h = 1.0 / (1.0 - np.dot(other, u))
        s += h
        s_x += h * h * np.dot(other, du_dx)
        s_y += h * h * np.dot(other, du_dy)
    m = a + bb * s
    m_x = -bb + 2.0 * bb * cos_t * s + bb * s_x
    m_y = bb * s_y
    return m, m_x, m_y, u


def to_cusp(u: np.ndarray, v: np.ndarray, end: str) -> CuspCoords:
    """Chart coordinates of a point and tangent near the given end."""
    b, e1, e2 = _frame(end)
    ub = float(np.dot(u, b))
    zeta = (np.dot(u, e1) + 1j * np.dot(u, e2)) / (1.0 + ub)
    zeta_dot = ((np.dot(v, e1) + 1j * np.dot(v, e2)) - zeta * np.dot(v, b)) / (1.0 + ub)
    w = np.log(zeta)
    w_dot = zeta_dot / zeta
    return CuspCoords(end, float(w.real), float(w.imag), float(w_dot.real), float(w_dot.imag))


def from_cusp(c: CuspCoords) -> Tuple[np.ndarray, np.ndarray]:
    u, du_dx, du_dy, *_ = _cusp_point(c.end, c.x, c.y)
    return u, c.xdot * du_dx + c.ydot * du_dy


def cusp_chart(point, chart_guard: float = CHART_GUARD) -> CuspChart:
    """(end, depth, phi) of a shape point within chart_guard of a collision point."""
    u = np.asarray(getattr(point, 'u', point), dtype=float)
    end, dist = nearest_end(u)
    if dist > chart_guard:
        raise NotInCuspError(f"point is {dist:.3e} from {end}, outside the cusp neighbourhood {chart_guard}")
    c = to_cusp(u, np.zeros(3), end)
    return CuspChart(end, float(depth_from_x(c.x, chart_guard)), float(np.mod(c.y, 2.0 * np.pi)))


def cusp_point(chart: CuspChart, chart_guard: float = CHART_GUARD) -> ShapePoint:
    """Inverse of cusp_chart."""
    u = _cusp_point(chart.end, x_from_depth(chart.depth, chart_guard), chart.phi)[0]
    return ShapePoint(u / np.linalg.norm(u))


def cusp_state(end: str, depth: float, phi: float, xdot: float, ydot: float,
               chart_guard: float = CHART_GUARD) -> GeodesicState:
    c = CuspCoords(end, float(x_from_depth(depth, chart_guard)), float(phi), float(xdot), float(ydot))
    u, v = from_cusp(c)
    return GeodesicState(u / np.linalg.norm(u), v, c)


def launch_state(end: str, depth: float, phi: float, chart_guard: float = CHART_GUARD) -> GeodesicState:
    """Unit tangent along the outward normal of the depth cross-section of an end."""
    x = x_from_depth(depth, chart_guard)
    m = _cusp_metric(end, x, phi)[0]
    return cusp_state(end, depth, phi, 1.0 / np.sqrt(m), 0.0, chart_guard)


def rotate_tangent(state: GeodesicState, angle: float) -> GeodesicState:
    """Rotate the tangent by angle within the tangent plane (conformal, so speed is kept)."""
    c, s = np.cos(angle), np.sin(angle)
    if state.cusp is not None:
        k = state.cusp
        cusp = CuspCoords(k.end, k.x, k.y, c * k.xdot - s * k.ydot, s * k.xdot + c * k.ydot)
        u, v = from_cusp(cusp)
        return GeodesicState(state.u, v, cusp)
    t = state.tangent
    return GeodesicState(state.u, c * t + s * np.cross(state.u, t))


def unit_state(u, direction) -> GeodesicState:
    """Unit-speed state at u heading along the tangent part of direction."""
    u = np.asarray(getattr(u, 'u', u), dtype=float)
    u = u / np.linalg.norm(u)
    d = np.asarray(direction, dtype=float)
    d = d - np.dot(d, u) * u
    d = d / np.sqrt(lam_value(u) / 4.0 * np.dot(d, d))
    return GeodesicState(u, d)


def _grad_phi(u: np.ndarray) -> np.ndarray:
    f = 0.0
    grad = np.zeros(3)
    for b in COLLISION_POINTS.values():
        x = np.dot(b, u)
        h = 1.0 / (1.0 - x)
        f += h
        grad += h * h * (b - x * u)
    return 0.5 * grad / f


def _core_rhs(_s: float, y: np.ndarray) -> np.ndarray:
    u, v = y[:3], y[3:]
    g = _grad_phi(u)
    v2 = np.dot(v, v)
    acc = -v2 * u - 2.0 * np.dot(g, v) * v + v2 * g
    return np.concatenate([v, acc])


def _make_cusp_rhs(end: str):
    def rhs(_s: float, y: np.ndarray) -> np.ndarray:
        x, yy, xd, yd = y
        m, m_x, m_y, _u = _cusp_metric(end, x, yy)
        gx, gy = 0.5 * m_x / m, 0.5 * m_y / m
        dot = gx * xd + gy * yd
        w2 = xd * xd + yd * yd
        return np.array([xd, yd, -2.0 * dot * xd + w2 * gx, -2.0 * dot * yd + w2 * gy])
    return rhs


def _renormalize_core(u: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    u = u / np.linalg.norm(u)
    v = v - np.dot(v, u) * u
    return u, v / np.sqrt(lam_value(u) / 4.0 * np.dot(v, v))


def _renormalize_cusp(c: CuspCoords) -> CuspCoords:
    m = _cusp_metric(c.end, c.x, c.y)[0]
    speed = np.sqrt(m * (c.xdot ** 2 + c.ydot ** 2))
    return CuspCoords(c.end, c.x, c.y, c.xdot / speed, c.ydot / speed)


@dataclass(frozen=True)
class ReducedPath:
    """
    Samples of a curve on the pants.

    ends[i] is the end label when sample i was taken in a cusp chart, '' in the
    core chart; cusp[i] holds (x, y, xdot, ydot) in that chart (NaN in the core).
    """
    sigma: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    ends: np.ndarray
    cusp: np.ndarray
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        sigma = np.asarray(self.sigma, dtype=float)
        if len(sigma) > 1 and not np.all(np.diff(sigma) > 0):
            raise ValueError("path arclength must be strictly increasing")
        object.__setattr__(self, 'sigma', sigma)
        object.__setattr__(self, 'ends', np.asarray(self.ends, dtype=object))

    def __len__(self) -> int:
        return len(self.sigma)

    @property
    def chart_guard(self) -> float:
        return float(self.meta.get('chart_guard', CHART_GUARD))

    @property
    def in_cusp(self) -> np.ndarray:
        return np.array([bool(e) for e in self.ends])

    @property
    def depth(self) -> np.ndarray:
        return depth_from_x(self.cusp[:, 0], self.chart_guard)

    @property
    def angle(self) -> np.ndarray:
        return self.cusp[:, 1]

    @property
    def phi(self) -> np.ndarray:
        return np.mod(self.cusp[:, 1], 2.0 * np.pi)

    @property
    def length(self) -> float:
        return float(self.sigma[-1] - self.sigma[0])

    def state_at(self, i: int) -> GeodesicState:
        u, tangent = _on_sphere(self.points[i], self.tangents[i])
        if self.ends[i]:
            x, y, xd, yd = self.cusp[i]
            c = CuspCoords(str(self.ends[i]), float(x), float(y), float(xd), float(yd))
            return GeodesicState(u, tangent, c)
        return GeodesicState(u, tangent)

    @property
    def final(self) -> GeodesicState:
        return self.state_at(len(self) - 1)

    def mirrored(self) -> 'ReducedPath':
        flip = np.array([1.0, 1.0, -1.0])
        cusp = self.cusp.copy()
        cusp[:, 1] *= -1.0
        cusp[:, 3] *= -1.0
        return ReducedPath(self.sigma.copy(), self.points * flip, self.tangents * flip,
                           self.ends.copy(), cusp, dict(self.meta))


def _on_sphere(u: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    u = u / np.linalg.norm(u)
    return u, v - np.dot(v, u) * u


def _sample_row(chart_end: str, y: np.ndarray):
    # dense output drifts off the sphere between renormalizations
    if chart_end:
        u, v = _on_sphere(*from_cusp(CuspCoords(chart_end, *map(float, y))))
        return u, v, np.array(y, dtype=float)
    u, v = _on_sphere(np.array(y[:3], dtype=float), np.array(y[3:], dtype=float))
    return u, v, np.full(4, np.nan)


def geodesic_flow(start: GeodesicState, length: float, tol: float = 1e-10, *,
                  sample_step: float = SAMPLE_STEP, chart_guard: float = CHART_GUARD,
                  chart_exit: float = CHART_EXIT, stop_depth: Optional[float] = None,
                  chunk: float = CHUNK) -> ReducedPath:
    """
    Integrate the unit-speed geodesic from start for the given reduced length

    Args:
        start: Initial state; cusp coordinates are used when present
        length: Reduced arclength to integrate
        tol: Local error tolerance of the DOP853 steps
        sample_step: Output spacing in reduced arclength
        chart_guard: Angular distance at which the cusp chart takes over
        chart_exit: Angular distance at which the core chart takes over again
        stop_depth: Stop early when any end is entered to this depth

    Returns:
        ReducedPath sampled every sample_step, with the final state as last sample
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    x_exit = reference_x(chart_exit)
    x_stop = None if stop_depth is None else float(x_from_depth(stop_depth, chart_guard))

    if start.cusp is not None:
        chart, y = start.cusp.end, np.array([start.cusp.x, start.cusp.y, start.cusp.xdot, start.cusp.ydot])
    else:
        end, dist = nearest_end(start.u)
        if dist < chart_guard:
            c = to_cusp(start.u, start.tangent, end)
            chart, y = end, np.array([c.x, c.y, c.xdot, c.ydot])
        else:
            chart, y = '', np.concatenate([start.u, start.tangent])

    sigmas: List[float] = []
    rows: List[Tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    ends: List[str] = []

    def record(s: float, chart_end: str, state: np.ndarray) -> None:
        if sigmas and s <= sigmas[-1] + 1e-12:
            return
        sigmas.append(s)
        rows.append(_sample_row(chart_end, state))
        ends.append(chart_end)

    record(0.0, chart, y)
    sigma = 0.0
    switches = 0
    stopped = False
    while sigma < length - 1e-12 and not stopped:
        seg_end = min(sigma + chunk, length)
        if chart:
            rhs = _make_cusp_rhs(chart)

            def leave(_s, yy, x_exit=x_exit):
                return yy[0] - x_exit
            leave.terminal, leave.direction = True, 1
            events = [leave]
            if x_stop is not None:
                def deep(_s, yy, x_stop=x_stop):
                    return yy[0] - x_stop
                deep.terminal, deep.direction = True, -1
                events.append(deep)
        else:
            rhs = _core_rhs
            events = []
            for label, b in COLLISION_POINTS.items():
                def enter(_s, yy, b=b):
                    return angular_distance(yy[:3], b) - chart_guard
                enter.terminal, enter.direction = True, -1
                events.append(enter)

        sol = solve_ivp(rhs, (sigma, seg_end), y, method='DOP853', rtol=tol, atol=tol,
                        events=events, dense_output=True)
        if sol.status == -1:
            logger.warning(f"Geodesic integration failed at sigma={sol.t[-1]:.6g}: {sol.message}")
            stopped = True
        seg_stop = float(sol.t[-1])
        first = int(np.floor(sigma / sample_step + 1e-9)) + 1
        last = int(np.floor(seg_stop / sample_step + 1e-9))
        for k in range(first, last + 1):
            record(k * sample_step, chart, sol.sol(k * sample_step))
        y = sol.y[:, -1]

        if sol.status == 1:
            hit = [i for i, ev in enumerate(sol.t_events) if len(ev)]
            if chart:
                if x_stop is not None and 1 in hit:
                    stopped = True
                else:
                    u, v = from_cusp(CuspCoords(chart, *map(float, y)))
                    u, v = _renormalize_core(u, v)
                    chart, y = '', np.concatenate([u, v])
                    switches += 1
            else:
                label = list(COLLISION_POINTS)[hit[0]]
                c = _renormalize_cusp(to_cusp(y[:3], y[3:], label))
                chart, y = label, np.array([c.x, c.y, c.xdot, c.ydot])
                switches += 1
        elif chart:
            c = _renormalize_cusp(CuspCoords(chart, *map(float, y)))
            y = np.array([c.x, c.y, c.xdot, c.ydot])
        else:
            u, v = _renormalize_core(y[:3], y[3:])
            y = np.concatenate([u, v])
        if stopped or seg_stop >= length - 1e-12:
            record(seg_stop, chart, y)
        sigma = seg_stop

    points = np.array([r[0] for r in rows])
    tangents = np.array([r[1] for r in rows])
    cusp = np.array([r[2] for r in rows])
    meta = {'tol': tol, 'chart_guard': chart_guard, 'chart_exit': chart_exit,
            'chart_switches': switches, 'stopped_at_depth': bool(stopped and x_stop is not None)}
    return ReducedPath(np.array(sigmas), points, tangents, np.array(ends, dtype=object), cusp, meta)


def descend_leg(path: ReducedPath, turns: int, step: float = 0.25, max_samples: int = 4000) -> ReducedPath:
    """
    Continue a path down the leg it ends in until the chart angle passes `turns`
    more multiples of pi

    Below FLAT_DEPTH the leg metric differs from (1/2)|dw|^2 by less than 1e-15
    relative, so the geodesic is the straight line of the cusp chart and is
    continued in closed form. The continuation stops half a turn past the last
    crossing.

    Raises:
        NotInCuspError: the path does not end at FLAT_DEPTH or deeper
        ValueError: the path is not heading down the leg, or runs straight down it
    """
    end = str(path.ends[-1])
    if not end or path.depth[-1] < FLAT_DEPTH - 1e-9:
        raise NotInCuspError(f"path must end at depth {FLAT_DEPTH} or more in a leg")
    x, y, xdot, ydot = map(float, path.cusp[-1])
    if xdot >= 0:
        raise ValueError("path is not heading down the leg")
    if ydot == 0 or turns < 1:
        raise ValueError("a geodesic straight down the leg never winds")
    scale = np.sqrt(2.0 / (xdot * xdot + ydot * ydot))
    xdot, ydot = xdot * scale, ydot * scale
    if ydot > 0:
        target = (np.floor(y / np.pi) + turns + 0.5) * np.pi
    else:
        target = (np.ceil(y / np.pi) - turns - 0.5) * np.pi
    length = (target - y) / ydot
    n = max(int(np.ceil(length / step)), 2)
    n = min(n, max_samples)
    s = np.linspace(0.0, length, n + 1)
    rows = [_sample_row(end, np.array([x + xdot * si, y + ydot * si, xdot, ydot])) for si in s]
    tail = ReducedPath(
        s,
        np.array([r[0] for r in rows]),
        np.array([r[1] for r in rows]),
        np.array([end] * (n + 1), dtype=object),
        np.array([r[2] for r in rows]),
    )
    joined = concat_paths(path, tail)
    joined.meta['flat_from'] = float(path.sigma[-1])
    return joined


def reversed_path(path: ReducedPath) -> ReducedPath:
    """Same curve traversed backwards, arclength starting at 0."""
    cusp = path.cusp[::-1].copy()
    cusp[:, 2:] *= -1.0
    return ReducedPath(path.sigma[-1] - path.sigma[::-1], path.points[::-1].copy(),
                       -path.tangents[::-1], path.ends[::-1].copy(), cusp, dict(path.meta))


def concat_paths(first: ReducedPath, second: ReducedPath) -> ReducedPath:
    """Append second (starting where first ends) to first."""
    offset = first.sigma[-1] - second.sigma[0]
    keep = slice(1, None)
    return ReducedPath(
        np.concatenate([first.sigma, second.sigma[keep] + offset]),
        np.concatenate([first.points, second.points[keep]]),
        np.concatenate([first.tangents, second.tangents[keep]]),
        np.concatenate([first.ends, second.ends[keep]]),
        np.concatenate([first.cusp, second.cusp[keep]]),
        dict(first.meta),
    )


def path_from_points(points: np.ndarray) -> ReducedPath:
    """
    ReducedPath through sampled shape points (core chart only)

    Arclength is the reduced metric length of the polyline (midpoint rule);
    tangents are arclength derivatives by second-order differences.
    """
    pts = np.asarray(points, dtype=float)
    pts = pts / np.linalg.norm(pts, axis=1)[:, None]
    mids = pts[1:] + pts[:-1]
    mids /= np.linalg.norm(mids, axis=1)[:, None]
    weights = np.sqrt(np.array([lam_value(m) for m in mids]) / 4.0)
    steps = weights * np.linalg.norm(np.diff(pts, axis=0), axis=1)
    keep = np.concatenate([[True], steps > 0])
    pts, sigma = pts[keep], np.concatenate([[0.0], np.cumsum(steps[steps > 0])])
    tangents = np.gradient(pts, sigma, axis=0, edge_order=2) if len(pts) > 2 else np.zeros_like(pts)
    tangents -= np.sum(tangents * pts, axis=1)[:, None] * pts
    n = len(pts)
    return ReducedPath(sigma, pts, tangents, np.array([''] * n, dtype=object),
                       np.full((n, 4), np.nan), {'source': 'points'})


def lambda_along(path: ReducedPath) -> np.ndarray:
    """Conformal factor at every sample, evaluated in chart form inside the cusps."""
    out = np.empty(len(path))
    for i in range(len(path)):
        if path.ends[i]:
            x, y = path.cusp[i, 0], path.cusp[i, 1]
            m = _cusp_metric(str(path.ends[i]), x, y)[0]
            t = np.exp(x)
            sin_t = 2.0 * t / (1.0 + t * t)
            out[i] = 4.0 * m / sin_t ** 2 if sin_t > 0 else np.inf
        else:
            out[i] = lam_value(path.points[i])
    return out


class Crossing(NamedTuple):
    sigma: float
    arc: int
    index: int


def cusp_arcs(end: str) -> Tuple[int, int]:
    """Arcs met by the rays psi = 0 and psi = pi from an end."""
    b, e1, _ = _frame(end)
    return arc_of(np.cos(0.01) * b + np.sin(0.01) * e1), arc_of(np.cos(0.01) * b - np.sin(0.01) * e1)


def crossings(path: ReducedPath, grazing: float = GRAZING, ambiguous: float = AMBIGUOUS) -> List[Crossing]:
    """
    Transversal equator crossings in temporal order

    Core samples use sign changes of u3 located by bisection on the cubic Hermite
    interpolant; consecutive samples in one cusp chart use the chart angle psi
    passing a multiple of pi. Sign changes with both |u3| below `grazing` are
    treated as contact with the seam and ignored.
    """
    found: List[Crossing] = []
    arcs_by_end = {end: cusp_arcs(end) for end in COLLISION_POINTS}
    for i in range(len(path) - 1):
        e0, e1 = path.ends[i], path.ends[i + 1]
        s0, s1 = path.sigma[i], path.sigma[i + 1]
        if e0 and e0 == e1:
            y0, y1 = path.cusp[i, 1], path.cusp[i + 1, 1]
            if y0 == y1:
                continue
            lo, hi = min(y0, y1), max(y0, y1)
            ks = list(range(int(np.floor(lo / np.pi)) + 1, int(np.ceil(hi / np.pi))))
            if y1 < y0:
                ks.reverse()
            for k in ks:
                s = s0 + (k * np.pi - y0) / (y1 - y0) * (s1 - s0)
                found.append(Crossing(float(s), arcs_by_end[str(e0)][k % 2], i))
            continue
        a, b = path.points[i, 2], path.points[i + 1, 2]
        if not a * b < 0 or max(abs(a), abs(b)) <= grazing:
            continue
        spline = CubicHermiteSpline([s0, s1], path.points[i:i + 2], path.tangents[i:i + 2], axis=0)
        root = brentq(lambda s: spline(s)[2], s0, s1, xtol=1e-10)
        p = spline(root)
        p = p / np.linalg.norm(p)
        label, dist = nearest_end(p)
        if dist < ambiguous:
            raise AmbiguousCrossingError(
                f"equator crossing at sigma={root:.6g} lies {dist:.2e} from {label}"
            )
        found.append(Crossing(float(root), arc_of(p), i))
    return found


@dataclass(frozen=True)
class TailClass:
    kind: str  # CORE, STRAIGHT or WINDING
    end: Optional[str] = None
    first_symbol: Optional[int] = None
    crossings: int = 0


def on_seam(path: ReducedPath, grazing: float = GRAZING) -> bool:
    core = ~path.in_cusp
    if np.any(np.abs(path.points[core, 2]) > grazing):
        return False
    return bool(np.all(np.abs(np.sin(path.angle[~core])) <= 1e-12))


def tail_crossings(path: ReducedPath, found: Optional[List[Crossing]] = None,
                   tail_depth: float = TAIL_DEPTH) -> List[Crossing]:
    """Crossings made in the final cusp run at depth >= tail_depth."""
    end = path.ends[-1]
    if not end:
        return []
    run = len(path) - 1
    while run > 0 and path.ends[run - 1] == end:
        run -= 1
    depth = path.depth
    found = crossings(path) if found is None else found
    return [c for c in found
            if c.index >= run and min(depth[c.index], depth[min(c.index + 1, len(path) - 1)]) >= tail_depth]


def classify_tail(path: ReducedPath, horizon_depth: float = HORIZON_DEPTH,
                  tail_depth: float = TAIL_DEPTH, found: Optional[List[Crossing]] = None) -> TailClass:
    """
    Forward tail of a path: STRAIGHT(end) when it reached horizon_depth in an end with
    no crossing down the leg, WINDING(end, s) when the crossings down the leg alternate
    between the two arcs of that end, CORE otherwise (including paths on a seam).
    """
    end = path.ends[-1]
    if not end or on_seam(path):
        return TailClass('CORE')
    tail = tail_crossings(path, found, tail_depth)
    if tail:
        symbols = [c.arc for c in tail]
        allowed = set(end_arcs(str(end)))
        alternating = all(a != b for a, b in zip(symbols, symbols[1:]))
        if alternating and set(symbols) <= allowed:
            return TailClass('WINDING', str(end), symbols[0], len(symbols))
        return TailClass('CORE')
    if path.depth[-1] >= horizon_depth - 1e-9:
        return TailClass('STRAIGHT', str(end))
    return TailClass('CORE')


def aligned_distance(a: ReducedPath, b: ReducedPath, core_only: bool = True,
                     shift: Optional[float] = None) -> float:
    """
    Largest distance between two paths after aligning their first equator crossings

    Samples of a (core-chart samples when core_only) are compared with b
    interpolated at the aligned arclength. An explicit shift (b arclength minus
    a arclength) replaces the crossing alignment.
    """
    if shift is None:
        ca, cb = crossings(a), crossings(b)
        shift = (cb[0].sigma - ca[0].sigma) if ca and cb else 0.0
    mask = ~a.in_cusp if core_only else np.ones(len(a), dtype=bool)
    s = a.sigma[mask] + shift
    inside = (s >= b.sigma[0]) & (s <= b.sigma[-1])
    if not np.any(inside):
        return float('inf')
    interp = np.column_stack([np.interp(s[inside], b.sigma, b.points[:, k]) for k in range(3)])
    return float(np.max(np.linalg.norm(a.points[mask][inside] - interp, axis=1)))
