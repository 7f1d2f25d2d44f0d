"""
Runnable property checks for the whole pipeline.

The quick suite covers the dynamics, the reduction, the curvature map, the
seams and the coder. The full suite adds orbit construction, winding families,
lifting and launch-depth convergence, which take minutes.
"""

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple
import logging
import time

import numpy as np

from orbits.services import OrbitFinderService, get_orbit_finder

from .config import RunConfig
from .dynamics import PlanarConfig, PlanarState, center, integrate, lagrange_jacobi_residual
from .exceptions import PantsError
from .geodesics import classify_tail, crossings, geodesic_flow, path_from_points, reversed_path, unit_state
from .lifting import lift_orbit
from .shape import (
    COLLISION_POINTS, curvature, curvature_grid, end_arcs, horizontal_part, nearest_end,
    submersion_check, unit_factor,
)
from .syzygy import cancel_stutters, code, loop_sequence, parse_sequence

logger = logging.getLogger(__name__)

STRAIGHT_TARGETS = ('1', '2', '3', '12', '13', '21', '23', '31', '32')


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    detail: str = ''
    seconds: float = 0.0


class _Context:
    """Shared state of one suite run (random stream, orbits found so far)."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.straight: Dict[str, Tuple] = {}
        self.runs = None
        self._finder = get_orbit_finder(config)

    def finder(self) -> OrbitFinderService:
        return self._finder

    def pair(self, target: str):
        if target not in self.straight:
            self.straight[target] = self.finder().find_straight(target)
        return self.straight[target]


def random_state(rng: np.random.Generator, min_distance: float = 0.3) -> PlanarState:
    """Centered bounded state with positions in the unit square and small velocities."""
    while True:
        xy = rng.uniform(-1.0, 1.0, size=(3, 2))
        config = center(PlanarConfig.from_xy(xy))
        if config.pair_distances().min() >= min_distance:
            break
    v = rng.uniform(-0.5, 0.5, size=(3, 2))
    v = v[:, 0] + 1j * v[:, 1]
    return PlanarState(config, v - v.mean())


def _bounded_runs(ctx: _Context, count: int = 20, t_end: float = 0.5):
    runs = []
    while len(runs) < count:
        traj = integrate(random_state(ctx.rng), t_end, tol=ctx.config.tol,
                         guard=ctx.config.collision_guard)
        if not traj.collision_approach:
            runs.append(traj)
    return runs


def check_lagrange_jacobi(ctx: _Context) -> CheckResult:
    ctx.runs = _bounded_runs(ctx)
    worst = max(lagrange_jacobi_residual(traj) for traj in ctx.runs)
    return CheckResult('lagrange_jacobi', worst <= 1e-9, worst, '20 runs to t=0.5')


def check_conservation(ctx: _Context) -> CheckResult:
    runs = ctx.runs or _bounded_runs(ctx)
    worst = 0.0
    for traj in runs:
        series = traj.invariant_series()
        scale = max(1.0, abs(series['E'][0]))
        worst = max(worst,
                    float(np.abs(series['E'] - series['E'][0]).max()) / scale,
                    float(np.abs(series['C'] - series['C'][0]).max()) / scale)
    return CheckResult('conservation', worst <= 1e-8, worst, 'E and C drift')


def check_submersion(ctx: _Context, count: int = 100) -> CheckResult:
    worst = 0.0
    for _ in range(count):
        config = random_state(ctx.rng, min_distance=0.2).config
        w = ctx.rng.normal(size=3) + 1j * ctx.rng.normal(size=3)
        worst = max(worst, submersion_check(config, horizontal_part(config, w)))
    return CheckResult('submersion', worst <= 1e-8, worst, f'{count} horizontal vectors')


def check_curvature(ctx: _Context, n: int = 100) -> CheckResult:
    values = np.array([row[3] for row in curvature_grid(n, n, exclude=ctx.config.chart_guard)])
    negative = float(np.mean(values < 0))
    flat = abs(curvature(np.array([0.0, 0.0, 1.0]), factor=unit_factor) - 4.0)
    passed = negative >= 0.999 and values.max() <= 1e-6 and flat <= 1e-6
    return CheckResult('curvature', passed, negative,
                       f'{len(values)} points, max K {values.max():.2e}, unit factor error {flat:.1e}')


def check_seams(ctx: _Context, length: float = 5.0) -> CheckResult:
    options = {'sample_step': ctx.config.sample_step, 'chart_guard': ctx.config.chart_guard,
               'chart_exit': ctx.config.chart_exit}
    worst = 0.0
    equator = geodesic_flow(unit_state([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), length, ctx.config.tol, **options)
    worst = max(worst, float(np.abs(equator.points[:, 2]).max()))
    north = np.array([0.0, 0.0, 1.0])
    for b in COLLISION_POINTS.values():
        normal = np.cross(north, b)
        normal /= np.linalg.norm(normal)
        meridian = geodesic_flow(unit_state(north, b), length, ctx.config.tol, **options)
        worst = max(worst, float(np.abs(meridian.points @ normal).max()))
    return CheckResult('seams', worst <= 1e-6, worst, 'equator and three meridians')


def check_coder(ctx: _Context, count: int = 1000) -> CheckResult:
    failures = []
    for _ in range(count):
        word = parse_sequence(''.join(map(str, ctx.rng.integers(1, 4, size=ctx.rng.integers(0, 13)))))
        once = cancel_stutters(word)
        if cancel_stutters(once) != once or not once.stutter_free or len(once) > len(word):
            failures.append(word.to_text())
    if cancel_stutters(parse_sequence('1233')).to_text() != '12':
        failures.append('1233')

    b = COLLISION_POINTS['B12']
    e1, e2 = np.cross([0.0, 0.0, 1.0], b), np.array([0.0, 0.0, 1.0])
    psi = np.linspace(0.1, 0.1 + 4.0 * np.pi, 800)
    loop = np.cos(0.2) * b + np.sin(0.2) * (np.cos(psi)[:, None] * e1 + np.sin(psi)[:, None] * e2)
    symbols = code(path_from_points(loop)).symbols
    if not symbols or symbols != loop_sequence('B12', 2, start=symbols[0]).symbols:
        failures.append(f'loop {symbols}')
    return CheckResult('coder', not failures, float(len(failures)), ', '.join(failures[:5]))


def interior_clearance(path) -> float:
    """Smallest angle to a collision point away from the cusp runs at the two ends of a path."""
    lo, hi = 0, len(path) - 1
    while lo < hi and path.ends[lo] and path.ends[lo] == path.ends[0]:
        lo += 1
    while hi > lo and path.ends[hi] and path.ends[hi] == path.ends[-1]:
        hi -= 1
    return min((nearest_end(u)[1] for u in path.points[lo:hi + 1]), default=float('inf'))


def check_straight(ctx: _Context, budget: float = 600.0) -> CheckResult:
    started = time.perf_counter()
    bad = []
    worst = 0.0
    for target in STRAIGHT_TARGETS:
        try:
            pair = ctx.pair(target)
        except PantsError as e:
            bad.append(f'{target}: {e}')
            continue
        for orbit in pair:
            ends = (classify_tail(reversed_path(orbit.path)), classify_tail(orbit.path))
            ok = (orbit.realized.to_text() == target and all(t.kind == 'STRAIGHT' for t in ends)
                  and orbit.shot.window <= ctx.config.bisection_tol)
            if not ok:
                bad.append(f'{target}: {orbit.realized.to_text()} {[t.kind for t in ends]}')
            clearance = interior_clearance(orbit.path)
            if clearance <= ctx.config.metric_guard:
                bad.append(f'{target}: passes {clearance:.1e} from a collision')
        gap = pair[0].verification['mirror_distance']
        worst = max(worst, gap)
        if gap > 1e-6:
            bad.append(f'{target}: mirror distance {gap:.1e}')
    elapsed = time.perf_counter() - started
    if elapsed > budget:
        bad.append(f'{len(STRAIGHT_TARGETS)} targets took {elapsed:.0f}s')
    return CheckResult('straight_orbits', not bad, worst, '; '.join(bad[:5]))


def check_thirty_one(ctx: _Context) -> CheckResult:
    arcs = [[c.arc for c in crossings(orbit.path)] for orbit in ctx.pair('31')]
    passed = all(a == [3, 1] for a in arcs)
    return CheckResult('sequence_31', passed, float(len(arcs[0])), f'crossings {arcs}')


def check_winding(ctx: _Context) -> CheckResult:
    finder = ctx.finder()
    straight = ctx.pair('1')[0]
    bad = []
    count = 0
    for eps in (1e-3, 1e-2):
        try:
            family = finder.find_winding(straight, eps, count=3)
        except PantsError as e:
            bad.append(f'eps {eps}: {e}')
            continue
        for orbit in family:
            winds = all(len(part) >= 2 and set(part) <= set(end_arcs(end))
                        and all(a != b for a, b in zip(part, part[1:]))
                        for part, end in ((orbit.realized.head, orbit.start_end),
                                          (orbit.realized.tail, orbit.finish_end)))
            if orbit.realized.symbols != (1,) or not winds:
                bad.append(f'eps {eps}: {orbit.realized.to_text()}')
            if orbit.verification['member_distance'] <= 1e-8:
                bad.append(f'eps {eps}: member at {orbit.epsilon:+.1e} repeats another')
        count += len(family)
    return CheckResult('winding_family', not bad, float(count), '; '.join(bad[:5]))


def check_lift(ctx: _Context) -> CheckResult:
    lifted = lift_orbit(ctx.pair('31')[0].path, ctx.config.metric_guard)
    r = lifted.report
    if r is None:
        return CheckResult('lift_31', False, float('nan'), 'lift too short to verify')
    shrinking = len(r.t_increments) > 1 and all(
        abs(b) < abs(a) for a, b in zip(r.t_increments, r.t_increments[1:]))
    passed = (r.ok and bool(r.pair_distance_decreasing)
              and r.t_collision is not None and np.isfinite(r.t_collision) and shrinking)
    return CheckResult('lift_31', passed, r.eq1_relative,
                       f'|E| {r.max_abs_E:.1e} |C| {r.max_abs_C:.1e} t_c {r.t_collision}')


def check_launch_depth(ctx: _Context) -> CheckResult:
    distance = ctx.finder().launch_convergence('31', (4.0, 6.0))
    return CheckResult('launch_depth', distance <= 1e-4, distance, 'D0 4 -> 6')


QUICK_CHECKS: List[Tuple[str, Callable[[_Context], CheckResult]]] = [
    ('lagrange_jacobi', check_lagrange_jacobi),
    ('conservation', check_conservation),
    ('submersion', check_submersion),
    ('curvature', check_curvature),
    ('seams', check_seams),
    ('coder', check_coder),
]
FULL_CHECKS: List[Tuple[str, Callable[[_Context], CheckResult]]] = [
    ('straight_orbits', check_straight),
    ('sequence_31', check_thirty_one),
    ('winding_family', check_winding),
    ('lift_31', check_lift),
    ('launch_depth', check_launch_depth),
]


def run_checks(config: RunConfig, full: bool = False, only: Optional[List[str]] = None) -> List[CheckResult]:
    """
    Run the check suite

    Args:
        config: Run configuration (seed, tolerances, shooting defaults)
        full: Include the orbit-construction checks
        only: Restrict to these check names

    Returns:
        One CheckResult per check, in suite order
    """
    ctx = _Context(config)
    suite = QUICK_CHECKS + (FULL_CHECKS if full else [])
    if only:
        unknown = set(only) - {name for name, _ in QUICK_CHECKS + FULL_CHECKS}
        if unknown:
            raise ValueError(f"unknown checks: {sorted(unknown)}")
        suite = [(name, check) for name, check in QUICK_CHECKS + FULL_CHECKS if name in only]
    results = []
    for name, check in suite:
        started = time.perf_counter()
        try:
            result = check(ctx)
        except PantsError as e:
            result = CheckResult(name, False, float('nan'), f'{type(e).__name__}: {e}')
        except Exception as e:
            logger.exception(f"check {name} raised")
            result = CheckResult(name, False, float('nan'), f'{type(e).__name__}: {e}')
        result.seconds = time.perf_counter() - started
        level = logging.INFO if result.passed else logging.WARNING
        logger.log(level, f"check {name}: {'pass' if result.passed else 'FAIL'} "
                          f"({result.value:.3e}, {result.seconds:.1f}s) {result.detail}")
        results.append(result)
    return results
