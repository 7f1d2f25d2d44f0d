import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from pants_orbits.config import RunConfig
from pants_orbits.exceptions import (
    EpsilonTooLargeError, InvalidSequenceError, PantsError, ResolutionExceededError,
)
from pants_orbits.geodesics import (
    FLAT_DEPTH, ReducedPath, aligned_distance, classify_tail, concat_paths, crossings, cusp_arcs,
    descend_leg, geodesic_flow, launch_state, reversed_path, rotate_tangent, tail_crossings,
)
from pants_orbits.shape import COLLISION_POINTS, end_arcs, opposite_end
from pants_orbits.syzygy import (
    FINITE, LOWER, SyzygySequence, TilingWord, code, parse_sequence, region_of, tiling_word,
)

logger = logging.getLogger(__name__)

WINDING_PIECE = 20.0
SHOT_STEP = 0.05
COARSE_STRIDE = 8


@dataclass(frozen=True)
class ShotParameters:
    depth: float
    angle: float
    window: float
    window_history: Tuple[float, ...] = ()


@dataclass
class CollisionOrbit:
    """A straight (S) or winding (W) collision orbit with its shooting record."""
    path: ReducedPath
    start_end: str
    finish_end: str
    realized: SyzygySequence
    shot: ShotParameters
    kind: str = 'S'
    target: Optional[SyzygySequence] = None
    epsilon: Optional[float] = None
    mirror_of: Optional[str] = None
    verification: Dict[str, object] = field(default_factory=dict)

    @property
    def tiling(self) -> TilingWord:
        core = ~self.path.in_cusp
        first = self.path.points[np.argmax(core)] if np.any(core) else self.path.points[0]
        start = region_of(first) if first[2] != 0 else LOWER
        return tiling_word(SyzygySequence(self.realized.symbols), start)


@dataclass(frozen=True)
class ScanRow:
    phi: float
    code: str
    tail: str
    end: Optional[str]
    drift: int
    next_arc: Optional[int]


@dataclass(frozen=True)
class _Shot:
    phi: float
    symbols: Tuple[int, ...]
    final_end: str
    drift_arc: Optional[int]
    drift: int

    def next_arc(self, prefix: int) -> Optional[int]:
        """Arc crossed after the first `prefix` symbols, or the one the tail drifts towards."""
        return self.symbols[prefix] if len(self.symbols) > prefix else self.drift_arc


def _flow_options(config: RunConfig) -> Dict[str, object]:
    return {
        'sample_step': config.sample_step,
        'chart_guard': config.chart_guard,
        'chart_exit': config.chart_exit,
        'stop_depth': config.horizon_depth + 0.1,
    }


def _heading_arc(path: ReducedPath) -> Tuple[Optional[int], int]:
    """Arc the final cusp run is drifting towards, and the drift sign."""
    end = path.ends[-1]
    if not end:
        return None, 0
    y, ydot = path.cusp[-1, 1], path.cusp[-1, 3]
    if ydot == 0:
        return None, 0
    k = int(np.floor(y / np.pi)) + 1 if ydot > 0 else int(np.ceil(y / np.pi)) - 1
    return cusp_arcs(str(end))[k % 2], 1 if ydot > 0 else -1


def shoot(end: str, phi: float, config: RunConfig, depth: Optional[float] = None) -> ReducedPath:
    """Geodesic launched out of an end along the normal of the depth cross-section."""
    depth = config.d0 if depth is None else depth
    start = launch_state(end, depth, phi, config.chart_guard)
    return geodesic_flow(start, config.horizon, config.tol, **_flow_options(config))


def _shot(end: str, phi: float, config: RunConfig, depth: Optional[float]) -> _Shot:
    depth = config.d0 if depth is None else depth
    options = _flow_options(config)
    options['sample_step'] = max(config.sample_step, SHOT_STEP)
    # the heading arc down the finish leg is the next arc crossed, so the leg need not be followed far
    options['stop_depth'] = config.tail_depth + 1.0
    path = geodesic_flow(launch_state(end, depth, phi, config.chart_guard), config.horizon, config.tol, **options)
    drift_arc, drift = _heading_arc(path)
    return _Shot(float(phi), tuple(c.arc for c in crossings(path)), str(path.ends[-1]), drift_arc, drift)


def _scan_row(args) -> ScanRow:
    end, phi, config = args
    path = shoot(end, phi, config)
    try:
        tail = classify_tail(path, config.horizon_depth, config.tail_depth)
        text = code(path, config.horizon_depth, config.tail_depth).to_text()
    except PantsError as e:
        return ScanRow(float(phi), f"!{type(e).__name__}", 'CORE', None, 0, None)
    arc, drift = _heading_arc(path)
    return ScanRow(float(phi), text, tail.kind, tail.end, drift, arc)


def _shot_job(args) -> _Shot:
    return _shot(*args)


class OrbitFinderService:
    """Shooting construction of straight and winding collision orbits"""

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig.from_settings()
        self._shots: Dict[Tuple[str, float, float], _Shot] = {}
        self.reused = 0

    def _map(self, func, jobs: Sequence, label: str, progress: bool = False) -> List:
        bar = tqdm(total=len(jobs), desc=label, disable=not progress, leave=False)
        results = []
        if self.config.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=self.config.workers) as pool:
                for result in pool.map(func, jobs, chunksize=max(1, len(jobs) // (4 * self.config.workers))):
                    results.append(result)
                    bar.update()
        else:
            for job in jobs:
                results.append(func(job))
                bar.update()
        bar.close()
        return results

    def scan(self, start_end: str, d0: Optional[float] = None, n: Optional[int] = None,
             horizon: Optional[float] = None, progress: bool = False) -> List[ScanRow]:
        """
        Launch n geodesics from the depth-d0 cross-section of an end

        Args:
            start_end: End label (B12, B13 or B23)
            d0, n, horizon: Overrides of the configured launch depth, grid size and horizon
            progress: Show a progress bar

        Returns:
            One ScanRow per equispaced launch angle, in angle order
        """
        if start_end not in COLLISION_POINTS:
            raise InvalidSequenceError(f"unknown end {start_end!r}")
        config = self.config.with_overrides({'d0': d0, 'grid': n, 'horizon': horizon})
        phis = 2.0 * np.pi * np.arange(config.grid) / config.grid
        logger.info(f"Scanning {config.grid} launches from {start_end} at depth {config.d0}")
        return self._map(_scan_row, [(start_end, phi, config) for phi in phis], 'scan', progress)

    @staticmethod
    def ends_for(target: SyzygySequence) -> Tuple[str, str]:
        """Start end (not adjacent to the first arc) and finish end (not adjacent to the last)."""
        return opposite_end(target.symbols[0]), opposite_end(target.symbols[-1])

    def _validate(self, target) -> SyzygySequence:
        if isinstance(target, str):
            target = parse_sequence(target)
        if target.kind != FINITE or not len(target):
            raise InvalidSequenceError(f"target must be a non-empty finite sequence, got {target.to_text()!r}")
        if not target.stutter_free:
            raise InvalidSequenceError(f"target {target.to_text()} has a stutter")
        return target

    def _launches(self, start: str, depth: float, phis: Sequence[float], label: str,
                  progress: bool = False) -> List[_Shot]:
        """Shots for the given launch angles, reusing earlier launches from the same end and depth."""
        todo = [float(phi) for phi in phis if (start, depth, float(phi)) not in self._shots]
        for shot in self._map(_shot_job, [(start, phi, self.config, depth) for phi in todo], label, progress):
            self._shots[(start, depth, shot.phi)] = shot
        self.reused += len(phis) - len(todo)
        return [self._shots[(start, depth, float(phi))] for phi in phis]

    def _bisect(self, target: SyzygySequence, half: int, depth: float,
                progress: bool = False) -> Tuple[float, Tuple[float, ...]]:
        """
        Launch angle of the straight orbit in one half of the launch circle

        half 0 searches (0, pi) and half 1 searches (pi, 2 pi) at the resolution of
        a grid of `grid` launches. Every COARSE_STRIDE-th launch is shot first and
        cells whose ends differ in code or heading are halved down to single grid
        cells; the whole grid is shot only when that finds no bracket. A bracket is
        a pair of neighbouring launches that realize the target and then head for
        different arcs of the finish end, and it is bisected on the heading arc.
        """
        config = self.config
        start, finish = self.ends_for(target)
        k = len(target)
        want = set(end_arcs(finish))
        rows = max(config.grid // 2, 4)
        step = np.pi / rows
        label = f"grid {target.to_text()}"

        def phi_of(i: int) -> float:
            return float(half * np.pi + step * (i + 0.5))

        def signature(s: _Shot):
            return s.symbols[:k], s.next_arc(k), s.final_end

        def good(s: _Shot) -> bool:
            return s.symbols[:k] == target.symbols and s.next_arc(k) in want

        index = sorted(set(range(0, rows, COARSE_STRIDE)) | {rows - 1})
        shots = dict(zip(index, self._launches(start, depth, [phi_of(i) for i in index], label, progress)))
        while True:
            split = [(a + b) // 2 for a, b in zip(index, index[1:])
                     if b - a > 1 and signature(shots[a]) != signature(shots[b])]
            if not split:
                break
            shots.update(zip(split, self._launches(start, depth, [phi_of(i) for i in split], label)))
            index = sorted(shots)

        def brackets():
            return [(shots[a], shots[b]) for a, b in zip(index, index[1:])
                    if b - a == 1 and good(shots[a]) and good(shots[b])
                    and shots[a].next_arc(k) != shots[b].next_arc(k)]

        found = brackets()
        if not found and len(index) < rows:
            logger.info(f"No bracket for {target.to_text()} on the coarse grid; shooting all {rows} launches")
            index = list(range(rows))
            shots = dict(zip(index, self._launches(start, depth, [phi_of(i) for i in index], label, progress)))
            found = brackets()
        if not found:
            raise ResolutionExceededError(
                f"no bracket for {target.to_text()} from {start} on a grid of {config.grid} "
                f"(half {half}); increase --grid"
            )
        if len(found) > 1:
            logger.warning(f"{len(found)} brackets for {target.to_text()} in half {half}; using the first")
        lo, hi = found[0]
        history = [hi.phi - lo.phi]
        for _ in range(config.bisection_steps):
            if hi.phi - lo.phi <= config.bisection_tol:
                break
            mid = _shot(start, 0.5 * (lo.phi + hi.phi), config, depth)
            if mid.next_arc(k) is None and mid.symbols == target.symbols:
                history.append(0.0)
                break
            if mid.symbols[:k] != target.symbols or mid.next_arc(k) not in want:
                raise ResolutionExceededError(
                    f"bisection for {target.to_text()} left the target family at phi={mid.phi:.12f}"
                )
            if mid.next_arc(k) == lo.next_arc(k):
                lo = mid
            else:
                hi = mid
            history.append(hi.phi - lo.phi)
        if history[-1] > config.bisection_tol:
            logger.warning(f"Bisection budget exhausted with window {history[-1]:.2e}")
        if history[-1] == 0.0:
            return mid.phi, tuple(history)
        return 0.5 * (lo.phi + hi.phi), tuple(history)

    def _straight_orbit(self, target: SyzygySequence, phi: float, depth: float,
                        history: Tuple[float, ...]) -> CollisionOrbit:
        config = self.config
        start, finish = self.ends_for(target)
        launch = launch_state(start, depth, phi, config.chart_guard)
        forward = geodesic_flow(launch, config.horizon, config.tol, **_flow_options(config))
        backward = geodesic_flow(launch.reversed(), config.horizon, config.tol, **_flow_options(config))
        path = concat_paths(reversed_path(backward), forward)

        realized = code(path, config.horizon_depth, config.tail_depth)
        tails = (classify_tail(reversed_path(path), config.horizon_depth, config.tail_depth),
                 classify_tail(path, config.horizon_depth, config.tail_depth))
        if realized.symbols != target.symbols or realized.kind != FINITE:
            raise ResolutionExceededError(
                f"orbit at phi={phi:.12f} codes {realized.to_text()} instead of {target.to_text()}"
            )
        if (tails[0].kind, tails[0].end, tails[1].kind, tails[1].end) != ('STRAIGHT', start, 'STRAIGHT', finish):
            raise ResolutionExceededError(
                f"orbit at phi={phi:.12f} has tails {tails[0].kind}({tails[0].end}), "
                f"{tails[1].kind}({tails[1].end})"
            )
        shot = ShotParameters(depth, float(phi), history[-1], history)
        return CollisionOrbit(path, start, finish, realized, shot, 'S', target)

    def find_straight(self, target, d0: Optional[float] = None,
                      progress: bool = False) -> Tuple[CollisionOrbit, CollisionOrbit]:
        """
        The two straight collision orbits realizing a finite stutter-free sequence

        Args:
            target: Sequence or its text form
            d0: Launch depth override

        Returns:
            (orbit launched in the upper half, orbit launched in the lower half);
            the second is found independently and compared with the mirror of
            the first (verification['mirror_distance']).
        """
        target = self._validate(target)
        depth = self.config.d0 if d0 is None else d0
        logger.info(f"Finding straight orbits for {target.to_text()} from {self.ends_for(target)[0]}")
        orbits = []
        for half in (0, 1):
            phi, history = self._bisect(target, half, depth, progress)
            orbits.append(self._straight_orbit(target, phi, depth, history))
            logger.info(f"{target.to_text()}: half {half} converged at phi={phi:.12f} "
                        f"(window {history[-1]:.1e}, {len(history) - 1} steps)")
        primary, partner = orbits
        gap = aligned_distance(partner.path, primary.path.mirrored())
        spread = aligned_distance(partner.path, primary.path)
        primary.verification['mirror_distance'] = gap
        partner.verification['mirror_distance'] = gap
        primary.verification['pair_distance'] = spread
        partner.verification['pair_distance'] = spread
        if gap > 1e-6:
            logger.warning(f"{target.to_text()}: partner differs from the mirror by {gap:.2e}")
        return primary, partner

    def find_many(self, targets: Sequence, progress: bool = False) -> List[Tuple[CollisionOrbit, CollisionOrbit]]:
        """
        Straight orbit pairs for several targets

        Targets are validated up front, so a bad one fails before any shooting, and
        targets starting from the same end share their grid launches.
        """
        targets = [self._validate(t) for t in targets]
        pairs = [self.find_straight(target, progress=progress) for target in targets]
        logger.info(f"{len(targets)} targets used {len(self._shots)} grid launches "
                    f"({self.reused} reused)")
        return pairs

    def mirror(self, orbit: CollisionOrbit) -> CollisionOrbit:
        """Reflection of an orbit through the collinear plane."""
        shot = replace(orbit.shot, angle=float(np.mod(2.0 * np.pi - orbit.shot.angle, 2.0 * np.pi)))
        return replace(orbit, path=orbit.path.mirrored(), shot=shot, verification={})

    def find_winding(self, straight: CollisionOrbit, eps: Optional[float] = None,
                     count: int = 1) -> List[CollisionOrbit]:
        """
        Winding orbits near a straight one

        The tangent at the mid-arclength sample is turned by +-eps * j / count,
        j = 1..count, and the geodesic is followed both ways until each tail has
        two crossings down its leg or the winding horizon is spent.

        Raises:
            EpsilonTooLargeError: a perturbed orbit changed its core code or its ends
            ResolutionExceededError: a tail did not wind within the winding horizon
        """
        config = self.config
        eps = config.eps if eps is None else eps
        if eps < 0 or eps > config.eps_max:
            raise EpsilonTooLargeError(f"eps must lie in [0, {config.eps_max}], got {eps}")
        if eps == 0:
            return [straight]
        if count < 1:
            raise ValueError("count must be at least 1")
        path = straight.path
        mid = int(np.searchsorted(path.sigma, path.sigma[0] + 0.5 * path.length))
        mid = min(mid, len(path) - 1)
        base = path.state_at(mid)

        orbits = []
        for j in range(1, count + 1):
            for sign in (1.0, -1.0):
                angle = sign * eps * j / count
                state = rotate_tangent(base, angle)
                forward = self._wind(state)
                backward = self._wind(state.reversed())
                full = concat_paths(reversed_path(backward), forward)
                realized = code(full, config.horizon_depth, config.tail_depth)
                start_tail = classify_tail(reversed_path(full), config.horizon_depth, config.tail_depth)
                finish_tail = classify_tail(full, config.horizon_depth, config.tail_depth)
                if realized.symbols != straight.realized.symbols or \
                        (start_tail.end, finish_tail.end) != (straight.start_end, straight.finish_end):
                    raise EpsilonTooLargeError(
                        f"perturbation {angle:+.3e} gives {realized.to_text()} between "
                        f"{start_tail.end} and {finish_tail.end}; reduce eps"
                    )
                if start_tail.kind != 'WINDING' or finish_tail.kind != 'WINDING':
                    raise ResolutionExceededError(
                        f"perturbation {angle:+.3e} did not wind within {config.winding_horizon} "
                        f"({start_tail.kind}, {finish_tail.kind}); increase eps or the winding horizon"
                    )
                orbits.append(CollisionOrbit(
                    full, straight.start_end, straight.finish_end, realized, straight.shot, 'W',
                    straight.target, epsilon=angle, verification={'base_sigma': backward.length},
                ))
                logger.info(f"Winding orbit at {angle:+.3e}: {realized.to_text()}")
        for orbit in orbits:
            mine = orbit.verification['base_sigma']
            gaps = [aligned_distance(orbit.path, o.path, shift=o.verification['base_sigma'] - mine)
                    for o in orbits if o is not orbit]
            orbit.verification['member_distance'] = min(gaps, default=float('inf'))
        return orbits

    def _wind(self, state) -> ReducedPath:
        """
        Follow a geodesic until its tail shows two crossings down a leg

        The flow is integrated down to FLAT_DEPTH, where the leg is a flat cylinder
        to rounding, and continued in closed form from there. The winding horizon
        bounds the integrated part only.
        """
        config = self.config
        options = _flow_options(config)
        options['stop_depth'] = FLAT_DEPTH
        path = geodesic_flow(state, min(WINDING_PIECE, config.winding_horizon), config.tol, **options)
        stopped = path.meta['stopped_at_depth']
        while True:
            found = tail_crossings(path, tail_depth=config.tail_depth)
            if len(found) >= 2:
                return path
            if stopped:
                if abs(path.cusp[-1, 3]) < 1e-12:
                    return path
                return descend_leg(path, 2 - len(found))
            budget = config.winding_horizon - path.length
            if budget <= 1e-9:
                return path
            piece = geodesic_flow(path.final, min(WINDING_PIECE, budget), config.tol, **options)
            stopped = piece.meta['stopped_at_depth']
            path = concat_paths(path, piece)

    def launch_convergence(self, target, depths: Tuple[float, float] = (4.0, 6.0)) -> float:
        """Largest core-sample distance between the orbits found from two launch depths."""
        target = self._validate(target)
        found = []
        for depth in depths:
            phi, history = self._bisect(target, 0, depth)
            found.append(self._straight_orbit(target, phi, depth, history))
        distance = aligned_distance(found[0].path, found[1].path)
        logger.info(f"Launch depth {depths[0]} -> {depths[1]} moves {target.to_text()} by {distance:.2e}")
        return distance


_finder: Optional[OrbitFinderService] = None


def get_orbit_finder(config: Optional[RunConfig] = None) -> OrbitFinderService:
    """Shared finder for the configured defaults; a fresh one when a config is given."""
    global _finder
    if config is not None:
        return OrbitFinderService(config)
    if _finder is None:
        _finder = OrbitFinderService()
    return _finder
