"""
File formats: trajectory, reduced path and curvature CSV files, the JSON
initial-state file read by `simulate` and the JSON verification report.

CSV values are written with 17 significant digits so a file read back gives the
same doubles.
"""

from pathlib import Path
from typing import Dict, Iterable, Tuple, Union
import csv
import json
import logging

import numpy as np

from .dynamics import PlanarConfig, PlanarState, Trajectory, invariants
from .exceptions import DegenerateConfigurationError, FileFormatError
from .geodesics import CHART_GUARD, ReducedPath, to_cusp, x_from_depth

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRAJECTORY_HEADER = ['t', 'x1', 'y1', 'x2', 'y2', 'x3', 'y3',
                     'vx1', 'vy1', 'vx2', 'vy2', 'vx3', 'vy3', 'E', 'C', 'I']
PATH_HEADER = ['sigma', 'u1', 'u2', 'u3', 't1', 't2', 't3', 'chart', 'end', 'depth', 'phi']
CURVATURE_HEADER = ['theta', 'phi', 'lambda', 'K']


def _fmt(value: float) -> str:
    return '%.17g' % value


def _open_for_writing(target: PathLike):
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    return target.open('w', newline='')


def _read_rows(source: PathLike, header: list) -> list:
    source = Path(source)
    if not source.exists():
        raise FileFormatError(f"{source} does not exist")
    with source.open(newline='') as handle:
        reader = csv.DictReader(handle)
        missing = [name for name in header if name not in (reader.fieldnames or [])]
        if missing:
            raise FileFormatError(f"{source} is missing columns {missing}")
        return list(reader)


def write_trajectory_csv(traj: Trajectory, target: PathLike) -> Path:
    """Write t, positions, velocities and E, C, I per sample."""
    with _open_for_writing(target) as handle:
        writer = csv.writer(handle)
        writer.writerow(TRAJECTORY_HEADER)
        for i, state in enumerate(traj.states()):
            values = invariants(state)
            row = [traj.t[i]] + list(state.as_vector()) + [values['E'], values['C'], values['I']]
            writer.writerow([_fmt(x) for x in row])
    logger.info(f"Trajectory with {len(traj)} samples written to {target}")
    return Path(target)


def read_trajectory_csv(source: PathLike) -> Trajectory:
    rows = _read_rows(source, TRAJECTORY_HEADER)
    if not rows:
        raise FileFormatError(f"{source} has no samples")
    try:
        data = np.array([[float(row[name]) for name in TRAJECTORY_HEADER[:13]] for row in rows])
        traj = Trajectory(
            data[:, 0],
            data[:, 1:7:2] + 1j * data[:, 2:7:2],
            data[:, 7:13:2] + 1j * data[:, 8:13:2],
            meta={'source': str(source)},
        )
    except ValueError as e:
        raise FileFormatError(f"{source}: {e}") from e
    return traj


def write_path_csv(path: ReducedPath, target: PathLike) -> Path:
    """
    Write a reduced path

    chart is 'core' or 'cusp'; end, depth and phi are left empty for core samples.
    """
    depth, phi = path.depth, path.phi
    with _open_for_writing(target) as handle:
        writer = csv.writer(handle)
        writer.writerow(PATH_HEADER)
        for i in range(len(path)):
            row = [_fmt(path.sigma[i])] + [_fmt(x) for x in path.points[i]] + [_fmt(x) for x in path.tangents[i]]
            if path.ends[i]:
                row += ['cusp', str(path.ends[i]), _fmt(depth[i]), _fmt(phi[i])]
            else:
                row += ['core', '', '', '']
            writer.writerow(row)
    logger.info(f"Reduced path with {len(path)} samples written to {target}")
    return Path(target)


def read_path_csv(source: PathLike, chart_guard: float = CHART_GUARD) -> ReducedPath:
    """
    Read a reduced path written by write_path_csv

    Cusp coordinates are rebuilt from depth and phi (phi unwrapped along each
    run in one chart); chart velocities come from the tangent columns.
    """
    rows = _read_rows(source, PATH_HEADER)
    if not rows:
        raise FileFormatError(f"{source} has no samples")
    try:
        numbers = np.array([[float(row[name]) for name in PATH_HEADER[:7]] for row in rows])
        charts = [row['chart'] for row in rows]
        ends = np.array([row['end'] if chart == 'cusp' else '' for row, chart in zip(rows, charts)], dtype=object)
        if any(chart not in ('core', 'cusp') for chart in charts):
            raise ValueError("chart must be 'core' or 'cusp'")
        depth = np.array([float(row['depth']) if row['depth'] else np.nan for row in rows])
        phi = np.array([float(row['phi']) if row['phi'] else np.nan for row in rows])
    except ValueError as e:
        raise FileFormatError(f"{source}: {e}") from e

    points, tangents = numbers[:, 1:4], numbers[:, 4:7]
    cusp = np.full((len(rows), 4), np.nan)
    i = 0
    while i < len(rows):
        if not ends[i]:
            i += 1
            continue
        j = i
        while j + 1 < len(rows) and ends[j + 1] == ends[i]:
            j += 1
        run = slice(i, j + 1)
        cusp[run, 0] = x_from_depth(depth[run], chart_guard)
        cusp[run, 1] = np.unwrap(phi[run])
        for k in range(i, j + 1):
            c = to_cusp(points[k], tangents[k], str(ends[k]))
            cusp[k, 2:] = c.xdot, c.ydot
        i = j + 1
    return ReducedPath(numbers[:, 0], points, tangents, ends, cusp,
                       {'source': str(source), 'chart_guard': chart_guard})


def write_curvature_csv(rows: Iterable[Tuple[float, float, float, float]], target: PathLike) -> int:
    count = 0
    with _open_for_writing(target) as handle:
        writer = csv.writer(handle)
        writer.writerow(CURVATURE_HEADER)
        for row in rows:
            writer.writerow([_fmt(x) for x in row])
            count += 1
    logger.info(f"{count} curvature samples written to {target}")
    return count


def load_initial_state(source: PathLike) -> PlanarState:
    """
    Read an initial state from JSON

        {"positions": [[x1, y1], [x2, y2], [x3, y3]],
         "velocities": [[vx1, vy1], [vx2, vy2], [vx3, vy3]]}
    """
    source = Path(source)
    try:
        with source.open() as f:
            data = json.load(f)
    except FileNotFoundError as e:
        raise FileFormatError(f"{source} does not exist") from e
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{source} is not valid JSON: {e}") from e
    if not isinstance(data, dict) or 'positions' not in data or 'velocities' not in data:
        raise FileFormatError(f"{source} needs 'positions' and 'velocities'")
    try:
        xy = np.array(data['positions'], dtype=float)
        vxy = np.array(data['velocities'], dtype=float)
        if xy.shape != (3, 2) or vxy.shape != (3, 2):
            raise ValueError("positions and velocities must be three [x, y] pairs")
    except (TypeError, ValueError) as e:
        raise FileFormatError(f"{source}: {e}") from e
    try:
        config = PlanarConfig.from_xy(xy)
    except DegenerateConfigurationError as e:
        raise FileFormatError(f"{source}: {e}") from e
    return PlanarState(config, vxy[:, 0] + 1j * vxy[:, 1])


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value


def write_report(report: Dict[str, object], target: PathLike) -> Path:
    """Write a verification report (or any mapping of plain values) as JSON."""
    with _open_for_writing(target) as handle:
        json.dump(_plain(report), handle, indent=2)
    logger.info(f"Report written to {target}")
    return Path(target)


def read_report(source: PathLike) -> Dict[str, object]:
    try:
        with Path(source).open() as f:
            return json.load(f)
    except (FileNotFoundError, json.JSONDecodeError) as e:
        raise FileFormatError(f"cannot read report {source}: {e}") from e
