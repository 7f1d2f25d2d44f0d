"""
Orbit library: one JSON document in the output directory holding every
collision orbit found so far. Records are only ever appended.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from django.utils import timezone

from pants_orbits.exceptions import LibraryError
from pants_orbits.exports import read_path_csv, write_path_csv
from pants_orbits.geodesics import ReducedPath

from .services import CollisionOrbit

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def orbit_id(sequence: str, kind: str, ordinal: int) -> str:
    """Identifier such as 31-S-0 (sequence, S or W, ordinal)."""
    return f"{sequence}-{kind}-{ordinal}"


class OrbitLibrary:
    """Append-only JSON store of orbit records"""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.base_dir = self.path.parent

    def _load(self) -> Dict[str, Any]:
        if not self.path.exists():
            return {'format_version': FORMAT_VERSION, 'orbits': {}}
        try:
            with open(self.path, 'r') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise LibraryError(f"Orbit library {self.path} is not valid JSON: {e}")
        if not isinstance(data, dict) or data.get('format_version') != FORMAT_VERSION:
            raise LibraryError(
                f"Orbit library {self.path} has format version {data.get('format_version') if isinstance(data, dict) else None}, "
                f"expected {FORMAT_VERSION}"
            )
        data.setdefault('orbits', {})
        return data

    def _write(self, data: Dict[str, Any]) -> None:
        self.base_dir.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix('.tmp')
        with open(tmp, 'w') as f:
            json.dump(data, f, indent=2, sort_keys=True)
        os.replace(tmp, self.path)

    def records(self) -> Dict[str, Dict[str, Any]]:
        return self._load()['orbits']

    def ids(self) -> List[str]:
        return sorted(self.records())

    def get(self, ident: str) -> Dict[str, Any]:
        records = self.records()
        if ident not in records:
            raise LibraryError(f"No orbit {ident!r} in {self.path}")
        return records[ident]

    def next_ordinal(self, sequence: str, kind: str) -> int:
        prefix = f"{sequence}-{kind}-"
        used = [int(key[len(prefix):]) for key in self.records()
                if key.startswith(prefix) and key[len(prefix):].isdigit()]
        return max(used) + 1 if used else 0

    def add(self, ident: str, record: Dict[str, Any]) -> bool:
        """Store a record under a new id; an existing id is left untouched."""
        data = self._load()
        if ident in data['orbits']:
            logger.warning(f"Orbit {ident} already in the library, record skipped")
            return False
        entry = dict(record)
        entry.setdefault('timestamp', timezone.now().isoformat())
        data['orbits'][ident] = entry
        self._write(data)
        logger.info(f"Orbit {ident} added to {self.path}")
        return True

    def load_path(self, ident: str, chart_guard: Optional[float] = None) -> ReducedPath:
        record = self.get(ident)
        path_file = self.base_dir / record['path_file']
        if chart_guard is None:
            return read_path_csv(path_file)
        return read_path_csv(path_file, chart_guard)

    def store(self, orbit: CollisionOrbit, ordinal: Optional[int] = None,
              mirror_of: Optional[str] = None) -> str:
        """
        Write the orbit's path CSV and append its record

        Args:
            orbit: Orbit to store
            ordinal: Ordinal of the id; the next free one when omitted
            mirror_of: Id of the partner orbit, if any

        Returns:
            The orbit id
        """
        sequence = (orbit.target or orbit.realized).to_text()
        if ordinal is None:
            ordinal = self.next_ordinal(sequence, orbit.kind)
        ident = orbit_id(sequence, orbit.kind, ordinal)
        if ident in self.records():
            logger.warning(f"Orbit {ident} already in the library, record skipped")
            return ident
        path_file = Path('paths') / f"{ident}.csv"
        write_path_csv(orbit.path, self.base_dir / path_file)
        orbit.mirror_of = mirror_of
        self.add(ident, self.record(orbit, ordinal, path_file))
        return ident

    @staticmethod
    def record(orbit: CollisionOrbit, ordinal: int, path_file: Path) -> Dict[str, Any]:
        tiling = orbit.tiling
        return {
            'sequence': (orbit.target or orbit.realized).to_text(),
            'kind': orbit.kind,
            'ordinal': ordinal,
            'start_end': orbit.start_end,
            'finish_end': orbit.finish_end,
            'realized': orbit.realized.to_text(),
            'tiling_word': list(tiling.letters),
            'start_region': tiling.start_region,
            'shot': {
                'depth': orbit.shot.depth,
                'angle': orbit.shot.angle,
                'window': orbit.shot.window,
                'window_history': list(orbit.shot.window_history),
            },
            'epsilon': orbit.epsilon,
            'mirror_of': orbit.mirror_of,
            'path_file': str(path_file),
            'verification': {key: float(value) for key, value in orbit.verification.items()},
        }
