import csv
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from pants_orbits.dynamics import integrate
from pants_orbits.exceptions import FileFormatError
from pants_orbits.exports import (
    CURVATURE_HEADER, PATH_HEADER, load_initial_state, read_path_csv, read_report, read_trajectory_csv,
    write_curvature_csv, write_path_csv, write_report, write_trajectory_csv,
)
from pants_orbits.geodesics import crossings, geodesic_flow, launch_state
from pants_orbits.shape import curvature_grid

INITIAL_STATE = """
{"positions": [[1.0, 0.0], [-0.5, 0.8], [-0.5, -0.8]],
 "velocities": [[0.0, 0.3], [-0.2, -0.1], [0.2, -0.2]]}
"""


class ExportTestCase(SimpleTestCase):

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()


class TrajectoryCsvTests(ExportTestCase):

    def test_written_trajectory_reads_back_exactly(self):
        state = load_initial_state(self._initial())
        traj = integrate(state, 0.2)
        target = write_trajectory_csv(traj, self.tmp / 'runs' / 'traj.csv')
        back = read_trajectory_csv(target)
        np.testing.assert_array_equal(back.t, traj.t)
        np.testing.assert_array_equal(back.q, traj.q)
        with target.open() as handle:
            row = next(csv.DictReader(handle))
        self.assertAlmostEqual(float(row['I']), float(np.sum(np.abs(traj.q[0]) ** 2)), places=12)

    def test_missing_columns(self):
        target = self.tmp / 'bad.csv'
        target.write_text('t,x1\n0,1\n')
        with self.assertRaisesMessage(FileFormatError, 'missing columns'):
            read_trajectory_csv(target)

    def _initial(self) -> Path:
        source = self.tmp / 'state.json'
        source.write_text(INITIAL_STATE)
        return source


class PathCsvTests(ExportTestCase):

    def test_cusp_rows_survive(self):
        # outward from B13: starts in the cusp chart and crosses into the core
        path = geodesic_flow(launch_state('B13', 3.0, 0.7), 6.0, 1e-10)
        self.assertTrue(path.in_cusp[0])
        target = write_path_csv(path, self.tmp / 'path.csv')
        with target.open() as handle:
            rows = list(csv.DictReader(handle))
        self.assertEqual(list(rows[0].keys()), PATH_HEADER)
        self.assertEqual((rows[0]['chart'], rows[0]['end']), ('cusp', 'B13'))
        self.assertIn('core', {row['chart'] for row in rows})

        back = read_path_csv(target)
        self.assertEqual(list(back.ends), list(path.ends))
        assert_allclose(back.depth[back.in_cusp], path.depth[path.in_cusp], atol=1e-10)
        assert_allclose(back.cusp[back.in_cusp, 2:], path.cusp[path.in_cusp, 2:], rtol=1e-7, atol=1e-12)
        self.assertEqual([c.arc for c in crossings(back)], [c.arc for c in crossings(path)])

    def test_bad_chart_value(self):
        target = self.tmp / 'bad.csv'
        target.write_text(','.join(PATH_HEADER) + '\n0,0,0,1,1,0,0,side,,,\n')
        with self.assertRaises(FileFormatError):
            read_path_csv(target)


class CurvatureCsvTests(ExportTestCase):

    def test_row_count(self):
        count = write_curvature_csv(curvature_grid(6, 8), self.tmp / 'k.csv')
        self.assertEqual(count, 48)
        with (self.tmp / 'k.csv').open() as handle:
            self.assertEqual(next(csv.reader(handle)), CURVATURE_HEADER)


class InitialStateTests(ExportTestCase):

    def test_good_file(self):
        source = self.tmp / 'state.json'
        source.write_text(INITIAL_STATE)
        state = load_initial_state(source)
        self.assertEqual(state.config.q[1], -0.5 + 0.8j)
        self.assertEqual(state.v[2], 0.2 - 0.2j)

    def test_bad_files(self):
        cases = {
            'missing.json': None,
            'syntax.json': '{"positions": [[1, 0]',
            'list.json': '[[1, 0], [0, 1], [1, 1]]',
            'keys.json': '{"positions": [[1, 0], [0, 1], [1, 1]]}',
            'shape.json': '{"positions": [[1, 0], [0, 1]], "velocities": [[0, 0], [0, 0]]}',
            'coincident.json': '{"positions": [[1, 0], [1, 0], [0, 1]], "velocities": [[0, 0], [0, 0], [0, 0]]}',
        }
        for name, text in cases.items():
            source = self.tmp / name
            if text is not None:
                source.write_text(text)
            with self.subTest(name=name), self.assertRaises(FileFormatError):
                load_initial_state(source)


class ReportTests(ExportTestCase):

    def test_numpy_values_are_written_plainly(self):
        report = {'status': 'ok', 'eq1_relative': np.float64(2.5e-7), 'finish_pair': (2, 3), 'samples': np.int64(40)}
        target = write_report(report, self.tmp / 'lifts' / 'r.json')
        self.assertEqual(read_report(target), {'status': 'ok', 'eq1_relative': 2.5e-7, 'finish_pair': [2, 3],
                                               'samples': 40})

    def test_unreadable_report(self):
        with self.assertRaises(FileFormatError):
            read_report(self.tmp / 'none.json')
