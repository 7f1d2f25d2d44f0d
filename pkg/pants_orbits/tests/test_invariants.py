import numpy as np
from django.test import SimpleTestCase

from pants_orbits import invariants
from pants_orbits.config import RunConfig
from pants_orbits.exceptions import ResolutionExceededError
from pants_orbits.geodesics import geodesic_flow, path_from_points, unit_state
from pants_orbits.shape import COLLISION_POINTS, nearest_end


def _broken(_ctx):
    raise ValueError("geodesic state point must lie on the unit sphere")


def _unresolved(_ctx):
    raise ResolutionExceededError("no bracket")


class RunChecksTests(SimpleTestCase):

    def setUp(self):
        self.config = RunConfig.from_settings()
        self.saved = list(invariants.QUICK_CHECKS)
        invariants.QUICK_CHECKS.extend([('broken', _broken), ('unresolved', _unresolved)])

    def tearDown(self):
        invariants.QUICK_CHECKS[:] = self.saved

    def test_raising_check_becomes_a_failed_row(self):
        with self.assertLogs('pants_orbits.invariants', level='WARNING') as logs:
            results = invariants.run_checks(self.config, only=['coder', 'broken', 'unresolved'])
        by_name = {r.name: r for r in results}
        self.assertEqual(list(by_name), ['coder', 'broken', 'unresolved'])
        self.assertTrue(by_name['coder'].passed)
        self.assertFalse(by_name['broken'].passed)
        self.assertIn('ValueError', by_name['broken'].detail)
        self.assertIn('ResolutionExceededError', by_name['unresolved'].detail)
        self.assertTrue(any('check broken: FAIL' in line for line in logs.output))

    def test_unknown_names(self):
        with self.assertRaisesMessage(ValueError, 'unknown checks'):
            invariants.run_checks(self.config, only=['nothing'])


class ClearanceTests(SimpleTestCase):

    def test_end_runs_are_ignored(self):
        path = geodesic_flow(unit_state([0.0, 0.0, 1.0], COLLISION_POINTS['B23']), 40.0, 1e-10, stop_depth=8.1)
        self.assertLess(nearest_end(path.points[-1])[1], 1e-3)
        self.assertGreater(invariants.interior_clearance(path), 0.04)

    def test_close_pass_in_the_middle(self):
        lon = np.radians(np.linspace(170.0, 190.0, 401))
        lat = 5e-4
        points = np.column_stack([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon),
                                  np.full_like(lon, np.sin(lat))])
        clearance = invariants.interior_clearance(path_from_points(points))
        self.assertAlmostEqual(clearance, 5e-4, delta=1e-6)
