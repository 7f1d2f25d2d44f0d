import numpy as np
from django.test import SimpleTestCase

from orbits.services import CollisionOrbit, OrbitFinderService, ShotParameters, shoot
from pants_orbits.config import RunConfig
from pants_orbits.exceptions import EpsilonTooLargeError, InvalidSequenceError
from pants_orbits.geodesics import classify_tail, crossings, geodesic_flow, launch_state, reversed_path
from pants_orbits.lifting import lift_orbit
from pants_orbits.syzygy import parse_sequence


def small_config(**overrides) -> RunConfig:
    values = {'grid': 64, 'bisection_tol': 1e-6, 'horizon': 30.0, 'workers': 1}
    values.update(overrides)
    return RunConfig.from_settings().with_overrides(values)


def sample_orbit() -> CollisionOrbit:
    path = geodesic_flow(launch_state('B23', 5.0, 1.2), 3.0, 1e-10)
    return CollisionOrbit(path, 'B23', 'B23', parse_sequence(''), ShotParameters(5.0, 1.2, 1e-7, (0.1, 1e-7)))


class TargetTests(SimpleTestCase):

    def test_ends_for(self):
        self.assertEqual(OrbitFinderService.ends_for(parse_sequence('31')), ('B12', 'B23'))
        self.assertEqual(OrbitFinderService.ends_for(parse_sequence('1')), ('B23', 'B23'))
        self.assertEqual(OrbitFinderService.ends_for(parse_sequence('232')), ('B13', 'B13'))

    def test_targets_must_be_finite_and_stutter_free(self):
        finder = OrbitFinderService(small_config())
        for text in ('11', '', '…1|2|3…', '1|2…'):
            with self.subTest(text=text), self.assertRaises(InvalidSequenceError):
                finder.find_straight(text)

    def test_unknown_end(self):
        with self.assertRaises(InvalidSequenceError):
            OrbitFinderService(small_config()).scan('B11')


class MirrorTests(SimpleTestCase):

    def test_mirror_is_an_involution(self):
        finder = OrbitFinderService(small_config())
        orbit = sample_orbit()
        once = finder.mirror(orbit)
        self.assertAlmostEqual(once.shot.angle, 2.0 * np.pi - 1.2, places=12)
        np.testing.assert_allclose(once.path.points[:, 2], -orbit.path.points[:, 2])
        twice = finder.mirror(once)
        self.assertAlmostEqual(twice.shot.angle, orbit.shot.angle, places=12)
        np.testing.assert_allclose(twice.path.points, orbit.path.points)

    def test_zero_eps_is_the_straight_orbit(self):
        orbit = sample_orbit()
        self.assertEqual(OrbitFinderService(small_config()).find_winding(orbit, 0.0), [orbit])

    def test_eps_above_the_cap(self):
        finder = OrbitFinderService(small_config())
        with self.assertRaises(EpsilonTooLargeError):
            finder.find_winding(sample_orbit(), finder.config.eps_max * 2)


class ScanTests(SimpleTestCase):

    def test_launch_leaves_the_cusp(self):
        path = shoot('B13', 0.4, small_config(horizon=2.0))
        self.assertTrue(path.in_cusp[0])
        self.assertLess(path.depth[-1], path.depth[0])

    def test_scan_is_mirror_symmetric(self):
        n = 8
        rows = OrbitFinderService(small_config(horizon=20.0)).scan('B23', n=n)
        self.assertEqual(len(rows), n)
        for j in range(1, n // 2):
            with self.subTest(j=j):
                self.assertEqual(rows[j].code, rows[n - j].code)
                self.assertEqual(rows[j].tail, rows[n - j].tail)
                self.assertEqual(rows[j].drift, -rows[n - j].drift)


class StraightOrbitTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.finder = OrbitFinderService(small_config())
        cls.primary, cls.partner = cls.finder.find_straight('1')

    def test_launch_angles(self):
        # the symmetric orbit runs along the meridian through the north pole
        self.assertAlmostEqual(self.primary.shot.angle, np.pi / 2, delta=1e-5)
        self.assertAlmostEqual(self.partner.shot.angle, 3 * np.pi / 2, delta=1e-5)
        self.assertLessEqual(self.primary.shot.window, 1e-6)

    def test_codes_and_tails(self):
        for orbit in (self.primary, self.partner):
            self.assertEqual(orbit.realized.to_text(), '1')
            self.assertEqual((orbit.start_end, orbit.finish_end), ('B23', 'B23'))
            start = classify_tail(reversed_path(orbit.path))
            finish = classify_tail(orbit.path)
            self.assertEqual((start.kind, finish.kind), ('STRAIGHT', 'STRAIGHT'))

    def test_partner_is_the_mirror_image(self):
        self.assertLess(self.primary.verification['mirror_distance'], 1e-4)
        self.assertGreater(self.primary.verification['pair_distance'], 1e-3)
        # one crosses arc 1 coming from the north, the other from the south
        self.assertEqual(len(self.primary.tiling), 1)
        self.assertEqual(self.primary.tiling.letters, tuple(-a for a in self.partner.tiling.letters))

    def test_grid_launches_are_reused(self):
        before = self.finder.reused
        phi, history = self.finder._bisect(parse_sequence('1'), 0, self.finder.config.d0)
        self.assertGreater(self.finder.reused, before)
        self.assertAlmostEqual(phi, self.primary.shot.angle, delta=1e-6)
        self.assertLessEqual(history[-1], 1e-6)

    def test_winding_family(self):
        family = self.finder.find_winding(self.primary, 1e-3, count=3)
        self.assertEqual(len(family), 6)
        self.assertEqual(len({orbit.epsilon for orbit in family}), 6)
        for orbit in family:
            with self.subTest(eps=orbit.epsilon):
                self.assertEqual(orbit.kind, 'W')
                self.assertEqual(orbit.realized.symbols, (1,))
                for part in (orbit.realized.head, orbit.realized.tail):
                    self.assertGreaterEqual(len(part), 2)
                    self.assertLessEqual(set(part), {2, 3})
                    self.assertTrue(all(a != b for a, b in zip(part, part[1:])))
                start = classify_tail(reversed_path(orbit.path))
                finish = classify_tail(orbit.path)
                self.assertEqual((start.kind, start.end, finish.kind, finish.end),
                                 ('WINDING', 'B23', 'WINDING', 'B23'))
                self.assertGreater(orbit.verification['member_distance'], 1e-8)


class ThirtyOneTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.finder = OrbitFinderService(small_config(bisection_tol=1e-9))
        cls.pair = cls.finder.find_straight('31')

    def test_crossings_and_ends(self):
        for orbit in self.pair:
            with self.subTest(angle=orbit.shot.angle):
                self.assertEqual([c.arc for c in crossings(orbit.path)], [3, 1])
                self.assertEqual((orbit.start_end, orbit.finish_end), ('B12', 'B23'))
                self.assertEqual(orbit.realized.to_text(), '31')

    def test_partner_is_the_mirror_image(self):
        self.assertLess(self.pair[0].verification['mirror_distance'], 1e-4)
        self.assertGreater(self.pair[0].verification['pair_distance'], 1e-3)

    def test_lift_reaches_the_collision(self):
        lifted = lift_orbit(self.pair[0].path, self.finder.config.metric_guard)
        report = lifted.report
        self.assertIsNotNone(report)
        self.assertTrue(report.ok)
        self.assertTrue(report.pair_distance_decreasing)
        self.assertIsNotNone(report.t_collision)
        self.assertTrue(np.isfinite(report.t_collision))
        steps = np.abs(report.t_increments)
        self.assertGreater(len(steps), 1)
        self.assertTrue(np.all(np.diff(steps) < 0))

    def test_launch_depth_barely_moves_the_orbit(self):
        self.assertLessEqual(self.finder.launch_convergence('31', (4.0, 6.0)), 1e-4)
