import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from pants_orbits.exceptions import NotInCuspError
from pants_orbits.geodesics import (
    FLAT_DEPTH, CuspChart, _core_rhs, aligned_distance, classify_tail, concat_paths, crossings, cusp_chart,
    cusp_point, cusp_state, descend_leg, from_cusp, geodesic_flow, lambda_along, launch_state,
    path_from_points, reversed_path, to_cusp, unit_state,
)
from pants_orbits.shape import COLLISION_POINTS, lam_value

NORTH = np.array([0.0, 0.0, 1.0])


def meridian_into(end: str, length: float = 40.0, stop_depth: float = 8.1):
    """Symmetry meridian from the north pole straight down the leg of an end."""
    return geodesic_flow(unit_state(NORTH, COLLISION_POINTS[end]), length, 1e-10, stop_depth=stop_depth)


class CuspChartTests(SimpleTestCase):

    def test_chart_round_trip(self):
        chart = CuspChart('B13', depth=3.0, phi=1.1)
        back = cusp_chart(cusp_point(chart))
        self.assertEqual(back.end, 'B13')
        self.assertAlmostEqual(back.depth, 3.0, places=9)
        self.assertAlmostEqual(back.phi, 1.1, places=9)

    def test_cross_sections_have_bounded_circumference(self):
        # the legs are asymptotically cylinders of circumference pi * sqrt(2)
        phis = np.linspace(0.0, 2.0 * np.pi, 721)
        for depth in (0.0, 1.0, 2.5, 4.0):
            ring = np.array([cusp_point(CuspChart('B12', depth, phi)).u for phi in phis])
            mids = ring[1:] + ring[:-1]
            mids /= np.linalg.norm(mids, axis=1)[:, None]
            weights = np.sqrt([lam_value(m) / 4.0 for m in mids])
            length = float(np.sum(weights * np.linalg.norm(np.diff(ring, axis=0), axis=1)))
            self.assertAlmostEqual(length, np.pi * np.sqrt(2.0), delta=1e-2)

    def test_outside_the_cusp(self):
        with self.assertRaises(NotInCuspError):
            cusp_chart(NORTH)

    def test_launch_state_has_unit_speed_and_points_out(self):
        state = launch_state('B23', 5.0, 0.4)
        self.assertAlmostEqual(state.speed(), 1.0, places=12)
        self.assertGreater(state.cusp.xdot, 0.0)
        self.assertEqual(state.cusp.ydot, 0.0)

    def test_velocity_transfer_between_charts(self):
        state = launch_state('B12', 1.0, 2.0)
        c = to_cusp(state.u, state.tangent, 'B12')
        self.assertAlmostEqual(c.xdot, state.cusp.xdot, places=9)
        self.assertAlmostEqual(c.ydot, state.cusp.ydot, places=9)
        u, v = from_cusp(c)
        assert_allclose(u, state.u, atol=1e-12)
        assert_allclose(v, state.tangent, atol=1e-9)

    def test_lambda_in_chart_form_matches_closed_form(self):
        path = geodesic_flow(launch_state('B13', 0.5, 0.9), 0.3, 1e-10)
        lam = lambda_along(path)
        for i in range(len(path)):
            self.assertAlmostEqual(lam[i], lam_value(path.points[i]), delta=1e-7 * lam[i])


class FlowTests(SimpleTestCase):

    def test_unit_speed_is_kept(self):
        start = unit_state([0.3, 0.2, 0.9], [1.0, -0.5, 0.0])
        path = geodesic_flow(start, 6.0, 1e-10)
        for i in range(0, len(path), 25):
            self.assertAlmostEqual(path.state_at(i).speed(), 1.0, places=7)
        self.assertAlmostEqual(path.length, 6.0, places=9)

    def test_every_sample_is_a_valid_state(self):
        # samples between chunk ends come from the dense output, not the renormalized state
        path = geodesic_flow(unit_state([0.3, 0.2, 0.9], [1.0, -0.5, 0.0]), 40.0, 1e-9)
        self.assertLess(np.abs(np.linalg.norm(path.points, axis=1) - 1.0).max(), 1e-12)
        self.assertLess(np.abs(np.sum(path.points * path.tangents, axis=1)).max(), 1e-12)
        for i in range(len(path)):
            path.state_at(i)
        mid = path.state_at(int(np.searchsorted(path.sigma, path.length / 2.0)))
        self.assertAlmostEqual(mid.speed(), 1.0, places=7)

    def test_time_reversal(self):
        start = unit_state([0.1, -0.4, 0.8], [0.2, 1.0, 0.0])
        there = geodesic_flow(start, 3.0, 1e-11)
        back = geodesic_flow(there.final.reversed(), 3.0, 1e-11)
        assert_allclose(back.points[-1], start.u, atol=1e-7)

    def test_equator_is_a_geodesic(self):
        path = geodesic_flow(unit_state([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), 5.0, 1e-10)
        self.assertLess(np.abs(path.points[:, 2]).max(), 1e-6)
        self.assertEqual(classify_tail(path).kind, 'CORE')

    def test_meridian_is_a_geodesic_into_the_end(self):
        path = meridian_into('B23')
        normal = np.cross(NORTH, COLLISION_POINTS['B23'])
        self.assertLess(np.abs(path.points @ normal).max(), 1e-6)
        self.assertTrue(path.meta['stopped_at_depth'])
        self.assertGreaterEqual(path.depth[-1], 8.0)

    def test_mirrored_path_is_a_geodesic(self):
        start = unit_state([0.2, 0.5, 0.6], [1.0, 0.0, -0.2])
        path = geodesic_flow(start, 2.0, 1e-11)
        other = geodesic_flow(start.mirrored(), 2.0, 1e-11)
        assert_allclose(other.points, path.mirrored().points, atol=1e-8)
        assert_allclose(path.mirrored().mirrored().points, path.points, atol=1e-12)


class CrossingTests(SimpleTestCase):

    def test_single_transversal_crossing(self):
        # descend through arc 1 at longitude -120 degrees
        lon = np.radians(-120.0)
        lat = np.linspace(0.6, -0.6, 200)
        points = np.column_stack([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)])
        found = crossings(path_from_points(points))
        self.assertEqual([c.arc for c in found], [1])

    def test_tangency_is_not_a_crossing(self):
        s = np.linspace(-1.0, 1.0, 201)
        points = np.column_stack([np.cos(s), np.sin(s), 0.3 * s ** 2])
        self.assertEqual(crossings(path_from_points(points)), [])

    def test_loop_around_an_end_alternates(self):
        b = COLLISION_POINTS['B12']
        e1, e2 = np.cross(NORTH, b), NORTH
        psi = np.linspace(0.1, 0.1 + 4.0 * np.pi, 800)
        loop = np.cos(0.2) * b + np.sin(0.2) * (np.cos(psi)[:, None] * e1 + np.sin(psi)[:, None] * e2)
        arcs = [c.arc for c in crossings(path_from_points(loop))]
        self.assertEqual(len(arcs), 4)
        self.assertEqual(set(arcs), {1, 2})
        self.assertTrue(all(a != b for a, b in zip(arcs, arcs[1:])))

    def test_tilted_descent_winds(self):
        # the leg is asymptotically a flat cylinder, so a tilted descent spirals down it
        speed, tilt = launch_state('B23', 2.0, 0.3).cusp.xdot, np.radians(30.0)
        start = cusp_state('B23', 2.0, 0.3, -speed * np.cos(tilt), speed * np.sin(tilt))
        path = geodesic_flow(start, 30.0, 1e-10)
        arcs = [c.arc for c in crossings(path)]
        self.assertTrue(set(arcs) <= {2, 3})
        tail = classify_tail(path)
        self.assertEqual((tail.kind, tail.end), ('WINDING', 'B23'))
        self.assertIn(tail.first_symbol, (2, 3))
        self.assertGreaterEqual(tail.crossings, 2)

    def test_straight_descent_classifies_straight(self):
        tail = classify_tail(meridian_into('B12'))
        self.assertEqual((tail.kind, tail.end), ('STRAIGHT', 'B12'))


class PathUtilityTests(SimpleTestCase):

    def test_reverse_and_concat(self):
        path = geodesic_flow(unit_state([0.3, 0.1, 0.9], [0.0, 1.0, 0.0]), 1.0, 1e-10)
        back = reversed_path(path)
        assert_allclose(back.points[0], path.points[-1])
        assert_allclose(back.tangents[0], -path.tangents[-1])
        joined = concat_paths(path, geodesic_flow(path.final, 1.0, 1e-10))
        self.assertAlmostEqual(joined.length, 2.0, places=9)
        self.assertTrue(np.all(np.diff(joined.sigma) > 0))

    def test_aligned_distance_of_identical_paths(self):
        lon = np.radians(-120.0)
        lat = np.linspace(0.6, -0.6, 100)
        points = np.column_stack([np.cos(lat) * np.cos(lon), np.cos(lat) * np.sin(lon), np.sin(lat)])
        path = path_from_points(points)
        self.assertAlmostEqual(aligned_distance(path, path), 0.0, places=12)


class GeodesicEquationTests(SimpleTestCase):

    def test_samples_satisfy_the_geodesic_equation(self):
        h = 0.01
        path = geodesic_flow(unit_state([0.3, 0.2, 0.9], [1.0, -0.5, 0.0]), 3.0, 1e-12, sample_step=h)
        p = path.points
        second = (-p[:-4] + 16.0 * p[1:-3] - 30.0 * p[2:-2] + 16.0 * p[3:-1] - p[4:]) / (12.0 * h * h)
        core = np.convolve(path.in_cusp, np.ones(5), mode='valid') == 0
        self.assertGreater(core.sum(), 100)
        for i in np.flatnonzero(core)[::7]:
            y = np.concatenate([path.points[i + 2], path.tangents[i + 2]])
            accel = _core_rhs(0.0, y)[3:]
            self.assertLess(np.linalg.norm(second[i] - accel), 1e-5 * np.linalg.norm(accel))

    def test_chart_layout_does_not_move_the_geodesic(self):
        # the same geodesic, switching charts at two different distances from B13
        start = launch_state('B13', 0.5, 0.9)
        wide = geodesic_flow(start, 2.0, 1e-12)
        narrow = geodesic_flow(start, 2.0, 1e-12, chart_guard=0.02, chart_exit=0.025)
        self.assertGreaterEqual(wide.meta['chart_switches'], 1)
        self.assertGreaterEqual(narrow.meta['chart_switches'], 1)
        assert_allclose(narrow.sigma, wide.sigma, atol=1e-12)
        assert_allclose(narrow.points, wide.points, atol=1e-9)
        assert_allclose(narrow.tangents, wide.tangents, atol=1e-8)

    def test_return_into_the_cusp(self):
        there = geodesic_flow(launch_state('B13', 0.5, 0.9), 2.0, 1e-12)
        back = geodesic_flow(there.final.reversed(), 2.0, 1e-12)
        self.assertTrue(back.in_cusp[-1])
        self.assertEqual(back.ends[-1], 'B13')
        assert_allclose(back.points[-1], there.points[0], atol=1e-9)


class DescendLegTests(SimpleTestCase):

    def tilted(self, depth: float, tilt: float, length: float = 0.05):
        speed = launch_state('B23', depth, np.pi / 2).cusp.xdot
        start = cusp_state('B23', depth, np.pi / 2, -speed * np.cos(tilt), speed * np.sin(tilt))
        return start, geodesic_flow(start, length, 1e-12)

    def test_closed_form_matches_the_flow(self):
        start, head = self.tilted(FLAT_DEPTH + 0.5, 0.3)
        flat = descend_leg(head, 2)
        self.assertEqual(flat.meta['flat_from'], head.sigma[-1])
        flowed = geodesic_flow(start, flat.length, 1e-12)
        assert_allclose(flowed.cusp[-1, :2], flat.cusp[-1, :2], atol=1e-7)
        self.assertEqual([c.arc for c in crossings(flat)], [c.arc for c in crossings(flowed)])

    def test_small_tilt_winds_twice(self):
        _, head = self.tilted(FLAT_DEPTH + 0.5, 1e-3)
        flat = descend_leg(head, 2)
        # half a turn to the first crossing, half a turn past the second
        self.assertAlmostEqual(flat.length, 2.0 * np.pi / (np.sqrt(2.0) * np.sin(1e-3)), delta=1.0)
        arcs = [c.arc for c in crossings(flat)]
        self.assertEqual(len(arcs), 2)
        self.assertEqual(set(arcs), {2, 3})
        tail = classify_tail(flat)
        self.assertEqual((tail.kind, tail.end, tail.crossings), ('WINDING', 'B23', 2))

    def test_needs_a_flat_leg(self):
        _, shallow = self.tilted(3.0, 0.3)
        with self.assertRaises(NotInCuspError):
            descend_leg(shallow, 2)
        _, rising = self.tilted(FLAT_DEPTH + 0.5, np.pi - 0.3)
        with self.assertRaises(ValueError):
            descend_leg(rising, 2)
