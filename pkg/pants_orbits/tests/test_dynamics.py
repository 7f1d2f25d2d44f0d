import numpy as np
from django.conf import settings
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from pants_orbits.dynamics import (
    PlanarConfig, PlanarState, Trajectory, acceleration, center, equilateral, integrate, invariants,
    lagrange_jacobi_residual, potential,
)
from pants_orbits.exceptions import DegenerateConfigurationError
from pants_orbits.invariants import random_state


class PlanarConfigTests(SimpleTestCase):

    def test_coincident_bodies_are_rejected(self):
        with self.assertRaises(DegenerateConfigurationError):
            PlanarConfig([0.0, 0.0, 1.0])

    def test_center_moves_mass_center_to_origin(self):
        config = center(PlanarConfig([1 + 1j, 2.0, 3j]))
        self.assertTrue(config.centered)
        self.assertAlmostEqual(abs(config.q.sum()), 0.0, places=14)

    def test_state_vector_layout(self):
        state = PlanarState(PlanarConfig([1 + 2j, 3 + 4j, 5 + 6j]), [7 + 8j, 9 + 10j, 11 + 12j])
        assert_allclose(state.as_vector(), np.arange(1.0, 13.0))
        self.assertEqual(PlanarState.from_vector(state.as_vector()).v[2], 11 + 12j)


class ForceTests(SimpleTestCase):

    def test_potential_of_unit_equilateral(self):
        self.assertAlmostEqual(potential(equilateral(1.0)), 3.0, places=12)

    def test_guard(self):
        with self.assertRaises(DegenerateConfigurationError):
            potential(PlanarConfig([0.0, 1e-7, 1.0]))

    def test_acceleration_is_gradient_of_potential(self):
        rng = np.random.default_rng(settings.PANTS_SEED)
        config = random_state(rng).config
        h = 1e-6
        numeric = np.zeros(3, dtype=complex)
        for j in range(3):
            for step, part in ((h, 1.0), (1j * h, 1j)):
                q_plus, q_minus = config.q.copy(), config.q.copy()
                q_plus[j] += step
                q_minus[j] -= step
                diff = (potential(PlanarConfig(q_plus)) - potential(PlanarConfig(q_minus))) / (2 * h)
                numeric[j] += part * diff
        assert_allclose(acceleration(config), numeric, rtol=1e-6, atol=1e-6)

    def test_total_force_vanishes(self):
        config = PlanarConfig([0.3 + 0.1j, -0.7, 0.2 + 0.9j])
        self.assertAlmostEqual(abs(acceleration(config).sum()), 0.0, places=12)

    def test_collinear_potential_and_scaling(self):
        collinear = PlanarConfig([-1.0, 0.0, 1.0])
        self.assertAlmostEqual(potential(collinear), 2.25, places=12)
        self.assertAlmostEqual(potential(collinear.scaled(2.0)), 2.25 / 4, places=12)

    def test_equilateral_acceleration_points_inward(self):
        config = equilateral(1.0)
        a = acceleration(config)
        assert_allclose(np.abs(a), 2.0 * np.sqrt(3.0), rtol=1e-12)
        assert_allclose(a, -6.0 * config.q, atol=1e-12)
        assert_allclose(acceleration(config.scaled(2.0)), a / 8.0, atol=1e-12)


class InvariantTests(SimpleTestCase):

    def test_equilateral_at_rest(self):
        values = invariants(PlanarState(equilateral(1.0), np.zeros(3)))
        self.assertAlmostEqual(values['E'], -3.0, places=12)
        self.assertAlmostEqual(values['I'], 1.0, places=12)
        self.assertEqual((values['C'], values['Idot']), (0.0, 0.0))

    def test_rigid_rotation_shifts_angular_momentum(self):
        state = random_state(np.random.default_rng(settings.PANTS_SEED))
        omega = 0.7
        spun = PlanarState(state.config, state.v + 1j * omega * state.config.q)
        base, turned = invariants(state), invariants(spun)
        self.assertAlmostEqual(turned['C'] - base['C'], omega * base['I'], places=12)


class IntegrationTests(SimpleTestCase):

    def setUp(self):
        self.rng = np.random.default_rng(settings.PANTS_SEED)

    def test_conservation_and_lagrange_jacobi(self):
        for _ in range(3):
            traj = integrate(random_state(self.rng), 0.5, tol=1e-10)
            if traj.collision_approach:
                continue
            series = traj.invariant_series()
            scale = max(1.0, abs(series['E'][0]))
            self.assertLess(np.abs(series['E'] - series['E'][0]).max() / scale, 1e-8)
            self.assertLess(np.abs(series['C'] - series['C'][0]).max() / scale, 1e-8)
            self.assertLess(lagrange_jacobi_residual(traj), 1e-9)

    def test_rotating_equilateral_relative_equilibrium(self):
        # uniform rotation with omega^2 r^2 = force balance keeps the triangle rigid
        config = equilateral(1.0)
        r = 1.0 / np.sqrt(3.0)
        a = abs(acceleration(config)[0])
        omega = np.sqrt(a / r)
        state = PlanarState(config, 1j * omega * config.q)
        traj = integrate(state, 1.0)
        assert_allclose(traj.q[-1], config.q * np.exp(1j * omega * traj.t[-1]), atol=1e-8)
        self.assertAlmostEqual(invariants(state)['Idot'], 0.0, places=12)

    def test_scaling_covariance(self):
        # q -> k q, t -> k^2 t, v -> v / k maps solutions to solutions
        state = random_state(self.rng)
        k = 1.7
        scaled = PlanarState(state.config.scaled(k), state.v / k)
        base = integrate(state, 0.2)
        other = integrate(scaled, 0.2 * k * k)
        assert_allclose(other.at(0.2 * k * k).config.q, k * base.at(0.2).config.q, atol=1e-8)

    def test_collision_guard_stops_run(self):
        state = PlanarState(PlanarConfig([-0.01, 0.01, 2.0]), [0.0, 0.0, 0.0])
        traj = integrate(state, 1.0, guard=1e-3)
        self.assertTrue(traj.collision_approach)
        self.assertLess(abs(traj.q[-1, 0] - traj.q[-1, 1]), 1.1e-3)

    def test_trajectory_times_must_increase(self):
        with self.assertRaises(ValueError):
            Trajectory(np.array([0.0, 0.0]), np.zeros((2, 3), dtype=complex), np.zeros((2, 3), dtype=complex))

    def test_non_positive_tolerance(self):
        with self.assertRaises(ValueError):
            integrate(random_state(self.rng), 0.1, tol=0.0)

    def test_equilateral_at_rest_falls_homothetically(self):
        # I'' = 4E = -12, so I = 1 - 6 t^2 until triple collision near t = 0.41
        traj = integrate(PlanarState(equilateral(1.0), np.zeros(3)), 0.3)
        self.assertFalse(traj.collision_approach)
        for q in traj.q:
            sides = np.abs(q - np.roll(q, 1))
            self.assertLess(sides.max() - sides.min(), 1e-9)
        series = traj.invariant_series()
        assert_allclose(series['I'], 1.0 - 6.0 * traj.t ** 2, atol=1e-8)
        self.assertLess(lagrange_jacobi_residual(traj), 1e-9)
