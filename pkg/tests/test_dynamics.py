"""
Tests for the flows, their closed forms and the symmetry reductions.
"""

import csv
import math
import os
import tempfile
import unittest

import numpy as np

from src.dynamics import (FlowSpec, common_period, integrate, larmor_period, larmor_radius,
                          orthogonal_reduction, pendulum_circle_radius, pendulum_momentum_drift,
                          rn_closed_form, sphere_vector_field, unitary_reduction)
from src.exceptions import ConfigError, ConstraintViolation, HypothesisViolation
from src.phase import (MagneticField, PhaseState, SystemParams, block_rotation_matrix, numpy_rng, rotate_state,
                       sample_constrained_point)


class TestSphereFlow(unittest.TestCase):
    """Test cases for the magnetic geodesic flow on T*S^{n-1}."""

    def setUp(self):
        """n = 5 with blocks (2, 1)."""
        self.params = SystemParams(5, m=1.5, s=0.7)
        self.field = MagneticField.from_blocks([2.0, 1.0], 5)
        self.spec = FlowSpec("sphere", self.params, self.field)
        self.initial = sample_constrained_point(5, seed=1)

    def test_vector_field_is_tangent(self):
        """At 1000 constrained states the field preserves phi1 and phi2 to first order."""
        m = float(self.params.m)
        rng = numpy_rng(11)
        for _ in range(1000):
            state = sample_constrained_point(5, seed=rng)
            gamma_dot, p_dot = sphere_vector_field(state, self.field, self.params)
            gamma, p = np.array(state.gamma), np.array(state.p)
            self.assertLess(abs(float(np.dot(gamma, gamma_dot)) * m - float(np.dot(gamma, p))), 1e-12)
            self.assertLess(abs(float(np.dot(p_dot, gamma) + np.dot(p, gamma_dot))), 1e-12)

    def test_integrals_conserved(self):
        """Every catalog integral drifts by less than 1e-8."""
        trajectory = integrate(self.spec, self.initial, 10.0, rel_tol=1e-12, abs_tol=1e-14)
        self.assertLess(max(trajectory.drift.values()), 1e-8)
        self.assertLess(trajectory.constraint_residual(), 1e-12)
        self.assertIn("J", trajectory.drift)

    def test_time_reversal(self):
        """Integrating back from the final state recovers the initial one."""
        forward = integrate(self.spec, self.initial, 5.0)
        backward = integrate(self.spec, forward.final_state, 0.0, t0=5.0)
        np.testing.assert_allclose(backward.states[-1], self.initial.as_array(), atol=1e-7)

    def test_block_rotation_equivariance(self):
        """Rotations commuting with kappa commute with the flow."""
        R = block_rotation_matrix([0.4, -1.1], 5)
        direct = integrate(self.spec, rotate_state(self.initial, R), 5.0, rel_tol=1e-12, abs_tol=1e-14)
        rotated = rotate_state(integrate(self.spec, self.initial, 5.0, rel_tol=1e-12, abs_tol=1e-14).final_state, R)
        np.testing.assert_allclose(direct.states[-1], rotated.as_array(), atol=1e-8)

    def test_off_manifold_start(self):
        """A constrained flow refuses a state off T*S^{n-1}."""
        with self.assertRaises(ConstraintViolation):
            integrate(self.spec, PhaseState([1.0, 1.0, 0.0, 0.0, 0.0], [0.0] * 5), 1.0)

    def test_csv_output(self):
        """The trajectory CSV has t, gamma, p and the integrals with H first."""
        trajectory = integrate(self.spec, self.initial, 1.0)
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "trajectory.csv")
            trajectory.to_csv(path)
            with open(path, newline="") as f:
                rows = list(csv.reader(f))
        header = rows[0]
        self.assertEqual(header[:2], ["t", "gamma_1"])
        self.assertEqual(header[11], "H")
        self.assertEqual(len(rows), len(trajectory.times) + 1)
        self.assertEqual(float(rows[-1][0]), 1.0)


class TestLongRunConservation(unittest.TestCase):
    """Test cases for drift over t = 100 at the default tolerances."""

    def test_catalog_drift_at_default_tolerances(self):
        """Every catalog integral drifts by less than 1e-8 with rel 1e-10 and abs 1e-12."""
        cases = [(3, [1.0]), (4, [1.0, 2.0]), (5, [1.0, 2.0]), (5, [1.0, 1.0]),
                 (6, [1.0, 2.0, 3.0]), (6, [1.0, 1.0, 2.0]), (6, [1.0, 1.0, 1.0]), (7, [1.0, 2.0, 3.0])]
        for n, blocks in cases:
            with self.subTest(n=n, blocks=blocks):
                spec = FlowSpec("sphere", SystemParams(n), MagneticField.from_blocks(blocks, n))
                initial = sample_constrained_point(n, "float", seed=7)
                trajectory = integrate(spec, initial, 100.0, rel_tol=1e-10, abs_tol=1e-12)
                self.assertEqual(trajectory.times[-1], 100.0)
                self.assertLess(max(trajectory.drift.values()), 1e-8)
                self.assertLess(trajectory.constraint_residual(), 1e-12)


class TestFlowSpec(unittest.TestCase):
    """Test cases for flow specifications."""

    def test_aliases(self):
        """ambient_rn is an alias of ambient."""
        field = MagneticField.from_blocks([1.0], 2)
        self.assertEqual(FlowSpec("ambient_rn", SystemParams(2), field).kind, "ambient")

    def test_invalid_specs(self):
        """Unknown kinds, missing fields and a pendulum outside n = 3 are rejected."""
        with self.assertRaises(ConfigError):
            FlowSpec("torus", SystemParams(3))
        with self.assertRaises(ConfigError):
            FlowSpec("sphere", SystemParams(3))
        with self.assertRaises(ConfigError):
            FlowSpec("pendulum", SystemParams(4))


class TestAmbientFlow(unittest.TestCase):
    """Test cases for the Lorentz flow in R^n."""

    def test_matches_closed_form(self):
        """The integrator follows the Larmor closed form."""
        params = SystemParams(5, m=2.0, s=1.3)
        field = MagneticField.from_blocks([1.0, 0.5], 5)
        initial = PhaseState([0.1, -0.2, 0.3, 0.0, 1.0], [1.0, 0.5, -0.3, 0.8, 0.2])
        trajectory = integrate(FlowSpec("ambient", params, field), initial, 10.0, rel_tol=1e-12, abs_tol=1e-14)
        exact = rn_closed_form(initial, field, params, 10.0)
        np.testing.assert_allclose(trajectory.states[-1], exact.as_array(), atol=1e-9)
        self.assertLess(max(trajectory.drift.values()), 1e-9)

    def test_closed_form_across_dimensions(self):
        """For n = 2..8 the integrator stays within 1e-8 of the closed form over 10 Larmor periods."""
        for n in range(2, 9):
            with self.subTest(n=n):
                params = SystemParams(n)
                field = MagneticField.from_blocks([1.0, 2.0, 3.0, 1.5][:n // 2], n)
                rng = numpy_rng(n)
                initial = PhaseState(rng.uniform(-1, 1, n), rng.uniform(-1, 1, n))
                t_end = 10 * larmor_period(1.0, params)
                trajectory = integrate(FlowSpec("ambient", params, field), initial, t_end,
                                       rel_tol=1e-12, abs_tol=1e-14)
                exact = rn_closed_form(initial, field, params, t_end)
                np.testing.assert_allclose(trajectory.states[-1], exact.as_array(), rtol=0, atol=1e-8)

    def test_larmor_circle(self):
        """p = e1 and kappa = 2 give radius 1/2 and period pi."""
        params = SystemParams(2)
        self.assertAlmostEqual(larmor_radius((1.0, 0.0), 2.0, params), 0.5)
        self.assertAlmostEqual(larmor_period(2.0, params), math.pi)

    def test_closed_orbits(self):
        """Blocks (1, 3) close every orbit after 2 pi."""
        params = SystemParams(4)
        field = MagneticField.from_blocks([1.0, 3.0], 4)
        period = common_period(field, params)
        self.assertAlmostEqual(period, 2 * math.pi)
        initial = PhaseState([0.5, 0.0, -1.0, 2.0], [1.0, -0.5, 0.25, 0.75])
        trajectory = integrate(FlowSpec("ambient", params, field), initial, period, rel_tol=1e-12, abs_tol=1e-14)
        np.testing.assert_allclose(trajectory.states[-1], initial.as_array(), atol=1e-8)

    def test_common_period_cases(self):
        """Odd n, zero blocks and incommensurable blocks have no common period."""
        self.assertAlmostEqual(common_period(MagneticField.from_blocks([2.0], 2), SystemParams(2)), math.pi)
        self.assertAlmostEqual(common_period(MagneticField.from_blocks([2.0, 3.0], 4), SystemParams(4)),
                               2 * math.pi)
        self.assertIsNone(common_period(MagneticField.from_blocks([1.0], 3), SystemParams(3)))
        self.assertIsNone(common_period(MagneticField.from_blocks([1.0, 0.0], 4), SystemParams(4)))
        self.assertIsNone(common_period(MagneticField.from_blocks([1.0, math.sqrt(2)], 4), SystemParams(4)))


class TestPendulum(unittest.TestCase):
    """Test cases for the magnetic pendulum on S^2."""

    def test_circle_radius(self):
        """Unit-speed circles have geodesic radius arctan(1/|s|)."""
        self.assertAlmostEqual(pendulum_circle_radius(1.0), math.pi / 4)
        self.assertAlmostEqual(pendulum_circle_radius(math.sqrt(3)), math.pi / 6)
        for s in (1.0, math.sqrt(3)):
            simulated = pendulum_circle_radius(s, via="simulate", t_end=10.0)
            self.assertAlmostEqual(simulated, pendulum_circle_radius(s), places=6)

    def test_momentum_conserved(self):
        """gamma x p + s gamma is conserved for b = 0 and its b-component otherwise."""
        initial = PhaseState((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), constrained=True)
        for b in ((0.0, 0.0, 0.0), (0.0, 0.0, -1.0)):
            spec = FlowSpec("pendulum", SystemParams(3, s=0.5), b=b)
            drift = pendulum_momentum_drift(integrate(spec, initial, 10.0))
            self.assertTrue(drift)
            self.assertLess(max(drift.values()), 1e-8)

    def test_momentum_drift_needs_pendulum(self):
        """Momentum drift is only defined for pendulum trajectories."""
        spec = FlowSpec("sphere", SystemParams(3), MagneticField.from_blocks([1.0], 3))
        trajectory = integrate(spec, sample_constrained_point(3, seed=2), 1.0)
        with self.assertRaises(ConfigError):
            pendulum_momentum_drift(trajectory)


class TestReductions(unittest.TestCase):
    """Test cases for the unitary and orthogonal reductions."""

    def test_unitary_reduction_is_invariant(self):
        """n = 9 with four equal blocks: four coordinates vanish and stay zero."""
        params = SystemParams(9)
        field = MagneticField.from_blocks([1.0, 1.0, 1.0, 1.0], 9)
        initial = sample_constrained_point(9, seed=3)
        result = unitary_reduction(initial, 4, field, params)
        self.assertEqual(result.zeroed, [0, 1, 2, 3])
        np.testing.assert_allclose(result.R @ result.R.T, np.eye(8), atol=1e-12)
        reduced = result.reduced.as_array()
        np.testing.assert_allclose(reduced[[0, 1, 2, 3, 9, 10, 11, 12]], 0.0, atol=1e-12)

        trajectory = integrate(FlowSpec("sphere", params, field), result.reduced, 10.0)
        zeroed = trajectory.states[:, [0, 1, 2, 3, 9, 10, 11, 12]]
        self.assertLess(float(np.max(np.abs(zeroed))), 1e-8)

    def test_unitary_needs_equal_blocks(self):
        """Distinct blocks do not admit a U(r) reduction."""
        field = MagneticField.from_blocks([1.0, 2.0, 3.0], 6)
        with self.assertRaises(HypothesisViolation):
            unitary_reduction(sample_constrained_point(6, seed=4), 3, field, SystemParams(6))

    def test_orthogonal_reduction(self):
        """The zero-field coordinates beyond the first two vanish."""
        params = SystemParams(7)
        field = MagneticField.from_blocks([1.0, 0.0, 0.0], 7)
        result = orthogonal_reduction(sample_constrained_point(7, seed=5), field, params)
        self.assertEqual(result.zeroed, [4, 5, 6])
        reduced = result.reduced.as_array()
        np.testing.assert_allclose(reduced[[4, 5, 6, 11, 12, 13]], 0.0, atol=1e-12)
        self.assertAlmostEqual(np.linalg.det(result.R), 1.0)

    def test_orthogonal_needs_zero_region(self):
        """Two zero-field coordinates are not enough."""
        field = MagneticField.from_blocks([1.0, 0.0], 4)
        with self.assertRaises(HypothesisViolation):
            orthogonal_reduction(sample_constrained_point(4, seed=6), field, SystemParams(4))


if __name__ == "__main__":
    unittest.main()
