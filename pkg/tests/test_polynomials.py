"""
Tests for the exact polynomial algebra.
"""

import random
import unittest
from fractions import Fraction

import numpy as np

from src.exceptions import DimensionMismatch
from src.phase import PhaseState
from src.polynomials import Polynomial, RationalObservable, phase_variables, phi1, phi2, random_polynomial


class TestPolynomialArithmetic(unittest.TestCase):
    """Test cases for polynomial construction and arithmetic."""

    def setUp(self):
        """Variables of the n = 2 phase space."""
        (self.g1, self.g2), (self.p1, self.p2) = phase_variables(2)

    def test_zero_terms_dropped(self):
        """Zero coefficients never appear in the term map."""
        poly = Polynomial(4, {(1, 0, 0, 0): 0, (0, 1, 0, 0): 2})
        self.assertEqual(len(poly), 1)
        self.assertTrue((self.g1 - self.g1).is_zero())

    def test_arithmetic(self):
        """Sums, products and powers expand exactly."""
        square = (self.g1 + self.p2) ** 2
        expected = self.g1 * self.g1 + self.g1 * self.p2 * 2 + self.p2 * self.p2
        self.assertEqual(square, expected)
        self.assertEqual(square.degree, 2)
        self.assertEqual((self.g1 + 1) - self.g1, 1)
        self.assertEqual(self.g1 ** 0, 1)

    def test_scale_by_fraction(self):
        """Scaling keeps rational coefficients exact."""
        poly = self.g1.scale(Fraction(1, 3)) * 3
        self.assertEqual(poly, self.g1)

    def test_derivative(self):
        """d/dgamma_1 of gamma_1^2 p_2 is 2 gamma_1 p_2."""
        poly = self.g1 * self.g1 * self.p2
        self.assertEqual(poly.derivative(0), self.g1 * self.p2 * 2)
        self.assertTrue(poly.derivative(1).is_zero())

    def test_dimension_mismatch(self):
        """Polynomials in different numbers of variables do not mix."""
        with self.assertRaises(DimensionMismatch):
            self.g1 + Polynomial.variable(6, 0)

    def test_degree_in(self):
        """degree_in counts only the chosen variables."""
        poly = self.g1 * self.g1 * self.p1 + self.p2
        self.assertEqual(poly.degree_in([0, 1]), 2)
        self.assertEqual(poly.degree_in([2, 3]), 1)


class TestEvaluation(unittest.TestCase):
    """Test cases for exact and floating evaluation."""

    def test_exact_evaluation(self):
        """Evaluation at rational points is exact."""
        (g1, g2), (p1, p2) = phase_variables(2)
        poly = g1 * p2.scale(Fraction(1, 2)) - g2 * g2 + 3
        value = poly.evaluate([Fraction(1, 3), Fraction(2, 5), Fraction(7), Fraction(-3, 4)])
        self.assertEqual(value, Fraction(1, 3) * Fraction(-3, 8) - Fraction(4, 25) + 3)

    def test_phase_state_evaluation(self):
        """A PhaseState can be passed directly."""
        state = PhaseState([Fraction(3, 5), Fraction(4, 5)], [Fraction(4, 5), Fraction(-3, 5)])
        self.assertEqual(phi1(2).evaluate(state), 1)
        self.assertEqual(phi2(2).evaluate(state), 0)

    def test_float_evaluation_matches_exact(self):
        """evaluate_many agrees with the exact value and the gradient with derivatives."""
        poly = random_polynomial(6, 4, random.Random(3))
        point = [0.5, -1.25, 2.0, 0.75, -0.5, 1.5]
        exact = float(poly.evaluate(point))
        self.assertAlmostEqual(float(poly.evaluate_many(np.array(point))), exact, places=9)
        gradient = poly.gradient(point)
        expected = [float(poly.derivative(i).evaluate(point)) for i in range(6)]
        np.testing.assert_allclose(gradient, expected, atol=1e-9)

    def test_wrong_point_length(self):
        """A point of the wrong length is rejected."""
        with self.assertRaises(DimensionMismatch):
            phi1(2).evaluate([1, 2, 3])


class TestPhi1Division(unittest.TestCase):
    """Test cases for division by phi1 and the rational observables."""

    def test_exact_multiple(self):
        """phi1 * F divides with quotient F and zero remainder."""
        F = random_polynomial(8, 3, random.Random(5))
        quotient, remainder = (phi1(4) * F).divmod_phi1()
        self.assertTrue(remainder.is_zero())
        self.assertEqual(quotient, F)

    def test_nonmultiple(self):
        """gamma_1 p_1 is not divisible by phi1."""
        (g1, _), (p1, _) = phase_variables(2)
        quotient, remainder = (g1 * p1).divmod_phi1()
        self.assertTrue(quotient.is_zero())
        self.assertEqual(remainder, g1 * p1)

    def test_normalization_cancels(self):
        """(2 phi1 * F) / (2 phi1) normalizes to F over power zero."""
        F = phi2(3) + 1
        observable = RationalObservable(phi1(3).scale(2) * F, 1).normalized()
        self.assertEqual(observable.phi1_power, 0)
        self.assertEqual(observable.numerator, F)

    def test_rational_evaluation(self):
        """The denominator (2 phi1)^k is applied on evaluation."""
        (g1, _), _ = phase_variables(2)
        observable = RationalObservable(g1, 1)
        self.assertEqual(observable.evaluate([2, 0, 0, 0]), Fraction(2, 8))
        self.assertAlmostEqual(observable.evaluate_float(np.array([2.0, 0.0, 0.0, 0.0])), 0.25)


class TestTextForm(unittest.TestCase):
    """Test cases for printing."""

    def test_str(self):
        """Terms print with coefficients and named variables."""
        (g1, _), (_, p2) = phase_variables(2)
        self.assertEqual(str(Polynomial.zero(4)), "0")
        self.assertIn("g1^2", str(g1 * g1))
        self.assertIn("p2", str(p2.scale(Fraction(1, 2))))
        self.assertIn("(2*phi1)^1", str(RationalObservable(g1, 1)))


if __name__ == "__main__":
    unittest.main()
