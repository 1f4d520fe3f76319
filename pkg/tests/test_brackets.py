"""
Tests for the magnetic and Dirac brackets and the identity tests.
"""

import random
import unittest
from fractions import Fraction

import numpy as np

from src.brackets import (dirac_bracket, dirac_poisson_tensor, identity_test, magnetic_bracket,
                          poisson_tensor, structure_constants)
from src.exceptions import DegreeCapExceeded, DimensionMismatch, NotClosed
from src.integrals import build_catalog, rotation_momentum
from src.phase import MagneticField, SystemParams, sample_constrained_point
from src.polynomials import Polynomial, phase_variables, phi1, phi2, random_polynomial


class TestMagneticBracket(unittest.TestCase):
    """Test cases for the twisted Poisson bracket on R^{2n}."""

    def setUp(self):
        """n = 3 with one block of value 2 and s = 1/2."""
        self.params = SystemParams(3, m=1.0, s=0.5)
        self.field = MagneticField.from_blocks([2.0], 3)
        self.gammas, self.ps = phase_variables(3)

    def bracket(self, F, G):
        return magnetic_bracket(F, G, self.field, self.params)

    def test_coordinate_brackets(self):
        """{gamma_i, p_j} = delta_ij and {p_1, p_2} = s kappa_12."""
        for i in range(3):
            for j in range(3):
                self.assertEqual(self.bracket(self.gammas[i], self.ps[j]), 1 if i == j else 0)
        self.assertEqual(self.bracket(self.ps[0], self.ps[1]), 1)
        self.assertEqual(self.bracket(self.ps[1], self.ps[2]), 0)
        self.assertTrue(self.bracket(self.gammas[0], self.gammas[1]).is_zero())

    def test_constraint_bracket(self):
        """{phi1, phi2} = 2 phi1."""
        self.assertEqual(self.bracket(phi1(3), phi2(3)), phi1(3).scale(2))

    def test_bracket_axioms(self):
        """Antisymmetry, Leibniz and Jacobi hold exactly on 50 random triples of degree 3."""
        rng = random.Random(7)
        for _ in range(50):
            F, G, K = (random_polynomial(6, 3, rng) for _ in range(3))
            self.assertEqual(self.bracket(F, G), -self.bracket(G, F))
            self.assertEqual(self.bracket(F, G * K), self.bracket(F, G) * K + G * self.bracket(F, K))
            jacobi = (self.bracket(F, self.bracket(G, K)) + self.bracket(G, self.bracket(K, F))
                      + self.bracket(K, self.bracket(F, G)))
            self.assertTrue(jacobi.is_zero())

    def test_input_checks(self):
        """Mismatched dimensions and oversized degrees are rejected."""
        with self.assertRaises(DimensionMismatch):
            self.bracket(self.gammas[0], Polynomial.variable(4, 0))
        with self.assertRaises(DegreeCapExceeded):
            magnetic_bracket(self.gammas[0] ** 5, self.ps[0], self.field, self.params, degree_cap=4)


class TestDiracBracket(unittest.TestCase):
    """Test cases for the Dirac bracket on T*S^{n-1}."""

    def setUp(self):
        """n = 5 with blocks (2, 1)."""
        self.params = SystemParams(5)
        self.field = MagneticField.from_blocks([2.0, 1.0], 5)
        self.catalog = build_catalog(self.params, self.field, include_chains=False)

    def test_constraints_are_casimirs(self):
        """phi1 and phi2 have zero Dirac bracket with anything."""
        G = random_polynomial(10, 2, random.Random(1))
        self.assertTrue(dirac_bracket(phi1(5), G, self.field, self.params).is_zero())
        self.assertTrue(dirac_bracket(phi2(5), G, self.field, self.params).is_zero())

    def test_antisymmetry(self):
        """{F, G}_d = -{G, F}_d."""
        rng = random.Random(2)
        F, G = random_polynomial(10, 2, rng), random_polynomial(10, 2, rng)
        forward = dirac_bracket(F, G, self.field, self.params)
        backward = dirac_bracket(G, F, self.field, self.params)
        self.assertEqual(forward.phi1_power, backward.phi1_power)
        self.assertEqual(forward.numerator, -backward.numerator)

    def test_block_momenta_commute(self):
        """{Phi_12, Phi_34}_d vanishes on T*S^4."""
        bracket = dirac_bracket(self.catalog["Phi_12"], self.catalog["Phi_34"], self.field, self.params)
        self.assertTrue(identity_test(bracket, trials=30, seed=3).holds)

    def test_first_integrals(self):
        """H, the Phi's and J Poisson-commute with H."""
        H = self.catalog["H"]
        for name in ("Phi_12", "Phi_34", "J"):
            bracket = dirac_bracket(self.catalog[name], H, self.field, self.params)
            self.assertTrue(identity_test(bracket, trials=30, seed=4).holds, name)

    def test_counterexample(self):
        """gamma_1 p_2 is not conserved and a witness point is reported."""
        (g1, *_), (_, p2, *_) = phase_variables(5)
        bracket = dirac_bracket(self.catalog["H"], g1 * p2, self.field, self.params)
        verdict = identity_test(bracket, trials=30, seed=5)
        self.assertFalse(verdict.holds)
        self.assertIsNotNone(verdict.counterexample)
        self.assertNotEqual(verdict.value, 0)
        self.assertIn("counterexample", verdict.to_dict())

    def test_tensor_matches_bracket(self):
        """grad F . D . grad G equals the floating value of {F, G}_d."""
        rng = random.Random(6)
        F, G = random_polynomial(10, 2, rng), random_polynomial(10, 2, rng)
        bracket = dirac_bracket(F, G, self.field, self.params)
        y = sample_constrained_point(5, seed=8).as_array()
        D = dirac_poisson_tensor(y, self.field, self.params)
        tensor_value = F.gradient(y) @ D @ G.gradient(y)
        self.assertAlmostEqual(tensor_value, bracket.evaluate_float(y), places=8)

    def test_poisson_tensor(self):
        """The constant tensor is [[0, I], [-I, s K]]."""
        Pi = poisson_tensor(self.field, self.params)
        np.testing.assert_array_equal(Pi[:5, 5:], np.eye(5))
        np.testing.assert_array_equal(Pi[5:, 5:], self.field.canonical_kappa)
        np.testing.assert_array_equal(Pi, -Pi.T)


class TestIdentityTest(unittest.TestCase):
    """Test cases for the exact identity test."""

    def test_zero_expression(self):
        """A zero polynomial holds without sampling."""
        self.assertTrue(identity_test(Polynomial.zero(6)).holds)

    def test_constraints_vanish(self):
        """phi1 - 1 and phi2 vanish on T*S^{n-1} but not on R^{2n}."""
        self.assertTrue(identity_test(phi1(4) - 1, trials=20).holds)
        self.assertTrue(identity_test(phi2(4), trials=20).holds)
        self.assertFalse(identity_test(phi2(4), domain="ambient", trials=20).holds)

    def test_trials_raised_with_degree(self):
        """The trial count is at least 8 x the degree."""
        verdict = identity_test(phi1(3) ** 3 - 1, trials=1)
        self.assertTrue(verdict.holds)
        self.assertEqual(verdict.trials, 48)

    def test_unknown_domain(self):
        """Only the constrained and ambient domains exist."""
        with self.assertRaises(ValueError):
            identity_test(phi1(3), domain="torus")


class TestStructureConstants(unittest.TestCase):
    """Test cases for the structure-constant solver."""

    def setUp(self):
        """n = 4 with two equal blocks."""
        self.params = SystemParams(4)
        self.field = MagneticField.from_blocks([1.0, 1.0], 4)
        catalog = build_catalog(self.params, self.field, include_chains=False)
        self.generators = {name: catalog[name] for name in ("Phi_12", "Phi_34", "Psi1_12_34", "Psi2_12_34")}

    def test_equal_pair_algebra(self):
        """Phi_12, Phi_34, Psi1, Psi2 close with the u(2) structure constants."""
        table = structure_constants(self.generators, self.field, self.params, trials=20, seed=1)
        self.assertEqual(table.coefficients("Phi_12", "Phi_34"), {})
        self.assertEqual(table.coefficients("Phi_12", "Psi1_12_34"), {"Psi2_12_34": -1})
        self.assertEqual(table.coefficients("Phi_34", "Psi1_12_34"), {"Psi2_12_34": 1})
        self.assertEqual(table.coefficients("Phi_12", "Psi2_12_34"), {"Psi1_12_34": 1})
        self.assertEqual(table.coefficients("Psi1_12_34", "Psi2_12_34"),
                         {"Phi_12": Fraction(-2), "Phi_34": Fraction(2)})
        self.assertEqual(table.coefficients("Psi1_12_34", "Phi_12"), {"Psi2_12_34": 1})

    def test_su2_basis(self):
        """The rescaled basis satisfies {e1, e2} = e3 and e0 is central."""
        g = self.generators
        basis = {
            "e0": g["Phi_12"] + g["Phi_34"],
            "e1": g["Psi1_12_34"].scale(Fraction(-1, 2)),
            "e2": g["Psi2_12_34"].scale(Fraction(-1, 2)),
            "e3": (g["Phi_34"] - g["Phi_12"]).scale(Fraction(1, 2)),
        }
        table = structure_constants(basis, self.field, self.params, trials=20, seed=2)
        self.assertEqual(table.coefficients("e1", "e2"), {"e3": 1})
        self.assertEqual(table.coefficients("e2", "e3"), {"e1": 1})
        self.assertEqual(table.coefficients("e1", "e3"), {"e2": -1})
        for other in ("e1", "e2", "e3"):
            self.assertEqual(table.coefficients("e0", other), {})

    def test_single_generator(self):
        """One generator has no pairs."""
        table = structure_constants([self.generators["Phi_12"]], self.field, self.params)
        self.assertEqual(table.names, ["G1"])
        self.assertEqual(table.entries, {})

    def test_not_closed(self):
        """Two rotation momenta sharing an index do not close on their own."""
        params = SystemParams(3)
        field = MagneticField.from_blocks([0.0], 3)
        gammas, ps = phase_variables(3)
        generators = {"L12": rotation_momentum(gammas, ps, 0, 1), "L23": rotation_momentum(gammas, ps, 1, 2)}
        with self.assertRaises(NotClosed) as context:
            structure_constants(generators, field, params, trials=20)
        self.assertEqual(context.exception.pair, ("L12", "L23"))


if __name__ == "__main__":
    unittest.main()
