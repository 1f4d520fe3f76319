"""
Tests for the integral catalogs, ranks and block classification.
"""

import unittest
from fractions import Fraction

from src.exceptions import NotApplicable
from src.integrals import (build_catalog, build_pendulum_catalog, build_rn_catalog, classify_blocks,
                           commuting_chain, covered_cases, jacobian_rank, liouville_set, nc_dimension_check,
                           pair_label, verify_catalog, zero_region)
from src.phase import GaugeOffset, MagneticField, PhaseState, SystemParams, sample_constrained_point


def catalog_for_blocks(n, blocks, **kwargs):
    return build_catalog(SystemParams(n), MagneticField.from_blocks(blocks, n), **kwargs)


class TestSphereCatalog(unittest.TestCase):
    """Test cases for the catalog of the sphere flow."""

    def test_values_at_known_point(self):
        """n = 4, kappa = (1, 0), gamma = e1, p = e2."""
        catalog = catalog_for_blocks(4, [1.0, 0.0])
        state = PhaseState([1, 0, 0, 0], [0, 1, 0, 0])
        values = catalog.evaluate_exact(state)
        self.assertEqual(values["H"], Fraction(1, 2))
        self.assertEqual(values["J"], -3)
        self.assertEqual(values["J4H2"], -2)
        self.assertEqual(values["Phi_12"], Fraction(3, 2))
        self.assertEqual(values["Phi_34"], 0)

    def test_entries_follow_block_pattern(self):
        """Psi pairs exist for equal blocks, L's for the zero region, mu for equal even n."""
        catalog = catalog_for_blocks(5, [1.0, 1.0])
        self.assertIn("Psi1_12_34", catalog)
        self.assertIn("Psi2_12_34", catalog)
        self.assertIn("I_12_34", catalog)
        self.assertNotIn("mu", catalog)
        self.assertEqual(catalog.metadata["equal_pairs"], [(1, 2)])

        catalog = catalog_for_blocks(6, [2.0, 2.0, 2.0])
        self.assertIn("mu", catalog)
        self.assertIn("Psi1_34_56", catalog)

        catalog = catalog_for_blocks(7, [1.0, 0.0, 0.0])
        self.assertEqual(catalog.metadata["zero_region"], [3, 4, 5, 6, 7])
        self.assertIn("L_3_7", catalog)
        self.assertNotIn("Psi1_12_34", catalog)
        self.assertIn("Psi1_34_56", catalog)

    def test_pair_label(self):
        """Two-digit indices are separated."""
        self.assertEqual(pair_label(1, 2), "12")
        self.assertEqual(pair_label(9, 10), "9_10")

    def test_every_entry_is_conserved(self):
        """verify=True certifies all entries for n = 6 with blocks (1, 1, 0)."""
        catalog = catalog_for_blocks(6, [1.0, 1.0, 0.0], verify=True, trials=10, seed=1)
        verdicts = catalog.metadata["verdicts"]
        self.assertEqual(set(verdicts), set(catalog.names))
        self.assertTrue(all(v["holds"] for v in verdicts.values()))


class TestOtherCatalogs(unittest.TestCase):
    """Test cases for the R^n and pendulum catalogs."""

    def test_rn_catalog(self):
        """Block energies, gauge momenta and p_n for odd n are all conserved."""
        params = SystemParams(5)
        field = MagneticField.from_blocks([1.0, 2.0], 5)
        catalog = build_rn_catalog(params, field, GaugeOffset((1, 0, 0, 2, 0)))
        self.assertEqual(set(catalog.names), {"H", "H_12", "PhiG_12", "H_34", "PhiG_34", "p_5"})
        verdicts = verify_catalog(catalog, trials=20)
        self.assertTrue(all(v.holds for v in verdicts.values()))

    def test_pendulum_catalog(self):
        """b = 0 gives three momentum components; b != 0 gives one projection."""
        params = SystemParams(3, s=2.0)
        catalog = build_pendulum_catalog(params)
        self.assertEqual(catalog.names, ["H", "Phi_x", "Phi_y", "Phi_z"])
        catalog = build_pendulum_catalog(params, (0, 0, 1))
        self.assertEqual(catalog.names, ["H", "bPhi"])
        verdicts = verify_catalog(catalog, trials=20)
        self.assertTrue(all(v.holds for v in verdicts.values()))


class TestRanks(unittest.TestCase):
    """Test cases for rank evaluations and certificates."""

    def test_energy_rank(self):
        """H alone has rank 1 away from p = 0."""
        catalog = catalog_for_blocks(5, [1.0, 2.0])
        self.assertEqual(jacobian_rank([catalog["H"]], sample_constrained_point(5, seed=1)), 1)

    def test_independent_family(self):
        """H, J, Phi_12, Phi_34 are independent for n = 5."""
        catalog = catalog_for_blocks(5, [1.0, 2.0])
        family = catalog.subset(["H", "J", "Phi_12", "Phi_34"])
        self.assertEqual(jacobian_rank(family, sample_constrained_point(5, seed=2)), 4)

    def test_equal_blocks_lose_one(self):
        """For even n with all blocks equal J depends on H."""
        catalog = catalog_for_blocks(6, [1.0, 1.0, 1.0])
        family = catalog.subset(["H", "J", "Phi_12", "Phi_34", "Phi_56"])
        self.assertEqual(jacobian_rank(family, sample_constrained_point(6, seed=3)), 4)

    def test_certificates(self):
        """Certified (ddim, dind) match the classification."""
        expected = {
            (5, (1.0, 1.0)): (5, 3),
            (6, (1.0, 1.0, 2.0)): (6, 4),
            (6, (1.0, 1.0, 1.0)): (8, 2),
            (5, (1.0, 2.0)): (4, 4),
            (6, (1.0, 2.0, 3.0)): (5, 5),
        }
        for (n, blocks), (ddim, dind) in expected.items():
            field = MagneticField.from_blocks(blocks, n)
            params = SystemParams(n)
            catalog = build_catalog(params, field)
            certificate = nc_dimension_check(list(catalog.observables.values()), 20, field, params, seed=4)
            self.assertEqual((certificate.ddim, certificate.dind), (ddim, dind), (n, blocks))
            self.assertTrue(certificate.sum_ok)
            case = classify_blocks(n, field.blocks)
            self.assertEqual((case.ddim, case.dind), (ddim, dind))


class TestChains(unittest.TestCase):
    """Test cases for the commuting chains."""

    def test_so_chain(self):
        """n = 6 with blocks (1, 0, 0) has an so chain of length 2."""
        catalog = catalog_for_blocks(6, [1.0, 0.0, 0.0], include_chains=False)
        self.assertEqual(len(commuting_chain(catalog, "so_chain")), 2)
        family = liouville_set(catalog, "so_chain")
        self.assertEqual(list(family), ["H", "J", "Phi_12", "L_3_4", "I_so_1", "I_so_2"])

    def test_u_chain(self):
        """n = 8 with four equal blocks has a u chain of length 3."""
        catalog = catalog_for_blocks(8, [1.0, 1.0, 1.0, 1.0], include_chains=False)
        self.assertEqual(len(commuting_chain(catalog, "u_chain")), 3)
        self.assertIn("I_u_4", liouville_set(catalog, "u_chain"))

    def test_no_chain(self):
        """n = 4 with distinct nonzero blocks has neither chain."""
        catalog = catalog_for_blocks(4, [1.0, 2.0], include_chains=False)
        for kind in ("so_chain", "u_chain"):
            with self.assertRaises(NotApplicable):
                commuting_chain(catalog, kind)
        with self.assertRaises(ValueError):
            commuting_chain(catalog, "sp_chain")

    def test_zero_region(self):
        """Zero blocks and the odd coordinate form the zero region."""
        self.assertEqual(zero_region(MagneticField.from_blocks([1.0, 0.0], 5)), [2, 3, 4])
        self.assertEqual(zero_region(MagneticField.from_blocks([1.0, 2.0], 4)), [])


class TestClassification(unittest.TestCase):
    """Test cases for the block-pattern classification."""

    def test_named_cases(self):
        """The most specific case is reported first."""
        self.assertEqual(classify_blocks(3, [1.0]).case, "stara")
        self.assertEqual(classify_blocks(4, [1.0, 1.0]).case, "stara-equal")
        self.assertEqual(classify_blocks(5, [1.0, 1.0]).case, "glavna-i")
        self.assertEqual(classify_blocks(6, [2.0, 1.0, 1.0]).case, "glavna-ii")
        self.assertEqual(classify_blocks(6, [1.0, 1.0, 1.0]).case, "glavna-iii")
        self.assertEqual(classify_blocks(6, [1.0, 0.0, 0.0]).case, "glavna-iv")
        self.assertEqual(classify_blocks(8, [1.0, 0.0, 0.0, 0.0]).case, "integrabilni-i")
        self.assertEqual(classify_blocks(7, [1.0, 1.0, 0.0]).case, "integrabilni-ii")
        self.assertEqual(classify_blocks(7, [2.0, 1.0, 0.0]).case, "integrabilni-iii")
        self.assertEqual(classify_blocks(8, [1.0, 1.0, 1.0, 1.0]).case, "integrabilni2-i")
        self.assertEqual(classify_blocks(7, [1.0, 1.0, 1.0]).case, "integrabilni2-ii")
        self.assertEqual(classify_blocks(8, [2.0, 1.0, 1.0, 1.0]).case, "integrabilni2-iii")
        self.assertEqual(classify_blocks(8, [1.0, 1.0, 0.0, 0.0]).case, "integrabilni-ii")

    def test_cases_agree(self):
        """All cases covering one pattern predict the same certificate."""
        patterns = [(6, [1.0, 1.0, 0.0]), (6, [1.0, 1.0, 2.0]), (7, [1.0, 1.0, 0.0]), (5, [1.0, 0.0])]
        for n, blocks in patterns:
            cases = covered_cases(n, blocks)
            self.assertGreater(len(cases), 1, (n, blocks))
            self.assertEqual(len({(c.ddim, c.dind) for c in cases}), 1, (n, blocks))
            for case in cases:
                self.assertEqual(case.ddim + case.dind, 2 * (n - 1))

    def test_unclassified(self):
        """Zero fields and patterns outside every known case are unclassified."""
        self.assertIsNone(classify_blocks(6, [0.0, 0.0, 0.0]))
        self.assertIsNone(classify_blocks(8, [3.0, 2.0, 1.0, 1.0]))
        self.assertEqual(covered_cases(2, [1.0]), [])


if __name__ == "__main__":
    unittest.main()
