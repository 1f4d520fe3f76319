"""
Tests for the verification targets and reports.
"""

import unittest

from src.brackets import IdentityVerdict
from src.exceptions import HypothesisViolation, VerificationFailure
from src.phase import MagneticField, SystemParams
from src.verification import (VerificationContext, VerificationReport, default_targets, is_known_target,
                              reduction_run, run_verification)


def make_context(n, blocks, **kwargs):
    kwargs.setdefault("trials", 10)
    return VerificationContext(SystemParams(n), MagneticField.from_blocks(blocks, n), **kwargs)


class TestVerificationReport(unittest.TestCase):
    """Test cases for report bookkeeping."""

    def test_failures_only_count_asserted_checks(self):
        """Recorded-only checks never fail a report."""
        report = VerificationReport()
        report.add("L3", "recorded", False, asserted=False)
        report.add("L1", "holds", True)
        self.assertTrue(report.passed)
        report.raise_for_failures()

        report.add("L1", "fails", False, value="3/4")
        self.assertFalse(report.passed)
        self.assertEqual(report.targets, ["L3", "L1"])
        with self.assertRaises(VerificationFailure) as context:
            report.raise_for_failures()
        self.assertEqual(context.exception.failures[0]["check"], "fails")
        self.assertEqual(context.exception.failures[0]["value"], "3/4")

    def test_identity_verdicts(self):
        """Identity verdicts keep their trial count and domain as details."""
        report = VerificationReport()
        verdict = report.add_identity("L1", "check", IdentityVerdict(True, 200, "constrained"))
        self.assertTrue(verdict.holds)
        self.assertEqual(verdict.details, {"trials": 200, "domain": "constrained"})

    def test_to_dict(self):
        """The report serializes verdicts and provenance."""
        report = VerificationReport(provenance={"seed": 3})
        report.add("casimir", "check", True, samples=20)
        data = report.to_dict()
        self.assertTrue(data["passed"])
        self.assertEqual(data["verdicts"][0]["samples"], 20)
        self.assertEqual(data["provenance"], {"seed": 3})


class TestBracketTargets(unittest.TestCase):
    """Test cases for the bracket relation targets."""

    def test_commutation_relations(self):
        """L1, L2, L3 and the Casimir check hold for n = 5 with blocks (2, 1)."""
        report = run_verification(make_context(5, [2.0, 1.0]), ["L1", "L2", "L3", "casimir"])
        self.assertTrue(report.passed, report.failures)
        self.assertEqual(report.targets, ["L1", "L2", "L3", "casimir"])

    def test_commutation_sweep(self):
        """L1 and L3 hold at 200 exact points for every n from 3 to 8."""
        for n in range(3, 9):
            with self.subTest(n=n):
                ctx = make_context(n, [1.0, 2.0, 3.0, 4.0][:n // 2], trials=200)
                report = run_verification(ctx, ["L1", "L3"])
                self.assertTrue(report.passed, report.failures)
                asserted = [v for v in report.verdicts if v.asserted]
                self.assertTrue(asserted)
                self.assertTrue(all(v.details["trials"] >= 200 for v in asserted))

    def test_independence(self):
        """L4 holds for distinct blocks and for all-equal blocks in even n."""
        self.assertTrue(run_verification(make_context(5, [2.0, 1.0]), ["L4"]).passed)
        report = run_verification(make_context(6, [1.0, 1.0, 1.0]), ["L4"])
        self.assertTrue(report.passed)
        self.assertEqual(report.verdicts[0].details["expected"], 4)

    def test_independence_needs_n5(self):
        """L4 is not stated below n = 5."""
        with self.assertRaises(HypothesisViolation):
            run_verification(make_context(4, [2.0, 1.0]), ["L4"])

    def test_u2_algebra(self):
        """L5 certifies the relations and both structure tables."""
        report = run_verification(make_context(4, [1.0, 1.0]), ["L5"])
        self.assertTrue(report.passed, report.failures)
        self.assertIn("L5", report.structure)
        self.assertIn("L5-e", report.structure)

    def test_u2_needs_equal_pair(self):
        """L5 needs two equal blocks."""
        with self.assertRaises(HypothesisViolation):
            run_verification(make_context(4, [1.0, 2.0]), ["L5"])

    def test_unitary_algebra(self):
        """Three equal blocks close into u(3)."""
        report = run_verification(make_context(6, [1.0, 1.0, 1.0]), ["u3"])
        self.assertTrue(report.passed, report.failures)
        self.assertEqual(report.verdicts[0].details["generators"], 9)


class TestFlowAndCertificateTargets(unittest.TestCase):
    """Test cases for the flow and certificate targets."""

    def test_rn_flow(self):
        """The R^n integrals are exact and the integrator matches the closed form."""
        ctx = make_context(4, [1.0, 2.0], t_end=10.0, rel_tol=1e-12, abs_tol=1e-14)
        report = run_verification(ctx, ["ocigledna"])
        self.assertTrue(report.passed, report.failures)
        self.assertIn("closed_form", report.drift["ocigledna"])

    def test_closed_orbits(self):
        """Blocks (1, 3) close after 2 pi; odd n has no common period."""
        ctx = make_context(4, [1.0, 3.0], rel_tol=1e-12, abs_tol=1e-14)
        self.assertTrue(run_verification(ctx, ["superintegrable"]).passed)
        with self.assertRaises(HypothesisViolation):
            run_verification(make_context(3, [1.0]), ["superintegrable"])

    def test_pendulum(self):
        """Pendulum integrals, momentum drift and the circle radius."""
        ctx = VerificationContext(SystemParams(3, s=1.0), MagneticField.from_blocks([0.0], 3),
                                  trials=10, t_end=10.0)
        report = run_verification(ctx, ["pendulum"])
        self.assertTrue(report.passed, report.failures)
        self.assertIn("pendulum", report.drift)

    def test_reduction(self):
        """Three equal blocks in n = 7 reduce with r = 3 and stay reduced."""
        ctx = make_context(7, [1.0, 1.0, 1.0], t_end=10.0)
        run = reduction_run(ctx)
        self.assertEqual(run["r"], 3)
        self.assertEqual(run["zeroed"], [1, 2])
        self.assertLess(run["max_zeroed"], 1e-8)
        self.assertTrue(run_verification(ctx, ["redukcija"]).passed)

    def test_reduction_not_available(self):
        """Distinct blocks without a zero region admit no reduction."""
        with self.assertRaises(HypothesisViolation):
            reduction_run(make_context(4, [1.0, 2.0]))

    def test_certificate(self):
        """glavna-i is certified for n = 5 with blocks (1, 1)."""
        report = run_verification(make_context(5, [1.0, 1.0]), ["glavna"])
        self.assertTrue(report.passed, report.failures)
        certificate = report.certificates["glavna-i"]
        self.assertEqual((certificate["ddim"], certificate["dind"]), (5, 3))

    def test_certificate_must_cover_blocks(self):
        """A case that does not cover the pattern is a hypothesis violation."""
        with self.assertRaises(HypothesisViolation):
            run_verification(make_context(5, [1.0, 2.0]), ["integrabilni2"])


class TestTargetSelection(unittest.TestCase):
    """Test cases for target ids and defaults."""

    def test_known_targets(self):
        """Bracket target ids and case prefixes are known."""
        self.assertTrue(is_known_target("L5"))
        self.assertTrue(is_known_target("glavna-ii"))
        self.assertTrue(is_known_target("integrabilni3"))
        self.assertFalse(is_known_target("L9"))

    def test_unknown_target(self):
        """Unknown ids are rejected before anything runs."""
        with self.assertRaises(ValueError):
            run_verification(make_context(3, [1.0]), ["L1", "L9"])

    def test_default_targets(self):
        """Defaults follow the hypotheses the system meets."""
        self.assertEqual(default_targets(make_context(5, [1.0, 1.0])),
                         ["L1", "L2", "L3", "casimir", "L4", "L5", "glavna-i"])
        self.assertEqual(default_targets(make_context(3, [1.0])), ["L1", "L2", "L3", "casimir", "stara"])


if __name__ == "__main__":
    unittest.main()
