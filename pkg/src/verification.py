"""
Verification targets and reports.

Every target certifies one statement about the magnetic flows and records its
checks as verdicts: exact bracket identities, structure constants of the
integral algebras, rank and dimension certificates, closed orbits and the
invariance of symmetry reductions along integrated trajectories.

Targets are looked up by id in ``TARGETS``; the certificate ids (stara,
glavna-*, integrabilni*) are resolved against the block pattern through
``covered_cases``.
"""

import logging
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .brackets import (DEFAULT_TRIALS, IdentityVerdict, constraint_polynomials, dirac_bracket,
                       identity_test, magnetic_bracket, structure_constants)
from .dynamics import (FlowSpec, common_period, integrate, larmor_period, orthogonal_reduction,
                       pendulum_circle_radius, pendulum_momentum_drift, rn_closed_form, unitary_reduction)
from .exceptions import HypothesisViolation, InconsistentRanks, NotClosed, VerificationFailure
from .integrals import (IntegralCatalog, build_catalog, build_pendulum_catalog, build_rn_catalog,
                        covered_cases, jacobian_rank, liouville_set, nc_dimension_check, pair_label,
                        verify_catalog, zero_region)
from .phase import (GaugeOffset, MagneticField, PhaseState, SystemParams, numpy_rng, python_rng,
                    sample_constrained_point)
from .polynomials import Polynomial, RationalObservable, random_polynomial

logger = logging.getLogger(__name__)

DRIFT_TOLERANCE = 1e-8
ORACLE_TOLERANCE = 1e-8
CLOSED_ORBIT_TOLERANCE = 1e-6
RADIUS_TOLERANCE = 1e-4
CASIMIR_SAMPLES = 20
ORACLE_PERIODS = 10
REDUCTION_T_END = 50.0

CERTIFICATE_PREFIXES = ("stara", "glavna", "integrabilni")


@dataclass
class Verdict:
    """
    One check of one target.

    Attributes:
        target: Id of the statement the check certifies
        check: What was checked
        holds: Outcome
        asserted: False for checks that are recorded without being required
        details: Domain, trial count, counterexample, measured errors
    """
    target: str
    check: str
    holds: bool
    asserted: bool = True
    details: Dict[str, Any] = dataclass_field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"target": self.target, "check": self.check, "holds": self.holds,
                "asserted": self.asserted, **self.details}


@dataclass
class VerificationReport:
    """
    Results of a verification run.

    Attributes:
        verdicts: Every check in run order
        drift: Table name -> quantity -> max deviation
        certificates: Target -> dimension certificate with its expected values
        structure: Target -> bracket expansion table
        provenance: Seed, config hash and versions
    """
    verdicts: List[Verdict] = dataclass_field(default_factory=list)
    drift: Dict[str, Dict[str, float]] = dataclass_field(default_factory=dict)
    certificates: Dict[str, Dict[str, Any]] = dataclass_field(default_factory=dict)
    structure: Dict[str, Dict[str, Any]] = dataclass_field(default_factory=dict)
    provenance: Dict[str, Any] = dataclass_field(default_factory=dict)

    def add(self, target: str, check: str, holds: bool, asserted: bool = True, **details) -> Verdict:
        verdict = Verdict(target, check, bool(holds), asserted, details)
        self.verdicts.append(verdict)
        level = logging.INFO if verdict.holds or not asserted else logging.WARNING
        logger.log(level, "%s / %s: %s", target, check, "holds" if verdict.holds else "FAILS")
        return verdict

    def add_identity(self, target: str, check: str, verdict: IdentityVerdict, asserted: bool = True) -> Verdict:
        details = verdict.to_dict()
        details.pop("holds")
        return self.add(target, check, verdict.holds, asserted, **details)

    @property
    def failures(self) -> List[Dict[str, Any]]:
        """Asserted checks that did not hold."""
        return [v.to_dict() for v in self.verdicts if v.asserted and not v.holds]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def targets(self) -> List[str]:
        return list(dict.fromkeys(v.target for v in self.verdicts))

    def raise_for_failures(self):
        if self.failures:
            raise VerificationFailure(self.failures)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "targets": self.targets,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "drift": self.drift,
            "certificates": self.certificates,
            "structure": self.structure,
            "provenance": self.provenance,
        }


class VerificationContext:
    """
    Everything a target needs: the system, its catalogs and the run settings.

    Catalogs are built lazily and shared between targets. One random stream
    seeded from ``seed`` feeds every identity test, so a report is reproducible
    from its configuration.
    """

    def __init__(self, params: SystemParams, field: MagneticField, trials: int = DEFAULT_TRIALS,
                 seed: int = 0, points: int = 20, t_end: float = 100.0, rel_tol: float = 1e-10,
                 abs_tol: float = 1e-12, initial: Optional[PhaseState] = None, r: Optional[int] = None,
                 b: Sequence[float] = (0.0, 0.0, 0.0), gauge: Optional[GaugeOffset] = None):
        self.params = params
        self.field = field
        self.trials = trials
        self.seed = seed
        self.points = points
        self.t_end = t_end
        self.rel_tol = rel_tol
        self.abs_tol = abs_tol
        self.initial = initial
        self.r = r
        self.b = tuple(b)
        self.gauge = gauge
        self.rng = python_rng(seed)
        self._catalog: Optional[IntegralCatalog] = None

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def catalog(self) -> IntegralCatalog:
        if self._catalog is None:
            self._catalog = build_catalog(self.params, self.field)
        return self._catalog

    def phi_names(self) -> List[str]:
        return [f"Phi_{pair_label(2 * i + 1, 2 * i + 2)}" for i in range(len(self.field.blocks))]

    def identity(self, expr, domain: str = "constrained") -> IdentityVerdict:
        return identity_test(expr, domain, self.trials, self.rng)

    def dirac(self, F: Polynomial, G: Polynomial) -> RationalObservable:
        return dirac_bracket(F, G, self.field, self.params)

    def sphere_initial(self) -> PhaseState:
        if self.initial is not None:
            return self.initial
        return sample_constrained_point(self.n, "float", numpy_rng(self.seed))

    def ambient_initial(self) -> PhaseState:
        if self.initial is not None:
            return self.initial
        rng = numpy_rng(self.seed)
        return PhaseState(rng.normal(size=self.n), rng.normal(size=self.n))


def relation(bracket: RationalObservable, expected: Polynomial) -> RationalObservable:
    """bracket - expected, over the denominator of the bracket."""
    P1, _ = constraint_polynomials(expected.nvars // 2)
    scale = P1.scale(2) ** bracket.phi1_power
    return RationalObservable(bracket.numerator - scale * expected, bracket.phi1_power)


def _equal_pair(ctx: VerificationContext) -> Tuple[int, int]:
    pairs = ctx.catalog.metadata["equal_pairs"]
    if not pairs:
        raise HypothesisViolation(f"no two equal blocks in {list(ctx.field.blocks)}")
    nonzero = [(i, j) for i, j in pairs if ctx.field.blocks[i - 1] != 0]
    i, j = (nonzero or pairs)[0]
    return i - 1, j - 1


def _psi_label(i: int, j: int) -> str:
    return f"{pair_label(2 * i + 1, 2 * i + 2)}_{pair_label(2 * j + 1, 2 * j + 2)}"


# bracket relation targets

def check_phi_commutation(ctx: VerificationContext, report: VerificationReport):
    """Block momenta Phi are first integrals and commute on R^{2n}_*."""
    catalog = ctx.catalog
    names = ctx.phi_names()
    for name in names:
        verdict = ctx.identity(ctx.dirac(catalog[name], catalog["H"]), "constrained")
        report.add_identity("L1", f"{{{name}, H}}_d = 0", verdict)
    for x, first in enumerate(names):
        for second in names[x + 1:]:
            verdict = ctx.identity(ctx.dirac(catalog[first], catalog[second]), "ambient")
            report.add_identity("L1", f"{{{first}, {second}}}_d = 0", verdict)


def check_integral_j(ctx: VerificationContext, report: VerificationReport):
    """J is a first integral; so is mu when n is even and the blocks are equal."""
    catalog = ctx.catalog
    for name in ("J", "J4H2", "mu"):
        if name in catalog:
            verdict = ctx.identity(ctx.dirac(catalog[name], catalog["H"]), "constrained")
            report.add_identity("L2", f"{{{name}, H}}_d = 0", verdict)


def check_j_commutation(ctx: VerificationContext, report: VerificationReport):
    """
    {J, Phi}_d = 0 for every block momentum.

    The constrained verdict is asserted; the ambient one is recorded only.
    """
    catalog = ctx.catalog
    for name in ctx.phi_names():
        bracket = ctx.dirac(catalog["J"], catalog[name])
        report.add_identity("L3", f"{{J, {name}}}_d = 0", ctx.identity(bracket, "constrained"))
        report.add_identity("L3", f"{{J, {name}}}_d = 0 off the leaf", ctx.identity(bracket, "ambient"),
                            asserted=False)


def check_independence(ctx: VerificationContext, report: VerificationReport):
    """
    Rank of d(H, J, Phi_1..Phi_k) on T*S^{n-1}.

    For n >= 5 the k + 2 functions are independent unless n is even and all
    blocks are equal, where J = 2 s^2 kappa^2 H / m - mu^2 drops the rank by one.
    """
    if ctx.n < 5:
        raise HypothesisViolation(f"independence of H, J and the Phi's is stated for n >= 5, got n = {ctx.n}")
    catalog = ctx.catalog
    names = ["H", "J"] + ctx.phi_names()
    family = catalog.subset(names)
    k = len(ctx.field.blocks)
    equal = ctx.n % 2 == 0 and len(set(ctx.field.blocks)) == 1
    expected = k + 1 if equal else k + 2
    rng = numpy_rng(ctx.seed)
    ranks = [jacobian_rank(family, sample_constrained_point(ctx.n, "float", rng)) for _ in range(ctx.points)]
    rank = max(ranks)
    report.add("L4", f"rank d({', '.join(names)}) = {expected}", rank == expected,
               rank=rank, expected=expected, points=len(ranks))


def _u2_expected(phi_i: str, phi_j: str, psi1: str, psi2: str) -> Dict[Tuple[str, str], Dict[str, Fraction]]:
    one, two = Fraction(1), Fraction(2)
    return {
        (phi_i, phi_j): {},
        (phi_i, psi1): {psi2: -one},
        (phi_j, psi1): {psi2: one},
        (phi_i, psi2): {psi1: one},
        (phi_j, psi2): {psi1: -one},
        (psi1, psi2): {phi_j: two, phi_i: -two},
    }


def check_u2_algebra(ctx: VerificationContext, report: VerificationReport):
    """
    Psi integrals of an equal pair and the u(2) algebra they span with the Phi's.

    Each relation is certified on T*S^{n-1} (asserted) and off the leaf
    (recorded); the structure constants are then recomputed in the basis
    e0 = Phi_i + Phi_j, e1 = -Psi1/2, e2 = -Psi2/2, e3 = (Phi_j - Phi_i)/2,
    where they must be those of so(3) + R.
    """
    catalog = ctx.catalog
    i, j = _equal_pair(ctx)
    label = _psi_label(i, j)
    names = [f"Phi_{pair_label(2 * i + 1, 2 * i + 2)}", f"Phi_{pair_label(2 * j + 1, 2 * j + 2)}",
             f"Psi1_{label}", f"Psi2_{label}"]
    for name in names[2:]:
        verdict = ctx.identity(ctx.dirac(catalog[name], catalog["H"]), "constrained")
        report.add_identity("L5", f"{{{name}, H}}_d = 0", verdict)

    expected = _u2_expected(*names)
    zero = Polynomial.zero(2 * ctx.n)
    for (a, b), coefficients in expected.items():
        rhs = sum((catalog[name].scale(c) for name, c in coefficients.items()), zero)
        expr = relation(ctx.dirac(catalog[a], catalog[b]), rhs)
        check = f"{{{a}, {b}}}_d = {rhs if coefficients else 0}"
        report.add_identity("L5", check, ctx.identity(expr, "constrained"))
        report.add_identity("L5", f"{check} off the leaf", ctx.identity(expr, "ambient"), asserted=False)

    generators = {name: catalog[name] for name in names}
    try:
        table = structure_constants(generators, ctx.field, ctx.params, ctx.trials, ctx.rng)
    except NotClosed as error:
        report.add("L5", "quadruple closes", False, pair=list(error.pair), residual=error.residual)
        return
    matches = all(table.coefficients(a, b) == coefficients for (a, b), coefficients in expected.items())
    report.add("L5", "structure constants of the quadruple", matches)
    report.structure["L5"] = table.to_dict()

    phi_i, phi_j, psi1, psi2 = (catalog[name] for name in names)
    half = Fraction(1, 2)
    basis = {
        "e0": phi_i + phi_j,
        "e1": psi1.scale(-half),
        "e2": psi2.scale(-half),
        "e3": (phi_j - phi_i).scale(half),
    }
    so3 = {("e0", "e1"): {}, ("e0", "e2"): {}, ("e0", "e3"): {},
           ("e1", "e2"): {"e3": Fraction(1)}, ("e2", "e3"): {"e1": Fraction(1)}, ("e1", "e3"): {"e2": Fraction(-1)}}
    try:
        table = structure_constants(basis, ctx.field, ctx.params, ctx.trials, ctx.rng)
    except NotClosed as error:
        report.add("L5", "e-basis closes", False, pair=list(error.pair), residual=error.residual)
        return
    matches = all(table.coefficients(a, b) == coefficients for (a, b), coefficients in so3.items())
    report.add("L5", "e-basis constants are those of so(3) + R", matches)
    report.structure["L5-e"] = table.to_dict()


def check_unitary_algebra(ctx: VerificationContext, report: VerificationReport):
    """The Phi's and Psi's of r >= 3 equal blocks close into a Lie algebra of dimension r^2."""
    groups = [g for g in ctx.field.equal_groups() if len(g) >= 3]
    if not groups:
        raise HypothesisViolation(f"no three equal blocks in {list(ctx.field.blocks)}")
    group = max(groups, key=len)
    catalog = ctx.catalog
    names = [f"Phi_{pair_label(2 * i + 1, 2 * i + 2)}" for i in group]
    for x, i in enumerate(group):
        for j in group[x + 1:]:
            label = _psi_label(i, j)
            names.extend([f"Psi1_{label}", f"Psi2_{label}"])
    generators = {name: catalog[name] for name in names}
    try:
        table = structure_constants(generators, ctx.field, ctx.params, ctx.trials, ctx.rng)
    except NotClosed as error:
        report.add("u3", f"u({len(group)}) closure", False, pair=list(error.pair), residual=error.residual)
        return
    report.add("u3", f"u({len(group)}) closure", True, generators=len(names))
    report.structure["u3"] = table.to_dict()


def check_casimirs(ctx: VerificationContext, report: VerificationReport):
    """phi1 and phi2 have zero Dirac bracket with random cubic observables."""
    P1, P2 = constraint_polynomials(ctx.n)
    failures = 0
    for _ in range(CASIMIR_SAMPLES):
        F = random_polynomial(2 * ctx.n, 3, ctx.rng)
        for P in (P1, P2):
            if not ctx.dirac(P, F).is_zero():
                failures += 1
    report.add("casimir", "{phi1, F}_d = {phi2, F}_d = 0", failures == 0,
               samples=CASIMIR_SAMPLES, failures=failures)


# flow targets

def check_rn_flow(ctx: VerificationContext, report: VerificationReport):
    """
    The R^n flow: every gauge and block integral is conserved exactly, and the
    integrator follows the closed-form Larmor solution for ten periods.
    """
    catalog = build_rn_catalog(ctx.params, ctx.field, ctx.gauge)
    for name, poly in catalog.observables.items():
        verdict = ctx.identity(magnetic_bracket(poly, catalog["H"], ctx.field, ctx.params), "ambient")
        report.add_identity("ocigledna", f"{{{name}, H}} = 0", verdict)
    for x, first in enumerate(catalog.names):
        for second in catalog.names[x + 1:]:
            if first.startswith("PhiG") and second.startswith("PhiG"):
                bracket = magnetic_bracket(catalog[first], catalog[second], ctx.field, ctx.params)
                report.add_identity("ocigledna", f"{{{first}, {second}}} = 0", ctx.identity(bracket, "ambient"))

    nonzero = [b for b in ctx.field.blocks if b != 0]
    t_end = ORACLE_PERIODS * larmor_period(min(nonzero), ctx.params) if nonzero else ctx.t_end
    initial = ctx.ambient_initial()
    spec = FlowSpec("ambient", ctx.params, ctx.field)
    trajectory = integrate(spec, initial, t_end, ctx.rel_tol, ctx.abs_tol, catalog=catalog)
    error = max(float(np.max(np.abs(rn_closed_form(initial, ctx.field, ctx.params, t).as_array() - y)))
                for t, y in zip(trajectory.times, trajectory.states))
    report.add("ocigledna", "integrator matches the closed form", error < ORACLE_TOLERANCE,
               max_error=error, t_end=t_end)
    report.drift["ocigledna"] = dict(trajectory.drift, closed_form=error)


def check_closed_orbits(ctx: VerificationContext, report: VerificationReport):
    """With commensurable blocks every R^n trajectory closes after the common period."""
    period = common_period(ctx.field, ctx.params)
    if period is None:
        raise HypothesisViolation(f"blocks {list(ctx.field.blocks)} have no common period (n = {ctx.n})")
    initial = ctx.ambient_initial()
    y0 = initial.as_array()
    exact = float(np.max(np.abs(rn_closed_form(initial, ctx.field, ctx.params, period).as_array() - y0)))
    report.add("superintegrable", "closed form returns after the common period", exact < CLOSED_ORBIT_TOLERANCE,
               period=period, error=exact)
    trajectory = integrate(FlowSpec("ambient", ctx.params, ctx.field), initial, period, ctx.rel_tol, ctx.abs_tol)
    error = float(np.max(np.abs(trajectory.states[-1] - y0)))
    report.add("superintegrable", "integrated orbit closes", error < CLOSED_ORBIT_TOLERANCE,
               period=period, error=error)


def check_pendulum(ctx: VerificationContext, report: VerificationReport):
    """
    Magnetic pendulum on S^2: exact conservation of its integrals, their drift
    along a trajectory and, for b = 0, the radius of the magnetic geodesic circles.
    """
    if ctx.n != 3:
        raise HypothesisViolation(f"the magnetic pendulum needs n = 3, got n = {ctx.n}")
    catalog = build_pendulum_catalog(ctx.params, ctx.b)
    for name, verdict in verify_catalog(catalog, ctx.trials, ctx.rng).items():
        report.add_identity("pendulum", f"{name} is conserved", verdict)

    spec = FlowSpec("pendulum", ctx.params, b=ctx.b)
    initial = ctx.initial or PhaseState((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), constrained=True)
    trajectory = integrate(spec, initial, ctx.t_end, ctx.rel_tol, ctx.abs_tol, catalog=catalog)
    drift = pendulum_momentum_drift(trajectory)
    report.drift["pendulum"] = dict(trajectory.drift)
    worst = max(drift.values())
    report.add("pendulum", "momentum drift", worst < DRIFT_TOLERANCE, max_drift=worst)

    if not any(ctx.b):
        s, m = float(ctx.params.s), float(ctx.params.m)
        simulated = pendulum_circle_radius(s, m, via="simulate", rel_tol=ctx.rel_tol, abs_tol=ctx.abs_tol)
        formula = pendulum_circle_radius(s, m)
        report.add("pendulum", "circle radius arctan(1/|s|)", abs(simulated - formula) < RADIUS_TOLERANCE,
                   simulated=simulated, formula=formula)


def reduction_run(ctx: VerificationContext, r: Optional[int] = None) -> Dict[str, Any]:
    """
    Reduce the initial state by the U(r) or orthogonal symmetry and integrate it.

    r >= 2 uses the unitary reduction over r equal nonzero blocks, r = 1 the
    rotation of the zero-field coordinates. Without r the largest available
    reduction is chosen.

    Returns:
        Dict with r, the reducing matrix, the reduced state, the zeroed
        coordinates (1-based) and their max size along the trajectory

    Raises:
        HypothesisViolation: If the blocks do not admit the reduction
    """
    if r is None:
        groups = [g for g in ctx.field.equal_groups() if ctx.field.blocks[g[0]] != 0]
        largest = max((len(g) for g in groups), default=0)
        if largest >= 3:
            r = largest
        elif len(zero_region(ctx.field)) >= 3:
            r = 1
        else:
            raise HypothesisViolation(f"blocks {list(ctx.field.blocks)} admit no reduction")
    initial = ctx.sphere_initial()
    if r == 1:
        result = orthogonal_reduction(initial, ctx.field, ctx.params)
    else:
        result = unitary_reduction(initial, r, ctx.field, ctx.params)
    n = ctx.n
    t_end = min(ctx.t_end, REDUCTION_T_END)
    trajectory = integrate(FlowSpec("sphere", ctx.params, ctx.field), result.reduced, t_end,
                           ctx.rel_tol, ctx.abs_tol)
    columns = result.zeroed + [n + c for c in result.zeroed]
    size = float(np.max(np.abs(trajectory.states[:, columns]))) if columns else 0.0
    return {
        "r": r,
        "R": result.R.tolist(),
        "rotation": result.rotation.tolist(),
        "reduced": {"gamma": list(result.reduced.gamma), "p": list(result.reduced.p)},
        "zeroed": [c + 1 for c in result.zeroed],
        "t_end": t_end,
        "max_zeroed": size,
        "drift": trajectory.drift,
    }


def check_reduction(ctx: VerificationContext, report: VerificationReport):
    """Coordinates annihilated by a symmetry reduction stay zero along the flow."""
    run = reduction_run(ctx, ctx.r)
    report.add("redukcija", f"zeroed coordinates stay zero (r = {run['r']})",
               run["max_zeroed"] < DRIFT_TOLERANCE, max_zeroed=run["max_zeroed"], zeroed=run["zeroed"])
    report.drift["redukcija"] = {"max_zeroed": run["max_zeroed"]}


# certificate targets

SO_CHAIN_CASES = ("glavna-iv", "integrabilni-i", "integrabilni-ii", "integrabilni-iii")
PLAIN_CASES = ("stara", "glavna-liouville")


def _commuting_family(ctx: VerificationContext, case: str) -> Dict[str, Polynomial]:
    catalog = ctx.catalog
    if case in PLAIN_CASES:
        return {name: catalog[name] for name in ["H", "J"] + ctx.phi_names()}
    if case in SO_CHAIN_CASES:
        return liouville_set(catalog, "so_chain")
    family = liouville_set(catalog, "u_chain")
    if case == "integrabilni3":
        family.update(liouville_set(catalog, "so_chain"))
    return family


def check_certificate(target: str, ctx: VerificationContext, report: VerificationReport):
    """
    Dimension certificate of the catalog against the case covering the blocks,
    plus pairwise commutation of the case's commuting family.
    """
    cases = [c for c in covered_cases(ctx.n, ctx.field.blocks)
             if c.case == target or c.case.startswith(target + "-")]
    if not cases:
        raise HypothesisViolation(f"{target} does not cover n = {ctx.n} with blocks {list(ctx.field.blocks)}")
    case = cases[0]
    catalog = ctx.catalog
    try:
        certificate = nc_dimension_check(list(catalog.observables.values()), ctx.points,
                                         ctx.field, ctx.params, ctx.seed)
    except InconsistentRanks as error:
        report.add(case.case, "ranks are stable across sample points", False,
                   what=error.what, strata={str(k): v for k, v in error.strata.items()})
        return
    holds = (certificate.ddim, certificate.dind) == (case.ddim, case.dind) and certificate.sum_ok
    report.add(case.case, f"(ddim, dind) = ({case.ddim}, {case.dind})", holds,
               ddim=certificate.ddim, dind=certificate.dind, sum=certificate.ddim + certificate.dind)
    report.certificates[case.case] = dict(certificate.to_dict(), expected={"ddim": case.ddim, "dind": case.dind})

    family = _commuting_family(ctx, case.case)
    names = list(family)
    for x, first in enumerate(names):
        for second in names[x + 1:]:
            verdict = ctx.identity(ctx.dirac(family[first], family[second]), "constrained")
            report.add_identity(case.case, f"{{{first}, {second}}}_d = 0", verdict)


TargetCheck = Callable[[VerificationContext, VerificationReport], None]

TARGETS: Dict[str, TargetCheck] = {
    "L1": check_phi_commutation,
    "L2": check_integral_j,
    "L3": check_j_commutation,
    "L4": check_independence,
    "L5": check_u2_algebra,
    "u3": check_unitary_algebra,
    "casimir": check_casimirs,
    "ocigledna": check_rn_flow,
    "superintegrable": check_closed_orbits,
    "pendulum": check_pendulum,
    "redukcija": check_reduction,
}


def is_known_target(target: str) -> bool:
    return target in TARGETS or target.startswith(CERTIFICATE_PREFIXES)


def default_targets(ctx: VerificationContext) -> List[str]:
    """Targets whose hypotheses the system meets."""
    targets = ["L1", "L2", "L3", "casimir"]
    if ctx.n >= 5:
        targets.append("L4")
    if ctx.catalog.metadata["equal_pairs"]:
        targets.append("L5")
    if any(len(g) >= 3 for g in ctx.field.equal_groups()):
        targets.append("u3")
    cases = covered_cases(ctx.n, ctx.field.blocks)
    if cases:
        targets.append(cases[0].case)
    return targets


def run_verification(ctx: VerificationContext, targets: Optional[Sequence[str]] = None,
                     provenance: Optional[Dict[str, Any]] = None) -> VerificationReport:
    """
    Run verification targets and collect their verdicts.

    Args:
        ctx: System and settings
        targets: Target ids (default: every target whose hypothesis holds)
        provenance: Seed, config hash and versions to store in the report

    Returns:
        VerificationReport; failed asserted checks are listed in ``failures``

    Raises:
        ValueError: For an unknown target id
        HypothesisViolation: If a requested target does not apply to the system
    """
    targets = list(targets) if targets else default_targets(ctx)
    unknown = [t for t in targets if not is_known_target(t)]
    if unknown:
        raise ValueError(f"Unknown verification targets: {unknown}")
    report = VerificationReport(provenance=dict(provenance or {}))
    for target in targets:
        logger.info("verifying %s (n=%d, blocks=%s)", target, ctx.n, list(ctx.field.blocks))
        if target in TARGETS:
            TARGETS[target](ctx, report)
        else:
            check_certificate(target, ctx, report)
    logger.info("verification finished: %d checks, %d failures", len(report.verdicts), len(report.failures))
    return report
