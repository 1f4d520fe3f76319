"""
Magnetic Poisson bracket, Dirac bracket and exact identity certification.

All brackets are computed in the canonical basis of the field, where the
magnetic matrix is block diagonal with entries kappa[2i-1, 2i] = blocks[i].
"""

import logging
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import sympy

from .exceptions import DegreeCapExceeded, DimensionMismatch, NotClosed
from .phase import (MagneticField, PhaseState, SystemParams, python_rng,
                    sample_ambient_rational_point, sample_constrained_point)
from .polynomials import Polynomial, RationalObservable, phi1, phi2

logger = logging.getLogger(__name__)

DEFAULT_DEGREE_CAP = 12
DEFAULT_TRIALS = 200
TRIALS_PER_DEGREE = 8
EXTRA_SOLVE_POINTS = 4

Observable = Union[Polynomial, RationalObservable]


@lru_cache(maxsize=None)
def constraint_polynomials(n: int) -> Tuple[Polynomial, Polynomial]:
    """(phi1, phi2) for dimension n."""
    return phi1(n), phi2(n)


def _check_inputs(F: Polynomial, G: Polynomial, field: MagneticField, degree_cap: int) -> int:
    if F.nvars != G.nvars:
        raise DimensionMismatch(f"observables in {F.nvars} and {G.nvars} variables")
    if F.nvars % 2 or F.nvars // 2 != field.n:
        raise DimensionMismatch(f"{F.nvars} variables do not match the field dimension {field.n}")
    for poly in (F, G):
        if poly.degree > degree_cap:
            raise DegreeCapExceeded(f"degree {poly.degree} exceeds the cap {degree_cap}")
    return field.n


def magnetic_bracket(F: Polynomial, G: Polynomial, field: MagneticField, params: SystemParams,
                     degree_cap: int = DEFAULT_DEGREE_CAP) -> Polynomial:
    """
    Twisted Poisson bracket {F, G}^kappa.

    {F,G}^kappa = sum_i (F_gamma_i G_p_i - F_p_i G_gamma_i) + s sum_ij kappa_ij F_p_i G_p_j

    Args:
        F: First observable
        G: Second observable
        field: Canonicalized magnetic field
        params: System parameters (s enters the magnetic term)
        degree_cap: Maximum total degree accepted for F and G

    Returns:
        Exact polynomial bracket

    Raises:
        DimensionMismatch: If F, G and the field disagree on n
        DegreeCapExceeded: If F or G is above the degree cap
    """
    n = _check_inputs(F, G, field, degree_cap)
    result = Polynomial.zero(F.nvars)
    if F.is_zero() or G.is_zero():
        return result
    dF = [F.derivative(i) for i in range(2 * n)]
    dG = [G.derivative(i) for i in range(2 * n)]
    for i in range(n):
        result = result + dF[i] * dG[n + i] - dF[n + i] * dG[i]
    s = params.exact_s
    for i, kappa in enumerate(field.exact_blocks):
        if kappa:
            a, b = n + 2 * i, n + 2 * i + 1
            result = result + (dF[a] * dG[b] - dF[b] * dG[a]).scale(s * kappa)
    return result


def dirac_bracket(F: Polynomial, G: Polynomial, field: MagneticField, params: SystemParams,
                  degree_cap: int = DEFAULT_DEGREE_CAP) -> RationalObservable:
    """
    Dirac bracket of the constraints phi1 = <gamma, gamma>, phi2 = <p, gamma>.

    {F,G}_d = {F,G} - ({F,phi1}{G,phi2} - {F,phi2}{G,phi1}) / {phi1,phi2}, with
    {phi1,phi2} = 2 phi1. The result is returned over the denominator (2 phi1)^k
    with common phi1 factors cancelled.

    Returns:
        Normalized RationalObservable; phi1 and phi2 are Casimirs (zero numerator)
    """
    n = _check_inputs(F, G, field, degree_cap)
    P1, P2 = constraint_polynomials(n)
    fg = magnetic_bracket(F, G, field, params, degree_cap)
    f1 = magnetic_bracket(F, P1, field, params, degree_cap)
    f2 = magnetic_bracket(F, P2, field, params, degree_cap)
    g1 = magnetic_bracket(G, P1, field, params, degree_cap)
    g2 = magnetic_bracket(G, P2, field, params, degree_cap)
    numerator = P1.scale(2) * fg - (f1 * g2 - f2 * g1)
    return RationalObservable(numerator, 1).normalized()


@dataclass
class IdentityVerdict:
    """
    Outcome of an exact identity test.

    Attributes:
        holds: True when every evaluation was exactly zero
        trials: Number of points evaluated (or requested, when it holds)
        domain: "constrained" or "ambient"
        counterexample: Point with a nonzero value, when found
        value: Exact nonzero value at the counterexample
    """
    holds: bool
    trials: int
    domain: str
    counterexample: Optional[PhaseState] = None
    value: Optional[Fraction] = None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"holds": self.holds, "trials": self.trials, "domain": self.domain}
        if self.counterexample is not None:
            out["counterexample"] = {
                "gamma": [str(x) for x in self.counterexample.gamma],
                "p": [str(x) for x in self.counterexample.p],
            }
            out["value"] = str(self.value)
        return out


def identity_test(expr: Observable, domain: str = "constrained", trials: int = DEFAULT_TRIALS,
                  seed=0, bound: int = 1000) -> IdentityVerdict:
    """
    Certify expr == 0 by exact evaluation at random rational points.

    On the constrained domain points are exact stereographic samples of
    T*S^{n-1}; on the ambient domain they are random rationals with phi1 != 0.
    Only the numerator is evaluated, the denominator never vanishes there.
    The trial count is raised to 8 x degree when lower.

    Args:
        expr: Polynomial or RationalObservable
        domain: "constrained" or "ambient"
        trials: Number of evaluation points
        seed: Seed for the point sampler
        bound: Bound on sampled numerators/denominators

    Returns:
        IdentityVerdict with a witness point when the identity fails
    """
    numerator = expr.numerator if isinstance(expr, RationalObservable) else expr
    if domain not in ("constrained", "ambient"):
        raise ValueError(f"Unknown domain: {domain}")
    minimum = TRIALS_PER_DEGREE * numerator.degree
    if trials < minimum:
        logger.warning("raising identity-test trials from %d to %d (degree %d)",
                       trials, minimum, numerator.degree)
        trials = minimum
    if numerator.is_zero():
        logger.debug("identity holds symbolically (zero numerator)")
        return IdentityVerdict(True, trials, domain)
    n = numerator.nvars // 2
    rng = python_rng(seed)
    for trial in range(trials):
        if domain == "constrained":
            point = sample_constrained_point(n, mode="rational", seed=rng, bound=bound)
        else:
            point = sample_ambient_rational_point(n, seed=rng, bound=bound)
        value = numerator.evaluate(point)
        if value != 0:
            if isinstance(expr, RationalObservable):
                value = expr.evaluate(point)
            logger.debug("identity fails at trial %d", trial)
            return IdentityVerdict(False, trial + 1, domain, counterexample=point, value=value)
    return IdentityVerdict(True, trials, domain)


@dataclass
class StructureTable:
    """
    Expansions {G_i, G_j}_d = sum_k c_k G_k + c_0 on T*S^{n-1}.

    Attributes:
        names: Generator names in order
        entries: (name_i, name_j) -> {name_k or "1": coefficient}; empty dict for zero brackets
    """
    names: List[str]
    entries: Dict[Tuple[str, str], Dict[str, Fraction]] = dataclass_field(default_factory=dict)

    def coefficients(self, first: str, second: str) -> Dict[str, Fraction]:
        """Expansion of {first, second}_d, using antisymmetry when needed."""
        if (first, second) in self.entries:
            return dict(self.entries[(first, second)])
        if (second, first) in self.entries:
            return {k: -v for k, v in self.entries[(second, first)].items()}
        if first == second:
            return {}
        raise KeyError(f"no bracket recorded for ({first}, {second})")

    def to_dict(self) -> Dict[str, Dict[str, str]]:
        return {f"{{{a},{b}}}": {k: str(v) for k, v in coeffs.items()}
                for (a, b), coeffs in self.entries.items()}


def _as_named(generators) -> List[Tuple[str, Polynomial]]:
    if isinstance(generators, Mapping):
        return list(generators.items())
    return [(f"G{i + 1}", g) for i, g in enumerate(generators)]


def structure_constants(generators: Union[Sequence[Polynomial], Mapping[str, Polynomial]],
                        field: MagneticField, params: SystemParams, trials: int = DEFAULT_TRIALS,
                        seed=0) -> StructureTable:
    """
    Expand every pairwise Dirac bracket in the span of the generators and 1.

    Coefficients come from an exact rational solve at constrained sample
    points; each expansion is then certified by identity_test on the
    constrained domain.

    Args:
        generators: Polynomials, or a name -> polynomial mapping
        field: Canonicalized magnetic field
        params: System parameters
        trials: Trials for the certification of each expansion
        seed: Seed for the sample points

    Returns:
        StructureTable over all pairs i < j

    Raises:
        NotClosed: If some bracket is not in the span (carries the residual)
    """
    named = _as_named(generators)
    names = [name for name, _ in named]
    table = StructureTable(names)
    if not named:
        return table
    n = field.n
    rng = python_rng(seed)
    count = len(named) + 1 + EXTRA_SOLVE_POINTS
    points = [sample_constrained_point(n, mode="rational", seed=rng) for _ in range(count)]
    basis_rows = [[g.evaluate(pt) for _, g in named] + [Fraction(1)] for pt in points]
    A = sympy.Matrix([[sympy.Rational(v.numerator, v.denominator) for v in row] for row in basis_rows])
    P1, _ = constraint_polynomials(n)

    for i in range(len(named)):
        for j in range(i + 1, len(named)):
            (name_i, G_i), (name_j, G_j) = named[i], named[j]
            bracket = dirac_bracket(G_i, G_j, field, params)
            if bracket.is_zero():
                table.entries[(name_i, name_j)] = {}
                continue
            rhs = sympy.Matrix([_to_sympy(bracket.evaluate(pt)) for pt in points])
            try:
                solution, free = A.gauss_jordan_solve(rhs)
            except ValueError:
                raise NotClosed((name_i, name_j), str(bracket))
            if free.shape[0]:
                solution = solution.subs({symbol: 0 for symbol in free})
            coeffs = [Fraction(int(sympy.fraction(c)[0]), int(sympy.fraction(c)[1])) for c in solution]

            expansion = Polynomial.constant(G_i.nvars, coeffs[-1])
            for (_, G_k), c in zip(named, coeffs[:-1]):
                if c:
                    expansion = expansion + G_k.scale(c)
            residual = bracket.numerator - (P1.scale(2) ** bracket.phi1_power) * expansion
            verdict = identity_test(residual, domain="constrained", trials=trials, seed=rng)
            if not verdict.holds:
                raise NotClosed((name_i, name_j), str(residual))
            entry = {name: c for name, c in zip(names + ["1"], coeffs) if c}
            table.entries[(name_i, name_j)] = entry
            logger.debug("{%s, %s}_d = %s", name_i, name_j, entry)
    logger.info("structure constants closed for %d generators", len(named))
    return table


def _to_sympy(value: Fraction):
    return sympy.Rational(value.numerator, value.denominator)


def poisson_tensor(field: MagneticField, params: SystemParams) -> np.ndarray:
    """Constant magnetic Poisson tensor [[0, I], [-I, s K]]."""
    n = field.n
    Pi = np.zeros((2 * n, 2 * n))
    Pi[:n, n:] = np.eye(n)
    Pi[n:, :n] = -np.eye(n)
    Pi[n:, n:] = float(params.s) * field.canonical_kappa
    return Pi


def dirac_poisson_tensor(y: np.ndarray, field: MagneticField, params: SystemParams) -> np.ndarray:
    """
    Dirac tensor D at y, so that {F,G}_d(y) = grad F . D . grad G.

    D = Pi - (a b^T - b a^T) / (2 phi1), with a = Pi grad phi1 and b = Pi grad phi2.
    """
    y = np.asarray(y, dtype=float)
    n = field.n
    gamma, p = y[:n], y[n:]
    Pi = poisson_tensor(field, params)
    a = Pi @ np.concatenate([2.0 * gamma, np.zeros(n)])
    b = Pi @ np.concatenate([p, gamma])
    c = 2.0 * float(np.dot(gamma, gamma))
    return Pi - (np.outer(a, b) - np.outer(b, a)) / c
