"""
First integrals of the magnetic flows and their independence ranks.

Catalogs are built in the canonical basis of the field. The sphere catalog
holds the energy, the block momenta Phi, the integral J built from the
Lagrange multiplier mu, the Psi pairs of equal blocks, the rotation momenta of
the zero-field coordinates and the commuting chains; separate catalogs cover
the flow in R^n and the magnetic pendulum on S^2.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import null_space, svdvals

from .brackets import (DEFAULT_TRIALS, IdentityVerdict, dirac_bracket, dirac_poisson_tensor,
                       identity_test, magnetic_bracket)
from .exceptions import InconsistentRanks, NotApplicable, VerificationFailure
from .phase import (GaugeOffset, MagneticField, PhaseState, SystemParams, numpy_rng,
                    sample_constrained_point, to_rational)
from .polynomials import Polynomial, phase_variables

logger = logging.getLogger(__name__)

RANK_TOLERANCE = 1e-8
MIN_RANK_POINTS = 20
INCONSISTENT_FRACTION = 0.25


def pair_label(a: int, b: int) -> str:
    """Label for the 1-based index pair (a, b): "12", or "9_10" past single digits."""
    return f"{a}{b}" if b < 10 else f"{a}_{b}"


@dataclass
class IntegralCatalog:
    """
    Named first integrals of one system.

    Attributes:
        params: System parameters
        field: Canonicalized magnetic field
        setting: "sphere", "ambient" or "pendulum"
        observables: Name -> polynomial, in insertion order
        metadata: Construction details (zero region, equal groups, skipped pairs)
    """
    params: SystemParams
    field: Optional[MagneticField]
    setting: str
    observables: Dict[str, Polynomial] = dataclass_field(default_factory=dict)
    metadata: Dict[str, Any] = dataclass_field(default_factory=dict)

    def __getitem__(self, name: str) -> Polynomial:
        return self.observables[name]

    def __contains__(self, name: str) -> bool:
        return name in self.observables

    def __len__(self) -> int:
        return len(self.observables)

    @property
    def names(self) -> List[str]:
        return list(self.observables)

    def add(self, name: str, poly: Polynomial):
        self.observables[name] = poly

    def subset(self, names: Iterable[str]) -> List[Polynomial]:
        return [self.observables[name] for name in names]

    def evaluate(self, state: PhaseState) -> Dict[str, float]:
        """Floating values of every entry at one state."""
        y = state.as_array()
        return {name: float(poly.evaluate_many(y)) for name, poly in self.observables.items()}

    def evaluate_exact(self, state: PhaseState) -> Dict[str, Fraction]:
        return {name: poly.evaluate(state) for name, poly in self.observables.items()}

    def evaluate_many(self, Y: np.ndarray) -> Dict[str, np.ndarray]:
        """Values of every entry along an array of states (rows)."""
        return {name: poly.evaluate_many(Y) for name, poly in self.observables.items()}


def _block_momentum(gammas, ps, a: int, b: int, coupling: Fraction, offset=(0, 0)) -> Polynomial:
    """gamma_a p_b - gamma_b p_a + coupling/2 (gamma_a^2 + gamma_b^2), gamma shifted by offset."""
    ga = gammas[a] + offset[0]
    gb = gammas[b] + offset[1]
    return ga * ps[b] - gb * ps[a] + (ga * ga + gb * gb).scale(coupling / 2)


def rotation_momentum(gammas, ps, a: int, b: int) -> Polynomial:
    """L_ab = gamma_a p_b - gamma_b p_a (0-based indices)."""
    return gammas[a] * ps[b] - gammas[b] * ps[a]


def psi_pair(gammas, ps, i: int, j: int, s: Fraction, kappa: Fraction) -> Tuple[Polynomial, Polynomial]:
    """
    The two integrals of an equal-block pair (i < j, 0-based block indices).

    Returns:
        (Psi1, Psi2)
    """
    a1, a2 = 2 * i, 2 * i + 1
    b1, b2 = 2 * j, 2 * j + 1
    g, p = gammas, ps
    coupling = s * kappa
    psi1 = ((g[a2] * p[b1] - g[b1] * p[a2]) - (g[a1] * p[b2] - g[b2] * p[a1])
            - (g[a1] * g[b1] + g[a2] * g[b2]).scale(coupling))
    psi2 = ((g[a1] * p[b1] - g[b1] * p[a1]) + (g[a2] * p[b2] - g[b2] * p[a2])
            - (g[a1] * g[b2] - g[a2] * g[b1]).scale(coupling))
    return psi1, psi2


def zero_region(field: MagneticField) -> List[int]:
    """0-based coordinates of the zero blocks plus the odd last coordinate."""
    n = field.n
    region = []
    for i, value in enumerate(field.blocks):
        if value == 0:
            region.extend([2 * i, 2 * i + 1])
    if n % 2:
        region.append(n - 1)
    return region


def energy(params: SystemParams) -> Polynomial:
    """H = <p, p> / 2m."""
    _, ps = phase_variables(params.n)
    total = sum((x * x for x in ps), Polynomial.zero(2 * params.n))
    return total.scale(1 / (2 * params.exact_m))


def lagrange_multiplier(params: SystemParams, field: MagneticField) -> Polynomial:
    """mu = (1/m)(s <p, kappa gamma> - <p, p>)."""
    gammas, ps = phase_variables(params.n)
    s, m = params.exact_s, params.exact_m
    twisted = Polynomial.zero(2 * params.n)
    for i, kappa in enumerate(field.exact_blocks):
        if kappa:
            a, b = 2 * i, 2 * i + 1
            twisted = twisted + (ps[a] * gammas[b] - ps[b] * gammas[a]).scale(kappa)
    return twisted.scale(s / m) - energy(params).scale(2)


def build_catalog(params: SystemParams, field: MagneticField, include_chains: bool = True,
                  verify: bool = False, trials: int = DEFAULT_TRIALS, seed=0) -> IntegralCatalog:
    """
    First integrals of the magnetic flow on T*S^{n-1}.

    Entries: H, Phi_{2i-1,2i} for every block, J and J + 4H^2, mu when n is
    even and all blocks are equal, Psi1/Psi2 for every pair of exactly equal
    blocks, the quartic I for the first equal pair of nonzero blocks, the
    rotation momenta L_ab of the zero-field coordinates, and the commuting
    chains when the block pattern admits them.

    Args:
        params: System parameters
        field: Canonicalized field with field.n == params.n
        include_chains: Add the so / u commuting chains
        verify: Certify every entry with identity_test({F, H}_d) on T*S^{n-1}
        trials: Trials per certification
        seed: Certification seed

    Returns:
        IntegralCatalog in the canonical basis

    Raises:
        VerificationFailure: If verify is set and some entry is not conserved
    """
    n = params.n
    if field.n != n:
        raise ValueError(f"field dimension {field.n} does not match n = {n}")
    gammas, ps = phase_variables(n)
    s, m = params.exact_s, params.exact_m
    blocks = field.exact_blocks
    catalog = IntegralCatalog(params, field, "sphere")

    H = energy(params)
    catalog.add("H", H)
    for i, kappa in enumerate(blocks):
        a, b = 2 * i, 2 * i + 1
        catalog.add(f"Phi_{pair_label(a + 1, b + 1)}", _block_momentum(gammas, ps, a, b, s * kappa))

    mu = lagrange_multiplier(params, field)
    if n % 2 == 0 and len(set(blocks)) == 1:
        catalog.add("mu", mu)
    twisted_energy = Polynomial.zero(2 * n)
    for i, kappa in enumerate(blocks):
        a, b = 2 * i, 2 * i + 1
        twisted_energy = twisted_energy + (ps[a] * ps[a] + ps[b] * ps[b]).scale(kappa * kappa)
    J = twisted_energy.scale(s * s / (m * m)) - mu * mu
    catalog.add("J", J)
    catalog.add("J4H2", J + (H * H).scale(4))

    equal_pairs = []
    for i in range(len(blocks)):
        for j in range(i + 1, len(blocks)):
            if blocks[i] == blocks[j]:
                equal_pairs.append((i, j))
                psi1, psi2 = psi_pair(gammas, ps, i, j, s, blocks[i])
                label = f"{pair_label(2 * i + 1, 2 * i + 2)}_{pair_label(2 * j + 1, 2 * j + 2)}"
                catalog.add(f"Psi1_{label}", psi1)
                catalog.add(f"Psi2_{label}", psi2)
    for i, j in field.near_degenerate:
        if blocks[i] != blocks[j]:
            logger.warning("blocks %d and %d are nearly equal; no Psi integrals for this pair", i + 1, j + 1)

    nonzero_pairs = [(i, j) for i, j in equal_pairs if blocks[i] != 0]
    if nonzero_pairs:
        i, j = nonzero_pairs[0]
        label = f"{pair_label(2 * i + 1, 2 * i + 2)}_{pair_label(2 * j + 1, 2 * j + 2)}"
        phi_i = catalog[f"Phi_{pair_label(2 * i + 1, 2 * i + 2)}"]
        phi_j = catalog[f"Phi_{pair_label(2 * j + 1, 2 * j + 2)}"]
        psi1, psi2 = catalog[f"Psi1_{label}"], catalog[f"Psi2_{label}"]
        catalog.add(f"I_{label}", (phi_i * phi_i + phi_j * phi_j).scale(2) + psi1 * psi1 + psi2 * psi2)

    region = zero_region(field)
    for x in range(len(region)):
        for y in range(x + 1, len(region)):
            a, b = region[x], region[y]
            catalog.add(f"L_{a + 1}_{b + 1}", rotation_momentum(gammas, ps, a, b))

    catalog.metadata.update({
        "zero_region": [a + 1 for a in region],
        "equal_pairs": [(i + 1, j + 1) for i, j in equal_pairs],
        "blocks": [str(b) for b in blocks],
    })

    if include_chains:
        for kind in ("so_chain", "u_chain"):
            try:
                chain = commuting_chain(catalog, kind)
            except NotApplicable:
                continue
            prefix = "I_so" if kind == "so_chain" else "I_u"
            start = 1 if kind == "so_chain" else 2
            for k, poly in enumerate(chain, start=start):
                catalog.add(f"{prefix}_{k}", poly)

    logger.info("built sphere catalog with %d integrals (n=%d, blocks=%s)", len(catalog), n, list(field.blocks))
    if verify:
        verdicts = verify_catalog(catalog, trials=trials, seed=seed)
        catalog.metadata["verdicts"] = {name: v.to_dict() for name, v in verdicts.items()}
        failed = [{"target": name, "check": "first-integral", **v.to_dict()}
                  for name, v in verdicts.items() if not v.holds]
        if failed:
            raise VerificationFailure(failed)
    return catalog


def verify_catalog(catalog: IntegralCatalog, trials: int = DEFAULT_TRIALS, seed=0) -> Dict[str, IdentityVerdict]:
    """
    Certify that every catalog entry is conserved.

    Sphere catalogs test {F, H}_d on T*S^{n-1}; ambient catalogs test
    {F, H}^kappa on R^{2n}; pendulum catalogs test the derivative along the
    polynomial vector field on T*S^2.
    """
    verdicts = {}
    if catalog.setting == "pendulum":
        components = pendulum_field_polynomials(catalog.params, catalog.metadata["b"])
        for name, poly in catalog.observables.items():
            verdicts[name] = identity_test(flow_derivative(poly, components), "constrained", trials, seed)
        return verdicts
    H = catalog["H"]
    for name, poly in catalog.observables.items():
        if catalog.setting == "ambient":
            expr = magnetic_bracket(poly, H, catalog.field, catalog.params)
            verdicts[name] = identity_test(expr, "ambient", trials, seed)
        else:
            expr = dirac_bracket(poly, H, catalog.field, catalog.params)
            verdicts[name] = identity_test(expr, "constrained", trials, seed)
        logger.debug("first-integral check %s: %s", name, verdicts[name].holds)
    return verdicts


def build_rn_catalog(params: SystemParams, field: MagneticField,
                     gauge: Optional[GaugeOffset] = None) -> IntegralCatalog:
    """
    First integrals of the magnetic flow in R^n.

    Entries: H, the block energies H_{2i-1,2i}, the gauge momenta
    PhiG_{2i-1,2i} for the offset Gamma, and p_n for odd n.
    """
    n = params.n
    gammas, ps = phase_variables(n)
    s, m = params.exact_s, params.exact_m
    gauge = gauge or GaugeOffset.zero(n)
    if len(gauge.Gamma) != n:
        raise ValueError(f"gauge offset has {len(gauge.Gamma)} entries, expected {n}")
    Gamma = gauge.exact
    catalog = IntegralCatalog(params, field, "ambient")
    catalog.add("H", energy(params))
    for i, kappa in enumerate(field.exact_blocks):
        a, b = 2 * i, 2 * i + 1
        label = pair_label(a + 1, b + 1)
        catalog.add(f"H_{label}", (ps[a] * ps[a] + ps[b] * ps[b]).scale(1 / (2 * m)))
        catalog.add(f"PhiG_{label}", _block_momentum(gammas, ps, a, b, s * kappa, (Gamma[a], Gamma[b])))
    if n % 2:
        catalog.add(f"p_{n}", ps[n - 1])
    catalog.metadata["gauge"] = [str(g) for g in Gamma]
    logger.info("built R^n catalog with %d integrals", len(catalog))
    return catalog


def cross(u: Sequence[Polynomial], v: Sequence[Polynomial]) -> List[Polynomial]:
    return [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]


def pendulum_field_polynomials(params: SystemParams, b: Sequence) -> List[Polynomial]:
    """
    The pendulum vector field as six polynomials.

    gamma' = p/m, p' = (s/m) gamma x p + b - (<p,p>/m + <b,gamma>) gamma
    """
    if params.n != 3:
        raise ValueError("the magnetic pendulum lives on S^2 (n = 3)")
    gammas, ps = phase_variables(3)
    s, m = params.exact_s, params.exact_m
    b = [to_rational(x) for x in b]
    pp = sum((x * x for x in ps), Polynomial.zero(6))
    bg = sum((g.scale(c) for g, c in zip(gammas, b)), Polynomial.zero(6))
    multiplier = pp.scale(1 / m) + bg
    lorentz = cross(gammas, ps)
    components = [x.scale(1 / m) for x in ps]
    for k in range(3):
        components.append(lorentz[k].scale(s / m) + b[k] - multiplier * gammas[k])
    return components


def flow_derivative(F: Polynomial, components: Sequence[Polynomial]) -> Polynomial:
    """Derivative of F along a polynomial vector field, sum_i dF/dy_i X_i."""
    total = Polynomial.zero(F.nvars)
    for i, X in enumerate(components):
        total = total + F.derivative(i) * X
    return total


def build_pendulum_catalog(params: SystemParams, b: Sequence = (0, 0, 0)) -> IntegralCatalog:
    """
    Integrals of the magnetic pendulum on S^2.

    Energy H = <p,p>/2m - <b,gamma>; for b != 0 the scalar <b, gamma x p + s gamma>,
    for b = 0 the three components Phi_x, Phi_y, Phi_z of gamma x p + s gamma.
    """
    if params.n != 3:
        raise ValueError("the magnetic pendulum lives on S^2 (n = 3)")
    gammas, ps = phase_variables(3)
    s = params.exact_s
    b = [to_rational(x) for x in b]
    catalog = IntegralCatalog(params, None, "pendulum", metadata={"b": b})
    bg = sum((g.scale(c) for g, c in zip(gammas, b)), Polynomial.zero(6))
    catalog.add("H", energy(params) - bg)
    momentum = [c + g.scale(s) for c, g in zip(cross(gammas, ps), gammas)]
    if any(b):
        catalog.add("bPhi", sum((x.scale(c) for x, c in zip(momentum, b)), Polynomial.zero(6)))
    else:
        for axis, poly in zip("xyz", momentum):
            catalog.add(f"Phi_{axis}", poly)
    return catalog


# ranks

@dataclass
class RankEvaluation:
    """Rank of a gradient family at one point with its singular spectrum."""
    rank: int
    singular_values: List[float]
    degenerate: bool = False


def constraint_tangent_basis(y: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of ker(dphi1) and ker(dphi2) at y."""
    n = y.shape[0] // 2
    gamma, p = y[:n], y[n:]
    C = np.vstack([np.concatenate([2.0 * gamma, np.zeros(n)]), np.concatenate([p, gamma])])
    return null_space(C)


def numeric_rank(matrix: np.ndarray, tol: Optional[float] = None) -> Tuple[int, np.ndarray]:
    """Rank by singular values above tol (default 1e-8 x the largest)."""
    if matrix.size == 0:
        return 0, np.zeros(0)
    sv = svdvals(matrix)
    if sv.size == 0 or sv[0] == 0.0:
        return 0, sv
    if tol is None:
        tol = RANK_TOLERANCE * sv[0]
    return int(np.sum(sv > tol)), sv


def differential_spectrum(observables: Sequence[Polynomial], point: PhaseState) -> RankEvaluation:
    """
    Rank of the differentials restricted to the tangent space of T*S^{n-1}.

    Points with p = 0 are flagged as degenerate in the result.
    """
    y = point.as_array()
    n = point.n
    if not observables:
        return RankEvaluation(0, [])
    G = np.array([poly.gradient(y) for poly in observables])
    restricted = G @ constraint_tangent_basis(y)
    rank, sv = numeric_rank(restricted)
    degenerate = not np.any(y[n:])
    if degenerate:
        logger.warning("rank evaluated at a degenerate point (p = 0)")
    return RankEvaluation(rank, [float(x) for x in sv], degenerate)


def jacobian_rank(observables: Sequence[Polynomial], point: PhaseState) -> int:
    """
    Number of functionally independent differentials at a constrained point.

    Args:
        observables: Polynomials in 2n variables
        point: Constrained state

    Returns:
        Rank with singular-value threshold 1e-8 x largest
    """
    return differential_spectrum(observables, point).rank


def bracket_matrix(observables: Sequence[Polynomial], point: PhaseState, field: MagneticField,
                   params: SystemParams) -> np.ndarray:
    """Antisymmetric matrix B_ij = {F_i, F_j}_d evaluated at the point."""
    y = point.as_array()
    G = np.array([poly.gradient(y) for poly in observables])
    D = dirac_poisson_tensor(y, field, params)
    B = G @ D @ G.T
    return 0.5 * (B - B.T)


@dataclass
class DimensionCertificate:
    """
    Differential dimension and index of a family of first integrals.

    Attributes:
        ddim: Max rank of the differentials over the sample points
        bracket_rank: Max rank of the Dirac bracket matrix over the sample points
        dind: ddim - bracket_rank
        phase_dim: 2(n - 1)
        sum_ok: ddim + dind == phase_dim
        ddim_strata: rank -> number of points (differentials)
        bracket_strata: rank -> number of points (bracket matrix)
        spectra: Singular values of the restricted differentials per point
        degenerate_points: Number of sample points with p = 0
    """
    ddim: int
    bracket_rank: int
    dind: int
    phase_dim: int
    sum_ok: bool
    ddim_strata: Dict[int, int] = dataclass_field(default_factory=dict)
    bracket_strata: Dict[int, int] = dataclass_field(default_factory=dict)
    spectra: List[List[float]] = dataclass_field(default_factory=list)
    degenerate_points: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ddim": self.ddim,
            "bracket_rank": self.bracket_rank,
            "dind": self.dind,
            "phase_dim": self.phase_dim,
            "sum": self.ddim + self.dind,
            "sum_ok": self.sum_ok,
            "ddim_strata": {str(k): v for k, v in sorted(self.ddim_strata.items())},
            "bracket_strata": {str(k): v for k, v in sorted(self.bracket_strata.items())},
            "spectra": self.spectra,
            "degenerate_points": self.degenerate_points,
        }


def _top_rank(ranks: List[int], what: str) -> Tuple[int, Dict[int, int]]:
    strata = dict(Counter(ranks))
    top = max(ranks)
    below = sum(count for rank, count in strata.items() if rank < top)
    if below > INCONSISTENT_FRACTION * len(ranks):
        raise InconsistentRanks(what, strata)
    if below:
        logger.info("%s rank %d with lower strata %s", what, top, strata)
    return top, strata


def nc_dimension_check(observables: Sequence[Polynomial],
                       points: Union[int, Sequence[PhaseState]],
                       field: MagneticField, params: SystemParams, seed=0) -> DimensionCertificate:
    """
    Certify (ddim, dind) of a family of first integrals.

    Args:
        observables: Catalog polynomials
        points: Constrained sample points, or how many to draw (>= 20)
        field: Canonicalized field (for the Dirac tensor)
        params: System parameters
        seed: Seed used when points is a count

    Returns:
        DimensionCertificate

    Raises:
        InconsistentRanks: If more than a quarter of the points fall below the top rank
    """
    n = params.n
    if isinstance(points, int):
        rng = numpy_rng(seed)
        points = [sample_constrained_point(n, "float", rng) for _ in range(points)]
    points = list(points)
    if len(points) < MIN_RANK_POINTS:
        logger.warning("only %d rank sample points (at least %d expected)", len(points), MIN_RANK_POINTS)
    observables = list(observables)
    ddim_ranks, bracket_ranks, spectra = [], [], []
    degenerate = 0
    for point in points:
        evaluation = differential_spectrum(observables, point)
        ddim_ranks.append(evaluation.rank)
        spectra.append(evaluation.singular_values)
        degenerate += evaluation.degenerate
        y = point.as_array()
        G = np.array([poly.gradient(y) for poly in observables])
        D = dirac_poisson_tensor(y, field, params)
        B = G @ D @ G.T
        B = 0.5 * (B - B.T)
        scale = np.linalg.norm(G, 2) ** 2 * np.linalg.norm(D, 2) if G.size else 0.0
        rank, _ = numeric_rank(B, RANK_TOLERANCE * scale if scale else None)
        bracket_ranks.append(rank)

    ddim, ddim_strata = _top_rank(ddim_ranks, "differential")
    bracket_rank, bracket_strata = _top_rank(bracket_ranks, "bracket")
    if bracket_rank % 2:
        logger.warning("odd bracket rank %d; the tolerance may be too tight", bracket_rank)
    dind = ddim - bracket_rank
    phase_dim = params.phase_dim
    certificate = DimensionCertificate(ddim, bracket_rank, dind, phase_dim, ddim + dind == phase_dim,
                                       ddim_strata, bracket_strata, spectra, degenerate)
    logger.info("dimension certificate: ddim=%d dind=%d (phase dim %d)", ddim, dind, phase_dim)
    return certificate


# commuting chains

def _equal_nonzero_group(field: MagneticField) -> List[int]:
    groups = [g for g in field.equal_groups() if field.blocks[g[0]] != 0]
    return max(groups, key=len, default=[])


def commuting_chain(catalog: IntegralCatalog, kind: str) -> List[Polynomial]:
    """
    The I_k chain of a catalog.

    so_chain: with z the first zero-field coordinate (1-based),
    I_k = sum_{z <= i < j <= z+1+k} L_ij^2 for k = 1..n-z-1.
    u_chain: over the largest group of r >= 2 equal nonzero blocks,
    I_k = sum_{i < j <= k} (Psi1_ij^2 + Psi2_ij^2) for k = 2..r.

    Raises:
        NotApplicable: If the block pattern has no such chain
    """
    field, params = catalog.field, catalog.params
    n = params.n
    gammas, ps = phase_variables(n)
    if kind == "so_chain":
        if not field.blocks or field.blocks[0] == 0:
            raise NotApplicable("the so chain needs a nonzero leading block")
        region = zero_region(field)
        if not region:
            raise NotApplicable("the so chain needs zero-field coordinates")
        z = region[0]
        chain = []
        for k in range(1, n - z - 1):
            top = z + 1 + k
            total = Polynomial.zero(2 * n)
            for i in range(z, top + 1):
                for j in range(i + 1, top + 1):
                    L = rotation_momentum(gammas, ps, i, j)
                    total = total + L * L
            chain.append(total)
        return chain
    if kind == "u_chain":
        group = _equal_nonzero_group(field)
        if len(group) < 2:
            raise NotApplicable("the u chain needs at least two equal nonzero blocks")
        s = params.exact_s
        kappa = field.exact_blocks[group[0]]
        chain = []
        for k in range(2, len(group) + 1):
            total = Polynomial.zero(2 * n)
            for x in range(k):
                for y in range(x + 1, k):
                    psi1, psi2 = psi_pair(gammas, ps, group[x], group[y], s, kappa)
                    total = total + psi1 * psi1 + psi2 * psi2
            chain.append(total)
        return chain
    raise ValueError(f"Unknown chain kind: {kind}")


def liouville_set(catalog: IntegralCatalog, kind: str) -> Dict[str, Polynomial]:
    """
    A commuting family built around a chain.

    so_chain: H, J, the nonzero-block Phi's, Phi of the first zero block and the chain.
    u_chain: H, J, every Phi and the chain.
    """
    chain = commuting_chain(catalog, kind)
    field = catalog.field
    family = {"H": catalog["H"], "J": catalog["J"]}
    if kind == "so_chain":
        for i, value in enumerate(field.blocks):
            name = f"Phi_{pair_label(2 * i + 1, 2 * i + 2)}"
            if value != 0:
                family[name] = catalog[name]
        z = zero_region(field)[0]
        if z + 1 < catalog.params.n:
            gammas, ps = phase_variables(catalog.params.n)
            family[f"L_{z + 1}_{z + 2}"] = rotation_momentum(gammas, ps, z, z + 1)
        prefix, start = "I_so", 1
    else:
        for i in range(len(field.blocks)):
            name = f"Phi_{pair_label(2 * i + 1, 2 * i + 2)}"
            family[name] = catalog[name]
        prefix, start = "I_u", 2
    for k, poly in enumerate(chain, start=start):
        family[f"{prefix}_{k}"] = poly
    return family


# classification of block patterns

@dataclass(frozen=True)
class BlockCase:
    """A named integrability case with its expected certificate."""
    case: str
    ddim: int
    dind: int


def covered_cases(n: int, blocks: Sequence[float]) -> List[BlockCase]:
    """
    Every integrability case whose hypothesis the block pattern meets.

    Several cases can cover the same pattern (n=6 with blocks (1,1,0) is both
    glavna-ii and integrabilni3); they always agree on (ddim, dind). The most
    specific case comes first.

    Args:
        n: Dimension
        blocks: Canonical block values (any order)

    Returns:
        Matching cases, empty when none applies
    """
    phase_dim = 2 * (n - 1)
    blocks = list(blocks)
    k = len(blocks)
    nonzero = [b for b in blocks if b != 0]
    zeros = k - len(nonzero)
    counts = Counter(nonzero)
    largest = max(counts.values(), default=0)
    distinct = len(set(blocks)) == k
    cases: List[BlockCase] = []

    def add(name: str, dind: int):
        cases.append(BlockCase(name, phase_dim - dind, dind))

    if not nonzero or n < 3:
        return cases
    two_equal = len(nonzero) == 2 and largest == 2
    if n == 3:
        add("stara", 2)
    if n == 4:
        add("stara-equal", 2) if two_equal else add("stara", 3)
    if n in (5, 6) and distinct and zeros <= n - 5:
        add("glavna-liouville", n - 1)
    if n == 5 and two_equal:
        add("glavna-i", 3)
    if n == 6 and largest == 2:
        add("glavna-ii", 4)
    if n == 6 and largest == 3:
        add("glavna-iii", 2)
    if n in (5, 6) and len(nonzero) == 1 and zeros == k - 1:
        add("glavna-iv", 3)
    if n >= 5 and len(nonzero) == 1:
        add("integrabilni-i", 3)
    if n >= 7 and len(nonzero) == 2 and zeros == k - 2:
        add("integrabilni-ii", 4) if largest == 2 else add("integrabilni-iii", 5)
    if largest == k:
        if n % 2 == 0:
            add("integrabilni2-i", 2)
        elif n >= 5:
            add("integrabilni2-ii", 3)
    if n % 2 == 0 and k >= 3 and largest == k - 1:
        add("integrabilni2-iii", 4)
    if 2 <= largest == len(nonzero) < k:
        add("integrabilni3", 4)
    return cases


def classify_blocks(n: int, blocks: Sequence[float]) -> Optional[BlockCase]:
    """The most specific case covering the pattern, or None when unclassified."""
    cases = covered_cases(n, blocks)
    return cases[0] if cases else None
