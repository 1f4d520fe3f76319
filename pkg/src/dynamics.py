"""
Magnetic flows in R^n, on S^{n-1} and the magnetic pendulum on S^2.

Vector fields act on flat arrays (gamma, p) in the canonical basis of the
field. ``integrate`` runs the Dormand-Prince pair with projection onto
T*S^{n-1} after every accepted step and fills the drift table of the
matching integral catalog.
"""

import csv
import logging
import math
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction
from functools import reduce
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space

from .exceptions import ConfigError, ConstraintViolation, HypothesisViolation
from .integrals import (IntegralCatalog, build_catalog, build_pendulum_catalog, build_rn_catalog,
                        zero_region)
from .integrators import DormandPrince54
from .phase import (CONSTRAINT_TOLERANCE, MagneticField, PhaseState, SystemParams, project_array,
                    to_rational)

logger = logging.getLogger(__name__)

FLOW_KINDS = ("ambient", "sphere", "pendulum")
KIND_ALIASES = {"ambient_rn": "ambient", "rn": "ambient"}
SUPPORT_TOLERANCE = 1e-14
MAX_PERIOD_MULTIPLE = 10 ** 6
# Per-step error target as a fraction of the requested tolerances; rel_tol never
# goes below the rounding floor.
LOCAL_TOLERANCE_RATIO = 1e-3
MIN_REL_TOL = 100 * np.finfo(float).eps


@dataclass(frozen=True)
class FlowSpec:
    """
    Which flow to integrate.

    Attributes:
        kind: "ambient", "sphere" or "pendulum"
        params: System parameters
        field: Canonicalized field (unused by the pendulum)
        b: Pendulum field vector (n = 3 only)
    """
    kind: str
    params: SystemParams
    field: Optional[MagneticField] = None
    b: Tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        kind = KIND_ALIASES.get(self.kind, self.kind)
        if kind not in FLOW_KINDS:
            raise ConfigError(f"Unknown flow kind: {self.kind}. Must be one of {list(FLOW_KINDS)}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "b", tuple(self.b))
        if kind == "pendulum":
            if self.params.n != 3:
                raise ConfigError("the pendulum flow requires n = 3")
            if len(self.b) != 3:
                raise ConfigError("the pendulum field b must have three components")
        elif self.field is None:
            raise ConfigError(f"the {kind} flow needs a magnetic field")
        elif self.field.n != self.params.n:
            raise ConfigError(f"field dimension {self.field.n} does not match n = {self.params.n}")


# vector fields

def _sphere_rhs(y: np.ndarray, K: np.ndarray, s: float, m: float) -> np.ndarray:
    n = K.shape[0]
    gamma, p = y[:n], y[n:]
    Kp = K @ p
    mu = (s * np.dot(p, K @ gamma) - np.dot(p, p)) / m
    return np.concatenate([p / m, (s / m) * Kp + mu * gamma])


def _ambient_rhs(y: np.ndarray, K: np.ndarray, s: float, m: float) -> np.ndarray:
    n = K.shape[0]
    p = y[n:]
    return np.concatenate([p / m, (s / m) * (K @ p)])


def _pendulum_rhs(y: np.ndarray, b: np.ndarray, s: float, m: float) -> np.ndarray:
    gamma, p = y[:3], y[3:]
    multiplier = np.dot(p, p) / m + np.dot(b, gamma)
    return np.concatenate([p / m, (s / m) * np.cross(gamma, p) + b - multiplier * gamma])


def sphere_vector_field(state: PhaseState, field: MagneticField,
                        params: SystemParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Magnetic geodesic field on T*S^{n-1}.

    gamma' = p/m, p' = (s/m) kappa p + mu gamma, mu = (s <p, kappa gamma> - <p, p>)/m.

    Returns:
        (gamma_dot, p_dot)
    """
    out = _sphere_rhs(state.as_array(), field.canonical_kappa, float(params.s), float(params.m))
    return out[:params.n], out[params.n:]


def ambient_vector_field(state: PhaseState, field: MagneticField,
                         params: SystemParams) -> Tuple[np.ndarray, np.ndarray]:
    """Lorentz flow in R^n: gamma' = p/m, p' = (s/m) kappa p."""
    out = _ambient_rhs(state.as_array(), field.canonical_kappa, float(params.s), float(params.m))
    return out[:params.n], out[params.n:]


def pendulum_vector_field(state: PhaseState, params: SystemParams,
                          b: Sequence[float] = (0.0, 0.0, 0.0)) -> Tuple[np.ndarray, np.ndarray]:
    """gamma' = p/m, p' = (s/m) gamma x p + b - (<p,p>/m + <b,gamma>) gamma."""
    out = _pendulum_rhs(state.as_array(), np.asarray(b, dtype=float), float(params.s), float(params.m))
    return out[:3], out[3:]


def _rhs_for(spec: FlowSpec):
    s, m = float(spec.params.s), float(spec.params.m)
    if spec.kind == "pendulum":
        b = np.asarray(spec.b, dtype=float)
        return lambda t, y: _pendulum_rhs(y, b, s, m)
    K = spec.field.canonical_kappa
    if spec.kind == "sphere":
        return lambda t, y: _sphere_rhs(y, K, s, m)
    return lambda t, y: _ambient_rhs(y, K, s, m)


# closed form in R^n

def rn_closed_form(initial: PhaseState, field: MagneticField, params: SystemParams, t: float) -> PhaseState:
    """
    Exact solution of the R^n flow in the canonical basis.

    Each block rotates its momentum with angular velocity Omega = s kappa / m and
    the position follows the integrated rotation (a Larmor circle); zero blocks
    and the odd coordinate move uniformly.
    """
    y = initial.as_array()
    n = params.n
    m, s = float(params.m), float(params.s)
    gamma, p = y[:n].copy(), y[n:].copy()
    gamma_t, p_t = gamma + t * p / m, p.copy()
    for i, kappa in enumerate(field.blocks):
        a, b = 2 * i, 2 * i + 1
        omega = s * kappa / m
        if omega == 0:
            continue
        c, sn = math.cos(omega * t), math.sin(omega * t)
        p_t[a] = c * p[a] + sn * p[b]
        p_t[b] = -sn * p[a] + c * p[b]
        gamma_t[a] = gamma[a] + (sn * p[a] + (1 - c) * p[b]) / (m * omega)
        gamma_t[b] = gamma[b] + (-(1 - c) * p[a] + sn * p[b]) / (m * omega)
    return PhaseState(gamma_t, p_t)


def larmor_radius(p_block: Sequence[float], kappa: float, params: SystemParams) -> float:
    """Radius sqrt(p_a^2 + p_b^2) / |s kappa| of the projected circle."""
    return math.hypot(float(p_block[0]), float(p_block[1])) / abs(float(params.s) * float(kappa))


def larmor_period(kappa: float, params: SystemParams) -> float:
    """Period 2 pi m / |s kappa|."""
    return 2 * math.pi * float(params.m) / abs(float(params.s) * float(kappa))


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def common_period(field: MagneticField, params: SystemParams) -> Optional[float]:
    """
    Common period of all Larmor rotations, when it exists.

    For even n with nonzero pairwise commensurable blocks every trajectory of
    the R^n flow closes after T = (2 pi m / |s|) lcm(1 / kappa_i).

    Returns:
        T, or None for odd n, a zero block or incommensurable blocks
    """
    if params.n % 2 or any(b == 0 for b in field.blocks):
        return None
    inverses = [1 / to_rational(b) for b in field.blocks]
    numerator = reduce(_lcm, (q.numerator for q in inverses), 1)
    denominator = reduce(math.gcd, (q.denominator for q in inverses))
    multiple = Fraction(numerator, denominator)
    if multiple > MAX_PERIOD_MULTIPLE:
        logger.info("blocks %s are not commensurable within the period bound", list(field.blocks))
        return None
    return 2 * math.pi * float(params.m) / abs(float(params.s)) * float(multiple)


# trajectories

@dataclass
class Trajectory:
    """
    Accepted steps of an integrated flow.

    Attributes:
        times: Strictly monotone times (increasing for forward runs)
        states: Array (N, 2n) of states in the canonical basis
        spec: The integrated flow
        integrals: Catalog name -> values along the trajectory
        drift: Catalog name -> max |F(t) - F(0)|
    """
    times: np.ndarray
    states: np.ndarray
    spec: FlowSpec
    integrals: Dict[str, np.ndarray] = dataclass_field(default_factory=dict)
    drift: Dict[str, float] = dataclass_field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.states.shape[1] // 2

    def state(self, index: int) -> PhaseState:
        return PhaseState.from_array(self.states[index])

    @property
    def final_state(self) -> PhaseState:
        return self.state(-1)

    def constraint_residual(self) -> float:
        """Max |phi1 - 1| or |phi2| along the trajectory."""
        n = self.n
        gamma, p = self.states[:, :n], self.states[:, n:]
        phi1 = np.abs(np.sum(gamma * gamma, axis=1) - 1.0)
        phi2 = np.abs(np.sum(gamma * p, axis=1))
        return float(max(phi1.max(), phi2.max()))

    def to_csv(self, path: str, basis: Optional[np.ndarray] = None):
        """
        Write one row per accepted step.

        Header: t, gamma_1..gamma_n, p_1..p_n, then the integrals with H first.
        Floats use their shortest round-trip representation. With ``basis``
        (the field's MagneticField.basis) gamma and p are written in the input
        coordinates; the integral values do not depend on the basis.
        """
        n = self.n
        states = self.states
        if basis is not None:
            states = np.hstack([states[:, :n] @ basis, states[:, n:] @ basis])
        names = sorted(self.integrals, key=lambda name: name != "H")
        header = ["t"] + [f"gamma_{i + 1}" for i in range(n)] + [f"p_{i + 1}" for i in range(n)] + names
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row, (t, y) in enumerate(zip(self.times, states)):
                values = [float(t)] + [float(x) for x in y] + [float(self.integrals[name][row]) for name in names]
                writer.writerow([repr(v) for v in values])


def catalog_for(spec: FlowSpec, gauge=None) -> IntegralCatalog:
    """The integral catalog matching a flow kind."""
    if spec.kind == "sphere":
        return build_catalog(spec.params, spec.field)
    if spec.kind == "ambient":
        return build_rn_catalog(spec.params, spec.field, gauge)
    return build_pendulum_catalog(spec.params, spec.b)


def integrate(spec: FlowSpec, initial: PhaseState, t_end: float, rel_tol: float = 1e-10,
              abs_tol: float = 1e-12, project_every_step: bool = True,
              catalog: Optional[IntegralCatalog] = None, t0: float = 0.0) -> Trajectory:
    """
    Integrate a flow from ``initial`` (canonical basis) to ``t_end``.

    rel_tol and abs_tol bound the drift of the tracked integrals; the pair
    itself holds each step to LOCAL_TOLERANCE_RATIO times them (max-norm).

    Args:
        spec: Flow kind, parameters and field
        initial: Initial state; constrained for the sphere and pendulum flows
        t_end: Final time (may be below t0 for backward runs)
        rel_tol: Relative tolerance
        abs_tol: Absolute tolerance
        project_every_step: Project onto T*S^{n-1} after each accepted step
        catalog: Integrals to track (default: the catalog of the flow kind)
        t0: Initial time

    Returns:
        Trajectory with drift of every catalog integral

    Raises:
        ConstraintViolation: If a constrained flow starts off T*S^{n-1}
        StepFailure: If the step size drops below 1e-14
    """
    if initial.n != spec.params.n:
        raise ConfigError(f"initial state has dimension {initial.n}, expected {spec.params.n}")
    y0 = initial.as_array()
    constrained = spec.kind != "ambient"
    if constrained:
        residual = max(abs(float(r)) for r in initial.residuals())
        if residual > CONSTRAINT_TOLERANCE:
            raise ConstraintViolation(f"initial state is off the constraint manifold (residual {residual:.3e})")
    projection = project_array if constrained and project_every_step else None
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")
    integrator = DormandPrince54(rel_tol=max(rel_tol * LOCAL_TOLERANCE_RATIO, MIN_REL_TOL),
                                 abs_tol=abs_tol * LOCAL_TOLERANCE_RATIO)
    result = integrator.integrate(_rhs_for(spec), t0, y0, t_end, projection=projection)

    catalog = catalog if catalog is not None else catalog_for(spec)
    values = catalog.evaluate_many(result.states)
    drift = {name: float(np.max(np.abs(v - v[0]))) for name, v in values.items()}
    logger.info("integrated %s flow to t=%g in %d steps (%d rejected); max drift %.3e",
                spec.kind, t_end, result.accepted, result.rejected, max(drift.values(), default=0.0))
    return Trajectory(result.times, result.states, spec, values, drift)


# pendulum

def pendulum_center(state: PhaseState, params: SystemParams) -> np.ndarray:
    """Unit vector sign(s) Phi / |Phi| with Phi = gamma x p + s gamma."""
    y = state.as_array()
    s = float(params.s)
    momentum = np.cross(y[:3], y[3:]) + s * y[:3]
    return math.copysign(1.0, s) * momentum / np.linalg.norm(momentum)


def pendulum_circle_radius(s: float, m: float = 1.0, via: str = "formula", t_end: float = 20.0,
                           rel_tol: float = 1e-10, abs_tol: float = 1e-12) -> float:
    """
    Geodesic radius of a unit-speed magnetic geodesic circle on S^2 (b = 0).

    The formula is arctan(1 / |s|). The simulation integrates the pendulum
    with <p, p> = 1 and takes the max geodesic distance from the center
    sign(s) Phi / |Phi| over the trajectory.
    """
    if via == "formula":
        if s == 0:
            return math.pi / 2
        return math.atan(1.0 / abs(float(s)))
    if via != "simulate":
        raise ValueError(f"Unknown radius method: {via}")
    params = SystemParams(3, m=m, s=s)
    spec = FlowSpec("pendulum", params)
    initial = PhaseState((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), constrained=True)
    trajectory = integrate(spec, initial, t_end, rel_tol, abs_tol)
    center = pendulum_center(initial, params)
    cosines = np.clip(trajectory.states[:, :3] @ center, -1.0, 1.0)
    return float(np.max(np.arccos(cosines)))


def pendulum_momentum_drift(trajectory: Trajectory) -> Dict[str, float]:
    """
    Drift of the pendulum momentum integrals.

    <b, gamma x p + s gamma> when b != 0; the three components of
    gamma x p + s gamma when b = 0.
    """
    if trajectory.spec.kind != "pendulum":
        raise ConfigError("momentum drift is defined for the pendulum flow only")
    catalog = build_pendulum_catalog(trajectory.spec.params, trajectory.spec.b)
    values = catalog.evaluate_many(trajectory.states)
    return {name: float(np.max(np.abs(v - v[0]))) for name, v in values.items() if name != "H"}


# reductions

@dataclass
class ReductionResult:
    """
    A symmetry rotation sending a state into a smaller invariant subspace.

    Attributes:
        R: The reducing matrix (real 2r x 2r form for the unitary reduction)
        rotation: The same map embedded in R^n
        reduced: Rotated initial state
        zeroed: 0-based coordinates that vanish on the reduced state
    """
    R: np.ndarray
    rotation: np.ndarray
    reduced: PhaseState
    zeroed: List[int]

    def __iter__(self):
        return iter((self.R, self.reduced))


def complex_to_real(R: np.ndarray) -> np.ndarray:
    """Real 2r x 2r form of a complex r x r matrix (a + ib -> [[a, -b], [b, a]])."""
    r = R.shape[0]
    out = np.zeros((2 * r, 2 * r))
    out[0::2, 0::2] = R.real
    out[0::2, 1::2] = -R.imag
    out[1::2, 0::2] = R.imag
    out[1::2, 1::2] = R.real
    return out


def _orthonormal_span(vectors: Sequence[np.ndarray], tol: float) -> List[np.ndarray]:
    basis: List[np.ndarray] = []
    for v in vectors:
        w = v.astype(complex) if np.iscomplexobj(v) else v.astype(float)
        for e in basis:
            w = w - np.vdot(e, w) * e
        norm = np.linalg.norm(w)
        if norm > tol:
            basis.append(w / norm)
    return basis


def _equal_group(field: MagneticField, r: int, block_indices: Optional[Sequence[int]]) -> List[int]:
    if block_indices is not None:
        group = list(block_indices)
        if len(group) != r:
            raise HypothesisViolation(f"{len(group)} block indices given for r = {r}")
    else:
        candidates = [g for g in field.equal_groups() if field.blocks[g[0]] != 0 and len(g) >= r]
        if not candidates:
            raise HypothesisViolation(f"no {r} equal nonzero blocks in {list(field.blocks)}")
        group = candidates[0][:r]
    values = {field.blocks[i] for i in group}
    if len(values) != 1 or 0 in values:
        raise HypothesisViolation(f"blocks {group} are not equal and nonzero")
    return group


def unitary_reduction(initial: PhaseState, r: int, field: MagneticField, params: SystemParams,
                      block_indices: Optional[Sequence[int]] = None) -> ReductionResult:
    """
    U(r) rotation moving the state into the last two complex coordinates.

    With z_k = gamma_{2k-1} + i gamma_{2k} and w_k = p_{2k-1} + i p_{2k} over the
    r equal blocks, a unitary R with R z, R w supported on the last two
    complex coordinates is built by Gram-Schmidt on (z, w) completed to a
    unitary basis. R acts on gamma and p through its real 2r x 2r form.

    Args:
        initial: Constrained state in the canonical basis
        r: Number of equal blocks acted on
        field: Canonicalized field
        params: System parameters
        block_indices: 0-based blocks to use (default: the first r of an equal group)

    Returns:
        ReductionResult; R is the identity when r <= 2 or the state is already reduced

    Raises:
        HypothesisViolation: If the blocks are not equal and nonzero
    """
    if r < 1 or r > params.n // 2:
        raise HypothesisViolation(f"r = {r} is outside 1..{params.n // 2}")
    group = _equal_group(field, r, block_indices)
    n = params.n
    y = initial.as_array()
    gamma, p = y[:n], y[n:]
    coords = [c for q in group for c in (2 * q, 2 * q + 1)]
    zeroed = coords[:max(0, 2 * r - 4)]
    z = np.array([gamma[2 * q] + 1j * gamma[2 * q + 1] for q in group])
    w = np.array([p[2 * q] + 1j * p[2 * q + 1] for q in group])

    if r <= 2 or (np.all(np.abs(z[:r - 2]) <= SUPPORT_TOLERANCE) and np.all(np.abs(w[:r - 2]) <= SUPPORT_TOLERANCE)):
        return ReductionResult(np.eye(2 * r), np.eye(n), initial, zeroed)

    span = _orthonormal_span([z, w], 1e-12 * max(1.0, np.linalg.norm(z), np.linalg.norm(w)))
    V = np.column_stack(span) if span else np.zeros((r, 0), dtype=complex)
    complement = null_space(V.conj().T) if span else np.eye(r, dtype=complex)
    Q = np.column_stack([complement, V])
    R = Q.conj().T
    R_real = complex_to_real(R)
    rotation = np.eye(n)
    rotation[np.ix_(coords, coords)] = R_real
    reduced = PhaseState(rotation @ gamma, rotation @ p, constrained=initial.constrained)
    logger.info("unitary reduction over blocks %s zeroes coordinates %s", group, [c + 1 for c in zeroed])
    return ReductionResult(R_real, rotation, reduced, zeroed)


def orthogonal_reduction(initial: PhaseState, field: MagneticField, params: SystemParams) -> ReductionResult:
    """
    SO rotation of the zero-field coordinates leaving only two of them nonzero.

    The flow commutes with rotations of the zero-field coordinates, so the
    reduced state evolves inside the invariant copy of T*S^{n-q+1}, q the
    number of zero-field coordinates.

    Raises:
        HypothesisViolation: If there are fewer than three zero-field coordinates
    """
    region = zero_region(field)
    if len(region) < 3:
        raise HypothesisViolation(f"orthogonal reduction needs three zero-field coordinates, got {len(region)}")
    n = params.n
    y = initial.as_array()
    gamma, p = y[:n], y[n:]
    a, b = gamma[region], p[region]
    zeroed = region[2:]
    if np.all(np.abs(a[2:]) <= SUPPORT_TOLERANCE) and np.all(np.abs(b[2:]) <= SUPPORT_TOLERANCE):
        q = len(region)
        return ReductionResult(np.eye(q), np.eye(n), initial, zeroed)
    span = _orthonormal_span([a, b], 1e-12 * max(1.0, np.linalg.norm(a), np.linalg.norm(b)))
    V = np.column_stack(span)
    complement = null_space(V.T)
    Q = np.column_stack([V, complement])
    if np.linalg.det(Q) < 0:
        Q[:, -1] = -Q[:, -1]
    R = Q.T
    rotation = np.eye(n)
    rotation[np.ix_(region, region)] = R
    reduced = PhaseState(rotation @ gamma, rotation @ p, constrained=initial.constrained)
    logger.info("orthogonal reduction zeroes coordinates %s", [c + 1 for c in zeroed])
    return ReductionResult(R, rotation, reduced, zeroed)
