"""
Phase-space core for magnetic flows.

Defines the system parameters, the magnetic field in its canonical block form,
phase points (gamma, p) in R^{2n} (optionally constrained to T*S^{n-1}) and the
sampling / projection helpers used by the integrator and the exact identity
tests.
"""

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import schur

from .exceptions import ConfigError, ConstraintViolation, NotSkew, ZeroPosition

logger = logging.getLogger(__name__)

SKEW_TOLERANCE = 1e-12
EQUAL_BLOCK_TOLERANCE = 1e-12
NEAR_DEGENERATE_GAP = 1e-9
CONSTRAINT_TOLERANCE = 1e-9
MIN_POSITION_NORM = 1e-300
DEFAULT_RATIONAL_BOUND = 1000

Number = Union[float, Fraction]
Seed = Union[None, int, random.Random, np.random.Generator]


def to_rational(value) -> Fraction:
    """
    Convert a number to an exact rational.

    Floats go through their shortest decimal representation, so 0.1 becomes 1/10
    and equal floats always give equal rationals.

    Args:
        value: int, Fraction or float

    Returns:
        Exact Fraction
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return Fraction(int(value))
    return Fraction(repr(float(value)))


def python_rng(seed: Seed) -> random.Random:
    """Return a ``random.Random`` for exact sampling, reusing one if given."""
    if isinstance(seed, random.Random):
        return seed
    if isinstance(seed, np.random.Generator):
        return random.Random(int(seed.integers(2 ** 62)))
    return random.Random(seed)


def numpy_rng(seed: Seed) -> np.random.Generator:
    """Return a numpy Generator for floating sampling, reusing one if given."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, random.Random):
        return np.random.default_rng(seed.getrandbits(62))
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class SystemParams:
    """
    Dimension, mass and charge parameter of the magnetic system.

    Attributes:
        n: Dimension of the ambient space (n >= 2)
        m: Mass (positive)
        s: Charge parameter (nonzero, the charge with the minus sign)
    """
    n: int
    m: Number = 1.0
    s: Number = 1.0

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"n must be an integer >= 2, got {self.n!r}")
        object.__setattr__(self, "n", int(self.n))
        if not float(self.m) > 0:
            raise ConfigError(f"mass m must be positive, got {self.m!r}")
        if float(self.s) == 0:
            raise ConfigError("charge parameter s must be nonzero")

    @property
    def exact_m(self) -> Fraction:
        return to_rational(self.m)

    @property
    def exact_s(self) -> Fraction:
        return to_rational(self.s)

    @property
    def block_count(self) -> int:
        """Number of 2x2 blocks, [n/2]."""
        return self.n // 2

    @property
    def phase_dim(self) -> int:
        """Dimension of T*S^{n-1}."""
        return 2 * (self.n - 1)


def block_matrix(blocks: Sequence[Number], n: int) -> np.ndarray:
    """
    Build the canonical skew matrix with kappa[2i, 2i+1] = blocks[i].

    Args:
        blocks: Block values kappa_{2i-1,2i}
        n: Matrix size

    Returns:
        n x n skew-symmetric matrix
    """
    if len(blocks) > n // 2:
        raise ConfigError(f"{len(blocks)} blocks do not fit in dimension {n}")
    kappa = np.zeros((n, n))
    for i, value in enumerate(blocks):
        kappa[2 * i, 2 * i + 1] = float(value)
        kappa[2 * i + 1, 2 * i] = -float(value)
    return kappa


@dataclass(frozen=True, eq=False)
class MagneticField:
    """
    Constant magnetic two-form in canonical block form.

    Attributes:
        kappa: The input skew matrix, in the user's coordinates
        blocks: Nonnegative block values kappa_{2i-1,2i}, sorted descending
        basis: Orthogonal matrix B with B @ kappa @ B.T block diagonal
        near_degenerate: Index pairs of blocks whose values differ by less than 1e-9
    """
    kappa: np.ndarray
    blocks: Tuple[float, ...]
    basis: np.ndarray
    near_degenerate: Tuple[Tuple[int, int], ...] = ()

    @property
    def n(self) -> int:
        return self.kappa.shape[0]

    @property
    def canonical_kappa(self) -> np.ndarray:
        """The block-diagonal matrix in the canonical basis."""
        return block_matrix(self.blocks, self.n)

    @property
    def exact_blocks(self) -> Tuple[Fraction, ...]:
        """Block values as exact rationals (used by the polynomial algebra)."""
        return tuple(to_rational(b) for b in self.blocks)

    def equal_groups(self) -> List[List[int]]:
        """
        Group block indices by (exactly) equal value.

        Returns:
            List of index groups in block order, each of size >= 1
        """
        groups: List[List[int]] = []
        for i, value in enumerate(self.blocks):
            for group in groups:
                if self.blocks[group[0]] == value:
                    group.append(i)
                    break
            else:
                groups.append([i])
        return groups

    def to_canonical(self, state: "PhaseState") -> "PhaseState":
        """Express a state given in the input coordinates in the canonical basis."""
        y = state.as_array()
        n = self.n
        return PhaseState(self.basis @ y[:n], self.basis @ y[n:], constrained=state.constrained)

    def from_canonical(self, state: "PhaseState") -> "PhaseState":
        """Express a canonical-basis state in the input coordinates."""
        y = state.as_array()
        n = self.n
        return PhaseState(self.basis.T @ y[:n], self.basis.T @ y[n:], constrained=state.constrained)

    @classmethod
    def from_blocks(cls, blocks: Sequence[Number], n: int) -> "MagneticField":
        """Canonicalize the block matrix built from the given block values."""
        return canonicalize_kappa(block_matrix(blocks, n))


def _block_diagonal_planes(kappa: np.ndarray):
    """Planes of a matrix that is already 2x2 block diagonal, or None."""
    n = kappa.shape[0]
    mask = np.zeros_like(kappa, dtype=bool)
    for i in range(n // 2):
        mask[2 * i, 2 * i + 1] = mask[2 * i + 1, 2 * i] = True
    if np.any(kappa[~mask] != 0.0):
        return None
    eye = np.eye(n)
    planes = []
    for i in range(n // 2):
        beta = kappa[2 * i, 2 * i + 1]
        if beta >= 0:
            planes.append((beta, eye[2 * i], eye[2 * i + 1]))
        else:
            planes.append((-beta, eye[2 * i + 1], eye[2 * i]))
    leftover = [eye[n - 1]] if n % 2 else []
    return planes, leftover


def _schur_planes(kappa: np.ndarray, scale: float):
    """Invariant planes and kernel directions from the real Schur form."""
    n = kappa.shape[0]
    T, Z = schur(kappa, output="real")
    planes, kernel = [], []
    i = 0
    while i < n:
        if i + 1 < n and abs(T[i + 1, i]) > SKEW_TOLERANCE * scale:
            u, v = Z[:, i], Z[:, i + 1]
            beta = float(u @ kappa @ v)
            if beta < 0:
                u, v, beta = v, u, -beta
            planes.append((beta, u, v))
            i += 2
        else:
            kernel.append(Z[:, i])
            i += 1
    while len(kernel) >= 2:
        u, v = kernel.pop(0), kernel.pop(0)
        planes.append((0.0, u, v))
    return planes, kernel


def canonicalize_kappa(kappa) -> MagneticField:
    """
    Bring a skew matrix to canonical block form.

    Finds an orthonormal basis in which kappa is block diagonal with 2x2 blocks
    [[0, k_i], [-k_i, 0]], k_i >= 0 sorted descending (plus a 1x1 zero block for
    odd n). Inputs that are already block diagonal are handled by permutations
    only, so a canonical input returns the identity basis.

    Args:
        kappa: n x n skew-symmetric matrix

    Returns:
        MagneticField with blocks and basis

    Raises:
        NotSkew: If kappa is not square or not skew-symmetric to 1e-12 relative
    """
    kappa = np.array(kappa, dtype=float)
    if kappa.ndim != 2 or kappa.shape[0] != kappa.shape[1]:
        raise NotSkew(f"kappa must be a square matrix, got shape {kappa.shape}")
    n = kappa.shape[0]
    scale = max(1.0, float(np.max(np.abs(kappa))) if kappa.size else 1.0)
    asymmetry = float(np.max(np.abs(kappa + kappa.T))) if kappa.size else 0.0
    if asymmetry > SKEW_TOLERANCE * scale:
        raise NotSkew(f"kappa is not skew-symmetric (max |kappa + kappa^T| = {asymmetry:.3e})")
    kappa = 0.5 * (kappa - kappa.T)

    found = _block_diagonal_planes(kappa)
    if found is None:
        found = _schur_planes(kappa, scale)
    planes, leftover = found
    # stable sort keeps an already canonical input in place
    planes = sorted(planes, key=lambda plane: -plane[0])

    values = [plane[0] for plane in planes]
    values = _snap_values(values, EQUAL_BLOCK_TOLERANCE * scale)
    rows = []
    for _, u, v in planes:
        rows.extend([u, v])
    rows.extend(leftover)
    basis = np.array(rows) if rows else np.eye(n)

    near = tuple((i, j) for i in range(len(values)) for j in range(i + 1, len(values))
                 if abs(values[i] - values[j]) < NEAR_DEGENERATE_GAP * scale)
    for i, j in near:
        if values[i] != values[j]:
            logger.warning("blocks %d and %d are nearly equal (%.3e vs %.3e)", i, j, values[i], values[j])
    logger.debug("canonical blocks %s", values)
    return MagneticField(kappa=kappa, blocks=tuple(values), basis=basis, near_degenerate=near)


def _snap_values(values: List[float], tol: float) -> List[float]:
    """Merge descending values that agree within tol; tiny values become zero."""
    snapped = [0.0 if v <= tol else float(v) for v in values]
    out: List[float] = []
    start = 0
    while start < len(snapped):
        end = start + 1
        while end < len(snapped) and abs(snapped[start] - snapped[end]) <= tol:
            end += 1
        group = snapped[start:end]
        representative = group[0] if len(set(group)) == 1 else float(np.mean(group))
        out.extend([representative] * len(group))
        start = end
    return out


@dataclass(frozen=True)
class GaugeOffset:
    """Translation vector Gamma of the gauge potential A^Gamma."""
    Gamma: Tuple[Number, ...]

    def __post_init__(self):
        object.__setattr__(self, "Gamma", tuple(self.Gamma))

    @property
    def exact(self) -> Tuple[Fraction, ...]:
        return tuple(to_rational(g) for g in self.Gamma)

    @classmethod
    def zero(cls, n: int) -> "GaugeOffset":
        return cls(tuple([0] * n))


def _coerce(values) -> Tuple[Number, ...]:
    out = []
    for v in values:
        if isinstance(v, Fraction):
            out.append(v)
        elif isinstance(v, int) and not isinstance(v, bool):
            out.append(Fraction(v))
        else:
            out.append(float(v))
    return tuple(out)


@dataclass(frozen=True)
class PhaseState:
    """
    A point (gamma, p) of R^{2n}.

    Coordinates are floats, or exact Fractions for rational sample points.
    When ``constrained`` is set the state must satisfy <gamma, gamma> = 1 and
    <p, gamma> = 0: exactly for rational states, to 1e-9 for floating ones.
    """
    gamma: Tuple[Number, ...]
    p: Tuple[Number, ...]
    constrained: bool = False

    def __post_init__(self):
        object.__setattr__(self, "gamma", _coerce(self.gamma))
        object.__setattr__(self, "p", _coerce(self.p))
        if len(self.gamma) != len(self.p):
            raise ValueError(f"gamma has {len(self.gamma)} coordinates but p has {len(self.p)}")
        if self.constrained:
            r1, r2 = self.residuals()
            if self.is_exact:
                ok = r1 == 0 and r2 == 0
            else:
                ok = abs(r1) <= CONSTRAINT_TOLERANCE and abs(r2) <= CONSTRAINT_TOLERANCE
            if not ok:
                raise ConstraintViolation(f"constraint residuals ({float(r1):.3e}, {float(r2):.3e})")

    @property
    def n(self) -> int:
        return len(self.gamma)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(x, Fraction) for x in self.gamma + self.p)

    def residuals(self) -> Tuple[Number, Number]:
        """Return (phi1 - 1, phi2)."""
        phi1 = sum((g * g for g in self.gamma), Fraction(0) if self.is_exact else 0.0)
        phi2 = sum((x * g for x, g in zip(self.p, self.gamma)), Fraction(0) if self.is_exact else 0.0)
        return phi1 - 1, phi2

    def coordinates(self) -> Tuple[Number, ...]:
        """All 2n coordinates in the order (gamma_1..gamma_n, p_1..p_n)."""
        return self.gamma + self.p

    def as_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.coordinates()])

    @classmethod
    def from_array(cls, y, constrained: bool = False) -> "PhaseState":
        y = np.asarray(y, dtype=float)
        n = y.shape[0] // 2
        return cls(y[:n], y[n:], constrained=constrained)


def stereographic_point(u: Sequence[Number], v: Sequence[Number]) -> PhaseState:
    """
    Exact point of T*S^{n-1} from rational parameters.

    gamma = (2u, |u|^2 - 1) / (|u|^2 + 1) lies on the unit sphere and
    p = v - <v, gamma> gamma is tangent to it, with no rounding.

    Args:
        u: n-1 rational stereographic coordinates
        v: n rational momentum seed

    Returns:
        Constrained exact PhaseState
    """
    u = [to_rational(x) for x in u]
    v = [to_rational(x) for x in v]
    if len(v) != len(u) + 1:
        raise ValueError("v must have one more coordinate than u")
    norm2 = sum((x * x for x in u), Fraction(0))
    denominator = norm2 + 1
    gamma = [2 * x / denominator for x in u] + [(norm2 - 1) / denominator]
    dot = sum((a * b for a, b in zip(v, gamma)), Fraction(0))
    p = [a - dot * g for a, g in zip(v, gamma)]
    return PhaseState(gamma, p, constrained=True)


def _random_rational(rng: random.Random, bound: int) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def sample_constrained_point(n: int, mode: str = "float", seed: Seed = None,
                             bound: int = DEFAULT_RATIONAL_BOUND) -> PhaseState:
    """
    Sample a point of T*S^{n-1}.

    Args:
        n: Dimension (>= 2)
        mode: "float" (Gaussian direction and momentum) or "rational" (exact)
        seed: Integer seed or an existing random generator
        bound: Bound on numerators/denominators in rational mode

    Returns:
        Constrained PhaseState
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if mode == "rational":
        rng = python_rng(seed)
        u = [_random_rational(rng, bound) for _ in range(n - 1)]
        v = [_random_rational(rng, bound) for _ in range(n)]
        return stereographic_point(u, v)
    if mode != "float":
        raise ValueError(f"Unknown sampling mode: {mode}")
    rng = numpy_rng(seed)
    gamma = rng.normal(size=n)
    gamma /= np.linalg.norm(gamma)
    v = rng.normal(size=n)
    p = v - np.dot(v, gamma) * gamma
    return PhaseState.from_array(project_array(np.concatenate([gamma, p])), constrained=True)


def sample_ambient_rational_point(n: int, seed: Seed = None,
                                  bound: int = DEFAULT_RATIONAL_BOUND) -> PhaseState:
    """Random exact point of R^{2n} with phi1 = <gamma, gamma> != 0."""
    rng = python_rng(seed)
    while True:
        gamma = [_random_rational(rng, bound) for _ in range(n)]
        if any(g != 0 for g in gamma):
            break
    p = [_random_rational(rng, bound) for _ in range(n)]
    return PhaseState(gamma, p)


def project_array(y: np.ndarray) -> np.ndarray:
    """
    Project a flat (gamma, p) array onto T*S^{n-1}.

    Raises:
        ZeroPosition: If |gamma| < 1e-300
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0] // 2
    norm = np.linalg.norm(y[:n])
    if norm < MIN_POSITION_NORM:
        raise ZeroPosition(f"|gamma| = {norm:.3e} cannot be normalized")
    gamma = y[:n] / norm
    p = y[n:] - np.dot(y[n:], gamma) * gamma
    return np.concatenate([gamma, p])


def project_to_constraints(state: PhaseState) -> PhaseState:
    """
    Project a state onto the constraint manifold.

    gamma' = gamma / |gamma|, p' = p - <p, gamma'> gamma'.

    Args:
        state: Any state with gamma != 0

    Returns:
        Constrained floating PhaseState
    """
    return PhaseState.from_array(project_array(state.as_array()), constrained=True)


def block_rotation_matrix(angles: Sequence[float], n: int) -> np.ndarray:
    """
    Rotation acting on each canonical plane (2i-1, 2i) by its own angle.

    Args:
        angles: One angle per block (missing blocks are not rotated)
        n: Dimension

    Returns:
        n x n orthogonal matrix commuting with every canonical kappa
    """
    R = np.eye(n)
    for i, theta in enumerate(angles):
        c, s = np.cos(theta), np.sin(theta)
        R[2 * i:2 * i + 2, 2 * i:2 * i + 2] = [[c, -s], [s, c]]
    return R


def rotate_state(state: PhaseState, rotation: np.ndarray) -> PhaseState:
    """Apply the same orthogonal map to gamma and p."""
    y = state.as_array()
    n = state.n
    return PhaseState(rotation @ y[:n], rotation @ y[n:], constrained=state.constrained)


def random_rotation(n: int, seed: Seed = None) -> np.ndarray:
    """Haar-random orthogonal matrix (QR of a Gaussian matrix with sign fix)."""
    rng = numpy_rng(seed)
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    return Q * np.sign(np.diag(R))


def random_kappa(n: int, blocks: Optional[Sequence[float]] = None, seed: Seed = None) -> np.ndarray:
    """
    Skew matrix with prescribed (or random) block values in a random basis.

    Args:
        n: Dimension
        blocks: Block values; drawn uniformly from [0.5, 3] when omitted
        seed: Random seed

    Returns:
        n x n skew-symmetric matrix Q.T @ K @ Q
    """
    rng = numpy_rng(seed)
    if blocks is None:
        blocks = rng.uniform(0.5, 3.0, size=n // 2)
    Q = random_rotation(n, rng)
    return Q.T @ block_matrix(blocks, n) @ Q
