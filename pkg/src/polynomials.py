"""
Exact multivariate polynomials over the phase variables.

Variables are ordered (gamma_1..gamma_n, p_1..p_n); coefficients are exact
``Fraction`` values. Polynomials are immutable values: every arithmetic
operation returns a new object.
"""

import heapq
import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import gcd
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .exceptions import DimensionMismatch
from .phase import PhaseState, to_rational

logger = logging.getLogger(__name__)

Exponent = Tuple[int, ...]


def _lcm(a: int, b: int) -> int:
    return a * b // gcd(a, b)


class Polynomial:
    """
    Multivariate polynomial with rational coefficients.

    Attributes:
        nvars: Number of variables (2n for the phase space of R^n)
        terms: Read-only mapping exponent vector -> nonzero Fraction
    """

    def __init__(self, nvars: int, terms: Optional[Mapping[Exponent, object]] = None):
        self.nvars = int(nvars)
        clean: Dict[Exponent, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise DimensionMismatch(f"exponent vector {exps} does not have length {self.nvars}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            coeff = to_rational(coeff)
            if coeff:
                clean[exps] = clean.get(exps, Fraction(0)) + coeff
        self._terms = {k: v for k, v in clean.items() if v}
        self._hash = None
        self._compiled = None
        self._sparse = None

    @classmethod
    def _raw(cls, nvars: int, terms: Dict[Exponent, Fraction]) -> "Polynomial":
        """Wrap an already-clean term dict without re-validation."""
        poly = cls.__new__(cls)
        poly.nvars = nvars
        poly._terms = {k: v for k, v in terms.items() if v}
        poly._hash = None
        poly._compiled = None
        poly._sparse = None
        return poly

    @classmethod
    def constant(cls, nvars: int, value) -> "Polynomial":
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls._raw(nvars, {})

    @classmethod
    def variable(cls, nvars: int, index: int) -> "Polynomial":
        if not 0 <= index < nvars:
            raise IndexError(f"variable index {index} out of range for {nvars} variables")
        exps = [0] * nvars
        exps[index] = 1
        return cls._raw(nvars, {tuple(exps): Fraction(1)})

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree (0 for the zero polynomial)."""
        return max((sum(k) for k in self._terms), default=0)

    def degree_in(self, indices: Iterable[int]) -> int:
        """Total degree in the given subset of variables."""
        indices = list(indices)
        return max((sum(k[i] for i in indices) for k in self._terms), default=0)

    def __len__(self) -> int:
        return len(self._terms)

    def _check(self, other: "Polynomial"):
        if self.nvars != other.nvars:
            raise DimensionMismatch(f"polynomials in {self.nvars} and {other.nvars} variables")

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            return other
        return Polynomial.constant(self.nvars, other)

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, Fraction(0)) + v
        return Polynomial._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.nvars, {k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def scale(self, factor) -> "Polynomial":
        factor = to_rational(factor)
        if not factor:
            return Polynomial.zero(self.nvars)
        return Polynomial._raw(self.nvars, {k: v * factor for k, v in self._terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check(other)
        out: Dict[Exponent, Fraction] = {}
        for k1, v1 in self._terms.items():
            for k2, v2 in other._terms.items():
                key = tuple(a + b for a, b in zip(k1, k2))
                out[key] = out.get(key, Fraction(0)) + v1 * v2
        return Polynomial._raw(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "Polynomial":
        if power < 0:
            raise ValueError("negative powers are not polynomials")
        result = Polynomial.constant(self.nvars, 1)
        base = self
        while power:
            if power & 1:
                result = result * base
            base = base * base
            power >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self.nvars == other.nvars and self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.constant(self.nvars, other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self._terms.items())))
        return self._hash

    def derivative(self, index: int) -> "Polynomial":
        """Partial derivative with respect to variable ``index``."""
        out: Dict[Exponent, Fraction] = {}
        for k, v in self._terms.items():
            e = k[index]
            if e:
                key = k[:index] + (e - 1,) + k[index + 1:]
                out[key] = out.get(key, Fraction(0)) + v * e
        return Polynomial._raw(self.nvars, out)

    # exact evaluation

    def _sparse_terms(self):
        if self._sparse is None:
            coeff_lcm = reduce(_lcm, (v.denominator for v in self._terms.values()), 1)
            sparse = []
            for k, v in self._terms.items():
                factors = tuple((i, e) for i, e in enumerate(k) if e)
                sparse.append((v.numerator * (coeff_lcm // v.denominator), sum(k), factors))
            self._sparse = (coeff_lcm, sparse)
        return self._sparse

    def evaluate(self, point: Sequence) -> Fraction:
        """
        Exact value at a rational point.

        All coordinates are brought to one common denominator and coefficient
        denominators are cleared, so the sum runs in integer arithmetic.

        Args:
            point: nvars rational coordinates, or a PhaseState

        Returns:
            Exact Fraction value
        """
        if isinstance(point, PhaseState):
            point = point.coordinates()
        if len(point) != self.nvars:
            raise DimensionMismatch(f"point has {len(point)} coordinates, polynomial has {self.nvars} variables")
        if not self._terms:
            return Fraction(0)
        values = [to_rational(x) for x in point]
        common = reduce(_lcm, (v.denominator for v in values), 1)
        numerators = [v.numerator * (common // v.denominator) for v in values]
        coeff_lcm, sparse = self._sparse_terms()
        deg = self.degree
        common_powers = [1]
        for _ in range(deg):
            common_powers.append(common_powers[-1] * common)
        power_cache: Dict[Tuple[int, int], int] = {}
        total = 0
        for coeff, term_degree, factors in sparse:
            value = coeff * common_powers[deg - term_degree]
            for i, e in factors:
                cached = power_cache.get((i, e))
                if cached is None:
                    cached = power_cache[(i, e)] = numerators[i] ** e
                value *= cached
            total += value
        return Fraction(total, coeff_lcm * common_powers[deg])

    # floating evaluation

    def compile(self) -> Tuple[np.ndarray, np.ndarray]:
        """Exponent matrix (terms x nvars) and float coefficient vector."""
        if self._compiled is None:
            if self._terms:
                keys = list(self._terms)
                exps = np.array(keys, dtype=int)
                coeffs = np.array([float(self._terms[k]) for k in keys])
            else:
                exps = np.zeros((0, self.nvars), dtype=int)
                coeffs = np.zeros(0)
            self._compiled = (exps, coeffs)
        return self._compiled

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        """
        Floating values at many points.

        Args:
            points: Array of shape (N, nvars) or (nvars,)

        Returns:
            Array of shape (N,) (or a scalar for a single point)
        """
        points = np.asarray(points, dtype=float)
        single = points.ndim == 1
        points = np.atleast_2d(points)
        exps, coeffs = self.compile()
        if exps.shape[0] == 0:
            values = np.zeros(points.shape[0])
        else:
            values = np.prod(points[:, None, :] ** exps[None, :, :], axis=2) @ coeffs
        return values[0] if single else values

    def gradient_many(self, points: np.ndarray) -> np.ndarray:
        """Gradients at many points, shape (N, nvars)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        exps, coeffs = self.compile()
        grads = np.zeros((points.shape[0], self.nvars))
        for i in range(self.nvars):
            mask = exps[:, i] > 0
            if not np.any(mask):
                continue
            sub = exps[mask].copy()
            weights = coeffs[mask] * sub[:, i]
            sub[:, i] -= 1
            grads[:, i] = np.prod(points[:, None, :] ** sub[None, :, :], axis=2) @ weights
        return grads

    def gradient(self, point) -> np.ndarray:
        if isinstance(point, PhaseState):
            point = point.as_array()
        return self.gradient_many(np.asarray(point, dtype=float))[0]

    # division by phi1

    def divmod_phi1(self) -> Tuple["Polynomial", "Polynomial"]:
        """
        Divide by phi1 = gamma_1^2 + ... + gamma_n^2 in lex order.

        Returns:
            (quotient, remainder); the remainder has degree <= 1 in gamma_1,
            and is zero exactly when phi1 divides the polynomial
        """
        n = self.nvars // 2
        work = dict(self._terms)
        heap = [tuple(-e for e in k) for k in work]
        heapq.heapify(heap)
        quotient: Dict[Exponent, Fraction] = {}
        remainder: Dict[Exponent, Fraction] = {}
        while heap:
            key = tuple(-e for e in heapq.heappop(heap))
            coeff = work.pop(key, None)
            if not coeff:
                continue
            if key[0] < 2:
                remainder[key] = coeff
                continue
            base = (key[0] - 2,) + key[1:]
            quotient[base] = quotient.get(base, Fraction(0)) + coeff
            for i in range(1, n):
                shifted = base[:i] + (base[i] + 2,) + base[i + 1:]
                if shifted in work:
                    work[shifted] -= coeff
                else:
                    work[shifted] = -coeff
                    heapq.heappush(heap, tuple(-e for e in shifted))
        return Polynomial._raw(self.nvars, quotient), Polynomial._raw(self.nvars, remainder)

    # text form

    def variable_names(self) -> List[str]:
        n = self.nvars // 2
        return [f"g{i + 1}" for i in range(n)] + [f"p{i + 1}" for i in range(self.nvars - n)]

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        names = self.variable_names()
        parts = []
        for key in sorted(self._terms):
            factors = [names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(key) if e]
            parts.append("*".join([str(self._terms[key])] + factors))
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial(nvars={self.nvars}, {self})"


@dataclass(frozen=True)
class RationalObservable:
    """
    Polynomial divided by a power of 2*phi1.

    Attributes:
        numerator: Polynomial numerator
        phi1_power: Exponent k of the denominator (2 phi1)^k
    """
    numerator: Polynomial
    phi1_power: int = 0

    def normalized(self) -> "RationalObservable":
        """Cancel factors of phi1 until the numerator is not divisible by it."""
        numerator, power = self.numerator, self.phi1_power
        if numerator.is_zero():
            return RationalObservable(numerator, 0)
        while power > 0:
            quotient, remainder = numerator.divmod_phi1()
            if not remainder.is_zero():
                break
            numerator, power = quotient.scale(Fraction(1, 2)), power - 1
        return RationalObservable(numerator, power)

    def is_zero(self) -> bool:
        return self.numerator.is_zero()

    @property
    def degree(self) -> int:
        return self.numerator.degree

    def evaluate(self, point) -> Fraction:
        """Exact value at a rational point with phi1 != 0."""
        if isinstance(point, PhaseState):
            point = point.coordinates()
        value = self.numerator.evaluate(point)
        if self.phi1_power and value:
            n = self.numerator.nvars // 2
            phi1 = sum((to_rational(x) ** 2 for x in point[:n]), Fraction(0))
            value /= (2 * phi1) ** self.phi1_power
        return value

    def evaluate_float(self, y: np.ndarray) -> float:
        y = np.asarray(y, dtype=float)
        value = float(self.numerator.evaluate_many(y))
        if self.phi1_power:
            n = self.numerator.nvars // 2
            value /= (2.0 * float(np.dot(y[:n], y[:n]))) ** self.phi1_power
        return value

    def __str__(self) -> str:
        if self.phi1_power == 0:
            return str(self.numerator)
        return f"({self.numerator}) / (2*phi1)^{self.phi1_power}"


def phase_variables(n: int) -> Tuple[List[Polynomial], List[Polynomial]]:
    """The coordinate polynomials (gamma_1..gamma_n), (p_1..p_n)."""
    nvars = 2 * n
    gammas = [Polynomial.variable(nvars, i) for i in range(n)]
    momenta = [Polynomial.variable(nvars, n + i) for i in range(n)]
    return gammas, momenta


def phi1(n: int) -> Polynomial:
    """<gamma, gamma>."""
    gammas, _ = phase_variables(n)
    return sum((g * g for g in gammas), Polynomial.zero(2 * n))


def phi2(n: int) -> Polynomial:
    """<p, gamma>."""
    gammas, momenta = phase_variables(n)
    return sum((x * g for x, g in zip(momenta, gammas)), Polynomial.zero(2 * n))


def random_polynomial(nvars: int, degree: int, rng, n_terms: int = 6, bound: int = 5) -> Polynomial:
    """
    Random polynomial of total degree <= ``degree`` with small integer coefficients.

    Args:
        nvars: Number of variables
        degree: Maximum total degree
        rng: ``random.Random`` instance
        n_terms: Number of monomials drawn
        bound: Coefficients are drawn from [-bound, bound]
    """
    terms: Dict[Exponent, Fraction] = {}
    for _ in range(n_terms):
        exps = [0] * nvars
        for _ in range(rng.randint(0, degree)):
            exps[rng.randrange(nvars)] += 1
        key = tuple(exps)
        terms[key] = terms.get(key, Fraction(0)) + rng.randint(-bound, bound)
    return Polynomial(nvars, terms)
