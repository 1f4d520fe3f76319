"""
Exception hierarchy for the magnetic flow package.

Each exception maps to one failure mode of the library; the CLI turns the
top-level ones into exit codes (see ``exit_code_for``).
"""

from typing import Any, Dict, List, Optional


class MagneticFlowError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(MagneticFlowError, ValueError):
    """Invalid run configuration or system parameters."""


class NotSkew(MagneticFlowError, ValueError):
    """The magnetic field matrix is not skew-symmetric."""


class ZeroPosition(MagneticFlowError, ValueError):
    """The position vector is too close to zero to be projected onto the sphere."""


class ConstraintViolation(MagneticFlowError, ValueError):
    """A state flagged as constrained does not satisfy phi1 = 1, phi2 = 0."""


class DimensionMismatch(MagneticFlowError, ValueError):
    """Observables do not share the same number of phase variables."""


class DegreeCapExceeded(MagneticFlowError, ValueError):
    """A bracket input exceeds the configured total degree cap."""


class NotClosed(MagneticFlowError):
    """
    A Dirac bracket of two generators does not lie in their linear span.

    Attributes:
        pair: Names of the two generators
        residual: Text form of the residual observable
    """

    def __init__(self, pair, residual: str):
        super().__init__(f"bracket {{{pair[0]}, {pair[1]}}}_d is not in the generator span; "
                         f"residual = {residual}")
        self.pair = tuple(pair)
        self.residual = residual


class NotApplicable(MagneticFlowError):
    """The block pattern of the field does not match the requested construction."""


class HypothesisViolation(NotApplicable):
    """A block hypothesis (equal or vanishing blocks) is not met by the configuration."""


class InconsistentRanks(MagneticFlowError):
    """
    Ranks vary across generic sample points beyond isolated lower strata.

    Attributes:
        strata: Mapping rank -> number of sample points with that rank
    """

    def __init__(self, what: str, strata: Dict[int, int]):
        super().__init__(f"inconsistent {what} ranks across sample points: {strata}")
        self.what = what
        self.strata = dict(strata)


class DegeneratePoint(MagneticFlowError):
    """Marker for rank evaluations at p = 0; recorded in metadata, never raised by rank code."""


class StepFailure(MagneticFlowError):
    """The adaptive integrator could not satisfy the tolerances above the minimum step."""

    def __init__(self, t: float, h: float):
        super().__init__(f"step size {h:.3e} fell below the minimum at t = {t:.6g}")
        self.t = t
        self.h = h


class VerificationFailure(MagneticFlowError):
    """
    One or more asserted verdicts failed.

    Attributes:
        failures: Verdict dictionaries of the failed checks
    """

    def __init__(self, failures: Optional[List[Dict[str, Any]]] = None):
        failures = failures or []
        names = ", ".join(f"{f.get('target')}:{f.get('check')}" for f in failures)
        super().__init__(f"{len(failures)} verification check(s) failed: {names}")
        self.failures = failures


EXIT_CODES = [
    (ConfigError, 2),
    (StepFailure, 3),
    (VerificationFailure, 4),
    (NotApplicable, 5),
]


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception onto the CLI exit-code contract.

    Args:
        error: Exception raised by a command

    Returns:
        2 config, 3 integration, 4 verification, 5 hypothesis, 1 anything else
    """
    for error_type, code in EXIT_CODES:
        if isinstance(error, error_type):
            return code
    return 1
