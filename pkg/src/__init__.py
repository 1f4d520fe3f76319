"""
Source code for the magnetic flow toolkit.

This package simulates magnetic flows in R^n and on spheres S^{n-1} under a
constant magnetic two-form and verifies their first integrals exactly.
"""

# Package metadata
__version__ = "1.0.0"

# Import key classes and functions to make them easily accessible
from .exceptions import (MagneticFlowError, ConfigError, NotSkew, ZeroPosition, ConstraintViolation,
                         DimensionMismatch, DegreeCapExceeded, NotClosed, NotApplicable,
                         HypothesisViolation, InconsistentRanks, DegeneratePoint, StepFailure,
                         VerificationFailure)
from .phase import (SystemParams, MagneticField, PhaseState, GaugeOffset, canonicalize_kappa,
                    sample_constrained_point, project_to_constraints)
from .polynomials import Polynomial, RationalObservable
from .brackets import magnetic_bracket, dirac_bracket, identity_test, structure_constants
from .integrals import (IntegralCatalog, DimensionCertificate, build_catalog, build_rn_catalog,
                        build_pendulum_catalog, jacobian_rank, nc_dimension_check, commuting_chain,
                        classify_blocks)
from .dynamics import (FlowSpec, Trajectory, sphere_vector_field, rn_closed_form, integrate,
                       pendulum_circle_radius, pendulum_momentum_drift, unitary_reduction)
from .verification import VerificationContext, VerificationReport, run_verification
from .config import RunConfig, load_config
from .utils import save_results, load_results
from .api import simulate, verify, scan, reduce, classify, catalog

# Define what gets imported with "from src import *"
__all__ = [
    # Errors
    'MagneticFlowError', 'ConfigError', 'NotSkew', 'ZeroPosition', 'ConstraintViolation',
    'DimensionMismatch', 'DegreeCapExceeded', 'NotClosed', 'NotApplicable', 'HypothesisViolation',
    'InconsistentRanks', 'DegeneratePoint', 'StepFailure', 'VerificationFailure',

    # Phase space
    'SystemParams', 'MagneticField', 'PhaseState', 'GaugeOffset', 'canonicalize_kappa',
    'sample_constrained_point', 'project_to_constraints',

    # Polynomials and brackets
    'Polynomial', 'RationalObservable', 'magnetic_bracket', 'dirac_bracket', 'identity_test',
    'structure_constants',

    # Integrals
    'IntegralCatalog', 'DimensionCertificate', 'build_catalog', 'build_rn_catalog',
    'build_pendulum_catalog', 'jacobian_rank', 'nc_dimension_check', 'commuting_chain', 'classify_blocks',

    # Dynamics
    'FlowSpec', 'Trajectory', 'sphere_vector_field', 'rn_closed_form', 'integrate',
    'pendulum_circle_radius', 'pendulum_momentum_drift', 'unitary_reduction',

    # Verification, configuration and results
    'VerificationContext', 'VerificationReport', 'run_verification', 'RunConfig', 'load_config',
    'save_results', 'load_results',

    # API functions
    'simulate', 'verify', 'scan', 'reduce', 'classify', 'catalog',
]
