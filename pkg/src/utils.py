"""
Utility functions: result files, the scan results store and the scan cell runner.
"""

import csv
import json
import os
import platform
import time
from typing import Any, Dict, List, Optional

import numpy as np
import scipy
import sympy

from .config import RunConfig
from .dynamics import FlowSpec, integrate
from .exceptions import InconsistentRanks, VerificationFailure, exit_code_for
from .integrals import build_catalog, classify_blocks, jacobian_rank, nc_dimension_check, pair_label
from .phase import numpy_rng, sample_constrained_point
from .verification import DRIFT_TOLERANCE

SCAN_FIELDS = [
    "config_hash", "n", "blocks", "status", "case", "integrals_verified", "max_drift", "drift_ok", "rank_h_j_phi",
    "ddim", "dind", "expected_ddim", "expected_dind", "certificate_ok", "time_taken", "drift", "error",
]


def versions() -> Dict[str, str]:
    """Versions of the interpreter and the numerical stack."""
    from . import __version__
    return {
        "package": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "sympy": sympy.__version__,
    }


def provenance(config: RunConfig) -> Dict[str, Any]:
    return {"seed": config.seed, "config_hash": config.config_hash(), "versions": versions()}


def run_scan_cell(config: RunConfig) -> Dict[str, Any]:
    """
    Integrate one (n, blocks) cell and certify what its block pattern supports.

    Every catalog entry is first certified as a first integral with exact
    identity tests; a failed entry marks the row "verification-failed".

    Args:
        config: Validated per-cell config (sphere flow)

    Returns:
        Row for the scan results store; failures are recorded in "status" and "error"
    """
    start_time = time.time()
    row: Dict[str, Any] = {
        "config_hash": config.config_hash(),
        "n": config.n,
        "blocks": json.dumps(list(config.blocks)),
        "status": "ok",
        "case": "unclassified",
    }
    try:
        params, field = config.params(), config.field()
        catalog = build_catalog(params, field, verify=True, trials=config.trials, seed=config.seed)
        row["integrals_verified"] = len(catalog.metadata["verdicts"])
        spec = FlowSpec("sphere", params, field)
        trajectory = integrate(spec, config.initial_state(field), config.t_end, config.rel_tol,
                               config.abs_tol, catalog=catalog)
        max_drift = max(trajectory.drift.values())
        row.update(max_drift=max_drift, drift_ok=max_drift < DRIFT_TOLERANCE,
                   drift=json.dumps(trajectory.drift, sort_keys=True))

        names = ["H", "J"] + [f"Phi_{pair_label(2 * i + 1, 2 * i + 2)}" for i in range(len(field.blocks))]
        family = catalog.subset(names)
        rng = numpy_rng(config.seed)
        row["rank_h_j_phi"] = max(jacobian_rank(family, sample_constrained_point(params.n, "float", rng))
                                  for _ in range(config.points))

        case = classify_blocks(params.n, field.blocks)
        certificate = nc_dimension_check(list(catalog.observables.values()), config.points,
                                         field, params, config.seed)
        row.update(ddim=certificate.ddim, dind=certificate.dind)
        if case is not None:
            row.update(case=case.case, expected_ddim=case.ddim, expected_dind=case.dind,
                       certificate_ok=(certificate.ddim, certificate.dind) == (case.ddim, case.dind))
    except InconsistentRanks as error:
        row.update(status="inconsistent-ranks", error=str(error))
    except VerificationFailure as error:
        row.update(status="verification-failed", error=json.dumps(error.failures, default=str))
    except Exception as error:
        row.update(status="error", error=f"{type(error).__name__}: {error}", exit_code=exit_code_for(error))
    row["time_taken"] = time.time() - start_time
    row.pop("exit_code", None)
    return row


class ResultsStore:
    """
    Append-only CSV of scan rows keyed by config hash.

    Only one process writes to a store; scan workers return rows to it.
    """

    def __init__(self, filename: str, fieldnames: Optional[List[str]] = None):
        self.filename = filename
        self.fieldnames = fieldnames or SCAN_FIELDS

    def append(self, rows: List[Dict[str, Any]]):
        """Append rows under the header already in the file, if any."""
        new_file = not os.path.exists(self.filename) or os.path.getsize(self.filename) == 0
        fieldnames = self.fieldnames
        if not new_file:
            with open(self.filename, 'r', newline='') as f:
                fieldnames = next(csv.reader(f))
        with open(self.filename, 'a', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=fieldnames, extrasaction='ignore')
            if new_file:
                writer.writeheader()
            for row in rows:
                writer.writerow(row)

    def load(self) -> List[Dict[str, str]]:
        if not os.path.exists(self.filename):
            return []
        with open(self.filename, 'r', newline='') as f:
            return list(csv.DictReader(f))

    def rows_for(self, config_hash: str) -> List[Dict[str, str]]:
        return [row for row in self.load() if row["config_hash"] == config_hash]


def save_results(results: Any, filename: str):
    """
    Save results to a JSON file.

    Args:
        results: JSON-serializable results
        filename: Output filename
    """
    directory = os.path.dirname(filename)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(filename, 'w') as f:
        json.dump(results, f, indent=2, default=str)


def load_results(filename: str) -> Any:
    """
    Load results from a JSON file.

    Args:
        filename: Input filename

    Returns:
        The stored results
    """
    with open(filename, 'r') as f:
        return json.load(f)
