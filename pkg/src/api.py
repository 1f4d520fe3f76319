"""
API module for the magnetic flow toolkit.
Provides a clean interface to the simulate, verify, scan and reduce commands.
"""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from typing import Any, Dict, List, Union

import numpy as np

from .brackets import DEFAULT_TRIALS
from .config import RunConfig, load_config
from .dynamics import (FlowSpec, catalog_for, integrate, larmor_period, larmor_radius,
                       pendulum_center, pendulum_circle_radius, pendulum_momentum_drift, rn_closed_form)
from .exceptions import HypothesisViolation, VerificationFailure, exit_code_for
from .integrals import build_catalog, classify_blocks
from .phase import MagneticField, PhaseState, SystemParams
from .utils import ResultsStore, provenance, run_scan_cell, save_results
from .verification import DRIFT_TOLERANCE, VerificationContext, reduction_run, run_verification

logger = logging.getLogger(__name__)

ConfigLike = Union[RunConfig, Dict[str, Any], str]


def _error(action: str, error: Exception) -> Dict[str, Any]:
    result = {
        "status": "error",
        "message": f"Failed to {action}: {error}",
        "exit_code": exit_code_for(error),
    }
    failures = getattr(error, "failures", None)
    if failures:
        result["failures"] = failures
    return result


def _larmor_summary(trajectory, initial: PhaseState, field: MagneticField, params: SystemParams) -> List[Dict[str, Any]]:
    """Formula and measured Larmor radius of every nonzero block."""
    n = params.n
    m, s = float(params.m), float(params.s)
    y0 = initial.as_array()
    circles = []
    for i, kappa in enumerate(field.blocks):
        if kappa == 0:
            continue
        a, b = 2 * i, 2 * i + 1
        omega = s * kappa / m
        center = np.array([y0[a] + y0[n + b] / (m * omega), y0[b] - y0[n + a] / (m * omega)])
        distances = np.hypot(trajectory.states[:, a] - center[0], trajectory.states[:, b] - center[1])
        circles.append({
            "block": f"{a + 1}{b + 1}",
            "radius": larmor_radius((y0[n + a], y0[n + b]), kappa, params),
            "measured_radius": float(distances.max()),
            "radius_spread": float(distances.max() - distances.min()),
            "period": larmor_period(kappa, params),
            "center": center.tolist(),
        })
    return circles


class MagneticFlowAPI:
    """API for simulating magnetic flows and verifying their integrals."""

    def load(self, config: ConfigLike) -> RunConfig:
        """A RunConfig from a config object, a mapping or a JSON file path."""
        if isinstance(config, RunConfig):
            return config
        if isinstance(config, dict):
            return RunConfig.from_dict(config)
        return load_config(config)

    def simulate(self, config: ConfigLike) -> Dict[str, Any]:
        """
        Integrate one flow and write its trajectory CSV and drift summary.

        Args:
            config: Run configuration

        Returns:
            Dictionary with operation status, output paths and the summary
        """
        try:
            cfg = self.load(config).validate("simulate")
            params, field = cfg.params(), cfg.field()
            spec = FlowSpec(cfg.flow_kind, params, None if cfg.flow_kind == "pendulum" else field, b=tuple(cfg.b))
            initial = cfg.initial_state(field)
            catalog = catalog_for(spec, cfg.gauge_offset())
            trajectory = integrate(spec, initial, cfg.t_end, cfg.rel_tol, cfg.abs_tol, catalog=catalog)

            config_hash = cfg.config_hash()
            os.makedirs(cfg.out, exist_ok=True)
            csv_path = os.path.join(cfg.out, f"trajectory_{config_hash[:12]}.csv")
            trajectory.to_csv(csv_path, basis=None if cfg.flow_kind == "pendulum" else field.basis)
            max_drift = max(trajectory.drift.values(), default=0.0)
            summary: Dict[str, Any] = {
                "flow": cfg.flow_kind,
                "n": params.n,
                "blocks": list(field.blocks),
                "t_end": cfg.t_end,
                "steps": len(trajectory.times) - 1,
                "drift": trajectory.drift,
                "max_drift": max_drift,
                "drift_ok": max_drift < DRIFT_TOLERANCE,
                "csv_coordinates": "input",
                "provenance": provenance(cfg),
            }
            if cfg.flow_kind == "ambient":
                closed = rn_closed_form(initial, field, params, cfg.t_end).as_array()
                summary["closed_form_error"] = float(np.max(np.abs(closed - trajectory.states[-1])))
                summary["larmor"] = _larmor_summary(trajectory, initial, field, params)
            else:
                summary["constraint_residual"] = trajectory.constraint_residual()
            if cfg.flow_kind == "pendulum":
                summary["momentum_drift"] = pendulum_momentum_drift(trajectory)
                if not any(cfg.b):
                    center = pendulum_center(initial, params)
                    cosines = np.clip(trajectory.states[:, :3] @ center, -1.0, 1.0)
                    summary["radius"] = float(np.max(np.arccos(cosines)))
                    summary["radius_formula"] = pendulum_circle_radius(float(params.s), float(params.m))
                    summary["unit_speed"] = math.isclose(float(np.dot(initial.p, initial.p)), 1.0)
            summary_path = os.path.join(cfg.out, f"summary_{config_hash[:12]}.json")
            save_results(summary, summary_path)
            return {
                "status": "success",
                "message": f"Simulated {cfg.flow_kind} flow to t={cfg.t_end}",
                "csv": csv_path,
                "summary_path": summary_path,
                "summary": summary,
            }
        except Exception as e:
            return _error("simulate", e)

    def verify(self, config: ConfigLike) -> Dict[str, Any]:
        """
        Run verification targets and write the report.

        Returns:
            Dictionary with operation status, the report path and the report;
            exit_code 4 when an asserted check fails, 5 when a target does not apply
        """
        report_path = None
        try:
            cfg = self.load(config).validate("verify")
            params, field = cfg.params(), cfg.field()
            initial = cfg.initial_state(field) if cfg.initial is not None else None
            ctx = VerificationContext(params, field, trials=cfg.trials, seed=cfg.seed, points=cfg.points,
                                      t_end=cfg.t_end, rel_tol=cfg.rel_tol, abs_tol=cfg.abs_tol,
                                      initial=initial, r=cfg.r, b=cfg.b, gauge=cfg.gauge_offset())
            report = run_verification(ctx, cfg.targets, provenance(cfg))
            os.makedirs(cfg.out, exist_ok=True)
            report_path = os.path.join(cfg.out, f"report_{cfg.config_hash()[:12]}.json")
            save_results(report.to_dict(), report_path)
            report.raise_for_failures()
            return {
                "status": "success",
                "message": f"All {len(report.verdicts)} checks hold for {', '.join(report.targets)}",
                "report_path": report_path,
                "report": report.to_dict(),
            }
        except VerificationFailure as e:
            result = _error("verify", e)
            result["report_path"] = report_path
            return result
        except Exception as e:
            return _error("verify", e)

    def scan(self, config: ConfigLike) -> Dict[str, Any]:
        """
        Run every grid cell and append the rows to the results store.

        Cells run in a process pool of ``jobs`` workers; this process is the
        only writer of the store. Failed cells are recorded, not raised.
        Cells whose config hash already has an "ok" row in the store are
        skipped and their stored rows returned under "skipped".
        """
        try:
            cfg = self.load(config).validate("scan")
            os.makedirs(cfg.out, exist_ok=True)
            store = ResultsStore(os.path.join(cfg.out, "scan_results.csv"))
            cells, skipped = [], []
            for cell in (cfg.cell(cell) for cell in cfg.grid):
                stored = [row for row in store.rows_for(cell.config_hash()) if row["status"] == "ok"]
                if stored:
                    skipped.append(stored[-1])
                else:
                    cells.append(cell)
            rows = []
            if cfg.jobs > 1:
                with ProcessPoolExecutor(max_workers=cfg.jobs) as executor:
                    futures = [executor.submit(run_scan_cell, cell) for cell in cells]
                    for future in as_completed(futures):
                        row = future.result()
                        store.append([row])
                        rows.append(row)
            else:
                for cell in cells:
                    row = run_scan_cell(cell)
                    store.append([row])
                    rows.append(row)
            failed = sum(1 for row in rows if row["status"] != "ok")
            logger.info("scan finished: %d cells, %d failed, %d already stored", len(rows), failed, len(skipped))
            return {
                "status": "success",
                "message": f"Scanned {len(rows)} cells ({failed} failed, {len(skipped)} already stored)",
                "store": store.filename,
                "rows": rows,
                "skipped": skipped,
            }
        except Exception as e:
            return _error("scan", e)

    def reduce(self, config: ConfigLike) -> Dict[str, Any]:
        """
        Reduce the initial state by the U(r) (or orthogonal, r = 1) symmetry and
        check that the zeroed coordinates stay zero along the flow.

        Returns:
            Dictionary with R, the reduced initial state, the reduced config and
            the invariance drift; exit_code 5 when the blocks do not admit the reduction
        """
        try:
            cfg = self.load(config).validate("reduce")
            if cfg.flow_kind != "sphere":
                raise HypothesisViolation("reductions act on the sphere flow")
            params, field = cfg.params(), cfg.field()
            initial = cfg.initial_state(field)
            ctx = VerificationContext(params, field, seed=cfg.seed, t_end=cfg.t_end, rel_tol=cfg.rel_tol,
                                      abs_tol=cfg.abs_tol, initial=initial)
            run = reduction_run(ctx, cfg.r)
            reduced = PhaseState(run["reduced"]["gamma"], run["reduced"]["p"])
            user = field.from_canonical(reduced)
            reduced_config = cfg.merge({"initial": {"gamma": list(user.gamma), "p": list(user.p)},
                                        "r": run["r"]}).to_dict()
            invariant = run["max_zeroed"] < DRIFT_TOLERANCE
            result = {
                "status": "success" if invariant else "error",
                "message": (f"Reduction with r={run['r']} is invariant" if invariant
                            else f"Zeroed coordinates grew to {run['max_zeroed']:.3e}"),
                "reduction": run,
                "reduced_config": reduced_config,
                "provenance": provenance(cfg),
            }
            if not invariant:
                result["exit_code"] = exit_code_for(VerificationFailure())
            os.makedirs(cfg.out, exist_ok=True)
            result["path"] = os.path.join(cfg.out, f"reduce_{cfg.config_hash()[:12]}.json")
            save_results(result, result["path"])
            return result
        except Exception as e:
            return _error("reduce", e)

    def classify(self, n: int, blocks: List[float]) -> Dict[str, Any]:
        """Name the integrability case of a block pattern."""
        try:
            field = MagneticField.from_blocks(blocks, n)
            case = classify_blocks(n, field.blocks)
            return {
                "status": "success",
                "message": case.case if case else "unclassified",
                "case": case.case if case else None,
                "ddim": case.ddim if case else None,
                "dind": case.dind if case else None,
            }
        except Exception as e:
            return _error("classify", e)

    def catalog(self, n: int, blocks: List[float], m: float = 1.0, s: float = 1.0,
                trials: int = DEFAULT_TRIALS, seed: int = 0) -> Dict[str, Any]:
        """
        List the first integrals of the sphere flow as polynomials.

        Every entry is certified with exact identity tests; a failed entry
        returns an error with exit_code 4 and the failing verdicts.
        """
        try:
            params = SystemParams(n, m, s)
            catalog = build_catalog(params, MagneticField.from_blocks(blocks, n), verify=True,
                                    trials=trials, seed=seed)
            return {
                "status": "success",
                "message": f"{len(catalog)} first integrals, all certified",
                "integrals": {name: str(poly) for name, poly in catalog.observables.items()},
                "verdicts": catalog.metadata["verdicts"],
            }
        except Exception as e:
            return _error("build catalog", e)


# Global API instance
api = MagneticFlowAPI()

# Convenience functions
def simulate(config: ConfigLike) -> Dict[str, Any]:
    """Integrate a flow and write its trajectory."""
    return api.simulate(config)

def verify(config: ConfigLike) -> Dict[str, Any]:
    """Run verification targets."""
    return api.verify(config)

def scan(config: ConfigLike) -> Dict[str, Any]:
    """Scan a grid of block patterns."""
    return api.scan(config)

def reduce(config: ConfigLike) -> Dict[str, Any]:
    """Reduce the initial state by a symmetry."""
    return api.reduce(config)

def classify(n: int, blocks: List[float]) -> Dict[str, Any]:
    """Name the integrability case of a block pattern."""
    return api.classify(n, blocks)

def catalog(n: int, blocks: List[float], m: float = 1.0, s: float = 1.0,
            trials: int = DEFAULT_TRIALS, seed: int = 0) -> Dict[str, Any]:
    """List the certified first integrals of the sphere flow."""
    return api.catalog(n, blocks, m, s, trials, seed)
