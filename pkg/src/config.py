"""
Run configuration: a JSON document overridden by command-line flags.
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, List, Optional

import numpy as np

from .dynamics import FLOW_KINDS, KIND_ALIASES
from .exceptions import ConfigError, NotSkew, ZeroPosition
from .phase import (CONSTRAINT_TOLERANCE, GaugeOffset, MagneticField, PhaseState, SystemParams,
                    canonicalize_kappa, project_to_constraints, sample_constrained_point)

logger = logging.getLogger(__name__)

# excluded from the config hash
NON_SEMANTIC_FIELDS = ("out", "jobs")
COMMANDS = ("simulate", "verify", "scan", "reduce")


@dataclass(frozen=True)
class RunConfig:
    """
    Settings of one command run.

    Exactly one of ``blocks`` (canonical block values) and ``matrix`` (a full
    skew matrix) describes the field; the pendulum flow needs neither.
    ``initial`` is given in the user's coordinates as {"gamma": [...], "p": [...]};
    without it the initial state is drawn from ``seed``.
    """
    n: Optional[int] = None
    m: float = 1.0
    s: float = 1.0
    blocks: Optional[List[float]] = None
    matrix: Optional[List[List[float]]] = None
    flow: str = "sphere"
    initial: Optional[Dict[str, List[float]]] = None
    seed: int = 0
    t_end: float = 100.0
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    out: str = "results"
    jobs: int = 1
    targets: Optional[List[str]] = None
    grid: Optional[List[Dict[str, Any]]] = None
    r: Optional[int] = None
    b: List[float] = (0.0, 0.0, 0.0)
    trials: int = 200
    gauge: Optional[List[float]] = None
    points: int = 20

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """
        Build a config from a plain mapping.

        Raises:
            ConfigError: If the mapping has keys that are not config fields
        """
        if not isinstance(data, dict):
            raise ConfigError(f"config must be a JSON object, got {type(data).__name__}")
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"Unknown config keys: {unknown}")
        data = dict(data)
        if "b" in data and data["b"] is not None:
            data["b"] = list(data["b"])
        return cls(**{k: v for k, v in data.items() if v is not None})

    def merge(self, overrides: Dict[str, Any]) -> "RunConfig":
        """A copy with every non-None override applied."""
        values = {k: v for k, v in overrides.items() if v is not None}
        if "blocks" in values:
            values.setdefault("matrix", None)
        elif "matrix" in values:
            values.setdefault("blocks", None)
        names = {f.name for f in fields(self)}
        unknown = sorted(set(values) - names)
        if unknown:
            raise ConfigError(f"Unknown config keys: {unknown}")
        return replace(self, **values)

    @property
    def flow_kind(self) -> str:
        return KIND_ALIASES.get(self.flow, self.flow)

    @property
    def dimension(self) -> Optional[int]:
        if self.n is not None:
            return self.n
        if self.flow_kind == "pendulum":
            return 3
        if self.matrix is not None:
            return len(self.matrix)
        return None

    def validate(self, command: str) -> "RunConfig":
        """
        Check the settings a command needs.

        Args:
            command: "simulate", "verify", "scan" or "reduce"

        Returns:
            self, for chaining

        Raises:
            ConfigError: On the first invalid setting
        """
        if command not in COMMANDS:
            raise ConfigError(f"Unknown command: {command}. Must be one of {list(COMMANDS)}")
        if self.flow_kind not in FLOW_KINDS:
            raise ConfigError(f"Unknown flow kind: {self.flow}. Must be one of {list(FLOW_KINDS)}")
        for name in ("t_end", "rel_tol", "abs_tol"):
            if not isinstance(getattr(self, name), (int, float)):
                raise ConfigError(f"{name} must be a number")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ConfigError("tolerances must be positive")
        if self.t_end <= 0:
            raise ConfigError(f"t_end must be positive, got {self.t_end}")
        for name in ("jobs", "trials", "points"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if len(self.b) != 3:
            raise ConfigError(f"b must have three components, got {len(self.b)}")
        if self.r is not None and (not isinstance(self.r, int) or self.r < 1):
            raise ConfigError(f"r must be a positive integer, got {self.r!r}")

        if command == "scan":
            self._validate_grid()
            return self
        n = self.dimension
        if n is None:
            raise ConfigError("n is required")
        if self.flow_kind == "pendulum" and n != 3:
            raise ConfigError("the pendulum flow requires n = 3")
        self.params()
        if self.flow_kind != "pendulum" and (self.blocks is None) == (self.matrix is None):
            raise ConfigError("exactly one of blocks and matrix must be given")
        self.field()
        if self.initial is not None:
            if set(self.initial) != {"gamma", "p"}:
                raise ConfigError('initial must have exactly the keys "gamma" and "p"')
            if len(self.initial["gamma"]) != n or len(self.initial["p"]) != n:
                raise ConfigError(f"initial gamma and p must have {n} components")
        if self.gauge is not None and len(self.gauge) != n:
            raise ConfigError(f"gauge must have {n} components")
        return self

    def _validate_grid(self):
        if not self.grid:
            raise ConfigError("scan needs a non-empty grid of {n, blocks} cells")
        for cell in self.grid:
            if not isinstance(cell, dict) or "n" not in cell or "blocks" not in cell:
                raise ConfigError(f"grid cells need n and blocks, got {cell!r}")
            self.cell(cell).validate("simulate")

    def cell(self, cell: Dict[str, Any]) -> "RunConfig":
        """The per-cell config of a scan grid entry."""
        return replace(self, n=cell["n"], blocks=list(cell["blocks"]), matrix=None, grid=None,
                       flow="sphere", initial=None)

    def params(self) -> SystemParams:
        n = self.dimension
        if n is None:
            raise ConfigError("n is required")
        if self.blocks is not None and len(self.blocks) != n // 2:
            raise ConfigError(f"blocks must have {n // 2} values for n = {n}, got {len(self.blocks)}")
        return SystemParams(n, self.m, self.s)

    def field(self) -> MagneticField:
        """Canonicalized magnetic field (zero field for a pendulum run without one)."""
        n = self.dimension
        try:
            if self.matrix is not None:
                matrix = np.array(self.matrix, dtype=float)
                if matrix.shape != (n, n):
                    raise ConfigError(f"matrix must be {n}x{n}, got {matrix.shape}")
                return canonicalize_kappa(matrix)
            blocks = self.blocks if self.blocks is not None else [0.0] * (n // 2)
            return MagneticField.from_blocks(blocks, n)
        except NotSkew as error:
            raise ConfigError(str(error)) from error

    def gauge_offset(self) -> Optional[GaugeOffset]:
        return GaugeOffset(tuple(self.gauge)) if self.gauge is not None else None

    def initial_state(self, field: MagneticField) -> PhaseState:
        """
        Initial state in the canonical basis of the field.

        Defaults: gamma = 0, p = e1 for the R^n flow; gamma = e3, p = e1 for the
        pendulum; a random point of T*S^{n-1} drawn from ``seed`` for the sphere.
        An explicit state off T*S^{n-1} is projected onto it with a warning.
        """
        n = self.dimension
        kind = self.flow_kind
        if self.initial is None:
            if kind == "ambient":
                return PhaseState([0.0] * n, [1.0] + [0.0] * (n - 1))
            if kind == "pendulum":
                return PhaseState((0.0, 0.0, 1.0), (1.0, 0.0, 0.0), constrained=True)
            return sample_constrained_point(n, "float", self.seed)
        state = PhaseState(self.initial["gamma"], self.initial["p"])
        if kind != "pendulum":
            state = field.to_canonical(state)
        if kind == "ambient":
            return state
        residual = max(abs(float(x)) for x in state.residuals())
        try:
            if residual > CONSTRAINT_TOLERANCE:
                logger.warning("initial state is off T*S^{n-1} (residual %.3e); projecting", residual)
                return project_to_constraints(state)
            return PhaseState(state.gamma, state.p, constrained=True)
        except ZeroPosition as error:
            raise ConfigError(f"initial position is zero: {error}") from error

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["b"] = list(self.b)
        return data

    def semantic_dict(self) -> Dict[str, Any]:
        data = self.to_dict()
        for name in NON_SEMANTIC_FIELDS:
            data.pop(name, None)
        return data

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON of every setting that affects results."""
        text = json.dumps(self.semantic_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_config(filename: str) -> RunConfig:
    """
    Load a RunConfig from a JSON file.

    Args:
        filename: Path to the config document

    Returns:
        RunConfig (not yet validated)

    Raises:
        ConfigError: If the file cannot be read or parsed
    """
    try:
        with open(filename, 'r') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as error:
        raise ConfigError(f"Failed to load config {filename}: {error}") from error
    return RunConfig.from_dict(data)
