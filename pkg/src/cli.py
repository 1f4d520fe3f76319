"""
Command-line interface for the magnetic flow toolkit.
"""
import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

from .api import reduce, scan, simulate, verify
from .config import RunConfig, load_config
from .exceptions import ConfigError, exit_code_for

COMMANDS = {"simulate": simulate, "verify": verify, "scan": scan, "reduce": reduce}


def parse_floats(text: str) -> List[float]:
    """Parse "1,2,0.5" into [1.0, 2.0, 0.5]."""
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def parse_grid(text: str) -> List[Dict[str, Any]]:
    """
    Parse a scan grid.

    Either JSON ('[{"n": 6, "blocks": [1, 1, 2]}]') or the compact form
    "6:1,1,2;8:1,1,1,1".
    """
    text = text.strip()
    if text.startswith("["):
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise argparse.ArgumentTypeError(f"invalid grid JSON: {e}")
    cells = []
    for part in text.split(";"):
        if not part.strip():
            continue
        n, _, blocks = part.partition(":")
        try:
            cells.append({"n": int(n), "blocks": parse_floats(blocks)})
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid grid cell {part!r}")
    return cells


def parse_json(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"invalid JSON: {e}")


def add_common_arguments(parser: argparse.ArgumentParser):
    """Flags shared by every command; unset flags leave the config file values alone."""
    parser.add_argument("--config", help="JSON config file (flags override its values)")
    parser.add_argument("--n", type=int, help="Dimension of the ambient space")
    parser.add_argument("--m", type=float, help="Mass")
    parser.add_argument("--s", type=float, help="Charge parameter")
    parser.add_argument("--blocks", type=parse_floats, help="Canonical block values, e.g. 1,2")
    parser.add_argument("--matrix", type=parse_json, help="Full skew matrix as JSON")
    parser.add_argument("--flow", choices=["sphere", "ambient", "ambient_rn", "pendulum"], help="Flow kind")
    parser.add_argument("--initial", type=parse_json, help='Initial state, {"gamma": [...], "p": [...]}')
    parser.add_argument("--seed", type=int, help="Seed for sampled states and identity tests")
    parser.add_argument("--t-end", dest="t_end", type=float, help="Final time")
    parser.add_argument("--rel-tol", dest="rel_tol", type=float, help="Relative integrator tolerance")
    parser.add_argument("--abs-tol", dest="abs_tol", type=float, help="Absolute integrator tolerance")
    parser.add_argument("--b", type=parse_floats, help="Pendulum field vector, e.g. 0,0,1")
    parser.add_argument("--gauge", type=parse_floats, help="Gauge offset for the R^n integrals")
    parser.add_argument("--trials", type=int, help="Identity-test trials")
    parser.add_argument("--points", type=int, help="Rank sample points")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--jobs", type=int, help="Worker processes")
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Magnetic flows on spheres: simulation and integrability checks")
    subparsers = parser.add_subparsers(dest="command", help="Command to execute")

    simulate_parser = subparsers.add_parser("simulate", help="Integrate a flow and record integral drift")
    add_common_arguments(simulate_parser)

    verify_parser = subparsers.add_parser("verify", help="Run verification targets")
    add_common_arguments(verify_parser)
    verify_parser.add_argument("--targets", type=lambda text: [t.strip() for t in text.split(",") if t.strip()],
                               help="Target ids, e.g. L1,L2,L3 or glavna-i")
    verify_parser.add_argument("--r", type=int, help="Reduction rank for the redukcija target")

    scan_parser = subparsers.add_parser("scan", help="Scan a grid of block patterns")
    add_common_arguments(scan_parser)
    scan_parser.add_argument("--grid", type=parse_grid, help='Grid cells, "6:1,1,2;8:1,1,1,1" or JSON')

    reduce_parser = subparsers.add_parser("reduce", help="Reduce by the U(r) symmetry and check invariance")
    add_common_arguments(reduce_parser)
    reduce_parser.add_argument("--r", type=int, help="Number of equal blocks (1: zero-field rotation)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Config file values overridden by the flags that were given."""
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {name: getattr(args, name, None) for name in (
        "n", "m", "s", "blocks", "matrix", "flow", "initial", "seed", "t_end", "rel_tol", "abs_tol",
        "b", "gauge", "trials", "points", "out", "jobs", "targets", "grid", "r")}
    return config.merge(overrides)


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI function."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        config = config_from_args(args)
    except ConfigError as e:
        result = {"status": "error", "message": f"Invalid configuration: {e}", "exit_code": exit_code_for(e)}
    else:
        result = COMMANDS[args.command](config)

    print(json.dumps(result, indent=2, default=str))
    return result.get("exit_code", 0) if result["status"] == "error" else 0


if __name__ == "__main__":
    sys.exit(main())
