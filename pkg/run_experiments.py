"""
Script to run the acceptance suite and generate results.
"""

import tempfile
import time
import traceback

from src.api import reduce, scan, simulate, verify
from src.utils import save_results

# (name, command, config)
EXPERIMENTS = [
    ("drift n=5 (2,1)", simulate, {"n": 5, "blocks": [2, 1], "t_end": 100.0}),
    ("drift n=6 (1,1,2)", simulate, {"n": 6, "blocks": [1, 1, 2], "t_end": 100.0}),
    ("larmor n=4 (2,0)", simulate, {"n": 4, "blocks": [2, 0], "flow": "ambient", "t_end": 10.0}),
    ("pendulum s=1", simulate, {"flow": "pendulum", "s": 1.0, "t_end": 20.0}),
    ("pendulum s=1 b=(0,0,-1)", simulate, {"flow": "pendulum", "s": 1.0, "b": [0, 0, -1], "t_end": 20.0}),
    ("bracket relations n=5 (2,1)", verify, {"n": 5, "blocks": [2, 1], "targets": ["L1", "L2", "L3", "L4", "casimir"]}),
    ("u(2) n=4 (1,1)", verify, {"n": 4, "blocks": [1, 1], "targets": ["L5"]}),
    ("u(3) n=6 (1,1,1)", verify, {"n": 6, "blocks": [1, 1, 1], "targets": ["u3"]}),
    ("R^n integrals n=5", verify, {"n": 5, "blocks": [1, 0.5], "targets": ["ocigledna"], "t_end": 20.0}),
    ("closed orbits n=4 (1,3)", verify, {"n": 4, "blocks": [1, 3], "targets": ["superintegrable"]}),
    ("pendulum targets", verify, {"flow": "pendulum", "s": 1.0, "targets": ["pendulum"], "t_end": 20.0}),
    ("stara n=4 (1,2)", verify, {"n": 4, "blocks": [1, 2], "targets": ["stara"]}),
    ("glavna-i n=5 (1,1)", verify, {"n": 5, "blocks": [1, 1], "targets": ["glavna-i"]}),
    ("glavna-ii n=6 (1,1,2)", verify, {"n": 6, "blocks": [1, 1, 2], "targets": ["glavna-ii"]}),
    ("u(r) reduction n=9 r=4", reduce, {"n": 9, "blocks": [1, 1, 1, 1], "r": 4, "t_end": 50.0}),
    ("rotation reduction n=7", reduce, {"n": 7, "blocks": [1, 0, 0], "r": 1, "t_end": 50.0}),
    ("scan", scan, {"grid": [{"n": 5, "blocks": [1, 1]}, {"n": 6, "blocks": [1, 1, 2]},
                             {"n": 6, "blocks": [1, 1, 1]}, {"n": 6, "blocks": [1, 2, 3]}],
                    "t_end": 20.0, "jobs": 2}),
]


def main():
    """Run all experiments and save results."""
    results = []
    out = tempfile.mkdtemp(prefix="magnetic_flows_")

    for name, command, config in EXPERIMENTS:
        start_time = time.time()
        try:
            print(f"Running {name}...")
            result = command(dict(config, out=out))
            success = result["status"] == "success"
            if command is scan:
                success = success and all(row["status"] == "ok" for row in result["rows"])
            results.append({
                "experiment": name,
                "success": success,
                "message": result["message"],
                "time_taken": time.time() - start_time,
                "result": result,
            })
            print(f"Result: Success={success}, Time={time.time() - start_time:.2f}s - {result['message']}")
        except Exception as e:
            print(f"Error running {name}: {str(e)}")
            traceback.print_exc()
            results.append({
                "experiment": name,
                "success": False,
                "message": str(e),
                "time_taken": time.time() - start_time,
                "error": str(e),
            })

    save_results(results, "experiment_results.json")
    print("All experiments completed. Results saved to experiment_results.json")

    # Print summary
    success_count = sum(1 for r in results if r['success'])
    total_count = len(results)
    print(f"Success rate: {success_count}/{total_count} ({success_count/total_count*100:.1f}%)")


if __name__ == "__main__":
    main()
