"""
Example usage of the magnetic flow toolkit.
These examples demonstrate various ways to use the system.
"""

import math
import os
import sys
import tempfile

# Add the current directory to the path so we can import from src
sys.path.insert(0, os.path.dirname(__file__))

from src.phase import SystemParams, MagneticField, PhaseState, sample_constrained_point
from src.brackets import dirac_bracket, identity_test, structure_constants
from src.integrals import build_catalog, classify_blocks, nc_dimension_check
from src.dynamics import (FlowSpec, integrate, rn_closed_form, larmor_radius, larmor_period,
                          common_period, pendulum_circle_radius, unitary_reduction)
from src.api import simulate, verify


def print_separator():
    """Print a separator line for better output readability."""
    print("\n" + "="*60 + "\n")


def sphere_flow_example():
    """Integrate the flow on S^4 and watch the integrals."""
    print("=== Sphere Flow Example ===")
    print("n = 5, blocks (2, 1), integrating to t = 50")

    params = SystemParams(5, m=1.0, s=1.0)
    field = MagneticField.from_blocks([2.0, 1.0], 5)
    initial = sample_constrained_point(5, seed=1)

    trajectory = integrate(FlowSpec("sphere", params, field), initial, 50.0)
    print(f"Accepted steps: {len(trajectory.times) - 1}")
    for name, drift in trajectory.drift.items():
        print(f"  drift of {name}: {drift:.2e}")
    print(f"Constraint residual: {trajectory.constraint_residual():.2e}")

    if max(trajectory.drift.values()) < 1e-8:
        print("✅ All integrals conserved!")
    else:
        print("❌ Some integral drifted!")
    return trajectory


def exact_bracket_example():
    """Check {J, H} = 0 and {Phi_12, J} = 0 exactly on T*S^3."""
    print_separator()
    print("=== Exact Bracket Example ===")

    params = SystemParams(4)
    field = MagneticField.from_blocks([3, 1], 4)
    catalog = build_catalog(params, field)
    print(f"Catalog: {', '.join(catalog.names)}")

    for first, second in (("J", "H"), ("Phi_12", "J")):
        bracket = dirac_bracket(catalog[first], catalog[second], field, params)
        verdict = identity_test(bracket, "constrained", trials=50, seed=7)
        status = "✅" if verdict.holds else "❌"
        print(f"{status} {{{first}, {second}}} = 0 on {verdict.trials} random points")


def u2_algebra_example():
    """Structure constants of Phi_12, Phi_34 and the Psi pair for equal blocks."""
    print_separator()
    print("=== u(2) Algebra Example ===")

    params = SystemParams(4)
    field = MagneticField.from_blocks([1, 1], 4)
    catalog = build_catalog(params, field, include_chains=False)
    names = ["Phi_12", "Phi_34", "Psi1_12_34", "Psi2_12_34"]
    table = structure_constants({name: catalog[name] for name in names}, field, params, trials=20)

    for i, first in enumerate(names):
        for second in names[i + 1:]:
            terms = table.coefficients(first, second)
            expansion = " + ".join(f"{c}*{k}" for k, c in terms.items()) or "0"
            print(f"{{{first}, {second}}} = {expansion}")


def certificate_example():
    """Dimension and index of the integral algebra for a few block patterns."""
    print_separator()
    print("=== Certificate Example ===")

    for n, blocks in ((5, [1, 1]), (6, [1, 1, 2]), (6, [1, 2, 3])):
        params = SystemParams(n)
        field = MagneticField.from_blocks(blocks, n)
        case = classify_blocks(n, field.blocks)
        catalog = build_catalog(params, field)
        certificate = nc_dimension_check(list(catalog.observables.values()), 20, field, params, seed=0)
        ok = (certificate.ddim, certificate.dind) == (case.ddim, case.dind)
        print(f"n={n} blocks={blocks}: {case.case}, "
              f"(ddim, dind) = ({certificate.ddim}, {certificate.dind}) {'✅' if ok else '❌'}")


def larmor_example():
    """Larmor circles in R^4 and a closed orbit for commensurable blocks."""
    print_separator()
    print("=== Larmor Example ===")

    params = SystemParams(4)
    field = MagneticField.from_blocks([1.0, 3.0], 4)
    initial = PhaseState([0.5, 0.0, -1.0, 2.0], [1.0, -0.5, 0.25, 0.75])

    for i, kappa in enumerate(field.blocks):
        p_block = initial.p[2 * i:2 * i + 2]
        print(f"Block {i + 1}: radius {larmor_radius(p_block, kappa, params):.4f}, "
              f"period {larmor_period(kappa, params):.4f}")

    period = common_period(field, params)
    print(f"Common period: {period:.4f} (2 pi = {2 * math.pi:.4f})")

    trajectory = integrate(FlowSpec("ambient", params, field), initial, period, rel_tol=1e-12, abs_tol=1e-14)
    exact = rn_closed_form(initial, field, params, period)
    error = max(abs(a - b) for a, b in zip(trajectory.states[-1], exact.as_array()))
    print(f"Distance from the closed form after one period: {error:.2e}")


def pendulum_example():
    """Magnetic geodesic circles on S^2."""
    print_separator()
    print("=== Pendulum Example ===")

    for s in (1.0, math.sqrt(3), 0.5):
        formula = pendulum_circle_radius(s)
        simulated = pendulum_circle_radius(s, via="simulate", t_end=10.0)
        print(f"s = {s:.4f}: radius {formula:.6f} (formula), {simulated:.6f} (simulated)")


def reduction_example():
    """U(4) reduction for four equal blocks on S^8."""
    print_separator()
    print("=== Reduction Example ===")

    params = SystemParams(9)
    field = MagneticField.from_blocks([1.0, 1.0, 1.0, 1.0], 9)
    result = unitary_reduction(sample_constrained_point(9, seed=3), 4, field, params)
    print(f"Zeroed coordinates: {[k + 1 for k in result.zeroed]}")

    trajectory = integrate(FlowSpec("sphere", params, field), result.reduced, 20.0)
    columns = result.zeroed + [params.n + k for k in result.zeroed]
    drift = float(abs(trajectory.states[:, columns]).max())
    print(f"Largest zeroed coordinate along the flow: {drift:.2e}")


def api_example():
    """Use the API the way the command line does."""
    print_separator()
    print("=== API Example ===")

    with tempfile.TemporaryDirectory() as out:
        result = simulate({"n": 6, "blocks": [1, 1, 2], "t_end": 20.0, "out": out})
        print(f"simulate: {result['status']} - {result['message']}")
        if result["status"] == "success":
            print(f"  max drift {result['summary']['max_drift']:.2e}")

        result = verify({"n": 6, "blocks": [1, 1, 2], "targets": ["L1", "L2", "L5", "glavna-ii"],
                         "trials": 20, "out": out})
        print(f"verify: {result['status']} - {result['message']}")


def main():
    """Run all examples."""
    print("Magnetic Flow Toolkit - Examples")
    print_separator()

    sphere_flow_example()
    exact_bracket_example()
    u2_algebra_example()
    certificate_example()
    larmor_example()
    pendulum_example()
    reduction_example()
    api_example()

    print_separator()
    print("All examples completed!")


if __name__ == "__main__":
    main()
