"""Smoke test for the dsm_py extension module.

Build and run from the repository root:

    cargo build --release -p dsm-py --features extension-module
    cp target/release/libdsm_py.so python/dsm_py.so
    python3 python/smoke_test.py
"""

import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

import dsm_py


def main():
    grid = dsm_py.Grid(100)
    assert grid.n == 100
    assert abs(sum(grid.weights) - 1.0) < 1e-14

    model = dsm_py.Model("arctan3", 100)
    exact = [0.0 if 1 / 3 <= x <= 2 / 3 else 1.0 for x in grid.nodes]
    f = model.apply(exact)
    jac = model.jacobian(exact)
    assert len(jac) == 100 and len(jac[0]) == 100

    sol = model.solve_regularized(f, 1e-3)
    assert sol["converged"], sol

    noise = dsm_py.sample_noise(grid, "gaussian", seed=0)
    f_delta, delta = dsm_py.calibrate_noise(grid, f, noise, 0.01)
    schedule = dsm_py.DiscreteSchedule(7.0, delta, 0.99, 1)
    rec = dsm_py.run_iteration(model, f_delta, delta, schedule)
    assert rec.stopped_by_discrepancy
    assert rec.residuals[-1] < 1.01 * delta**0.99
    euler = dsm_py.run_euler(model, f_delta, delta, schedule.matching(), h=1.0)
    assert euler.residuals == rec.residuals

    err = math.dist(rec.final_iterate, exact) / math.hypot(*exact)
    print(f"arctan3 delta_rel=0.01: {rec.n_stop} iterations, rel_error {err:.4f}")

    rows = dsm_py.run_experiment("exp2", delta_rel=[0.02, 0.01])
    assert [r["delta_rel"] for r in rows] == [0.02, 0.01]
    assert all(r["stopped"] for r in rows)
    csv = dsm_py.experiment_csv("exp2-const", delta_rel=[0.05])
    assert csv.splitlines()[0].startswith("delta_rel,delta_abs,n_iterations")

    reports = dsm_py.verify_lemmas("identity")
    assert all(r["passed"] for r in reports), reports

    try:
        dsm_py.Model("quartic", 10)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown model accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
