#!/usr/bin/env python3
# Walkthrough: importance and utility on a model simple enough to check by
# hand. The model is y = 0.5*x1 + 0.5*x2 on the unit square and the instance
# being explained is (x1, x2) = (0.3, 0.6).
#
# Two numbers per feature:
#   CI: how much of y's total range this feature controls at this instance
#   CU: how favorable the feature's current value is within that control
#
# Run: python demos/01_linear_basics.py

import numpy as np

from ciu_explain import (
    EstimatorConfig,
    build_model,
    explain,
    load_scenario,
    render_explanation,
    report_to_json,
    validate_context,
)

scenario = load_scenario("demo_linear")
model = build_model(scenario)
context = validate_context(scenario.space, [0.3, 0.6])
spec = scenario.output_by_name("y")

# ---------------------------------------------------------------------------
# By hand first. Varying x1 over [0, 1] while x2 stays at 0.6 moves y over
# [0.30, 0.80]: half of y's declared [0, 1] range, so CI(x1) = 0.5. The
# context's own y is 0.45, which sits at (0.45-0.30)/(0.80-0.30) = 0.3 of
# that interval, so CU(x1) = 0.3: the current x1 is in the bottom third of
# what x1 could deliver here.
# ---------------------------------------------------------------------------

report = explain(
    model, scenario.space, context, spec,
    targets=["x1", "x2", "both"], tree=scenario.tree,
    config=EstimatorConfig(grid_levels=21),
)

print("numeric view")
print(f"{'target':8} {'CI':>6} {'CU':>6} {'cmin':>6} {'cmax':>6}")
for name, r in report.entries:
    print(f"{name:8} {r.ci:6.3f} {r.cu:6.3f} {r.cmin:6.3f} {r.cmax:6.3f}")

# The joint target "both" sweeps the whole square: CI = 1 (the two features
# together control everything) while CU = 0.45 = y itself under unit bounds.

print()
print("verbal view")
print(render_explanation(report, scenario.space, scenario.scale))

# The canonical JSON is what the CLI prints with --json; it is rendered
# deterministically so seeded runs are byte-for-byte reproducible.
print()
print("canonical JSON")
print(report_to_json(report, scenario.space))

# Sanity: brute force agrees with the estimator on this model.
xs = np.linspace(0.0, 1.0, 10_000)
ys = 0.5 * xs + 0.5 * 0.6
assert abs(ys.min() - report.get("x1").cmin) < 1e-9
assert abs(ys.max() - report.get("x1").cmax) < 1e-9
print()
print("dense-grid cross-check passed")
