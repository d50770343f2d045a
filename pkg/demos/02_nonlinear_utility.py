#!/usr/bin/env python3
# Utility is not linear. Trousers that are too small and too large are both
# bad; the pair that fits is ideal. This demo uses y = 1 - 2*|x - 0.5| as a
# stand-in for any interior-ideal preference and shows that utility reports
# capture it while a signed-slope intuition would not.
#
# Run: python demos/02_nonlinear_utility.py

import numpy as np

from ciu_explain import (
    CallableModel,
    Context,
    EstimatorConfig,
    FeatureDescriptor,
    FeatureSpace,
    OutputSpec,
    explain,
    sweep_feature,
    sweep_to_csv,
)

space = FeatureSpace((FeatureDescriptor.continuous("fit", 0.0, 1.0),))
model = CallableModel(lambda X: 1.0 - 2.0 * np.abs(X[:, :1] - 0.5), 1, 1,
                      name="interior-ideal")
spec = OutputSpec(index=0, absmin=0.0, absmax=1.0, name="satisfaction")

# ---------------------------------------------------------------------------
# Three instances: undersized, ideal, oversized. Importance is identical in
# all three contexts (the feature always controls the full output range),
# but utility swings from terrible to perfect and back.
# ---------------------------------------------------------------------------
print(f"{'fit':>5} {'CI':>6} {'CU':>6}")
for fit in (0.1, 0.5, 0.9):
    report = explain(model, space, Context((fit,)), spec, ["fit"],
                     config=EstimatorConfig(grid_levels=21))
    r = report.get("fit")
    print(f"{fit:5.1f} {r.ci:6.2f} {r.cu:6.2f}")

# Both extremes score the same low utility; only the interior ideal reaches
# CU = 1. An importance-only method reports the same number in all three
# rows and cannot distinguish them.

# ---------------------------------------------------------------------------
# The raw response curve, exported in the same CSV format the CLI's sweep
# command writes. Feed it to any plotting tool.
# ---------------------------------------------------------------------------
series = sweep_feature(model, space, Context((0.1,)), 0, resolution=11)
csv_text = sweep_to_csv(series)
out_path = "/tmp/nonlinear_utility_sweep.csv"
with open(out_path, "w", encoding="utf-8") as fh:
    fh.write(csv_text)
print()
print(f"sweep written to {out_path}")
print(csv_text, end="")
