#!/usr/bin/env python3
# Explaining a model that lives in another process. The explainer speaks
# line-delimited JSON over the adapter's stdio; anything that can read and
# write lines can be explained, whatever language it is written in.
#
# This demo drives the reference adapter (ciu-adapter package) serving the
# football model, and checks it against the in-process builtin mirror.
#
# Requires: the ciu-adapter package installed (see adapter/ in this repo).
# Run: python demos/05_external_adapter.py

import sys

import numpy as np

from ciu_explain import (
    Context,
    ExternalModel,
    FeatureDescriptor,
    FeatureSpace,
    OutputSpec,
    explain,
    predict_batch,
)
from ciu_explain.demo_models import deflategate_model

space = FeatureSpace((
    FeatureDescriptor.continuous("psi", 8.0, 16.0),
    FeatureDescriptor.continuous("size", 0.0, 1.0),
    FeatureDescriptor.continuous("grip", 0.0, 1.0),
))

command = [sys.executable, "-m", "ciu_adapter.deflategate"]
print(f"launching adapter: {' '.join(command)}")

with ExternalModel(command) as served:
    print(f"handshake ok: {served.n_inputs} inputs, {served.n_outputs} outputs")

    # The served model and the builtin mirror must tell the same story.
    mirror = deflategate_model()
    rng = np.random.default_rng(5)
    probes = np.column_stack([
        rng.uniform(8, 16, 200), rng.uniform(0, 1, 200), rng.uniform(0, 1, 200),
    ])
    gap = np.max(np.abs(predict_batch(served, probes) - predict_batch(mirror, probes)))
    print(f"max |served - mirror| over 200 probes: {gap:.2e}")

    # A full report straight through the wire.
    context = Context((10.5, 0.5, 0.7))
    spec = OutputSpec(index=0, absmin=0.0, absmax=1.0, name="throwability")
    report = explain(served, space, context, spec, ["psi", "size", "grip"])
    print()
    print(f"{'target':6} {'CI':>6} {'CU':>6}   (via subprocess)")
    for name, r in report.entries:
        print(f"{name:6} {r.ci:6.3f} {r.cu:6.3f}")

print("adapter shut down cleanly")
