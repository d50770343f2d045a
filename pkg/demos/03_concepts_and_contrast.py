#!/usr/bin/env python3
# Intermediate concepts and the contrastive question "why this output and
# not that one", on the bundled football scenario.
#
# A ball is described by basic features (psi, size, grip), but people reason
# about named bundles of them: how the ball handles, what drives grip. The
# concept tree lets a report treat those bundles as single explanation
# targets, estimated jointly over their combined range.
#
# Run: python demos/03_concepts_and_contrast.py

from ciu_explain import (
    build_model,
    contrast,
    explain,
    load_scenario,
    render_contrast,
    render_explanation,
    validate_context,
)

scenario = load_scenario("demo_deflategate")
model = build_model(scenario)
throw = scenario.output_by_name("throwability")
comply = scenario.output_by_name("compliance")

# The controversial ball: slightly deflated at 10.5 PSI.
deflated = validate_context(scenario.space, [10.5, 0.5, 0.7])

report = explain(model, scenario.space, deflated, throw,
                 targets=list(scenario.default_targets), tree=scenario.tree,
                 config=scenario.config)
print("=== explaining throwability at 10.5 PSI ===")
print(render_explanation(report, scenario.space, scenario.scale))

# ---------------------------------------------------------------------------
# The contrastive question. Same probes judge both outputs, so the utility
# deltas compare like with like. At 10.5 PSI the pressure strongly favors
# throwability over compliance.
# ---------------------------------------------------------------------------
print()
print("=== why throwability rather than compliance? ===")
c_report = contrast(model, scenario.space, deflated, throw, comply,
                    targets=list(scenario.default_targets), tree=scenario.tree,
                    config=scenario.config)
print(render_contrast(c_report, scenario.space, scenario.scale, top_k=3))

# ---------------------------------------------------------------------------
# Context dependence: inflate the ball to the legal 12.5 PSI and the same
# question inverts; the pressure now argues for compliance.
# ---------------------------------------------------------------------------
legal = validate_context(scenario.space, [12.5, 0.5, 0.7])
c_legal = contrast(model, scenario.space, legal, throw, comply,
                   targets=["psi"], tree=scenario.tree, config=scenario.config)
entry = c_legal.entries[0]
print()
print("=== same question at the legal 12.5 PSI ===")
print(f"psi utility for throwability: {entry.cu_a:.2f}")
print(f"psi utility for compliance:   {entry.cu_b:.2f}")
print("the ordering flipped with the context" if entry.cu_b > entry.cu_a
      else "unexpected: no inversion")
