"""The deflategate football model served over the wire protocol.

Inputs per vector: (psi in [8, 16], size in [0, 1], grip in [0, 1]).
Outputs: (throwability, compliance), both in [0, 1]. Throwability peaks at
a slightly deflated 10.5 PSI and rises with grip; compliance is a steep
sigmoid centered on the rules-legal 12.5 PSI, near 0 below and near 1
above. Coefficients are frozen here and mirrored by the explainer's
builtin model of the same name; the two must agree to within 1e-9.

Run as a process: ``python -m ciu_adapter.deflategate``.
"""

from __future__ import annotations

import math
import sys

from . import serve

N_INPUTS = 3
N_OUTPUTS = 2

THROW_PEAK_PSI = 10.5
THROW_PSI_WIDTH = 1.2
THROW_PEAK_WEIGHT = 0.5
THROW_GRIP_WEIGHT = 0.3
THROW_SIZE_WEIGHT = 0.2
LEGAL_PSI = 12.5
COMPLIANCE_STEEPNESS = 2.0


def predict(inputs: list[list[float]]) -> list[list[float]]:
    outputs = []
    for row in inputs:
        if len(row) != N_INPUTS:
            raise ValueError(f"expected {N_INPUTS} inputs, got {len(row)}")
        psi, size, grip = row
        throw = (
            THROW_PEAK_WEIGHT
            * math.exp(-0.5 * ((psi - THROW_PEAK_PSI) / THROW_PSI_WIDTH) ** 2)
            + THROW_GRIP_WEIGHT * grip
            + THROW_SIZE_WEIGHT * (1.0 - size)
        )
        compliance = 1.0 / (1.0 + math.exp(-COMPLIANCE_STEEPNESS * (psi - LEGAL_PSI)))
        outputs.append([throw, compliance])
    return outputs


def main() -> int:
    return serve(predict, N_INPUTS, N_OUTPUTS)


if __name__ == "__main__":
    sys.exit(main())
