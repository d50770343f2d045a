"""Bundled demo models available as model kind "builtin".

The deflategate football model is the in-process mirror of the reference external
adapter: identical formula, identical coefficients. Inputs are
(psi, size, grip); outputs are (throwability, compliance), both in [0, 1].

Throwability peaks at a slightly deflated pressure and rises with grip;
compliance is a steep sigmoid centered on the legal pressure, so a ball
can be great to throw and clearly against the rules at the same time.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .models import CallableModel, Predictor

# Coefficients are frozen; the external reference adapter mirrors them.
THROW_PEAK_PSI = 10.5
THROW_PSI_WIDTH = 1.2
THROW_PEAK_WEIGHT = 0.5
THROW_GRIP_WEIGHT = 0.3
THROW_SIZE_WEIGHT = 0.2
LEGAL_PSI = 12.5
COMPLIANCE_STEEPNESS = 2.0


def deflategate_outputs(inputs: np.ndarray) -> np.ndarray:
    psi = inputs[:, 0]
    size = inputs[:, 1]
    grip = inputs[:, 2]
    throw = (
        THROW_PEAK_WEIGHT * np.exp(-0.5 * ((psi - THROW_PEAK_PSI) / THROW_PSI_WIDTH) ** 2)
        + THROW_GRIP_WEIGHT * grip
        + THROW_SIZE_WEIGHT * (1.0 - size)
    )
    compliance = 1.0 / (1.0 + np.exp(-COMPLIANCE_STEEPNESS * (psi - LEGAL_PSI)))
    return np.stack([throw, compliance], axis=1)


def deflategate_model() -> Predictor:
    return CallableModel(deflategate_outputs, n_inputs=3, n_outputs=2, name="deflategate-v1")


BUILTIN_MODELS = {
    "deflategate": deflategate_model,
}


def builtin_model(name: str) -> Predictor:
    try:
        factory = BUILTIN_MODELS[name]
    except KeyError:
        raise ValidationError(
            f"unknown builtin model {name!r} (available: {sorted(BUILTIN_MODELS)})"
        ) from None
    return factory()
