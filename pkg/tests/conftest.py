import sys
from pathlib import Path

import pytest

from ciu_explain import (
    Context,
    FeatureDescriptor,
    FeatureSpace,
    LinearModel,
    OutputSpec,
)

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def unit_square() -> FeatureSpace:
    return FeatureSpace((
        FeatureDescriptor.continuous("x1", 0.0, 1.0),
        FeatureDescriptor.continuous("x2", 0.0, 1.0),
    ))


@pytest.fixture
def half_half_model() -> LinearModel:
    return LinearModel([[0.5, 0.5]])


@pytest.fixture
def unit_output() -> OutputSpec:
    return OutputSpec(index=0, absmin=0.0, absmax=1.0, name="y")


@pytest.fixture
def ctx_36() -> Context:
    return Context((0.3, 0.6))


def adapter_cmd(*args: str) -> list[str]:
    """Command line for the stdio adapter fixture script."""
    return [sys.executable, str(DATA_DIR / "adapter_fixture.py"), *args]
