"""Contextual importance and utility explanations for black-box models.

Importance answers "how much does this feature set control the output
right here"; utility answers "how favorable are its current values within
what it could achieve here". Reporting both, per feature or per named
concept, is what separates these explanations from importance-only
attribution.
"""

from .core import (
    CiuResult,
    ConceptTree,
    Context,
    FeatureDescriptor,
    FeatureSpace,
    OutputSpec,
    resolve_concept,
    validate_context,
)
from .engine import (
    CiuReport,
    ContrastEntry,
    ContrastReport,
    canonical_json,
    contextual_importance,
    contextual_utility,
    contrast,
    contrast_to_json,
    explain,
    permutation_importance,
    report_to_json,
)
from .errors import (
    CiuError,
    InternalError,
    ModelError,
    ProbeBudgetError,
    ValidationError,
)
from .estimator import (
    EstimatorConfig,
    ExtremaEstimate,
    estimate_extrema,
    estimate_extrema_multi,
    generate_probes,
    refine_extrema,
    refinement_rounds,
    sweep_feature,
    sweep_levels,
    sweep_to_csv,
)
from .models import (
    CallableModel,
    ExternalModel,
    LinearModel,
    Predictor,
    TableModel,
    load_model,
    predict_batch,
)
from .narrative import (
    DEFAULT_SCALE,
    LabelScale,
    label_importance,
    label_utility,
    render_contrast,
    render_explanation,
)
from .scenario import Scenario, build_model, bundled_scenario_names, load_scenario

__version__ = "0.1.0"

__all__ = [
    "CallableModel",
    "CiuError",
    "CiuReport",
    "CiuResult",
    "ConceptTree",
    "Context",
    "ContrastEntry",
    "ContrastReport",
    "DEFAULT_SCALE",
    "EstimatorConfig",
    "ExternalModel",
    "ExtremaEstimate",
    "FeatureDescriptor",
    "FeatureSpace",
    "InternalError",
    "LabelScale",
    "LinearModel",
    "ModelError",
    "OutputSpec",
    "Predictor",
    "ProbeBudgetError",
    "Scenario",
    "TableModel",
    "ValidationError",
    "build_model",
    "bundled_scenario_names",
    "canonical_json",
    "contextual_importance",
    "contextual_utility",
    "contrast",
    "contrast_to_json",
    "estimate_extrema",
    "estimate_extrema_multi",
    "explain",
    "generate_probes",
    "label_importance",
    "label_utility",
    "load_model",
    "load_scenario",
    "permutation_importance",
    "predict_batch",
    "refine_extrema",
    "refinement_rounds",
    "render_contrast",
    "render_explanation",
    "report_to_json",
    "resolve_concept",
    "sweep_feature",
    "sweep_levels",
    "sweep_to_csv",
    "validate_context",
]
