"""Verbal rendering of numeric reports.

Numbers persuade analysts; sentences persuade everyone else. This module
maps CI/CU values onto configurable label bands and expands reports into
plain text. All functions are pure.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass

from .core import Context, FeatureSpace, format_value
from .engine import CiuReport, ContrastReport
from .errors import InternalError, ValidationError

DEGENERATE_UTILITY_LABEL = "neutral (feature has no effect here)"

DEFAULT_EXPLANATION_TEMPLATE = (
    "{target} is {importance} (CI={ci}) and its current value {value} is "
    "{utility} (CU={cu}) for {output}."
)
DEFAULT_CONTRAST_TEMPLATE = (
    "for {target}, the context favors {favored} (CU {cu_a} vs {cu_b})."
)
NO_DISTINCTION_TEXT = "no target meaningfully distinguishes the outputs."


def _check_bands(bands: tuple[tuple[float, str], ...], which: str) -> tuple[tuple[float, str], ...]:
    bands = tuple((float(t), str(label)) for t, label in bands)
    if not bands:
        raise ValidationError(f"{which} scale needs at least one band")
    thresholds = [t for t, _ in bands]
    if any(later <= earlier for earlier, later in zip(thresholds, thresholds[1:])):
        raise ValidationError(f"{which} scale thresholds must be strictly increasing")
    if thresholds[-1] != 1.0:
        raise ValidationError(f"{which} scale must end with a 1.0 threshold")
    if thresholds[0] <= 0.0:
        raise ValidationError(f"{which} scale thresholds must be positive")
    if any(not label for _, label in bands):
        raise ValidationError(f"{which} scale labels must be non-empty")
    return bands


@dataclass(frozen=True)
class LabelScale:
    """Threshold bands for importance and for utility.

    Each band is (upper threshold, label). Lower bounds are implicit and
    inclusive: a value belongs to the first band whose threshold exceeds
    it, except 1.0, which belongs to the final band. Bands therefore cover
    [0, 1] with no gaps by construction.
    """

    importance: tuple[tuple[float, str], ...] = (
        (0.25, "not important"),
        (0.5, "somewhat important"),
        (0.75, "important"),
        (1.0, "highly important"),
    )
    utility: tuple[tuple[float, str], ...] = (
        (0.2, "very bad"),
        (0.4, "bad"),
        (0.6, "acceptable"),
        (0.8, "good"),
        (1.0, "very good"),
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "importance", _check_bands(self.importance, "importance"))
        object.__setattr__(self, "utility", _check_bands(self.utility, "utility"))


DEFAULT_SCALE = LabelScale()


def _band_label(bands: tuple[tuple[float, str], ...], value: float) -> str:
    if not 0.0 <= value <= 1.0:
        raise InternalError(f"band lookup for out-of-range value {value!r}")
    idx = bisect_right([t for t, _ in bands], value)
    return bands[min(idx, len(bands) - 1)][1]


def label_importance(ci: float, scale: LabelScale = DEFAULT_SCALE) -> str:
    return _band_label(scale.importance, ci)


def label_utility(cu: float, degenerate: bool = False, scale: LabelScale = DEFAULT_SCALE) -> str:
    if degenerate:
        return DEGENERATE_UTILITY_LABEL
    return _band_label(scale.utility, cu)


def fmt_number(v: float) -> str:
    """Two decimals, trailing zeros trimmed: 0.5, 0.45, 1."""
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return s if s not in ("", "-0") else "0"


def _context_phrase(context: Context, space: FeatureSpace) -> str:
    return ", ".join(
        f"{feat.name}={format_value(feat, v)}"
        for feat, v in zip(space.features, context.values)
    )


def _value_phrase(feature_set: frozenset[int], context: Context, space: FeatureSpace) -> str:
    indices = sorted(feature_set)
    if len(indices) == 1:
        i = indices[0]
        return format_value(space[i], context.values[i])
    parts = ", ".join(
        f"{space[i].name}={format_value(space[i], context.values[i])}" for i in indices
    )
    return f"({parts})"


def render_explanation(
    report: CiuReport,
    space: FeatureSpace,
    scale: LabelScale = DEFAULT_SCALE,
    template: str | None = None,
) -> str:
    """One header line plus one sentence per entry, in report order."""
    template = template or DEFAULT_EXPLANATION_TEMPLATE
    out = report.output
    lines = [f"Output {out.label!r} at context {_context_phrase(report.context, space)}:"]
    for name, r in report.entries:
        fields = {
            "target": name,
            "ci": fmt_number(r.ci),
            "cu": fmt_number(r.cu),
            "value": _value_phrase(r.feature_set, report.context, space),
            "output": out.label,
            "importance": label_importance(r.ci, scale),
            "utility": label_utility(r.cu, r.degenerate, scale),
        }
        try:
            lines.append(template.format(**fields))
        except (KeyError, IndexError) as exc:
            raise ValidationError(f"bad placeholder in explanation template: {exc}") from exc
    return "\n".join(lines)


def render_contrast(
    report: ContrastReport,
    space: FeatureSpace,
    scale: LabelScale = DEFAULT_SCALE,
    top_k: int = 3,
    template: str | None = None,
) -> str:
    """Top-k per-target utility comparisons, strongest delta first."""
    if top_k < 1:
        raise ValidationError(f"top_k must be >= 1, got {top_k}")
    template = template or DEFAULT_CONTRAST_TEMPLATE
    a, b = report.output_a, report.output_b
    if all(e.cu_delta == 0.0 for e in report.entries):
        return NO_DISTINCTION_TEXT
    lines = [f"Output {a.label!r} was preferred over {b.label!r} mainly because:"]
    for e in report.entries[:top_k]:
        if e.cu_delta > 0:
            favored = a.label
        elif e.cu_delta < 0:
            favored = b.label
        else:
            favored = "neither"
        fields = {
            "target": e.target,
            "favored": favored,
            "cu_a": fmt_number(e.cu_a),
            "cu_b": fmt_number(e.cu_b),
            "ci_a": fmt_number(e.ci_a),
            "ci_b": fmt_number(e.ci_b),
            "output_a": a.label,
            "output_b": b.label,
        }
        try:
            lines.append("  " + template.format(**fields))
        except (KeyError, IndexError) as exc:
            raise ValidationError(f"bad placeholder in contrast template: {exc}") from exc
    return "\n".join(lines)
