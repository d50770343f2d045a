import pytest
from hypothesis import given, strategies as st

from ciu_explain import (
    Context,
    FeatureDescriptor,
    FeatureSpace,
    LabelScale,
    LinearModel,
    OutputSpec,
    TableModel,
    ValidationError,
    contrast,
    explain,
    label_importance,
    label_utility,
    render_contrast,
    render_explanation,
)
from ciu_explain.narrative import DEGENERATE_UTILITY_LABEL, NO_DISTINCTION_TEXT, fmt_number

from test_estimator import constant_model


class TestLabelScale:
    def test_defaults_valid(self):
        scale = LabelScale()
        assert scale.importance[-1][0] == 1.0
        assert scale.utility[-1][0] == 1.0

    def test_thresholds_must_increase(self):
        with pytest.raises(ValidationError, match="strictly increasing"):
            LabelScale(importance=((0.5, "low"), (0.5, "high"), (1.0, "top")))

    def test_final_threshold_must_be_one(self):
        with pytest.raises(ValidationError, match="1.0"):
            LabelScale(utility=((0.5, "low"), (0.9, "high")))

    def test_empty_labels_rejected(self):
        with pytest.raises(ValidationError):
            LabelScale(importance=((1.0, ""),))


class TestLabels:
    @pytest.mark.parametrize("ci,label", [
        (0.30, "somewhat important"),
        (0.0, "not important"),
        (1.0, "highly important"),
        (0.25, "somewhat important"),   # lower bounds inclusive
        (0.75, "highly important"),
    ])
    def test_importance_bands(self, ci, label):
        assert label_importance(ci) == label

    @pytest.mark.parametrize("cu,label", [
        (0.9, "very good"),
        (0.0, "very bad"),
        (0.2, "bad"),
        (1.0, "very good"),
    ])
    def test_utility_bands(self, cu, label):
        assert label_utility(cu, degenerate=False) == label

    def test_degenerate_label(self):
        assert label_utility(0.5, degenerate=True) == DEGENERATE_UTILITY_LABEL

    @given(st.floats(0.0, 1.0, allow_nan=False))
    def test_band_totality_and_monotonicity(self, v):
        scale = LabelScale()
        label = label_importance(v, scale)
        bands = [b for _, b in scale.importance]
        assert label in bands
        # monotone: nudging the value up never moves the label down a band
        higher = min(1.0, v + 0.1)
        assert bands.index(label_importance(higher, scale)) >= bands.index(label)


class TestNumberFormat:
    @pytest.mark.parametrize("value,text", [
        (0.5, "0.5"), (0.45, "0.45"), (1.0, "1"), (0.0, "0"),
        (0.333333, "0.33"), (0.999, "1"), (10.5, "10.5"),
    ])
    def test_two_decimals_trimmed(self, value, text):
        assert fmt_number(value) == text


class TestRenderExplanation:
    def test_linear_demo_sentence(self, unit_square, half_half_model, unit_output, ctx_36):
        report = explain(half_half_model, unit_square, ctx_36, unit_output, ["x1"])
        text = render_explanation(report, unit_square)
        assert text.splitlines()[1] == (
            "x1 is important (CI=0.5) and its current value 0.3 is bad (CU=0.3) for y."
        )

    def test_header_only_for_empty_targets(self, unit_square, half_half_model,
                                           unit_output, ctx_36):
        report = explain(half_half_model, unit_square, ctx_36, unit_output, [])
        text = render_explanation(report, unit_square)
        assert text == "Output 'y' at context x1=0.3, x2=0.6:"

    def test_degenerate_sentence_uses_neutral_phrase(self, unit_square, unit_output, ctx_36):
        report = explain(constant_model(0.7), unit_square, ctx_36, unit_output, ["x1"])
        text = render_explanation(report, unit_square)
        assert DEGENERATE_UTILITY_LABEL in text

    def test_categorical_value_rendered_as_level(self):
        space = FeatureSpace((FeatureDescriptor.categorical("color", ["red", "blue"]),))
        model = TableModel(space, {("red",): (0.2,), ("blue",): (0.9,)})
        spec = OutputSpec(index=0, name="score")
        report = explain(model, space, Context((1.0,)), spec, ["color"])
        assert "its current value blue" in render_explanation(report, space)

    def test_template_override(self, unit_square, half_half_model, unit_output, ctx_36):
        report = explain(half_half_model, unit_square, ctx_36, unit_output, ["x1"])
        text = render_explanation(report, unit_square,
                                  template="{target}: CI {ci} CU {cu} ({importance})")
        assert "x1: CI 0.5 CU 0.3 (important)" in text

    def test_bad_template_placeholder(self, unit_square, half_half_model,
                                      unit_output, ctx_36):
        report = explain(half_half_model, unit_square, ctx_36, unit_output, ["x1"])
        with pytest.raises(ValidationError, match="placeholder"):
            render_explanation(report, unit_square, template="{nope}")

    def test_rendering_is_pure(self, unit_square, half_half_model, unit_output, ctx_36):
        report = explain(half_half_model, unit_square, ctx_36, unit_output, ["x1", "x2"])
        assert render_explanation(report, unit_square) == render_explanation(
            report, unit_square)


class TestRenderContrast:
    def make_report(self, context_value=0.9):
        space = FeatureSpace((FeatureDescriptor.continuous("x1", 0.0, 1.0),))
        model = LinearModel([[1.0], [-1.0]], [0.0, 1.0])
        return contrast(
            model, space, Context((context_value,)),
            OutputSpec(index=0, name="a"), OutputSpec(index=1, name="b"), ["x1"],
        ), space

    def test_top_entry_named(self):
        report, space = self.make_report()
        text = render_contrast(report, space, top_k=1)
        assert text.splitlines()[0] == "Output 'a' was preferred over 'b' mainly because:"
        assert "for x1, the context favors a (CU 0.9 vs 0.1)." in text

    def test_all_zero_deltas(self):
        space = FeatureSpace((FeatureDescriptor.continuous("x1", 0.0, 1.0),))
        model = LinearModel([[1.0], [1.0]])
        report = contrast(model, space, Context((0.4,)),
                          OutputSpec(index=0, name="a"), OutputSpec(index=1, name="b"),
                          ["x1"])
        assert render_contrast(report, space) == NO_DISTINCTION_TEXT

    def test_top_k_clamped_to_entry_count(self):
        report, space = self.make_report()
        text = render_contrast(report, space, top_k=50)
        assert len(text.splitlines()) == 2  # header + single entry

    def test_top_k_must_be_positive(self):
        report, space = self.make_report()
        with pytest.raises(ValidationError, match="top_k"):
            render_contrast(report, space, top_k=0)
