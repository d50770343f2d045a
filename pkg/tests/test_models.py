import numpy as np
import pytest

from ciu_explain import (
    CallableModel,
    ExternalModel,
    FeatureDescriptor,
    FeatureSpace,
    LinearModel,
    ModelError,
    TableModel,
    ValidationError,
    load_model,
    predict_batch,
)
from ciu_explain.models import resolve_timeout

from conftest import adapter_cmd


def cat_space():
    return FeatureSpace((
        FeatureDescriptor.categorical("color", ["red", "blue"]),
    ))


class TestLinearModel:
    def test_dot_product(self):
        m = LinearModel([[0.5, 0.5]])
        out = predict_batch(m, [(0.3, 0.6)])
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx(0.45, abs=1e-12)

    def test_identity_on_first_feature(self):
        m = LinearModel([[1.0, 0.0]])
        out = predict_batch(m, [(0.0, 0.0), (1.0, 0.0)])
        assert out[:, 0].tolist() == [0.0, 1.0]

    def test_batch_concat_consistency(self):
        rng = np.random.default_rng(7)
        m = LinearModel(rng.normal(size=(2, 3)), rng.normal(size=2))
        A = rng.uniform(size=(5, 3))
        B = rng.uniform(size=(8, 3))
        both = predict_batch(m, np.vstack([A, B]))
        assert np.array_equal(both, np.vstack([predict_batch(m, A), predict_batch(m, B)]))

    def test_repeat_batch_bitwise_identical(self):
        rng = np.random.default_rng(11)
        m = LinearModel(rng.normal(size=(3, 4)))
        X = rng.uniform(size=(10, 4))
        assert np.array_equal(predict_batch(m, X), predict_batch(m, X))

    def test_non_finite_weights_rejected(self):
        with pytest.raises(ValidationError):
            LinearModel([[float("inf"), 0.0]])

    def test_dimension_mismatch(self):
        with pytest.raises(ModelError, match="dimension mismatch"):
            predict_batch(LinearModel([[1.0, 2.0]]), [(1.0,)])

    def test_fingerprint_tracks_weights(self):
        assert LinearModel([[1.0, 0.0]]).fingerprint != LinearModel([[0.0, 1.0]]).fingerprint
        assert LinearModel([[1.0, 0.0]]).fingerprint == LinearModel([[1.0, 0.0]]).fingerprint


class TestTableModel:
    def test_lookup(self):
        m = TableModel(cat_space(), {("red",): (0.2,), ("blue",): (0.9,)})
        assert predict_batch(m, [(1.0,)])[0, 0] == 0.9

    def test_totality_enforced(self):
        with pytest.raises(ValidationError, match="not total"):
            TableModel(cat_space(), {("red",): (0.2,)})

    def test_continuous_space_rejected(self):
        space = FeatureSpace((FeatureDescriptor.continuous("x", 0, 1),))
        with pytest.raises(ValidationError, match="all-categorical"):
            TableModel(space, {})

    def test_integer_codes_accepted_as_keys(self):
        m = TableModel(cat_space(), {(0,): (0.2,), (1,): (0.9,)})
        assert predict_batch(m, [(0.0,)])[0, 0] == 0.2


class TestCallableModel:
    def test_wraps_function(self):
        m = CallableModel(lambda X: 1.0 - 2.0 * np.abs(X[:, :1] - 0.5), 1, 1, name="vee")
        out = predict_batch(m, [(0.5,), (0.0,)])
        assert out[:, 0].tolist() == [1.0, 0.0]

    def test_non_finite_output_aborts(self):
        m = CallableModel(lambda X: X[:, :1] * np.nan, 1, 1, name="nan")
        with pytest.raises(ModelError, match="non-finite output at batch position 0"):
            predict_batch(m, [(0.5,)])


class TestExternalModel:
    def test_handshake_and_agreement_with_builtin(self):
        builtin = LinearModel([[0.5, 0.5]])
        with ExternalModel(adapter_cmd("linear", "[[0.5,0.5]]", "[0.0]")) as ext:
            assert (ext.n_inputs, ext.n_outputs) == (2, 1)
            rng = np.random.default_rng(3)
            X = rng.uniform(size=(50, 2))
            got = predict_batch(ext, X)
            want = predict_batch(builtin, X)
            assert np.max(np.abs(got - want)) < 1e-9

    def test_arity_echo(self):
        with ExternalModel(adapter_cmd("linear")) as ext:
            out = predict_batch(ext, [(0.0, 0.0), (1.0, 1.0)])
            assert out.shape == (2, 1)

    def test_close_midbatch_is_transport_error(self):
        with ExternalModel(adapter_cmd("close-midbatch")) as ext:
            with pytest.raises(ModelError, match="closed its output stream"):
                predict_batch(ext, [(0.0, 0.0)])

    def test_nan_reply_names_position(self):
        with ExternalModel(adapter_cmd("nan")) as ext:
            with pytest.raises(ModelError, match="batch position 0"):
                predict_batch(ext, [(0.0, 0.0)])

    def test_short_reply_rejected(self):
        with ExternalModel(adapter_cmd("short-reply")) as ext:
            with pytest.raises(ModelError, match="1 output vectors for 2 inputs"):
                predict_batch(ext, [(0.0, 0.0), (1.0, 1.0)])

    def test_garbage_reply_rejected(self):
        with ExternalModel(adapter_cmd("garbage")) as ext:
            with pytest.raises(ModelError, match="malformed"):
                predict_batch(ext, [(0.0, 0.0)])

    def test_version_mismatch_fails_handshake(self):
        with pytest.raises(ModelError, match="version"):
            ExternalModel(adapter_cmd("bad-version"))

    def test_timeout(self):
        with pytest.raises(ModelError, match="did not reply within"):
            ExternalModel(adapter_cmd("slow", "5"), timeout=0.3)

    def test_adapter_error_surfaced_verbatim(self):
        with ExternalModel(adapter_cmd("error-op", "my exact words")) as ext:
            with pytest.raises(ModelError, match="my exact words"):
                predict_batch(ext, [(0.0, 0.0)])

    def test_missing_command_rejected(self):
        with pytest.raises(ModelError, match="cannot launch"):
            ExternalModel(["/nonexistent/adapter-binary"])


class TestLoadModel:
    def test_linear_spec(self, unit_square):
        model = load_model({"kind": "linear", "weights": [[0.5, 0.5]]}, unit_square)
        assert model.n_inputs == 2

    def test_arity_mismatch(self, unit_square):
        with pytest.raises(ValidationError, match="3 inputs"):
            load_model({"kind": "linear", "weights": [[1.0, 1.0, 1.0]]}, unit_square)

    def test_table_totality_error(self):
        desc = {"kind": "table", "rows": [{"inputs": ["red"], "outputs": [0.2]}]}
        with pytest.raises(ValidationError, match="not total"):
            load_model(desc, cat_space())

    def test_external_arity_checked_against_space(self, unit_square):
        space3 = FeatureSpace((
            FeatureDescriptor.continuous("a", 0, 1),
            FeatureDescriptor.continuous("b", 0, 1),
            FeatureDescriptor.continuous("c", 0, 1),
        ))
        desc = {"kind": "external", "command": adapter_cmd("linear", "[[0.5,0.5]]", "[0.0]")}
        model = load_model(desc, unit_square)
        model.close()
        with pytest.raises(ValidationError, match="2 inputs"):
            load_model(desc, space3)

    def test_unknown_kind(self, unit_square):
        with pytest.raises(ValidationError, match="unknown model kind"):
            load_model({"kind": "mystery"}, unit_square)

    def test_builtin_kind(self):
        space = FeatureSpace((
            FeatureDescriptor.continuous("psi", 8, 16),
            FeatureDescriptor.continuous("size", 0, 1),
            FeatureDescriptor.continuous("grip", 0, 1),
        ))
        model = load_model({"kind": "builtin", "name": "deflategate"}, space)
        assert (model.n_inputs, model.n_outputs) == (3, 2)


class TestTimeoutResolution:
    def test_explicit_wins(self, monkeypatch):
        monkeypatch.setenv("CIU_EXPLAIN_TIMEOUT_SECS", "60")
        assert resolve_timeout(5.0) == 5.0

    def test_env_override(self, monkeypatch):
        monkeypatch.setenv("CIU_EXPLAIN_TIMEOUT_SECS", "12.5")
        assert resolve_timeout(None) == 12.5

    def test_default(self, monkeypatch):
        monkeypatch.delenv("CIU_EXPLAIN_TIMEOUT_SECS", raising=False)
        assert resolve_timeout(None) == 30.0

    def test_bad_env_value(self, monkeypatch):
        monkeypatch.setenv("CIU_EXPLAIN_TIMEOUT_SECS", "soon")
        with pytest.raises(ValidationError, match="CIU_EXPLAIN_TIMEOUT_SECS"):
            resolve_timeout(None)
