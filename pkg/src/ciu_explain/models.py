"""Black-box predictor contract, built-in models, external adapter client.

Prediction is batched only: extrema estimation issues thousands of probes,
and a single request per batch is what keeps subprocess adapters usable.
Every model must behave as a pure function of its input batch.

The external wire protocol is line-delimited JSON over the adapter's stdio,
one UTF-8 object per line:

    client -> {"op": "hello", "version": 1}
    server -> {"op": "hello", "version": 1, "n_inputs": N, "n_outputs": M}
    client -> {"op": "predict", "inputs": [[...], ...]}
    server -> {"op": "result", "outputs": [[...], ...]}   (same list length)
    server -> {"op": "error", "message": "..."}           (allowed anywhere)
    client -> {"op": "bye"}                               (server exits 0)

Categorical values cross the protocol as their integer codes.
"""

from __future__ import annotations

import hashlib
import json
import os
import queue
import subprocess
import threading
from abc import ABC, abstractmethod
from collections.abc import Callable, Mapping, Sequence
from itertools import product

import numpy as np

from .core import FeatureSpace
from .errors import ModelError, ValidationError

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT_SECS = 30.0
TIMEOUT_ENV_VAR = "CIU_EXPLAIN_TIMEOUT_SECS"


class Predictor(ABC):
    """Contract every explainable model satisfies."""

    #: whether concurrent batch_predict calls are allowed
    parallel_safe: bool = True

    @property
    @abstractmethod
    def n_inputs(self) -> int: ...

    @property
    @abstractmethod
    def n_outputs(self) -> int: ...

    @property
    @abstractmethod
    def fingerprint(self) -> str:
        """Stable identifier of the model's behavior, echoed in reports."""

    @abstractmethod
    def batch_predict(self, inputs: np.ndarray) -> np.ndarray:
        """Map a (k, n_inputs) batch to a (k, n_outputs) batch."""


def predict_batch(model: Predictor, inputs: Sequence[Sequence[float]] | np.ndarray) -> np.ndarray:
    """Validated entry point for all predictions.

    Checks input arity before the call and output shape plus finiteness
    after it. A non-finite output means the model is broken and the
    explanation must abort, so that raises :class:`ModelError`.
    """
    X = np.asarray(inputs, dtype=np.float64)
    if X.ndim != 2:
        raise ModelError(f"expected a batch of vectors, got array of ndim {X.ndim}")
    if X.shape[1] != model.n_inputs:
        raise ModelError(
            f"dimension mismatch: batch has {X.shape[1]} components per vector, "
            f"model expects {model.n_inputs}"
        )
    if not np.isfinite(X).all():
        raise ModelError("input batch contains non-finite values")
    out = np.asarray(model.batch_predict(X), dtype=np.float64)
    if out.shape != (X.shape[0], model.n_outputs):
        raise ModelError(
            f"model returned shape {out.shape}, expected {(X.shape[0], model.n_outputs)}"
        )
    bad = ~np.isfinite(out)
    if bad.any():
        pos = int(np.argwhere(bad.any(axis=1))[0][0])
        raise ModelError(f"non-finite output at batch position {pos}")
    return out


def _digest(*parts: bytes) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p)
        h.update(b"\x00")
    return h.hexdigest()[:16]


class LinearModel(Predictor):
    """Affine map y = W x + b; the main verification oracle for tests."""

    def __init__(self, weights: Sequence[Sequence[float]], bias: Sequence[float] | None = None):
        W = np.atleast_2d(np.asarray(weights, dtype=np.float64))
        b = np.zeros(W.shape[0]) if bias is None else np.asarray(bias, dtype=np.float64)
        if b.shape != (W.shape[0],):
            raise ValidationError(
                f"bias has shape {b.shape}, expected ({W.shape[0]},) to match weights"
            )
        if not (np.isfinite(W).all() and np.isfinite(b).all()):
            raise ValidationError("linear model entries must be finite")
        W.flags.writeable = False
        b.flags.writeable = False
        self._W = W
        self._b = b

    @property
    def n_inputs(self) -> int:
        return self._W.shape[1]

    @property
    def n_outputs(self) -> int:
        return self._W.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return self._W

    @property
    def bias(self) -> np.ndarray:
        return self._b

    @property
    def fingerprint(self) -> str:
        return "linear:" + _digest(
            repr(self._W.shape).encode(), self._W.tobytes(), self._b.tobytes()
        )

    def batch_predict(self, inputs: np.ndarray) -> np.ndarray:
        return inputs @ self._W.T + self._b


class TableModel(Predictor):
    """Exhaustive lookup over an all-categorical feature space.

    The table must be total: one output vector for every tuple in the
    product of the declared level sets. Serves as the brute-force oracle
    target, what the table says is by definition what the model does.
    """

    def __init__(self, space: FeatureSpace, rows: Mapping[tuple, Sequence[float]]):
        non_cat = [f.name for f in space.features if not f.is_categorical]
        if non_cat:
            raise ValidationError(
                f"table models need an all-categorical space; {non_cat[0]!r} is continuous"
            )
        self._space = space
        table: dict[tuple[int, ...], np.ndarray] = {}
        n_out: int | None = None
        for key, out in rows.items():
            if len(key) != len(space):
                raise ValidationError(
                    f"table key {key!r} has {len(key)} components, expected {len(space)}"
                )
            coded = tuple(
                feat.code_of(item) if isinstance(item, str) else int(item)
                for feat, item in zip(space.features, key)
            )
            vec = np.asarray(out, dtype=np.float64)
            if vec.ndim != 1 or (n_out is not None and vec.shape[0] != n_out):
                raise ValidationError(f"table row {key!r}: inconsistent output length")
            if not np.isfinite(vec).all():
                raise ValidationError(f"table row {key!r}: outputs must be finite")
            n_out = vec.shape[0]
            if coded in table:
                raise ValidationError(f"table row {key!r}: duplicate entry")
            vec.flags.writeable = False
            table[coded] = vec
        full = list(product(*(range(f.n_levels) for f in space.features)))
        missing = [k for k in full if k not in table]
        if missing:
            names = tuple(
                space[i].level_of(c) for i, c in enumerate(missing[0])
            )
            raise ValidationError(
                f"table is not total over the categorical space: missing "
                f"{len(missing)} tuples, first {names!r}"
            )
        if len(table) != len(full):
            extra = next(k for k in table if k not in set(full))
            raise ValidationError(f"table has a row outside the declared space: {extra!r}")
        self._table = table
        self._n_out = int(n_out)  # type: ignore[arg-type]

    @property
    def n_inputs(self) -> int:
        return len(self._space)

    @property
    def n_outputs(self) -> int:
        return self._n_out

    @property
    def fingerprint(self) -> str:
        items = sorted(self._table.items())
        blob = json.dumps(
            [[list(k), v.tolist()] for k, v in items], separators=(",", ":")
        ).encode()
        return "table:" + _digest(blob)

    def batch_predict(self, inputs: np.ndarray) -> np.ndarray:
        out = np.empty((inputs.shape[0], self._n_out))
        for r, row in enumerate(inputs):
            key = tuple(int(round(v)) for v in row)
            try:
                out[r] = self._table[key]
            except KeyError:
                raise ModelError(f"no table entry for input tuple {key!r}") from None
        return out


class CallableModel(Predictor):
    """Wrap a vectorized function f((k, n) array) -> (k, m) array.

    The ``name`` feeds the fingerprint, so give behaviorally different
    functions different names.
    """

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], n_inputs: int, n_outputs: int,
                 name: str = "anonymous"):
        self._fn = fn
        self._n_in = int(n_inputs)
        self._n_out = int(n_outputs)
        self._name = name

    @property
    def n_inputs(self) -> int:
        return self._n_in

    @property
    def n_outputs(self) -> int:
        return self._n_out

    @property
    def fingerprint(self) -> str:
        return "callable:" + _digest(
            self._name.encode(), repr((self._n_in, self._n_out)).encode()
        )

    def batch_predict(self, inputs: np.ndarray) -> np.ndarray:
        return np.asarray(self._fn(inputs), dtype=np.float64).reshape(
            inputs.shape[0], self._n_out
        )


class ExternalModel(Predictor):
    """Client side of the wire protocol, wrapping an adapter subprocess.

    The connection is strictly serial: one in-flight request at a time,
    enforced by a lock. A reader thread feeds replies through a queue so
    a hung adapter turns into a timeout instead of a deadlock.
    """

    parallel_safe = False

    def __init__(self, command: Sequence[str], timeout: float | None = None):
        if not command:
            raise ValidationError("external model command must be non-empty")
        self._command = tuple(str(c) for c in command)
        self._timeout = resolve_timeout(timeout)
        self._lock = threading.Lock()
        self._replies: queue.Queue = queue.Queue()
        try:
            self._proc = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                encoding="utf-8",
                bufsize=1,
            )
        except OSError as exc:
            raise ModelError(f"cannot launch adapter {self._command[0]!r}: {exc}") from exc
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()
        try:
            self._n_in, self._n_out = self._handshake()
        except BaseException:
            self._proc.kill()
            self._proc.wait()
            raise

    def _pump(self) -> None:
        assert self._proc.stdout is not None
        for line in self._proc.stdout:
            self._replies.put(line)
        self._replies.put(None)  # EOF sentinel

    def _request(self, obj: dict) -> dict:
        assert self._proc.stdin is not None
        try:
            self._proc.stdin.write(json.dumps(obj, separators=(",", ":")) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ModelError(f"adapter pipe closed while writing: {exc}") from exc
        try:
            line = self._replies.get(timeout=self._timeout)
        except queue.Empty:
            raise ModelError(
                f"adapter did not reply within {self._timeout:g}s "
                f"(set {TIMEOUT_ENV_VAR} to raise the limit)"
            ) from None
        if line is None:
            raise ModelError("adapter closed its output stream mid-session")
        try:
            reply = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ModelError(f"malformed adapter reply: {line!r}") from exc
        if not isinstance(reply, dict):
            raise ModelError(f"malformed adapter reply: {line!r}")
        if reply.get("op") == "error":
            raise ModelError(f"adapter error: {reply.get('message', '')}")
        return reply

    def _handshake(self) -> tuple[int, int]:
        reply = self._request({"op": "hello", "version": PROTOCOL_VERSION})
        if reply.get("op") != "hello":
            raise ModelError(f"handshake failed: unexpected op {reply.get('op')!r}")
        if reply.get("version") != PROTOCOL_VERSION:
            raise ModelError(
                f"handshake failed: adapter speaks protocol version "
                f"{reply.get('version')!r}, client speaks {PROTOCOL_VERSION}"
            )
        try:
            n_in, n_out = int(reply["n_inputs"]), int(reply["n_outputs"])
        except (KeyError, TypeError, ValueError):
            raise ModelError("handshake failed: missing or invalid arities") from None
        if n_in < 1 or n_out < 1:
            raise ModelError(f"handshake failed: invalid arities ({n_in}, {n_out})")
        return n_in, n_out

    @property
    def n_inputs(self) -> int:
        return self._n_in

    @property
    def n_outputs(self) -> int:
        return self._n_out

    @property
    def command(self) -> tuple[str, ...]:
        return self._command

    @property
    def fingerprint(self) -> str:
        return "external:" + _digest(
            json.dumps(self._command).encode(), repr((self._n_in, self._n_out)).encode()
        )

    def batch_predict(self, inputs: np.ndarray) -> np.ndarray:
        with self._lock:
            reply = self._request(
                {"op": "predict", "inputs": [list(map(float, row)) for row in inputs]}
            )
        if reply.get("op") != "result":
            raise ModelError(f"expected a result reply, got op {reply.get('op')!r}")
        outputs = reply.get("outputs")
        if not isinstance(outputs, list) or len(outputs) != len(inputs):
            got = len(outputs) if isinstance(outputs, list) else "none"
            raise ModelError(
                f"adapter replied with {got} output vectors for {len(inputs)} inputs"
            )
        try:
            return np.asarray(outputs, dtype=np.float64).reshape(len(inputs), self._n_out)
        except (TypeError, ValueError) as exc:
            raise ModelError(f"adapter outputs are not rectangular numeric vectors: {exc}") from exc

    def close(self) -> None:
        """Send bye and reap the subprocess. Safe to call twice."""
        if self._proc.poll() is not None:
            return
        try:
            if self._proc.stdin is not None:
                self._proc.stdin.write(json.dumps({"op": "bye"}) + "\n")
                self._proc.stdin.flush()
                self._proc.stdin.close()
        except (BrokenPipeError, OSError):
            pass
        try:
            self._proc.wait(timeout=5.0)
        except subprocess.TimeoutExpired:
            self._proc.kill()
            self._proc.wait()

    def __enter__(self) -> ExternalModel:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def __del__(self) -> None:
        try:
            if getattr(self, "_proc", None) is not None and self._proc.poll() is None:
                self._proc.kill()
        except Exception:
            pass


def resolve_timeout(timeout: float | None) -> float:
    """Explicit timeout, else the env override, else the 30 s default."""
    if timeout is not None:
        return float(timeout)
    raw = os.environ.get(TIMEOUT_ENV_VAR)
    if raw is None:
        return DEFAULT_TIMEOUT_SECS
    try:
        value = float(raw)
        if value <= 0:
            raise ValueError
    except ValueError:
        raise ValidationError(
            f"{TIMEOUT_ENV_VAR} must be a positive number, got {raw!r}"
        ) from None
    return value


def load_model(desc: Mapping, space: FeatureSpace, *, timeout: float | None = None) -> Predictor:
    """Build a ready predictor from a scenario's model description.

    ``kind`` selects among ``linear``, ``table``, ``builtin`` (bundled demo
    models by name) and ``external`` (adapter command line; the protocol
    handshake runs before this returns). The returned model's arity is
    checked against the feature space.
    """
    kind = desc.get("kind")
    if kind == "linear":
        if "weights" not in desc:
            raise ValidationError("linear model description needs 'weights'")
        model: Predictor = LinearModel(desc["weights"], desc.get("bias"))
    elif kind == "table":
        rows = desc.get("rows")
        if not isinstance(rows, list) or not rows:
            raise ValidationError("table model description needs a non-empty 'rows' list")
        mapping = {}
        for row in rows:
            if not isinstance(row, Mapping) or "inputs" not in row or "outputs" not in row:
                raise ValidationError("each table row needs 'inputs' and 'outputs'")
            mapping[tuple(row["inputs"])] = row["outputs"]
        model = TableModel(space, mapping)
    elif kind == "builtin":
        from .demo_models import builtin_model

        model = builtin_model(desc.get("name", ""))
    elif kind == "external":
        command = desc.get("command")
        if not isinstance(command, (list, tuple)) or not command:
            raise ValidationError("external model description needs a non-empty 'command' list")
        model = ExternalModel(command, timeout=timeout)
    else:
        raise ValidationError(
            f"unknown model kind {kind!r} (expected linear, table, builtin or external)"
        )
    if model.n_inputs != len(space):
        if isinstance(model, ExternalModel):
            model.close()
        raise ValidationError(
            f"model declares {model.n_inputs} inputs but the feature space has "
            f"{len(space)} features"
        )
    return model
