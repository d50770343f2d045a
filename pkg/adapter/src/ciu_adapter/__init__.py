"""Reference adapter (server side) of the stdio explanation protocol.

Wrap any ``predict(list_of_vectors) -> list_of_vectors`` callable and any
explainer client can probe it over line-delimited JSON, one UTF-8 object
per line, newline terminated:

    client -> {"op": "hello", "version": 1}
    server -> {"op": "hello", "version": 1, "n_inputs": N, "n_outputs": M}
    client -> {"op": "predict", "inputs": [[...], ...]}
    server -> {"op": "result", "outputs": [[...], ...]}
    server -> {"op": "error", "message": "..."}    (any request may fail)
    client -> {"op": "bye"}                        (server exits 0)

The loop never crashes on bad input: malformed lines and predict
exceptions become error replies and the session continues. Replies
preserve request order, exactly one reply line per request line, flushed
immediately (required for deadlock-free subprocess piping). Floats are
serialized with Python's shortest round-trip representation, so a
cooperating client reads back bit-identical values. No state is carried
between requests.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass
from typing import Callable, IO, Sequence

PROTOCOL_VERSION = 1

PredictFn = Callable[[list[list[float]]], Sequence[Sequence[float]]]


@dataclass
class AdapterSession:
    """Protocol state machine: one request line in, one reply (or exit) out."""

    predict: PredictFn
    n_inputs: int
    n_outputs: int
    version: int = PROTOCOL_VERSION

    def _error(self, message: str) -> str:
        return json.dumps({"op": "error", "message": message})

    def _check_inputs(self, inputs: object) -> list[list[float]] | None:
        if not isinstance(inputs, list):
            return None
        batch = []
        for row in inputs:
            if not isinstance(row, list) or len(row) != self.n_inputs:
                return None
            try:
                batch.append([float(v) for v in row])
            except (TypeError, ValueError):
                return None
        return batch

    def handle_line(self, line: str) -> tuple[str | None, bool]:
        """Map one request line to (reply line or None, session_done)."""
        line = line.strip()
        if not line:
            return None, False
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            return self._error("request is not valid JSON"), False
        if not isinstance(msg, dict):
            return self._error("request must be a JSON object"), False
        op = msg.get("op")
        if op == "hello":
            return (
                json.dumps({
                    "op": "hello",
                    "version": self.version,
                    "n_inputs": self.n_inputs,
                    "n_outputs": self.n_outputs,
                }),
                False,
            )
        if op == "predict":
            batch = self._check_inputs(msg.get("inputs"))
            if batch is None:
                return self._error(
                    f"predict inputs must be vectors of {self.n_inputs} numbers"
                ), False
            try:
                outputs = [list(map(float, row)) for row in self.predict(batch)]
            except Exception as exc:  # predict is user code; keep the loop alive
                return self._error(f"{type(exc).__name__}: {exc}"), False
            if len(outputs) != len(batch) or any(
                len(row) != self.n_outputs for row in outputs
            ):
                return self._error(
                    f"predict returned a malformed batch (expected "
                    f"{len(batch)} vectors of {self.n_outputs})"
                ), False
            return json.dumps({"op": "result", "outputs": outputs}), False
        if op == "bye":
            return None, True
        return self._error(f"unknown op {op!r}"), False


def serve(
    predict: PredictFn,
    n_inputs: int,
    n_outputs: int,
    stdin: IO[str] | None = None,
    stdout: IO[str] | None = None,
) -> int:
    """Answer requests until bye or EOF; returns the process exit code (0)."""
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    session = AdapterSession(predict=predict, n_inputs=n_inputs, n_outputs=n_outputs)
    for line in stdin:
        reply, done = session.handle_line(line)
        if reply is not None:
            stdout.write(reply + "\n")
            stdout.flush()
        if done:
            return 0
    return 0
