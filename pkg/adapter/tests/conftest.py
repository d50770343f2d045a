import json
import subprocess
import sys


class WireClient:
    """Tiny protocol client for tests: one request line, one reply line."""

    def __init__(self, command: list[str]):
        self.proc = subprocess.Popen(
            command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            text=True, encoding="utf-8", bufsize=1,
        )

    def send_raw(self, line: str) -> None:
        assert self.proc.stdin is not None
        self.proc.stdin.write(line + "\n")
        self.proc.stdin.flush()

    def read_reply(self) -> dict:
        assert self.proc.stdout is not None
        line = self.proc.stdout.readline()
        assert line, "adapter closed its output stream"
        return json.loads(line)

    def request(self, obj: dict) -> dict:
        self.send_raw(json.dumps(obj))
        return self.read_reply()

    def bye(self, timeout: float = 10.0) -> int:
        self.send_raw(json.dumps({"op": "bye"}))
        self.proc.stdin.close()
        return self.proc.wait(timeout=timeout)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        if self.proc.poll() is None:
            self.proc.kill()
            self.proc.wait()


def deflategate_command() -> list[str]:
    return [sys.executable, "-m", "ciu_adapter.deflategate"]
