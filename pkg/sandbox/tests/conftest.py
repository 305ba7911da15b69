"""Process-spawning helpers shared by the runner tests.

The runner is always exercised as a real subprocess (its only supported
surface); PYTHONPATH is extended so neither package needs installing for
the suite to run.
"""

from __future__ import annotations

import os
import subprocess
import sys
from pathlib import Path

import pytest

SANDBOX_ROOT = Path(__file__).resolve().parent.parent
RUNNER_SRC = SANDBOX_ROOT / "src"


def runner_env() -> dict[str, str]:
    env = dict(os.environ)
    extra = str(RUNNER_SRC)
    existing = env.get("PYTHONPATH")
    env["PYTHONPATH"] = f"{extra}{os.pathsep}{existing}" if existing else extra
    return env


RUNNER_CMD = [sys.executable, "-m", "snippet_runner"]


def invoke_runner(code: str, mode: str = "exec", timeout: float | None = 10.0,
                  extra_args: list[str] | None = None) -> subprocess.CompletedProcess:
    cmd = RUNNER_CMD + ["--mode", mode] + (extra_args or [])
    return subprocess.run(cmd, input=code, capture_output=True, text=True,
                          timeout=timeout, env=runner_env())


@pytest.fixture
def run_exec():
    return lambda code, **kw: invoke_runner(code, "exec", **kw)


@pytest.fixture
def run_check():
    return lambda code, **kw: invoke_runner(code, "check-trivial", **kw)
