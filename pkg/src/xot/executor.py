"""Program execution behind a strict process boundary.

Programs run in a fresh interpreter through a runner script that prints
one sentinel-prefixed JSON line describing what happened. The executor
never trusts anything else: no sentinel means the harness was lost, and
a wall-clock limit kills runaway programs.

ScriptedExecutor answers from a frozen table of outcomes keyed by the
exact script bytes, which makes whole benchmark runs replayable without
spawning processes.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
import subprocess
import sys
import tempfile
import threading
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, Optional, Union

from .core import float_to_rational, format_rational

log = logging.getLogger(__name__)

SENTINEL = "##XOT##"
DEFAULT_TIMEOUT_SECS = 10.0

ERROR_CLASSES = ("syntax", "runtime", "no_ans", "timeout", "harness_lost")
_SYNTAX_ERRORS = {"SyntaxError", "IndentationError", "TabError"}


class ExecutorUnavailable(Exception):
    """No runner installation was found to execute programs with."""


class ScriptedMiss(Exception):
    """A scripted executor was asked about a script it has no entry for."""

    def __init__(self, sha: str, script: str):
        preview = script.strip().splitlines()[0] if script.strip() else ""
        super().__init__("no scripted outcome for %s (%s...)" % (sha[:12], preview[:60]))
        self.sha = sha


@dataclass(frozen=True)
class ExecutionResult:
    ok: bool
    bindings: Dict[str, Fraction]
    ans: Union[Fraction, str, None]
    error_class: Optional[str]
    detail: str
    wall_time: float

    @classmethod
    def success(cls, bindings, ans, wall_time=0.0):
        return cls(True, bindings, ans, None, "", wall_time)

    @classmethod
    def failure(cls, error_class, detail, wall_time=0.0):
        assert error_class in ERROR_CLASSES
        return cls(False, {}, None, error_class, detail, wall_time)


@dataclass(frozen=True)
class AssertionOutcome:
    passed: bool
    detail: str = ""
    wall_time: float = 0.0


def script_sha(script: str) -> str:
    return hashlib.sha256(script.encode("utf-8")).hexdigest()


def binding_literal(value: Fraction) -> str:
    """Python source literal for an exact rational; non-integers use a
    division expression so no precision is invented."""
    if value.denominator == 1:
        return str(value.numerator)
    return "(%d / %d)" % (value.numerator, value.denominator)


def compose_pot_assertion_script(base: str, assertions: str) -> str:
    return base.rstrip("\n") + "\n\n" + assertions.strip("\n") + "\n"


def compose_eot_assertion_script(
    bindings: Dict[str, Fraction], assertions: str
) -> str:
    decls = "\n".join(
        "%s = %s" % (name, binding_literal(value)) for name, value in bindings.items()
    )
    return decls + "\n\n" + assertions.strip("\n") + "\n"


def _to_fraction(value) -> Optional[Fraction]:
    if isinstance(value, bool):
        return Fraction(int(value))
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return float_to_rational(value)
    return None


class Executor:
    def run_pot(self, program: str) -> ExecutionResult:
        raise NotImplementedError

    def run_assertions(
        self,
        base: Optional[str],
        assertions: str,
        bindings: Dict[str, Fraction],
    ) -> AssertionOutcome:
        raise NotImplementedError


# =====================================================================
# Real processes
# =====================================================================

def find_harness():
    """Locate the installed runner package; returns (instrument, runner path)."""
    try:
        import xot_harness
    except ImportError:
        return None
    runner = Path(xot_harness.__file__).parent / "runner.py"
    return xot_harness.instrument, runner


class ProcessExecutor(Executor):
    """Runs programs via ``<runtime> runner.py <file>`` in a temp dir."""

    def __init__(
        self,
        instrument: Callable[[str], str],
        runner_path: Union[str, Path],
        runtime: Optional[str] = None,
        timeout_secs: float = DEFAULT_TIMEOUT_SECS,
        max_procs: Optional[int] = None,
    ):
        self.instrument = instrument
        self.runner_path = str(runner_path)
        self.runtime = runtime or os.environ.get("XOT_RUNTIME") or sys.executable
        self.timeout_secs = timeout_secs
        self._slots = threading.BoundedSemaphore(max_procs or os.cpu_count() or 1)

    @classmethod
    def from_installed_harness(cls, **kwargs) -> "ProcessExecutor":
        found = find_harness()
        if found is None:
            raise ExecutorUnavailable(
                "program runner not found: install the runner package or "
                "configure exec.runner"
            )
        instrument, runner = found
        return cls(instrument, runner, **kwargs)

    def run_pot(self, program: str) -> ExecutionResult:
        payload, wall_time, failure = self._execute(self.instrument(program))
        if failure is not None:
            return ExecutionResult.failure(*failure, wall_time=wall_time)
        status = payload.get("status")
        if status == "ok":
            bindings = {}
            for name, value in (payload.get("bindings") or {}).items():
                converted = _to_fraction(value)
                if converted is not None:
                    bindings[name] = converted
            ans = payload.get("ans")
            if isinstance(ans, str):
                return ExecutionResult.success(bindings, ans, wall_time)
            converted = _to_fraction(ans)
            if converted is None:
                return ExecutionResult.failure(
                    "no_ans", "ans is not a usable value: %r" % (ans,), wall_time
                )
            return ExecutionResult.success(bindings, converted, wall_time)
        if status == "no_ans":
            return ExecutionResult.failure(
                "no_ans", "program finished without defining ans", wall_time
            )
        if status == "exception":
            error_type = payload.get("error_type", "Exception")
            detail = "%s: %s" % (error_type, payload.get("error_msg", ""))
            cls = "syntax" if error_type in _SYNTAX_ERRORS else "runtime"
            return ExecutionResult.failure(cls, detail, wall_time)
        return ExecutionResult.failure(
            "harness_lost", "unknown runner status %r" % (status,), wall_time
        )

    def run_assertions(self, base, assertions, bindings) -> AssertionOutcome:
        if base is not None:
            script = compose_pot_assertion_script(base, assertions)
        else:
            script = compose_eot_assertion_script(bindings, assertions)
        payload, wall_time, failure = self._execute(self.instrument(script))
        if failure is not None:
            return AssertionOutcome(False, failure[1], wall_time)
        status = payload.get("status")
        # A missing ans is irrelevant here; only raised exceptions fail.
        if status in ("ok", "no_ans"):
            return AssertionOutcome(True, "", wall_time)
        if status == "exception":
            detail = "%s: %s" % (
                payload.get("error_type", "Exception"),
                payload.get("error_msg", ""),
            )
            return AssertionOutcome(False, detail, wall_time)
        return AssertionOutcome(False, "unknown runner status %r" % (status,), wall_time)

    def _execute(self, script: str):
        """Returns (payload, wall_time, failure) with exactly one of
        payload/failure set."""
        with self._slots:
            start = time.monotonic()
            workdir = tempfile.mkdtemp(prefix="xot-exec-")
            try:
                program_file = Path(workdir) / "program.py"
                program_file.write_text(script, encoding="utf-8")
                try:
                    proc = subprocess.run(
                        [self.runtime, self.runner_path, str(program_file)],
                        capture_output=True,
                        text=True,
                        timeout=self.timeout_secs,
                        cwd=workdir,
                        env={"PATH": os.environ.get("PATH", "")},
                    )
                except subprocess.TimeoutExpired:
                    wall = time.monotonic() - start
                    return None, wall, (
                        "timeout",
                        "no result within %.1fs" % self.timeout_secs,
                    )
                wall = time.monotonic() - start
                sentinel_lines = [
                    line
                    for line in proc.stdout.splitlines()
                    if line.startswith(SENTINEL)
                ]
                if not sentinel_lines:
                    detail = "runner produced no result (exit %s): %s" % (
                        proc.returncode,
                        proc.stderr.strip()[-300:],
                    )
                    return None, wall, ("harness_lost", detail)
                try:
                    payload = json.loads(sentinel_lines[-1][len(SENTINEL):])
                except json.JSONDecodeError as exc:
                    return None, wall, ("harness_lost", "bad result line: %s" % exc)
                return payload, wall, None
            finally:
                shutil.rmtree(workdir, ignore_errors=True)


# =====================================================================
# Scripted outcomes
# =====================================================================

class ScriptedExecutor(Executor):
    """Deterministic executor answering from a frozen outcome table.

    Program entries are keyed by the sha256 of the raw program text,
    assertion entries by the sha256 of the composed assertion script.
    """

    def __init__(self, records=()):
        self.programs: Dict[str, dict] = {}
        self.assertions: Dict[str, dict] = {}
        for record in records:
            self.add(record)

    def add(self, record: dict) -> None:
        if record.get("kind") == "assertions":
            self.assertions[record["sha256"]] = record
        else:
            self.programs[record["sha256"]] = record

    @classmethod
    def load(cls, path: Union[str, Path]) -> "ScriptedExecutor":
        executor = cls()
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    executor.add(json.loads(line))
        return executor

    def run_pot(self, program: str) -> ExecutionResult:
        sha = script_sha(program)
        record = self.programs.get(sha)
        if record is None:
            raise ScriptedMiss(sha, program)
        wall = float(record.get("wall_time", 0.0))
        status = record["status"]
        if status == "ok":
            bindings = {
                name: Fraction(value) for name, value in record["bindings"].items()
            }
            if "ans_str" in record:
                return ExecutionResult.success(bindings, record["ans_str"], wall)
            return ExecutionResult.success(bindings, Fraction(record["ans"]), wall)
        return ExecutionResult.failure(status, record.get("detail", ""), wall)

    def run_assertions(self, base, assertions, bindings) -> AssertionOutcome:
        if base is not None:
            script = compose_pot_assertion_script(base, assertions)
        else:
            script = compose_eot_assertion_script(bindings, assertions)
        sha = script_sha(script)
        record = self.assertions.get(sha)
        if record is None:
            raise ScriptedMiss(sha, script)
        return AssertionOutcome(
            record["status"] == "pass",
            record.get("detail", ""),
            float(record.get("wall_time", 0.0)),
        )


class RecordingExecutor(Executor):
    """Wraps a real executor and freezes every outcome to a JSONL file."""

    def __init__(self, inner: Executor, path: Union[str, Path]):
        self.inner = inner
        self.path = Path(path)
        self._lock = threading.Lock()

    def _write(self, record: dict) -> None:
        with self._lock, open(self.path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")

    def run_pot(self, program: str) -> ExecutionResult:
        result = self.inner.run_pot(program)
        record = {
            "kind": "program",
            "sha256": script_sha(program),
            "status": "ok" if result.ok else result.error_class,
            "wall_time": round(result.wall_time, 4),
        }
        if result.ok:
            record["bindings"] = {
                name: serialize_fraction(value)
                for name, value in result.bindings.items()
            }
            if isinstance(result.ans, str):
                record["ans_str"] = result.ans
            else:
                record["ans"] = serialize_fraction(result.ans)
        else:
            record["detail"] = result.detail
        self._write(record)
        return result

    def run_assertions(self, base, assertions, bindings) -> AssertionOutcome:
        outcome = self.inner.run_assertions(base, assertions, bindings)
        if base is not None:
            script = compose_pot_assertion_script(base, assertions)
        else:
            script = compose_eot_assertion_script(bindings, assertions)
        self._write(
            {
                "kind": "assertions",
                "sha256": script_sha(script),
                "status": "pass" if outcome.passed else "fail",
                "detail": outcome.detail,
                "wall_time": round(outcome.wall_time, 4),
            }
        )
        return outcome


def serialize_fraction(value: Fraction) -> str:
    """String form that Fraction() parses back exactly."""
    return format_rational(value)
