"""Code extraction and isolated execution of generated solver scripts.

Each script runs in its own interpreter process inside a scratch directory
with a minimal environment; outcomes collapse onto a closed set of execution
states so downstream grading and triage stay mechanical.
"""

from __future__ import annotations

import concurrent.futures
import math
import os
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field

FENCE_OPEN = "```python"
FENCE_CLOSE = "```"

SENTINEL_MARKER = "Just print the best solution:"
NO_SOLUTION_TEXT = "No Best Solution"

# Appended to every extracted script so the final objective lands on stdout
# in a greppable form regardless of what the script itself prints.
SENTINEL_FOOTER = (
    "\nif model.status == COPT.OPTIMAL:\n"
    '    print(f"Just print the best solution: {model.objval}")\n'
    "else:\n"
    '    print("No Best Solution")'
)

STATE_FOUND = "Execution Successful and Best Solution Found"
STATE_NO_SOLUTION = "Execution Successful but No Best Solution Found"
STATE_UNEXPECTED = "Execution Successful but Out of Expectation"
STATE_UNEXPECTED_LEGACY = "Execution Suceessful but Out of Expectation"
STATE_TIMEOUT = "Execution Failed: Timeout"
STATE_NO_CODE = "Execution Failed: No code"
FAILED_PREFIX = "Execution Failed: "

DEFAULT_TIMEOUT = 600.0
DEFAULT_MAX_WORKERS = 16


class SandboxSetupFailure(OSError):
    """The scratch file could not be written or the interpreter could not be spawned."""


@dataclass
class ExecutionRecord:
    script: str
    state: str
    raw_output: str = ""
    error_output: str = ""
    best_solution: str | None = None
    duration: float = 0.0


@dataclass
class SandboxConfig:
    interpreter: str = sys.executable
    timeout: float = DEFAULT_TIMEOUT
    scratch_dir: str | None = None
    module_path: str | None = None  # search path injected for the solver shim
    legacy_state_spelling: bool = False
    env: dict = field(default_factory=dict)


def extract_code(content: str) -> str | None:
    """Text between the first ```python fence and the next ```; None when absent or blank."""
    start = content.find(FENCE_OPEN)
    if start == -1:
        return None
    start += len(FENCE_OPEN)
    end = content.find(FENCE_CLOSE, start)
    script = content[start:end] if end != -1 else content[start:]
    script = script.strip()
    return script or None


def append_sentinel(script: str) -> str:
    return script + SENTINEL_FOOTER


def no_code_record() -> ExecutionRecord:
    return ExecutionRecord(script="", state=STATE_NO_CODE, raw_output=STATE_NO_CODE)


def _parse_marker_value(stdout: str) -> str | None:
    pos = stdout.find(SENTINEL_MARKER)
    if pos == -1:
        return None
    value = stdout[pos:].replace(SENTINEL_MARKER, "").strip()
    newline = value.find("\n")
    if newline != -1:
        value = value[:newline]
    return value.strip()


def _is_numeric(token: str) -> bool:
    try:
        return math.isfinite(float(token))
    except ValueError:
        return False


def _child_env(config: SandboxConfig) -> dict:
    env = {
        "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
        "PYTHONDONTWRITEBYTECODE": "1",
        "PYTHONIOENCODING": "utf-8",
    }
    if "HOME" in os.environ:
        env["HOME"] = os.environ["HOME"]
    if config.module_path:
        env["PYTHONPATH"] = config.module_path
    env.update(config.env)
    return env


SCRIPT_PATH_TOKEN = "<generated_script>"


def _as_text(data) -> str:
    if data is None:
        return ""
    if isinstance(data, bytes):
        return data.decode("utf-8", errors="replace")
    return data


def _hide_script_path(text: str, tmp_name: str) -> str:
    # tracebacks embed the per-run temp path; records must serialize identically across runs
    return text.replace(tmp_name, SCRIPT_PATH_TOKEN)


def execute(script: str, config: SandboxConfig | None = None) -> ExecutionRecord:
    """Run a script in a child interpreter and map the outcome onto an execution state."""
    config = config or SandboxConfig()
    owns_scratch = config.scratch_dir is None
    scratch = config.scratch_dir or tempfile.mkdtemp(prefix="orbench-exec-")
    os.makedirs(scratch, exist_ok=True)

    try:
        with tempfile.NamedTemporaryFile(
            mode="w", suffix=".py", dir=scratch, delete=False, encoding="utf-8"
        ) as tmp:
            tmp_name = tmp.name
            tmp.write(script)
    except OSError as exc:
        raise SandboxSetupFailure(f"cannot write script file in {scratch}: {exc}") from exc

    started = time.monotonic()
    try:
        try:
            process = subprocess.run(
                [config.interpreter, tmp_name],
                text=True,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                timeout=config.timeout,
                cwd=scratch,
                env=_child_env(config),
            )
        except subprocess.TimeoutExpired as exc:
            return ExecutionRecord(
                script=script,
                state=STATE_TIMEOUT,
                raw_output=_hide_script_path(_as_text(exc.stdout), tmp_name),
                error_output=_hide_script_path(_as_text(exc.stderr), tmp_name),
                best_solution=None,
                duration=time.monotonic() - started,
            )
        except OSError as exc:
            raise SandboxSetupFailure(f"cannot spawn {config.interpreter}: {exc}") from exc

        duration = time.monotonic() - started
        stdout = _hide_script_path(process.stdout, tmp_name)
        stderr = _hide_script_path(process.stderr, tmp_name)
        if process.returncode != 0:
            return ExecutionRecord(
                script=script,
                state=f"{FAILED_PREFIX}{stdout}\n{stderr}",
                raw_output=stdout,
                error_output=stderr,
                best_solution=None,
                duration=duration,
            )

        unexpected = STATE_UNEXPECTED_LEGACY if config.legacy_state_spelling else STATE_UNEXPECTED
        value = _parse_marker_value(stdout)
        if value is not None and _is_numeric(value):
            state, best = STATE_FOUND, value
        elif value is None and NO_SOLUTION_TEXT in stdout:
            state, best = STATE_NO_SOLUTION, NO_SOLUTION_TEXT
        else:
            state, best = unexpected, None
        return ExecutionRecord(
            script=script,
            state=state,
            raw_output=stdout,
            error_output=stderr,
            best_solution=best,
            duration=duration,
        )
    finally:
        try:
            os.remove(tmp_name)
        except OSError:
            pass
        if owns_scratch:
            try:
                os.rmdir(scratch)
            except OSError:
                pass


def execute_answer(content: str, config: SandboxConfig | None = None) -> ExecutionRecord:
    """Extract fenced code from a model answer, add the sentinel, and execute it."""
    script = extract_code(content)
    if script is None:
        return no_code_record()
    return execute(append_sentinel(script), config)


def run_batch(items, config: SandboxConfig | None = None,
              max_workers: int = DEFAULT_MAX_WORKERS) -> list[tuple[str, ExecutionRecord]]:
    """Execute (item_id, answer_text) pairs concurrently.

    Items without extractable code are emitted first, before anything runs;
    per-item failures never abort the batch.
    """
    config = config or SandboxConfig()
    results: list[tuple[str, ExecutionRecord]] = []
    runnable: list[tuple[str, str]] = []
    for item_id, content in items:
        script = extract_code(content)
        if script is None:
            results.append((item_id, no_code_record()))
        else:
            runnable.append((item_id, append_sentinel(script)))

    if not runnable:
        return results

    with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {pool.submit(execute, script, config): item_id for item_id, script in runnable}
        for future in concurrent.futures.as_completed(futures):
            item_id = futures[future]
            try:
                record = future.result()
            except Exception as exc:  # noqa: BLE001 - batch must survive any single item
                record = ExecutionRecord(script="", state=f"{FAILED_PREFIX}{exc}")
            results.append((item_id, record))
    return results


_PATTERN_FAILED = "Execution Failed: <message>"

STATE_PATTERNS = (
    STATE_FOUND,
    STATE_NO_SOLUTION,
    STATE_UNEXPECTED,
    STATE_TIMEOUT,
    _PATTERN_FAILED,
    STATE_NO_CODE,
)


def state_pattern(state: str) -> str:
    """Collapse a concrete state string onto one of the six canonical patterns."""
    if state in (STATE_FOUND, STATE_NO_SOLUTION, STATE_UNEXPECTED):
        return state
    if state == STATE_UNEXPECTED_LEGACY:
        return STATE_UNEXPECTED
    if state == STATE_NO_CODE:
        return STATE_NO_CODE
    if state == STATE_TIMEOUT:
        return STATE_TIMEOUT
    if state.startswith(FAILED_PREFIX):
        return _PATTERN_FAILED
    raise ValueError(f"not an execution state: {state!r}")
