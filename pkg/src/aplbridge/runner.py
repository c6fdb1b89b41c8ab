"""Compile-and-execute verification harness.

Generates a self-contained C# test program around a candidate
translation, runs it through an executor, compares each test's output
against the expected value, classifies failures (Compilation, Runtime,
Functional), and aggregates compile/partial/full pass rates.

Two executors ship: CommandExecutor drives a real C# toolchain through
configurable command templates; StubExecutor answers from fixture rules
so the whole runner is deterministic and toolchain-free in tests.
"""

from __future__ import annotations

import importlib.resources
import json
import math
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum

from .headers import FunctionHeader

DEFAULT_COMPILE_TIMEOUT = 30.0
DEFAULT_RUN_TIMEOUT = 10.0
DEFAULT_REL_TOL = 1e-6
DEFAULT_ABS_TOL = 1e-9


class ErrorCategory(str, Enum):
    COMPILATION = "Compilation"
    RUNTIME = "Runtime"
    FUNCTIONAL = "Functional"


class TestStatus(str, Enum):
    NOT_COMPILED = "not-compiled"
    RUNTIME_FAILURE = "runtime-failure"
    OUTPUT_MISMATCH = "output-mismatch"
    PASS = "pass"


@dataclass
class TestReport:
    status: TestStatus
    stdout: str = ""
    stderr: str = ""
    actual: object = None
    diff: str = ""
    wall_time: float = 0.0

    def to_json(self) -> dict:
        return {
            "status": self.status.value,
            "stdout": self.stdout,
            "stderr": self.stderr,
            "actual": self.actual,
            "diff": self.diff,
            "wall_time": self.wall_time,
        }


@dataclass
class ExecutionReport:
    """Per-sample outcome: one TestReport per io case."""

    compile_ok: bool
    compiler_diagnostics: str
    tests: list[TestReport]
    wall_time: float = 0.0

    @property
    def tests_passed(self) -> int:
        return sum(1 for t in self.tests if t.status is TestStatus.PASS)

    @property
    def all_passed(self) -> bool:
        return bool(self.tests) and self.tests_passed == len(self.tests)

    @property
    def any_passed(self) -> bool:
        return self.tests_passed > 0

    def to_json(self) -> dict:
        return {
            "compile_ok": self.compile_ok,
            "compiler_diagnostics": self.compiler_diagnostics,
            "tests": [t.to_json() for t in self.tests],
            "wall_time": self.wall_time,
        }


@dataclass
class ExecRecord:
    """Raw executor output, per the executor contract."""

    compile_ok: bool
    compiler_diagnostics: str = ""
    run_exit_code: int = 0
    stdout: str = ""
    stderr: str = ""
    timed_out: bool = False


class ExecutorSetupError(RuntimeError):
    """Executor misconfiguration: distinct from any sample failure."""


# --- harness generation ---------------------------------------------------------


def _load_template() -> str:
    return (
        importlib.resources.files("aplbridge")
        .joinpath("templates/harness.cs")
        .read_text(encoding="utf-8")
    )


def generate_harness(candidate: str, io_cases, header: FunctionHeader | None = None,
                     template: str | None = None) -> str:
    """Emit a single compilable program: candidate code verbatim plus an
    entry point running every io case.

    Per-test exceptions are caught inside the harness so one failing test
    never hides the others; each test prints exactly one line, either
    `TEST<i>:<json>` or `TEST<i>:ERROR:<type>:<message>`.
    """
    if not io_cases:
        raise ValueError("io cases must be non-empty")
    tpl = template if template is not None else _load_template()
    invocations = []
    for i, case in enumerate(io_cases, 1):
        method = case.method_name if hasattr(case, "method_name") else case["method_name"]
        args = case.csharp_arg if hasattr(case, "csharp_arg") else case.get("CSharpArg", "")
        util = f"{method}Util"
        invocations.append(
            f"        try {{\n"
            f"            var __r{i} = {util}.{method}({args});\n"
            f"            Console.WriteLine(\"TEST{i}:\" + __AplBridgeSerializer.Serialize(__r{i}));\n"
            f"        }} catch (Exception __e{i}) {{\n"
            f"            Console.WriteLine(\"TEST{i}:ERROR:\" + __e{i}.GetType().Name + \":\" + __e{i}.Message);\n"
            f"        }}"
        )
    return tpl.replace("{CANDIDATE_CODE}", candidate).replace(
        "{TEST_INVOCATIONS}", "\n".join(invocations)
    )


# --- executors ------------------------------------------------------------------


@dataclass
class Limits:
    compile_timeout: float = DEFAULT_COMPILE_TIMEOUT
    run_timeout: float = DEFAULT_RUN_TIMEOUT


class CommandExecutor:
    """Drives an external C# toolchain via command templates with
    {src_dir} and {out} placeholders.  Compile failure is signalled by a
    nonzero exit with diagnostics on stderr (or stdout)."""

    def __init__(self, compile_cmd: str, run_cmd: str):
        if "{src_dir}" not in compile_cmd:
            raise ExecutorSetupError("compile_cmd must contain {src_dir}")
        self.compile_cmd = compile_cmd
        self.run_cmd = run_cmd

    def run(self, program: str, limits: Limits | None = None) -> ExecRecord:
        limits = limits or Limits()
        with tempfile.TemporaryDirectory(prefix="aplbridge-") as src_dir:
            out = os.path.join(src_dir, "out")
            os.makedirs(out, exist_ok=True)
            with open(os.path.join(src_dir, "Program.cs"), "w", encoding="utf-8") as f:
                f.write(program)
            compile_argv = [a.format(src_dir=src_dir, out=out)
                            for a in shlex.split(self.compile_cmd)]
            try:
                comp = subprocess.run(
                    compile_argv, capture_output=True, text=True,
                    timeout=limits.compile_timeout, cwd=src_dir,
                )
            except FileNotFoundError as exc:
                raise ExecutorSetupError(f"compiler not found: {exc}") from exc
            except subprocess.TimeoutExpired:
                return ExecRecord(False, "compile timeout", timed_out=True)
            if comp.returncode != 0:
                return ExecRecord(False, comp.stderr + comp.stdout)
            run_argv = [a.format(src_dir=src_dir, out=out) for a in shlex.split(self.run_cmd)]
            try:
                run = subprocess.run(
                    run_argv, capture_output=True, text=True,
                    timeout=limits.run_timeout, cwd=src_dir,
                )
            except subprocess.TimeoutExpired as exc:
                return ExecRecord(True, "", run_exit_code=-1,
                                  stdout=(exc.stdout or ""), stderr="run timeout",
                                  timed_out=True)
            return ExecRecord(True, "", run.returncode, run.stdout, run.stderr)


class StubExecutor:
    """Fixture-table executor: first rule whose substring occurs in the
    program wins.  Used by every toolchain-free test."""

    def __init__(self, rules: list[tuple[str, ExecRecord]], default: ExecRecord | None = None):
        self.rules = list(rules)
        self.default = default

    def run(self, program: str, limits: Limits | None = None) -> ExecRecord:
        for pattern, record in self.rules:
            if pattern in program:
                return record
        if self.default is not None:
            return self.default
        raise ExecutorSetupError("stub executor has no rule for this program")


def stub_output(lines: list[str]) -> ExecRecord:
    """Convenience: a successful run printing the given TEST lines."""
    return ExecRecord(True, "", 0, "".join(line + "\n" for line in lines), "")


def stub_compile_error(diagnostics: str) -> ExecRecord:
    return ExecRecord(False, diagnostics)


# --- output comparison ----------------------------------------------------------


def _normalize(x):
    if x is True:
        return 1
    if x is False:
        return 0
    return x


def compare_output(actual, expected, rel_tol: float = DEFAULT_REL_TOL,
                   abs_tol: float = DEFAULT_ABS_TOL, path: str = "") -> tuple[bool, str]:
    """Structural comparison of canonical-JSON values.

    Booleans equate to 1/0; [] equals any empty array regardless of
    shape; numbers compare within |a-b| <= max(abs_tol, rel_tol*|b|);
    a string equals the list of its single-character strings.
    """
    a, b = _normalize(actual), _normalize(expected)
    if isinstance(a, list) and isinstance(b, list):
        if _is_empty(a) and _is_empty(b):
            return True, ""
        if len(a) != len(b):
            return False, f"{path or '$'}: length {len(a)} != {len(b)}"
        for i, (x, y) in enumerate(zip(a, b)):
            ok, diff = compare_output(x, y, rel_tol, abs_tol, f"{path}[{i}]")
            if not ok:
                return False, diff
        return True, ""
    if isinstance(a, str) and isinstance(b, list):
        return compare_output([c for c in a], b, rel_tol, abs_tol, path)
    if isinstance(a, list) and isinstance(b, str):
        return compare_output(a, [c for c in b], rel_tol, abs_tol, path)
    if isinstance(a, str) or isinstance(b, str):
        if a == b:
            return True, ""
        return False, f"{path or '$'}: {a!r} != {b!r}"
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        if math.isclose(a, b, rel_tol=0, abs_tol=max(abs_tol, rel_tol * abs(b))):
            return True, ""
        return False, f"{path or '$'}: {a} != {b}"
    if a is None and b is None:
        return True, ""
    if isinstance(a, list) != isinstance(b, list):
        if _is_empty(a) and _is_empty(b):
            return True, ""
        return False, f"{path or '$'}: kind mismatch {type(a).__name__} vs {type(b).__name__}"
    return (a == b), ("" if a == b else f"{path or '$'}: {a!r} != {b!r}")


def _is_empty(x) -> bool:
    if isinstance(x, list):
        return len(x) == 0 or all(_is_empty(e) for e in x)
    if isinstance(x, str):
        return len(x) == 0
    return False


# --- sample evaluation ----------------------------------------------------------


def _parse_test_lines(stdout: str, n_tests: int):
    """TEST<i>: lines -> per-test (actual value | error text | missing)."""
    results: dict[int, tuple[str, object]] = {}
    for line in stdout.splitlines():
        if not line.startswith("TEST"):
            continue
        head, _, rest = line.partition(":")
        try:
            idx = int(head[4:])
        except ValueError:
            continue
        if rest.startswith("ERROR:"):
            results[idx] = ("error", rest[len("ERROR:"):])
        else:
            try:
                results[idx] = ("value", json.loads(rest))
            except json.JSONDecodeError:
                results[idx] = ("error", f"unparseable output: {rest}")
    return [results.get(i) for i in range(1, n_tests + 1)]


def evaluate_sample(candidate: str, io_cases, executor,
                    header: FunctionHeader | None = None,
                    limits: Limits | None = None,
                    rel_tol: float = DEFAULT_REL_TOL,
                    abs_tol: float = DEFAULT_ABS_TOL) -> ExecutionReport:
    """Full per-sample pipeline: harness, executor, comparison."""
    started = time.monotonic()
    program = generate_harness(candidate, io_cases, header)
    record = executor.run(program, limits)
    n = len(io_cases)
    if not record.compile_ok:
        tests = [TestReport(TestStatus.NOT_COMPILED) for _ in range(n)]
        return ExecutionReport(False, record.compiler_diagnostics, tests,
                               time.monotonic() - started)
    parsed = _parse_test_lines(record.stdout, n)
    tests: list[TestReport] = []
    for i, case in enumerate(io_cases):
        expected = case.output if hasattr(case, "output") else case.get("Output")
        entry = parsed[i]
        if entry is None:
            tests.append(TestReport(TestStatus.RUNTIME_FAILURE, record.stdout,
                                    record.stderr, diff="no output line"))
            continue
        kind, payload = entry
        if kind == "error":
            tests.append(TestReport(TestStatus.RUNTIME_FAILURE, record.stdout,
                                    record.stderr, diff=str(payload)))
            continue
        ok, diff = compare_output(payload, expected, rel_tol, abs_tol)
        status = TestStatus.PASS if ok else TestStatus.OUTPUT_MISMATCH
        tests.append(TestReport(status, record.stdout, record.stderr,
                                actual=payload, diff=diff))
    return ExecutionReport(True, record.compiler_diagnostics, tests,
                           time.monotonic() - started)


# --- classification and aggregation ----------------------------------------------


def classify(report: ExecutionReport) -> str:
    """'pass' or an ErrorCategory value, exactly one per sample.

    Any runtime failure on any test means Runtime unless all tests
    passed; Functional requires every test to have executed."""
    if not report.compile_ok:
        return ErrorCategory.COMPILATION.value
    if report.all_passed:
        return "pass"
    if any(t.status is TestStatus.RUNTIME_FAILURE for t in report.tests):
        return ErrorCategory.RUNTIME.value
    return ErrorCategory.FUNCTIONAL.value


def _pct(numerator: int, denominator: int):
    if denominator == 0:
        return None
    pct = Decimal(numerator * 100) / Decimal(denominator)
    return float(pct.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass
class Rate:
    numerator: int
    denominator: int

    @property
    def percentage(self):
        return _pct(self.numerator, self.denominator)

    def to_json(self) -> dict:
        return {"numerator": self.numerator, "denominator": self.denominator,
                "percentage": self.percentage}

    def __str__(self) -> str:
        pct = self.percentage
        text = "n/a" if pct is None else f"{pct:.2f}%"
        return f"{text} ({self.numerator}/{self.denominator})"


@dataclass
class PassRateSummary:
    compile_rate: Rate
    partial_pass_rate: Rate
    full_pass_rate: Rate

    def to_json(self) -> dict:
        return {
            "compile_rate": self.compile_rate.to_json(),
            "partial_pass_rate": self.partial_pass_rate.to_json(),
            "full_pass_rate": self.full_pass_rate.to_json(),
        }


def summarize(reports: list[ExecutionReport]) -> PassRateSummary:
    """Table-style rates: compiled / >=1 test passed / all tests passed.
    Partial is a superset of full."""
    total = len(reports)
    compiled = sum(1 for r in reports if r.compile_ok)
    partial = sum(1 for r in reports if r.any_passed)
    full = sum(1 for r in reports if r.all_passed)
    if not (full <= partial <= compiled):
        raise AssertionError("verdict lattice violated")
    return PassRateSummary(Rate(compiled, total), Rate(partial, total), Rate(full, total))


def error_distribution(per_iteration: list[list[ExecutionReport]]) -> list[dict]:
    """Per-iteration share of pass/Compilation/Runtime/Functional, for
    plotting the repair trajectory."""
    rows = []
    for i, reports in enumerate(per_iteration, 1):
        total = len(reports)
        counts = {"pass": 0, ErrorCategory.COMPILATION.value: 0,
                  ErrorCategory.RUNTIME.value: 0, ErrorCategory.FUNCTIONAL.value: 0}
        for r in reports:
            counts[classify(r)] += 1
        row = {"iteration": i}
        for key, count in counts.items():
            row[key] = _pct(count, total) if total else None
        rows.append(row)
    return rows
