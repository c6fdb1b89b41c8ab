"""The four translation strategies and their prompt construction.

Prompts follow the fine-tuning instruction structure exactly: a fixed
system message, a user message carrying the APL code plus optional
signature / context / description blocks, and an assistant prefix fixing
the output format.  All strategies are deterministic given a
deterministic backend, so replay-cached corpus runs are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

from .backends import ChatMessage, GenerationRequest
from .runner import ExecutionReport, evaluate_sample

SYSTEM_PROMPT = (
    "You are an expert APL code programmer.\n"
    "Given the following APL code create C# program that implements the given code. "
    "Output only the C# program, with no example usage."
)
OUTPUT_FORMAT_PREFIX = (
    "Output format: Only compilable C# program code, no explanations, "
    "no reasoning, no example usage.\n### C#:\n"
)
APL_BLOCK = "### APL code:"
SIGNATURES_BLOCK = "### C# method signatures:"
DESCRIPTION_BLOCK = "### Description:"
CONTEXT_BLOCK = "### Context:"
DEFAULT_MAX_ITERATIONS = 5
DEFAULT_HISTORY_BUDGET = 8000  # characters of feedback history kept in the prompt

STRATEGIES = ("direct", "nl", "rag")


class Verdict(IntEnum):
    """Ordered: higher is better."""

    COMPILE_ERROR = 0
    COMPILED_ONLY = 1
    PARTIAL_PASS = 2
    FULL_PASS = 3

    @property
    def label(self) -> str:
        return {
            Verdict.COMPILE_ERROR: "compile-error",
            Verdict.COMPILED_ONLY: "compiled-only",
            Verdict.PARTIAL_PASS: "partial-pass",
            Verdict.FULL_PASS: "full-pass",
        }[self]


def verdict_of(report: ExecutionReport) -> Verdict:
    if not report.compile_ok:
        return Verdict.COMPILE_ERROR
    if report.all_passed:
        return Verdict.FULL_PASS
    if report.any_passed:
        return Verdict.PARTIAL_PASS
    return Verdict.COMPILED_ONLY


@dataclass
class TranslationRequest:
    apl: str
    signatures: list[str] | None = None
    nl_description: str | None = None
    rag_context: str | None = None
    strategy: str = "direct"
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    model: str = "default"

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class TranslationAttempt:
    iteration: int  # 1-based
    candidate: str
    report: ExecutionReport | None = None
    verdict: Verdict = Verdict.COMPILE_ERROR
    prompt: list[dict] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def tests_passed(self) -> int:
        return self.report.tests_passed if self.report else 0

    def to_json(self) -> dict:
        return {
            "iteration": self.iteration,
            "candidate": self.candidate,
            "verdict": self.verdict.label,
            "tests_passed": self.tests_passed,
            "report": self.report.to_json() if self.report else None,
            "diagnostics": self.diagnostics,
        }


def build_user_message(apl: str, signatures=None, nl_description=None, rag_context=None) -> str:
    parts = []
    if rag_context:
        parts.append(f"{CONTEXT_BLOCK}\n{rag_context}")
    parts.append(f"{APL_BLOCK}\n{apl}")
    if signatures:
        parts.append(SIGNATURES_BLOCK + "\n" + "\n".join(signatures))
    if nl_description:
        parts.append(f"{DESCRIPTION_BLOCK}\n{nl_description}")
    return "\n\n".join(parts)


def build_prompt(request: TranslationRequest) -> list[ChatMessage]:
    """Three-role structure: system text verbatim, user blocks in fixed
    order (context, APL, signatures, description last), assistant prefix
    pinning the output format."""
    user = build_user_message(
        request.apl,
        signatures=request.signatures,
        nl_description=request.nl_description,
        rag_context=request.rag_context,
    )
    return [
        ChatMessage("system", SYSTEM_PROMPT),
        ChatMessage("user", user),
        ChatMessage("assistant", OUTPUT_FORMAT_PREFIX),
    ]


def extract_code(text: str) -> tuple[str, list[str]]:
    """Strip code fences; with several fenced blocks take the largest and
    say so."""
    diagnostics: list[str] = []
    if "```" not in text:
        return text.strip(), diagnostics
    blocks = []
    parts = text.split("```")
    # odd-indexed parts are fenced contents
    for i in range(1, len(parts), 2):
        body = parts[i]
        if "\n" in body:
            first, rest = body.split("\n", 1)
            if first.strip().lower() in ("", "csharp", "cs", "c#"):
                body = rest
        blocks.append(body.strip())
    if not blocks:
        return text.strip(), diagnostics
    if len(blocks) > 1:
        diagnostics.append(f"{len(blocks)} fenced blocks; took the largest")
    return max(blocks, key=len), diagnostics


def _generate(backend, messages: list[ChatMessage], model: str) -> str:
    req = GenerationRequest(messages=tuple(messages), model=model)
    return backend.generate(req)


def _attempt(iteration: int, messages, backend, request, evaluator) -> TranslationAttempt:
    raw = _generate(backend, messages, request.model)
    candidate, diagnostics = extract_code(raw)
    attempt = TranslationAttempt(
        iteration=iteration,
        candidate=candidate,
        prompt=[{"role": m.role, "content": m.content} for m in messages],
        diagnostics=diagnostics,
    )
    if evaluator is not None:
        report = evaluator.evaluate(candidate)
        attempt.report = report
        attempt.verdict = verdict_of(report)
    return attempt


class SampleEvaluator:
    """Binds one datapoint's io cases to the runner for repeated use in a
    repair loop."""

    def __init__(self, io_cases, executor, header=None, limits=None,
                 rel_tol=None, abs_tol=None):
        from . import runner as _r

        self.io_cases = io_cases
        self.executor = executor
        self.header = header
        self.limits = limits
        self.rel_tol = rel_tol if rel_tol is not None else _r.DEFAULT_REL_TOL
        self.abs_tol = abs_tol if abs_tol is not None else _r.DEFAULT_ABS_TOL

    def evaluate(self, candidate: str) -> ExecutionReport:
        return evaluate_sample(candidate, self.io_cases, self.executor,
                               header=self.header, limits=self.limits,
                               rel_tol=self.rel_tol, abs_tol=self.abs_tol)


def translate_direct(request: TranslationRequest, backend, evaluator=None) -> TranslationAttempt:
    return _attempt(1, build_prompt(request), backend, request, evaluator)


def describe_apl(apl: str, backend, model: str = "default") -> str:
    messages = [
        ChatMessage("system", "You are an expert APL code programmer. Describe "
                              "what the following APL code does, at a high level, "
                              "in natural language."),
        ChatMessage("user", f"{APL_BLOCK}\n{apl}"),
    ]
    description = _generate(backend, messages, model).strip()
    if not description:
        raise ValueError("backend produced an empty description")
    return description


def translate_with_nl(request: TranslationRequest, describe_backend, translate_backend,
                      evaluator=None) -> TranslationAttempt:
    """Two-stage pipeline; stage backends are independent so any
    pre-trained/fine-tuned pairing is a configuration, not a code path."""
    description = describe_apl(request.apl, describe_backend, request.model)
    staged = TranslationRequest(
        apl=request.apl, signatures=request.signatures,
        nl_description=description, rag_context=request.rag_context,
        strategy="nl", max_iterations=request.max_iterations, model=request.model,
    )
    attempt = translate_direct(staged, translate_backend, evaluator)
    attempt.diagnostics.append("nl_description generated")
    return attempt, description


def translate_rag(request: TranslationRequest, store, backend, summarizer_backend=None,
                  evaluator=None, k: int = 5):
    from .retrieval import summarize

    result = store.retrieve(request.apl, k)
    context = summarize(result, summarizer_backend or backend)
    staged = TranslationRequest(
        apl=request.apl, signatures=request.signatures,
        nl_description=request.nl_description, rag_context=context,
        strategy="rag", max_iterations=request.max_iterations, model=request.model,
    )
    attempt = translate_direct(staged, backend, evaluator)
    return attempt, result


def _feedback_for(attempt: TranslationAttempt, io_cases, signatures) -> str:
    lines = [f"--- Attempt {attempt.iteration} ---", "Code:", attempt.candidate, ""]
    report = attempt.report
    if report is None:
        return "\n".join(lines)
    if not report.compile_ok:
        lines.append("Compiler errors:")
        lines.append(report.compiler_diagnostics.strip())
        return "\n".join(lines)
    for i, (test, case) in enumerate(zip(report.tests, io_cases), 1):
        from .runner import TestStatus

        if test.status is TestStatus.PASS:
            continue
        method = case.method_name if hasattr(case, "method_name") else case["method_name"]
        args = case.csharp_arg if hasattr(case, "csharp_arg") else case.get("CSharpArg", "")
        expected = case.output if hasattr(case, "output") else case.get("Output")
        sig = signatures[0] if signatures else method
        lines.append(f"Test {i} failed:")
        lines.append(f"  signature: {sig}")
        lines.append(f"  arguments: {args}")
        lines.append(f"  expected: {expected!r}")
        if test.status is TestStatus.RUNTIME_FAILURE:
            lines.append(f"  runtime error: {test.diff}")
        else:
            lines.append(f"  actual: {test.actual!r}")
    return "\n".join(lines)


def translate_iterative(request: TranslationRequest, backend, evaluator,
                        history_budget: int = DEFAULT_HISTORY_BUDGET):
    """Generate → evaluate → repair, up to max_iterations or first
    full pass.  Returns (best attempt, full history); the best attempt is
    ordered full-pass > most tests passed > compiled > last."""
    if evaluator is None:
        raise ValueError("iterative translation requires io cases / an evaluator")
    history: list[TranslationAttempt] = []
    error: str | None = None
    for iteration in range(1, request.max_iterations + 1):
        messages = build_prompt(request)
        if history:
            feedback = [
                _feedback_for(a, evaluator.io_cases, request.signatures) for a in history
            ]
            # truncate oldest-first to fit the context budget
            while len(feedback) > 1 and sum(len(f) for f in feedback) > history_budget:
                feedback.pop(0)
            messages.insert(
                2,
                ChatMessage(
                    "user",
                    "The previous attempts failed. Historical record:\n\n"
                    + "\n\n".join(feedback)
                    + "\n\nFix the program.",
                ),
            )
        try:
            attempt = _attempt(iteration, messages, backend, request, evaluator)
        except Exception as exc:  # backend/runner failure aborts, history preserved
            error = f"{type(exc).__name__}: {exc}"
            break
        history.append(attempt)
        if attempt.verdict is Verdict.FULL_PASS:
            break
    if not history:
        raise RuntimeError(f"iterative translation produced no attempts: {error}")
    best = max(history, key=lambda a: (a.verdict, a.tests_passed, a.iteration))
    return best, history, error
