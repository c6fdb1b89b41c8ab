import pytest

from aplbridge import runner as r
from aplbridge import strategies as s
from aplbridge.backends import BackendError, ScriptedMockBackend
from aplbridge.dataset import IoCase

CASE = IoCase("f", "2 3", csharp_arg="new int[] { 2, 3 }", output=6)

GOOD = "public static class fUtil { public static int f(int[] x) { return 6; } } // GOOD"
BAD = "public static class fUtil { missing semicolon } // BAD"
WRONG = "public static class fUtil { public static int f(int[] x) { return 7; } } // WRONG"


def _executor():
    return r.StubExecutor([
        ("// GOOD", r.stub_output(["TEST1:6"])),
        ("// BAD", r.stub_compile_error("error CS1002: ; expected")),
        ("// WRONG", r.stub_output(["TEST1:7"])),
    ])


def _evaluator():
    return s.SampleEvaluator([CASE], _executor())


def test_verdict_ordering():
    assert (s.Verdict.COMPILE_ERROR < s.Verdict.COMPILED_ONLY
            < s.Verdict.PARTIAL_PASS < s.Verdict.FULL_PASS)
    assert s.Verdict.FULL_PASS.label == "full-pass"


def test_verdict_of():
    full = r.ExecutionReport(True, "", [r.TestReport(r.TestStatus.PASS)])
    partial = r.ExecutionReport(True, "", [r.TestReport(r.TestStatus.PASS),
                                           r.TestReport(r.TestStatus.OUTPUT_MISMATCH)])
    compiled = r.ExecutionReport(True, "", [r.TestReport(r.TestStatus.OUTPUT_MISMATCH)])
    broken = r.ExecutionReport(False, "err", [])
    assert s.verdict_of(full) is s.Verdict.FULL_PASS
    assert s.verdict_of(partial) is s.Verdict.PARTIAL_PASS
    assert s.verdict_of(compiled) is s.Verdict.COMPILED_ONLY
    assert s.verdict_of(broken) is s.Verdict.COMPILE_ERROR


def test_prompt_structure_and_block_order():
    request = s.TranslationRequest(
        apl="r←y f x", signatures=["public int f(int[] x)"],
        nl_description="adds things", rag_context="idiom notes")
    messages = s.build_prompt(request)
    assert [m.role for m in messages] == ["system", "user", "assistant"]
    assert messages[0].content == s.SYSTEM_PROMPT
    assert messages[2].content == s.OUTPUT_FORMAT_PREFIX
    user = messages[1].content
    order = [user.index(b) for b in
             (s.CONTEXT_BLOCK, s.APL_BLOCK, s.SIGNATURES_BLOCK, s.DESCRIPTION_BLOCK)]
    assert order == sorted(order)


def test_prompt_omits_empty_blocks():
    user = s.build_prompt(s.TranslationRequest(apl="r←f x"))[1].content
    assert s.APL_BLOCK in user
    assert s.SIGNATURES_BLOCK not in user
    assert s.DESCRIPTION_BLOCK not in user
    assert s.CONTEXT_BLOCK not in user


def test_request_validation():
    with pytest.raises(ValueError):
        s.TranslationRequest(apl="x", strategy="oracle")
    with pytest.raises(ValueError):
        s.TranslationRequest(apl="x", max_iterations=0)


def test_extract_code_plain():
    code, diags = s.extract_code("  class A {}  ")
    assert code == "class A {}" and diags == []


def test_extract_code_single_fence_with_tag():
    code, diags = s.extract_code("Here you go:\n```csharp\nclass A {}\n```\n")
    assert code == "class A {}" and diags == []


def test_extract_code_multiple_fences_takes_largest():
    text = "```cs\nshort\n```\nand\n```\nclass Longer { int x; }\n```"
    code, diags = s.extract_code(text)
    assert code == "class Longer { int x; }"
    assert diags and "2 fenced blocks" in diags[0]


def test_translate_direct_full_pass():
    backend = ScriptedMockBackend(default=GOOD)
    attempt = s.translate_direct(s.TranslationRequest(apl="r←f x"), backend, _evaluator())
    assert attempt.verdict is s.Verdict.FULL_PASS
    assert attempt.iteration == 1
    assert attempt.candidate == GOOD


def test_translate_direct_without_evaluator():
    backend = ScriptedMockBackend(default=GOOD)
    attempt = s.translate_direct(s.TranslationRequest(apl="r←f x"), backend)
    assert attempt.report is None and attempt.tests_passed == 0


def test_iterative_stops_at_first_full_pass():
    backend = ScriptedMockBackend(script=[BAD, WRONG, GOOD, GOOD, GOOD])
    best, history, error = s.translate_iterative(
        s.TranslationRequest(apl="r←f x"), backend, _evaluator())
    assert error is None
    assert len(history) == 3  # fail, fail, pass -> no fourth call
    assert best.iteration == 3 and best.verdict is s.Verdict.FULL_PASS
    assert len(backend.calls) == 3


def test_iterative_never_improving_runs_exactly_max_iterations():
    backend = ScriptedMockBackend(default=BAD)
    best, history, error = s.translate_iterative(
        s.TranslationRequest(apl="r←f x", max_iterations=5), backend, _evaluator())
    assert len(history) == 5
    assert best.verdict is s.Verdict.COMPILE_ERROR


def test_iterative_best_attempt_by_verdict_then_tests():
    # wrong-output (compiled) beats compile-error; best is the compiled one
    backend = ScriptedMockBackend(script=[WRONG, BAD, BAD])
    best, history, _ = s.translate_iterative(
        s.TranslationRequest(apl="r←f x", max_iterations=3), backend, _evaluator())
    assert len(history) == 3
    assert best.iteration == 1 and best.verdict is s.Verdict.COMPILED_ONLY


def test_iterative_feedback_contains_failure_details():
    backend = ScriptedMockBackend(script=[WRONG, GOOD])
    _, history, _ = s.translate_iterative(
        s.TranslationRequest(apl="r←f x", signatures=["public int f(int[] x)"]),
        backend, _evaluator())
    second_prompt = backend.calls[1]
    repair = [m for m in second_prompt.messages if "previous attempts failed" in m.content]
    assert repair
    text = repair[0].content
    assert "// WRONG" in text           # prior candidate included
    assert "public int f(int[] x)" in text  # signature included
    assert "expected: 6" in text
    assert "actual: 7" in text


def test_iterative_feedback_compiler_errors():
    backend = ScriptedMockBackend(script=[BAD, GOOD])
    s.translate_iterative(s.TranslationRequest(apl="r←f x"), backend, _evaluator())
    text = "\n".join(m.content for m in backend.calls[1].messages)
    assert "CS1002" in text


def test_iterative_history_truncates_oldest_first():
    backend = ScriptedMockBackend(default=BAD)
    s.translate_iterative(
        s.TranslationRequest(apl="r←f x", max_iterations=5), backend, _evaluator(),
        history_budget=len(BAD) + 200)
    last = "\n".join(m.content for m in backend.calls[-1].messages)
    assert "Attempt 4" in last
    assert "Attempt 1 " not in last and "--- Attempt 1" not in last


def test_iterative_backend_failure_preserves_history():
    class Failing(ScriptedMockBackend):
        pass

    backend = Failing(script=[WRONG])  # second call exhausts the script -> BackendError
    best, history, error = s.translate_iterative(
        s.TranslationRequest(apl="r←f x"), backend, _evaluator())
    assert len(history) == 1
    assert error is not None and "BackendError" in error
    assert best.iteration == 1


def test_iterative_requires_evaluator():
    with pytest.raises(ValueError):
        s.translate_iterative(s.TranslationRequest(apl="x"), ScriptedMockBackend(default=GOOD), None)


def test_describe_apl_and_empty_rejection():
    assert s.describe_apl("r←f x", ScriptedMockBackend(default="Sums a vector.")) == "Sums a vector."
    with pytest.raises(ValueError):
        s.describe_apl("r←f x", ScriptedMockBackend(default="   "))


def test_translate_with_nl_two_stages():
    describe = ScriptedMockBackend(default="Returns six.")
    translate = ScriptedMockBackend(default=GOOD)
    attempt, description = s.translate_with_nl(
        s.TranslationRequest(apl="r←f x"), describe, translate, _evaluator())
    assert description == "Returns six."
    assert attempt.verdict is s.Verdict.FULL_PASS
    user = translate.calls[0].messages[1].content
    assert s.DESCRIPTION_BLOCK in user and "Returns six." in user


def test_translate_rag_injects_context():
    from aplbridge.backends import HashedNgramEmbedder
    from aplbridge.retrieval import ChunkStore

    store = ChunkStore.build(
        [("idioms.md", "The reduction ×/ multiplies a vector down to a scalar.")],
        HashedNgramEmbedder())
    backend = ScriptedMockBackend(default=GOOD)
    attempt, result = s.translate_rag(
        s.TranslationRequest(apl="×/ 2 3"), store, backend, evaluator=_evaluator())
    assert attempt.verdict is s.Verdict.FULL_PASS
    assert result.ranked
    user = backend.calls[-1].messages[1].content
    assert s.CONTEXT_BLOCK in user and "reduction" in user
