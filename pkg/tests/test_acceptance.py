"""Acceptance gate: one test per headline guarantee, one printed
pass/fail line each.  Everything runs offline with the stub executor and
scripted-mock backend."""

import itertools
import math
import random
import time
from contextlib import contextmanager

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aplbridge import headers as h
from aplbridge import lexer as lx
from aplbridge import retrieval as rv
from aplbridge import runner as r
from aplbridge import strategies as s
from aplbridge.backends import HashedNgramEmbedder, ScriptedMockBackend
from aplbridge.dataset import IoCase
from aplbridge.interp import AplValue, eval_expr, eval_tradfn

_SUITE_STARTED = time.monotonic()


@contextmanager
def criterion(name, capsys):
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"[FAIL] {name}")
        raise
    with capsys.disabled():
        print(f"[PASS] {name}")


# --- 1: oracle fidelity -------------------------------------------------------------

OR_TRADFN = """r←or v
r←0
:For e :In v
    r∨←e
    :If r=1 ⋄ :Leave ⋄ :EndIf
:EndFor"""


def test_criterion_1_oracle_fidelity(capsys):
    with criterion("oracle fidelity on worked examples (< 1 s, exact)", capsys):
        started = time.monotonic()
        assert eval_expr("⍉ 2 3 ⍴ ⍳6").to_python() == [[1, 4], [2, 5], [3, 6]]
        assert eval_expr("×/ 3 7 2 5").to_python() == 210
        assert eval_expr("⌈/ 3 7 2 5").to_python() == 7
        rank = eval_expr("Rank ← {⍴⍴⍵} ⋄ Rank 2 3 4 ⍴ ⍳24")
        assert rank.to_python() == [3]
        from aplbridge.interp import format_apl

        assert format_apl(rank) == "3"
        assert eval_expr("1 3 5 {⍺⊃¨⊂⍵} 'ABCDE'").to_python() == "ACE"
        for n in range(0, 4):
            for xs in itertools.product([0, 1], repeat=n):
                omega = AplValue.vector(list(xs)) if xs else AplValue((0,), (), "numeric")
                got = eval_tradfn(OR_TRADFN, omega=omega).to_python()
                assert got == (1 if any(xs) else 0), xs
        assert time.monotonic() - started < 1.0


# --- 2: overload reproduction --------------------------------------------------------

PUBLISHED_MEMBERSHIP_OVERLOADS = [
    "public bool xMsInt(int y, int[] x)",
    "public bool[] xMsInt(int[] y, int x)",
    "public bool[] xMsInt(int[] y, int[] x)",
    "public bool[,] xMsInt(int[,] y, int x)",
    "public bool[,] xMsInt(int[,] y, int[] x)",
    "public bool xMsInt(int y, int[,] x)",
    "public bool[] xMsInt(int[] y, int[,] x)",
    "public bool[,] xMsInt(int[,] y, int[,] x)",
]


def test_criterion_2_overload_reproduction(capsys):
    with criterion("membership overload set (8 signatures, set-equal)", capsys):
        sigs = h.expand_overloads("xMsInt", "INT", "INT", h.membership_result_rule, max_rank=2)
        got = {h.normalize_signature(sig) for sig in sigs}
        want = {h.normalize_signature(sig) for sig in PUBLISHED_MEMBERSHIP_OVERLOADS}
        assert len(sigs) == 8
        assert got == want


# --- 3: metric arithmetic -------------------------------------------------------------


def _random_report(rng):
    compile_ok = rng.random() < 0.8
    n = rng.randint(1, 4)
    if not compile_ok:
        statuses = [r.TestStatus.NOT_COMPILED] * n
    else:
        statuses = [rng.choice([r.TestStatus.PASS, r.TestStatus.OUTPUT_MISMATCH,
                                r.TestStatus.RUNTIME_FAILURE]) for _ in range(n)]
    return r.ExecutionReport(compile_ok, "" if compile_ok else "err",
                             [r.TestReport(st_) for st_ in statuses])


def test_criterion_3_metric_arithmetic(capsys):
    with criterion("pass-rate arithmetic (40/49=81.63, 39/49=79.59) + lattice x1000", capsys):
        assert r.Rate(40, 49).percentage == 81.63
        assert r.Rate(39, 49).percentage == 79.59
        rng = random.Random(0)
        for _ in range(1000):
            reports = [_random_report(rng) for _ in range(rng.randint(1, 30))]
            summary = r.summarize(reports)  # raises if full <= partial <= compile fails
            assert (summary.full_pass_rate.numerator
                    <= summary.partial_pass_rate.numerator
                    <= summary.compile_rate.numerator)


# --- 4: iterative-loop contract --------------------------------------------------------

CASE = IoCase("f", "2 3", csharp_arg="new int[] { 2, 3 }", output=6)


def _evaluator():
    executor = r.StubExecutor([
        ("// GOOD", r.stub_output(["TEST1:6"])),
        ("// BAD", r.stub_compile_error("error CS1002: ; expected")),
        ("// WRONG", r.stub_output(["TEST1:7"])),
    ])
    return s.SampleEvaluator([CASE], executor)


def test_criterion_4_iterative_loop(capsys):
    with criterion("repair loop: stop at first full pass; cap at 5; error handoff", capsys):
        backend = ScriptedMockBackend(script=["x // BAD", "x // BAD", "x // GOOD"])
        best, history, error = s.translate_iterative(
            s.TranslationRequest(apl="r←f x"), backend, _evaluator())
        assert error is None and len(history) == 3
        assert best.iteration == 3 and best.verdict is s.Verdict.FULL_PASS

        backend = ScriptedMockBackend(default="x // BAD")
        best, history, _ = s.translate_iterative(
            s.TranslationRequest(apl="r←f x", max_iterations=5), backend, _evaluator())
        assert len(history) == 5
        assert best is max(history, key=lambda a: (a.verdict, a.tests_passed, a.iteration))

        # scripted corpus: compile errors drain into functional errors and passes
        scripts = [
            ["x // GOOD"],
            ["x // BAD", "x // GOOD"],
            ["x // BAD", "x // WRONG", "x // GOOD"],
            ["x // BAD", "x // BAD", "x // WRONG", "x // WRONG", "x // WRONG"],
        ]
        per_iteration = [[] for _ in range(5)]
        for script in scripts:
            backend = ScriptedMockBackend(script=list(script))
            _, history, _ = s.translate_iterative(
                s.TranslationRequest(apl="r←f x"), backend, _evaluator())
            for attempt in history:
                per_iteration[attempt.iteration - 1].append(attempt.report)
        rows = r.error_distribution([p for p in per_iteration if p])
        comp = [row["Compilation"] for row in rows]
        resolved = [row["pass"] + row["Functional"] for row in rows]
        assert comp == sorted(comp, reverse=True)  # Compilation share monotonically falls
        assert resolved == sorted(resolved)        # handed off to pass/Functional


# --- 5: retrieval properties -----------------------------------------------------------


def test_criterion_5_retrieval_properties(capsys):
    with criterion("retrieval: sorted desc, self=1.0, entropy 1.0/0.0, scale-invariant", capsys):
        docs = [
            ("a.md", "Transpose ⍉ reverses axes. " * 50),
            ("b.md", "Reshape ⍴ cycles elements. " * 50),
            ("c.md", "Membership ∊ tests inclusion. " * 50),
        ]
        store = rv.ChunkStore.build(docs, HashedNgramEmbedder(), 800, 100)
        result = store.retrieve("transpose axes ⍉", 5)
        scores = [sc for _, sc in result.ranked]
        assert scores == sorted(scores, reverse=True)
        top, score = store.retrieve(store.chunks[0].text, 1).ranked[0]
        assert abs(score - 1.0) <= 1e-9 and top.text == store.chunks[0].text
        assert math.isclose(rv.normalized_entropy([0.3] * 5), 1.0, abs_tol=1e-12)
        assert rv.normalized_entropy([0.9, 0.0, 0.0, 0.0, 0.0]) == 0.0
        base = [(c.doc_id, c.ordinal) for c, _ in store.retrieve("reshape cycles", 5).ranked]
        for factor in (0.5, 3.0, 100.0):
            scaled = rv.ChunkStore(store.chunks, store.vectors * factor, store.embedder)
            got = [(c.doc_id, c.ordinal) for c, _ in scaled.retrieve("reshape cycles", 5).ranked]
            assert got == base


# --- 6: lexer / tokenizer ----------------------------------------------------------------


def _vocab_without(chars):
    inv = lx.GlyphInventory.default().glyphs()
    alphabet = sorted(inv | set("abcdefghijklmnopqrstuvwxyz0123456789 \n"))
    vocab = {c: i for i, c in enumerate(alphabet) if c not in chars}
    vocab["<unk>"] = len(alphabet)
    return lx.VocabTokenizer(vocab)


def test_criterion_6_tokenizer_round_trips(capsys):
    with criterion("identity tokenizer: 0 round-trip failures; ÷-less fixture: >= 1", capsys):
        inventory = sorted(lx.GlyphInventory.default().glyphs())
        corpus = inventory + ["×/ 3 7 2 5", "a÷b", "⍉ 2 3 ⍴ ⍳6"]
        report = lx.tokenizer_metrics(corpus, lx.IdentityTokenizer())
        assert report.round_trip_failures == 0
        report = lx.tokenizer_metrics(corpus, _vocab_without({"÷"}))
        assert report.round_trip_failures >= 1


# --- 7: property suites (>= 500 cases each) ----------------------------------------------

matrices = st.integers(min_value=1, max_value=6).flatmap(
    lambda rows: st.integers(min_value=1, max_value=6).flatmap(
        lambda cols: st.lists(st.integers(-99, 99), min_size=rows * cols,
                              max_size=rows * cols).map(lambda xs: (rows, cols, xs))))


def _literal(n):
    return f"¯{-n}" if n < 0 else str(n)


def _matrix_expr(rows, cols, xs):
    return f"{rows} {cols} ⍴ {' '.join(_literal(x) for x in xs)}"


@settings(max_examples=500, deadline=None)
@given(matrices)
def test_criterion_7a_transpose_involution(m):
    rows, cols, xs = m
    expr = _matrix_expr(rows, cols, xs)
    once = eval_expr(f"⍉ {expr}").to_python()
    twice = eval_expr(f"⍉ ⍉ {expr}").to_python()
    assert twice == eval_expr(expr).to_python()
    assert once == [[xs[i * cols + j] for i in range(rows)] for j in range(cols)]


@settings(max_examples=500, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5),
       st.lists(st.integers(-99, 99), min_size=1, max_size=12))
def test_criterion_7b_reshape_contract(rows, cols, xs):
    got = eval_expr(f"{rows} {cols} ⍴ {' '.join(_literal(x) for x in xs)}").to_python()
    want = [[xs[(i * cols + j) % len(xs)] for j in range(cols)] for i in range(rows)]
    assert got == want


@settings(max_examples=500, deadline=None)
@given(st.lists(st.integers(0, 9), min_size=1, max_size=8),
       st.lists(st.integers(0, 9), min_size=1, max_size=8))
def test_criterion_7c_membership_shape_law(left, right):
    got = eval_expr(f"{' '.join(map(str, left))} ∊ {' '.join(map(str, right))}").to_python()
    want = [1 if x in set(right) else 0 for x in left]
    if len(left) == 1:
        want = want[0]
    assert got == want


@settings(max_examples=500, deadline=None)
@given(st.lists(st.integers(-9, 9), min_size=1, max_size=8),
       st.sampled_from(["+", "×", "⌈", "⌊"]))
def test_criterion_7d_reduction_identities(xs, op):
    got = eval_expr(f"{op}/ {' '.join(_literal(x) for x in xs)}").to_python()
    fold = {"+": sum(xs), "×": math.prod(xs), "⌈": max(xs), "⌊": min(xs)}[op]
    assert got == fold
    assert eval_expr(f"+/ {' '.join(_literal(x) for x in xs)} - "
                     f"{' '.join(_literal(x) for x in xs)}").to_python() == 0


def test_criterion_7_property_suites_report(capsys):
    with criterion("property suites: 4 x >= 500 cases, brute-force equivalent, < 60 s", capsys):
        # the four hypothesis suites above ran first (file order); brute-force
        # equivalence on exhaustive small instances:
        for n in range(1, 4):
            for xs in itertools.product([0, 1, 2], repeat=n):
                left = " ".join(map(str, xs))
                got = eval_expr(f"{left} ∊ 0 2").to_python()
                want = [1 if x in (0, 2) else 0 for x in xs]
                assert got == (want[0] if n == 1 else want)
                assert eval_expr(f"+/ {left}").to_python() == sum(xs)
                assert eval_expr(f"×/ {left}").to_python() == math.prod(xs)
        assert time.monotonic() - _SUITE_STARTED < 60.0
