import json

import pytest

from aplbridge import pipeline as pl
from aplbridge import runner as r
from aplbridge.backends import ScriptedMockBackend
from aplbridge.config import RunConfig
from aplbridge.dataset import Datapoint, IoCase

HEADER_APL = "⍝ ⍺ : INT ⍵ : INT[] → BOOL\nr ← y xMsInt x\nr←∨/y=x"


def _point(i):
    return Datapoint(
        apl=f"r←g{i} x\nr←x",
        csharp=f"public static class g{i}Util {{}}",
        io=[IoCase(f"g{i}", "1", csharp_arg="1", output=1)],
    )


def _patch(monkeypatch, backend, executor):
    monkeypatch.setattr(pl, "build_backend", lambda _bc: backend)
    monkeypatch.setattr(pl, "build_executor", lambda _ec: executor)


def test_sample_ids_are_stable_and_unique():
    points = [_point(i) for i in range(12)]
    ids = [pl.sample_id_of(p, i) for i, p in enumerate(points)]
    assert len(set(ids)) == 12
    assert ids == sorted(ids)
    assert ids[3].startswith("0003-")


def test_signatures_for_header_datapoint():
    point = Datapoint(apl=HEADER_APL, csharp="x", io=[])
    (sig,) = pl.signatures_for(point)
    assert sig == "public static bool xMsInt(int y, int[] x)"


def test_signatures_for_headerless_datapoint():
    assert pl.signatures_for(_point(1)) == []


def test_run_pipeline_all_full_pass(monkeypatch, tmp_path):
    points = [_point(i) for i in range(8)]
    backend = ScriptedMockBackend(default="class X {} // OK")
    executor = r.StubExecutor([], default=r.stub_output(["TEST1:1"]))
    _patch(monkeypatch, backend, executor)
    cfg = RunConfig(workers=4)
    cfg.strategy.iterative = True
    out = tmp_path / "results.jsonl"
    outcomes = pl.run_pipeline(cfg, points, out)
    assert len(outcomes) == 8
    assert all(o.best.verdict.label == "full-pass" for o in outcomes)
    assert all(o.classification == "pass" for o in outcomes)
    lines = out.read_text().strip().splitlines()
    assert len(lines) == 8


def test_run_pipeline_resumes_without_duplicates(monkeypatch, tmp_path):
    points = [_point(i) for i in range(6)]
    backend = ScriptedMockBackend(default="class X {} // OK")
    executor = r.StubExecutor([], default=r.stub_output(["TEST1:1"]))
    _patch(monkeypatch, backend, executor)
    cfg = RunConfig(workers=1)
    out = tmp_path / "results.jsonl"

    first = pl.run_pipeline(cfg, points[:3], out)
    assert len(first) == 3
    second = pl.run_pipeline(cfg, points, out)
    assert len(second) == 3  # only the unfinished samples are translated
    ids = [json.loads(line)["id"] for line in out.read_text().strip().splitlines()]
    assert len(ids) == 6 and len(set(ids)) == 6


def test_run_pipeline_idempotent_on_rerun(monkeypatch, tmp_path):
    points = [_point(i) for i in range(4)]
    backend = ScriptedMockBackend(default="class X {} // OK")
    executor = r.StubExecutor([], default=r.stub_output(["TEST1:1"]))
    _patch(monkeypatch, backend, executor)
    cfg = RunConfig(workers=2)
    out = tmp_path / "results.jsonl"
    pl.run_pipeline(cfg, points, out)
    before = out.read_text()
    again = pl.run_pipeline(cfg, points, out)
    assert again == [] and out.read_text() == before


def test_translate_sample_nl_strategy(monkeypatch):
    point = _point(1)
    backend = ScriptedMockBackend(rules=[
        ("Describe", "Identity on an integer."),
        ("### APL code:", "class X {} // OK"),
    ])
    executor = r.StubExecutor([], default=r.stub_output(["TEST1:1"]))
    cfg = RunConfig()
    cfg.strategy.name = "nl"
    outcome = pl.translate_sample(point, cfg, backend, executor)
    assert outcome.classification == "pass"
    user = backend.calls[-1].messages[1].content
    assert "Identity on an integer." in user


def test_translate_sample_rag_strategy():
    from aplbridge.backends import HashedNgramEmbedder
    from aplbridge.retrieval import ChunkStore

    point = _point(2)
    store = ChunkStore.build([("doc.md", "Identity functions return the argument.")],
                             HashedNgramEmbedder())
    backend = ScriptedMockBackend(default="class X {} // OK")
    executor = r.StubExecutor([], default=r.stub_output(["TEST1:1"]))
    cfg = RunConfig()
    cfg.strategy.name = "rag"
    outcome = pl.translate_sample(point, cfg, backend, executor, store=store)
    assert outcome.classification == "pass"
    user = backend.calls[-1].messages[1].content
    assert "Identity functions" in user


def test_translate_sample_rag_requires_store():
    cfg = RunConfig()
    cfg.strategy.name = "rag"
    with pytest.raises(ValueError):
        pl.translate_sample(_point(1), cfg, ScriptedMockBackend(default="x"),
                            r.StubExecutor([], default=r.stub_output([])))


def test_report_from_results_counts_and_distribution(monkeypatch, tmp_path):
    # mixed outcomes: 2 full pass, 1 functional mismatch, 1 compile error
    points = [_point(i) for i in range(4)]
    backend = ScriptedMockBackend(rules=[
        ("r←g0 x", "class A {} // OK"),
        ("r←g1 x", "class B {} // OK"),
        ("r←g2 x", "class C {} // WRONG"),
        ("r←g3 x", "class D {} // BAD"),
    ])
    executor = r.StubExecutor([
        ("// OK", r.stub_output(["TEST1:1"])),
        ("// WRONG", r.stub_output(["TEST1:2"])),
        ("// BAD", r.stub_compile_error("error CS1002")),
    ])
    _patch(monkeypatch, backend, executor)
    cfg = RunConfig(workers=1)
    out = tmp_path / "results.jsonl"
    pl.run_pipeline(cfg, points, out)

    payload = pl.report_from_results(out)
    summary = payload["summary"]
    assert summary["compile_rate"]["numerator"] == 3
    assert summary["partial_pass_rate"]["numerator"] == 2
    assert summary["full_pass_rate"]["numerator"] == 2
    assert summary["full_pass_rate"]["percentage"] == 50.0
    (row,) = payload["error_distribution"]
    assert row["pass"] == 50.0 and row["Compilation"] == 25.0 and row["Functional"] == 25.0
    text = payload["summary_text"]
    assert "Full Pass Rate" in text and "50.00%" in text


def test_include_prompts_toggle(monkeypatch, tmp_path):
    points = [_point(0)]
    backend = ScriptedMockBackend(default="class X {} // OK")
    executor = r.StubExecutor([], default=r.stub_output(["TEST1:1"]))
    _patch(monkeypatch, backend, executor)
    cfg = RunConfig(workers=1)
    bare = tmp_path / "bare.jsonl"
    pl.run_pipeline(cfg, points, bare)
    rec = json.loads(bare.read_text())
    assert "prompts" not in rec
    rich = tmp_path / "rich.jsonl"
    pl.run_pipeline(cfg, points, rich, include_prompts=True)
    rec = json.loads(rich.read_text())
    assert rec["prompts"] and rec["prompts"][0][0]["role"] == "system"
