"""End-to-end translation workflow: signatures → optional description →
optional retrieval context → translate → iterate → classify → report.

Runs are resumable: sample ids already present in the results file are
skipped, so an interrupted run rejoined with a replay backend produces
the same results file as an uninterrupted one.
"""

from __future__ import annotations

import json
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import headers as h
from . import runner as r
from . import strategies as s
from .config import RunConfig, build_backend, build_executor
from .dataset import Datapoint


@dataclass
class SampleOutcome:
    sample_id: str
    attempts: list[s.TranslationAttempt]
    best: s.TranslationAttempt
    classification: str
    error: str | None = None

    def to_json(self, include_prompts: bool = False) -> dict:
        obj = {
            "id": self.sample_id,
            "verdict": self.best.verdict.label,
            "classification": self.classification,
            "iterations": len(self.attempts),
            "attempts": [a.to_json() for a in self.attempts],
            "error": self.error,
        }
        if include_prompts:
            obj["prompts"] = [a.prompt for a in self.attempts]
        return obj


def sample_id_of(point: Datapoint, index: int) -> str:
    name = point.ident
    return f"{index:04d}-{name}" if name else f"{index:04d}"


def signatures_for(point: Datapoint) -> list[str]:
    """Header-derived C# signatures for a datapoint; empty when the APL
    source has no parseable type header."""
    header_line = None
    defn_line = None
    for line in point.apl.splitlines():
        text = line.strip()
        if not text:
            continue
        if text.startswith("⍝") and "→" in text and header_line is None:
            header_line = text
        elif defn_line is None and not text.startswith("⍝"):
            defn_line = text
    if header_line is None:
        return []
    try:
        types = h.parse_header(header_line)
        defn = None
        if defn_line:
            try:
                defn = h.parse_definition_line(defn_line)
            except h.DefinitionError:
                defn = None
        name = defn.name if defn else (point.ident or "F")
        fh = h.make_function_header(name, types, defn)
        return [h.render_csharp_signature(fh)]
    except h.HeaderError:
        return []


def existing_ids(results_path) -> set[str]:
    ids: set[str] = set()
    if not os.path.exists(results_path):
        return ids
    with open(results_path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                try:
                    ids.add(json.loads(line)["id"])
                except (json.JSONDecodeError, KeyError):
                    continue
    return ids


def translate_sample(point: Datapoint, cfg: RunConfig, backend, executor,
                     store=None, describe_backend=None) -> SampleOutcome:
    sigs = signatures_for(point)
    request = s.TranslationRequest(
        apl=point.apl,
        signatures=sigs or None,
        strategy=cfg.strategy.name,
        max_iterations=cfg.strategy.max_iterations,
    )
    evaluator = s.SampleEvaluator(
        point.io, executor,
        limits=r.Limits(cfg.executor.compile_timeout, cfg.executor.run_timeout),
        rel_tol=cfg.tolerances.rel_tol, abs_tol=cfg.tolerances.abs_tol,
    ) if point.io else None

    if cfg.strategy.name == "nl":
        description = s.describe_apl(point.apl, describe_backend or backend)
        request.nl_description = description
    if cfg.strategy.name == "rag":
        if store is None:
            raise ValueError("rag strategy requires a chunk store")
        from .retrieval import summarize

        result = store.retrieve(point.apl, cfg.retrieval.k)
        request.rag_context = summarize(result, backend)

    error = None
    if cfg.strategy.iterative and evaluator is not None:
        best, attempts, error = s.translate_iterative(request, backend, evaluator)
    else:
        best = s.translate_direct(request, backend, evaluator)
        attempts = [best]

    classification = r.classify(best.report) if best.report else "not-evaluated"
    return SampleOutcome("", attempts, best, classification, error)


def run_pipeline(cfg: RunConfig, points: list[Datapoint], results_path,
                 store=None, include_prompts: bool = False) -> list[SampleOutcome]:
    """Translate a corpus, appending one JSON line per sample; skips
    samples whose ids already exist in the results file."""
    backend = build_backend(cfg.backend("translate"))
    describe_backend = build_backend(cfg.backend("describe")) if "describe" in cfg.backends else None
    executor = build_executor(cfg.executor)

    done = existing_ids(results_path)
    lock = threading.Lock()
    outcomes: list[SampleOutcome] = []

    def work(index: int, point: Datapoint):
        sid = sample_id_of(point, index)
        if sid in done:
            return
        outcome = translate_sample(point, cfg, backend, executor, store, describe_backend)
        outcome.sample_id = sid
        with lock:
            outcomes.append(outcome)
            with open(results_path, "a", encoding="utf-8") as f:
                f.write(json.dumps(outcome.to_json(include_prompts), ensure_ascii=False) + "\n")

    if cfg.workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(work, i, p) for i, p in enumerate(points)]
            for fut in futures:
                fut.result()
    else:
        for i, p in enumerate(points):
            work(i, p)
    outcomes.sort(key=lambda o: o.sample_id)
    return outcomes


def report_from_results(results_path) -> dict:
    """PassRateSummary + error distribution from a results JSONL file."""
    verdict_rank = {"compile-error": 0, "compiled-only": 1, "partial-pass": 2, "full-pass": 3}
    total = 0
    compiled = partial = full = 0
    by_iteration: dict[int, dict[str, int]] = {}
    with open(results_path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            total += 1
            rank = verdict_rank.get(rec["verdict"], 0)
            compiled += rank >= 1
            partial += rank >= 2
            full += rank >= 3
            for a in rec.get("attempts", []):
                row = by_iteration.setdefault(a["iteration"], {
                    "pass": 0, "Compilation": 0, "Runtime": 0, "Functional": 0, "total": 0})
                row["total"] += 1
                report = a.get("report")
                if report is None:
                    continue
                if not report["compile_ok"]:
                    row["Compilation"] += 1
                elif a["verdict"] == "full-pass":
                    row["pass"] += 1
                elif any(t["status"] == "runtime-failure" for t in report["tests"]):
                    row["Runtime"] += 1
                else:
                    row["Functional"] += 1

    summary = r.PassRateSummary(
        r.Rate(compiled, total), r.Rate(partial, total), r.Rate(full, total)
    )
    distribution = []
    for iteration in sorted(by_iteration):
        row = by_iteration[iteration]
        n = row.pop("total")
        distribution.append(
            {"iteration": iteration,
             **{k: (r._pct(v, n) if n else None) for k, v in row.items()}}
        )
    return {"summary": summary.to_json(), "error_distribution": distribution,
            "summary_text": format_summary_table(summary)}


def format_summary_table(summary: r.PassRateSummary) -> str:
    rows = [
        ("Compile Rate", summary.compile_rate),
        ("Partial Pass Rate", summary.partial_pass_rate),
        ("Full Pass Rate", summary.full_pass_rate),
    ]
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {rate}" for name, rate in rows)
