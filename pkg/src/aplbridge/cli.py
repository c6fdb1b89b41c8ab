"""`aplbridge` command line: dataset management, header parsing, APL
evaluation, tokenizer reports, RAG indexing/query, translation runs, and
reporting."""

from __future__ import annotations

import json
import os
import sys

import click

from . import dataset as ds
from . import headers as h
from . import interp
from . import lexer as lx
from .config import ConfigError, RunConfig, load_config


def _echo_json(obj):
    click.echo(json.dumps(obj, ensure_ascii=False))


def _load_cfg(ctx) -> RunConfig:
    cfg = ctx.obj.get("config")
    if cfg is None:
        cfg = RunConfig()
    if ctx.obj.get("seed") is not None:
        cfg.seed = ctx.obj["seed"]
    if ctx.obj.get("workers") is not None:
        cfg.workers = ctx.obj["workers"]
    return cfg


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="TOML run configuration.")
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--verbose", is_flag=True, default=False)
@click.pass_context
def main(ctx, config_path, seed, workers, verbose):
    ctx.ensure_object(dict)
    try:
        ctx.obj["config"] = load_config(config_path) if config_path else None
    except ConfigError as exc:
        raise click.ClickException(f"configuration error: {exc}")
    ctx.obj["seed"] = seed
    ctx.obj["workers"] = workers
    ctx.obj["verbose"] = verbose


# --- dataset --------------------------------------------------------------------


@main.group()
def dataset():
    """Corpus loading, validation, splitting, and export."""


def _exit_on_errors(result: ds.LoadResult):
    for d in result.diagnostics:
        click.echo(json.dumps(d.to_json()), err=True)
    if not result.ok:
        sys.exit(1)


@dataset.command()
@click.argument("path", type=click.Path(exists=True))
def validate(path):
    result = ds.load(path)
    _echo_json({"points": len(result.points),
                "diagnostics": [d.to_json() for d in result.diagnostics]})
    if not result.ok:
        sys.exit(1)


@dataset.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("--train", type=float, required=True)
@click.option("--valid", type=float, required=True)
@click.option("--test", type=float, required=True)
@click.option("--seed", type=int, default=0)
@click.option("--out-dir", type=click.Path(), required=True)
def split(path, train, valid, test, seed, out_dir):
    result = ds.load(path)
    _exit_on_errors(result)
    spec = ds.SplitSpec(train, valid, test, seed)
    parts = ds.split(result.points, spec)
    os.makedirs(out_dir, exist_ok=True)
    names = ("train", "valid", "test")
    for name, points in zip(names, parts):
        ds.save(points, os.path.join(out_dir, f"{name}.jsonl"))
    _echo_json({name: len(points) for name, points in zip(names, parts)})


@dataset.command()
@click.argument("path", type=click.Path(exists=True))
def stats(path):
    result = ds.load(path)
    _exit_on_errors(result)
    _echo_json(ds.stats(result.points))


@dataset.command()
@click.argument("path", type=click.Path(exists=True))
@click.option("-n", "size", type=int, required=True)
@click.option("--seed", type=int, default=0)
@click.option("--out", type=click.Path(), required=True)
def subset(path, size, seed, out):
    result = ds.load(path)
    _exit_on_errors(result)
    chosen = ds.subset(result.points, size, seed)
    ds.save(chosen, out)
    _echo_json({"subset": len(chosen)})


@dataset.command("export-sft")
@click.argument("path", type=click.Path(exists=True))
@click.option("--include-nl", is_flag=True, default=False)
@click.option("--out", type=click.Path(), required=True)
def export_sft(path, include_nl, out):
    result = ds.load(path)
    _exit_on_errors(result)
    records = ds.export_sft(result.points, include_nl=include_nl)
    with open(out, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
    _echo_json({"records": len(records)})


# --- headers --------------------------------------------------------------------


@main.command("parse-headers")
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
def parse_headers(in_path):
    """Parse APL type headers and print one JSON object per function."""
    with open(in_path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    found = 0
    for i, line in enumerate(lines):
        text = line.strip()
        if not (text.startswith("⍝") and "→" in text):
            continue
        try:
            types = h.parse_header(text)
        except h.HeaderError as exc:
            click.echo(json.dumps({"line": i + 1, "error": str(exc), "column": exc.column}),
                       err=True)
            continue
        defn = None
        for follow in lines[i + 1:]:
            ft = follow.strip()
            if not ft or ft.startswith("⍝"):
                continue
            try:
                defn = h.parse_definition_line(ft)
            except h.DefinitionError:
                defn = None
            break
        name = defn.name if defn else f"Fn{found + 1}"
        header = h.make_function_header(name, types, defn)
        _echo_json({
            "name": header.name,
            "valence": header.valence,
            "types": {
                "left": header.left.apl() if header.left else None,
                "right": header.right.apl(),
                "result": header.result.apl(),
            },
            "csharp_signature": h.render_csharp_signature(header),
        })
        found += 1
    if found == 0:
        click.echo(json.dumps({"warning": "no parseable type headers found"}), err=True)


# --- eval -----------------------------------------------------------------------


@main.command("eval")
@click.option("--expr", required=True, help="APL expression in the supported subset.")
def eval_cmd(expr):
    """Evaluate an APL expression with the oracle interpreter; prints the
    canonical output JSON form."""
    try:
        value = interp.eval_expr(expr)
    except interp.AplError as exc:
        raise click.ClickException(str(exc))
    _echo_json(value.to_python())


@main.command("run-io")
@click.option("--fn", "fn_path", type=click.Path(exists=True), required=True,
              help="File holding one APL function definition (dfn assignment or tradfn).")
@click.option("--right", required=True, help="APL expression for the right argument.")
@click.option("--left", default=None, help="APL expression for the left argument.")
def run_io(fn_path, right, left):
    """Apply an APL function to evaluated arguments with the oracle
    interpreter; prints the canonical output JSON form."""
    with open(fn_path, encoding="utf-8") as f:
        source = f.read()
    io = {"AplRightArg": right}
    if left is not None:
        io["AplLeftArg"] = left
    try:
        value = interp.run_io_case(source, io)
    except interp.AplError as exc:
        raise click.ClickException(str(exc))
    _echo_json(value.to_python())


# --- tokenizer report -------------------------------------------------------------


@main.command("tokenize-report")
@click.option("--corpus", type=click.Path(exists=True), required=True,
              help="JSONL corpus (apl field) or plain text, one sample per line.")
@click.option("--tokenizer", "tokenizer_path", type=click.Path(exists=True), default=None,
              help="token<TAB>id vocabulary file; identity tokenizer when omitted.")
def tokenize_report(corpus, tokenizer_path):
    samples = []
    with open(corpus, encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                samples.append(obj["apl"] if isinstance(obj, dict) and "apl" in obj else line)
            except json.JSONDecodeError:
                samples.append(line)
    tok = lx.VocabTokenizer.from_file(tokenizer_path) if tokenizer_path else lx.IdentityTokenizer()
    try:
        report = lx.tokenizer_metrics(samples, tok)
    except ValueError as exc:
        raise click.ClickException(str(exc))
    _echo_json(report.to_dict())


# --- rag ------------------------------------------------------------------------


@main.group()
def rag():
    """Retrieval-augmented context: index idiom docs, query by APL snippet."""


@rag.command()
@click.option("--docs", type=click.Path(exists=True), required=True)
@click.option("--store", "store_path", type=click.Path(), required=True)
@click.option("--chunk-size", type=int, default=800)
@click.option("--overlap", type=int, default=100)
def index(docs, store_path, chunk_size, overlap):
    from .backends import HashedNgramEmbedder
    from .retrieval import ChunkStore

    documents = []
    for name in sorted(os.listdir(docs)):
        path = os.path.join(docs, name)
        if os.path.isfile(path):
            with open(path, encoding="utf-8") as f:
                documents.append((name, f.read()))
    store = ChunkStore.build(documents, HashedNgramEmbedder(), chunk_size, overlap)
    store.save(store_path)
    _echo_json({"documents": len(documents), "chunks": len(store.chunks)})


@rag.command()
@click.option("--apl", "apl_path", type=click.Path(exists=True), required=True)
@click.option("-k", type=int, default=5)
@click.option("--store", "store_path", type=click.Path(exists=True), required=True)
def query(apl_path, k, store_path):
    from .backends import HashedNgramEmbedder
    from .retrieval import ChunkStore, RetrievalError

    with open(apl_path, encoding="utf-8") as f:
        snippet = f.read()
    store = ChunkStore.load(store_path, HashedNgramEmbedder())
    try:
        result = store.retrieve(snippet, k)
    except RetrievalError as exc:
        raise click.ClickException(str(exc))
    _echo_json(result.to_json())


# --- translate / report ------------------------------------------------------------


@main.command()
@click.option("--strategy", type=click.Choice(["direct", "nl", "rag"]), default=None)
@click.option("--iterative", is_flag=True, default=False)
@click.option("--max-iter", type=int, default=None)
@click.option("--in", "in_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--include-prompts", is_flag=True, default=False)
@click.pass_context
def translate(ctx, strategy, iterative, max_iter, in_path, out_path, include_prompts):
    """Run the translation pipeline over a JSONL corpus (resumable)."""
    from .pipeline import run_pipeline

    cfg = _load_cfg(ctx)
    if strategy:
        cfg.strategy.name = strategy
    if iterative:
        cfg.strategy.iterative = True
    if max_iter:
        cfg.strategy.max_iterations = max_iter

    result = ds.load(in_path)
    _exit_on_errors(result)

    store = None
    if cfg.strategy.name == "rag":
        from .backends import HashedNgramEmbedder
        from .retrieval import ChunkStore

        if not cfg.retrieval.store:
            raise click.ClickException("rag strategy requires retrieval.store in config")
        store = ChunkStore.load(cfg.retrieval.store, HashedNgramEmbedder())

    try:
        outcomes = run_pipeline(cfg, result.points, out_path, store, include_prompts)
    except ConfigError as exc:
        raise click.ClickException(str(exc))
    _echo_json({"translated": len(outcomes), "results": out_path})


@main.command()
@click.option("--results", "results_path", type=click.Path(exists=True), required=True)
def report(results_path):
    """Pass-rate summary and error-distribution table from a results file."""
    from .pipeline import report_from_results

    payload = report_from_results(results_path)
    click.echo(payload.pop("summary_text"))
    _echo_json(payload)


if __name__ == "__main__":
    main()
