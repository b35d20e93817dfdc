"""Command-line entry points.

One subcommand per pipeline stage: ingest a posts dump, render a prompt,
compile-check a source file, run the benchmark, serve the HTTP facade.
"""

from __future__ import annotations

import sys
from pathlib import Path
from types import SimpleNamespace

import click

from . import __version__, prompts
from .backend import LiveBackend, MockBackend, load_fixtures
from .compilecheck import load_toolchain_config, repair_loop
from .corpus import DumpStats, FilterCriteria, build_corpus, load_corpus, store_corpus
from .equivalence import load_manual_resolutions
from .errors import BackendError, Code2ApiError
from .evaluate import RunConfig, emit_report, render_markdown, run_benchmark


@click.group()
@click.version_option(__version__)
def main():
    """Turn Stack Overflow code snippets into reusable APIs."""


@main.command()
@click.option("--dump", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--lang", type=click.Choice(["java", "python"]), default="java",
              show_default=True)
@click.option("--min-score", default=2, show_default=True,
              help="Minimum accepted-answer score.")
@click.option("--top", default=20000, show_default=True,
              help="Keep only the top-N questions by view count.")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def ingest(dump, lang, min_score, top, out):
    """Build a snippet corpus from a posts dump."""
    criteria = FilterCriteria(
        language_tag=lang, min_answer_score=min_score, max_view_rank=top
    )
    stats = DumpStats()
    try:
        contexts = build_corpus(dump, criteria, lang, stats=stats)
    except Code2ApiError as exc:
        raise click.ClickException(str(exc)) from exc
    written = store_corpus(contexts, out)
    click.echo(
        f"rows seen={stats.rows_seen} yielded={stats.rows_yielded} "
        f"skipped={stats.rows_skipped}; wrote {written} contexts to {out}"
    )


@main.command()
@click.option("--context", "context_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Corpus-format file; the first record is used.")
@click.option("--ablate-cot", is_flag=True, help="Drop the step-by-step plan.")
@click.option("--ablate-fewshot", is_flag=True, help="Drop the examples block.")
@click.option("--print", "print_prompt", is_flag=True,
              help="Print the rendered prompt to stdout.")
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Also write the prompt to this file.")
def prompt(context_path, ablate_cot, ablate_fewshot, print_prompt, out):
    """Render the full prompt for one snippet context."""
    contexts, errors = load_corpus(context_path)
    for err in errors:
        click.echo(f"line {err.line_number}: {err.message}", err=True)
    if not contexts:
        raise click.ClickException("no usable context records in the file")
    try:
        bundle = prompts.render_prompt(
            contexts[0], use_cot=not ablate_cot, use_few_shot=not ablate_fewshot
        )
    except Code2ApiError as exc:
        raise click.ClickException(str(exc)) from exc
    if out:
        Path(out).write_text(bundle.rendered, encoding="utf-8")
    if print_prompt or not out:
        click.echo(bundle.rendered)
    click.echo(f"[token estimate: {bundle.token_estimate}]", err=True)


@main.command("compile-check")
@click.option("--file", "file_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--lang", type=click.Choice(["java", "python"]), default="java",
              show_default=True)
@click.option("--max-rounds", default=3, show_default=True)
@click.option("--backend", "backend_kind", type=click.Choice(["mock", "live"]),
              default="mock", show_default=True)
@click.option("--fixtures", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Fixture map for the mock backend.")
@click.option("--toolchain", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Toolchain config file.")
def compile_check(file_path, lang, max_rounds, backend_kind, fixtures, toolchain):
    """Compile a source file, repairing via the backend on failure."""
    source = Path(file_path).read_text(encoding="utf-8")
    if backend_kind == "mock":
        backend = MockBackend(load_fixtures(fixtures) if fixtures else {})
    else:
        backend = LiveBackend()
    config = load_toolchain_config(toolchain) if toolchain else None
    # repair_loop only needs the source, language and id off the api object
    api = SimpleNamespace(complete_source=source, language=lang, answer_id=0)
    try:
        outcome = repair_loop(api, backend, max_rounds=max_rounds, toolchain=config)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from exc
    except BackendError as exc:
        outcome = getattr(exc, "partial_outcome", None)
        if outcome is None:
            raise click.ClickException(str(exc)) from exc
        click.echo(f"repair stopped: {exc}", err=True)
    except Code2ApiError as exc:
        raise click.ClickException(str(exc)) from exc
    status = "OK" if outcome.success else "FAILED"
    click.echo(
        f"{status} after {outcome.rounds_used} repair round(s) "
        f"[{outcome.toolchain_id}]"
    )
    for diag in outcome.diagnostics:
        where = f"line {diag.line}: " if diag.line else ""
        click.echo(f"  {where}{diag.message}")
    sys.exit(0 if outcome.success else 1)


@main.command("eval")
@click.option("--corpus", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--truth", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Ground-truth sources for equivalence metrics.")
@click.option("--backend", type=click.Choice(["mock", "live"]), default="mock",
              show_default=True)
@click.option("--fixtures", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--lang", type=click.Choice(["java", "python"]), default="java",
              show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False),
              default="code2api_out", show_default=True)
@click.option("--ablate-cot", is_flag=True)
@click.option("--ablate-fewshot", is_flag=True)
@click.option("--compile-check", "do_compile", is_flag=True)
@click.option("--max-rounds", default=3, show_default=True)
@click.option("--resolutions", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Manual adjudications for NeedsManual verdicts.")
@click.option("--report", type=click.Path(dir_okay=False), default=None,
              help="Write a markdown report here.")
def eval_command(corpus, truth, backend, fixtures, lang, out_dir, ablate_cot,
                 ablate_fewshot, do_compile, max_rounds, resolutions, report):
    """Run the benchmark over a corpus and summarize the metrics."""
    cfg = RunConfig(
        corpus_path=corpus,
        out_dir=out_dir,
        language=lang,
        ground_truth_path=truth,
        backend=backend,
        fixtures_path=fixtures,
        use_cot=not ablate_cot,
        use_few_shot=not ablate_fewshot,
        compile_check=do_compile,
        max_rounds=max_rounds,
    )
    try:
        cfg.validate()
        resolved = load_manual_resolutions(resolutions) if resolutions else None
        record = run_benchmark(cfg, manual_resolutions=resolved)
    except (ValueError, Code2ApiError) as exc:
        raise click.ClickException(str(exc)) from exc
    emit_report(record, Path(out_dir) / "run.jsonl", format="line_records")
    if report:
        emit_report(record, report, format="markdown_table")
        click.echo(f"report written to {report}", err=True)
    click.echo(render_markdown(record))


@main.command()
@click.option("--port", default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port, host):
    """Start the HTTP facade."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
