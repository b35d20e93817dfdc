"""Benchmark orchestration: run the pipeline over a corpus, join with
ground truth, compute metrics and emit reports.

Backend responses are cached on disk keyed by (answer_id, prompt hash,
model name) so interrupted runs resume without re-querying.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import compilecheck, equivalence, extractor, prompts
from .backend import (
    DEFAULT_MODEL,
    CompletionRequest,
    LiveBackend,
    MockBackend,
    load_fixtures,
)
from .corpus import SnippetContext, load_corpus
from .errors import Code2ApiError
from .equivalence import MetricsSummary, Verdict
from .sigparse import ApiSignature, parse_method_signature

logger = logging.getLogger(__name__)


@dataclass
class RunConfig:
    corpus_path: str
    out_dir: str
    language: str = "java"
    ground_truth_path: str | None = None
    backend: str = "mock"  # "mock" or "live"
    fixtures_path: str | None = None
    use_cot: bool = True
    use_few_shot: bool = True
    compile_check: bool = False
    max_rounds: int = compilecheck.DEFAULT_MAX_ROUNDS
    model_name: str = DEFAULT_MODEL
    budget: int = prompts.DEFAULT_BUDGET

    def validate(self) -> None:
        if self.backend not in ("mock", "live"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.backend == "mock" and not self.fixtures_path:
            raise ValueError("mock backend requires fixtures_path")


@dataclass
class ItemResult:
    answer_id: int
    status: str  # "ok" or "error"
    error: str | None = None
    method_name: str | None = None
    artifact_path: str | None = None
    prompt_hash: str | None = None
    param_verdict: str | None = None
    return_verdict: bool | None = None
    impl_verdict: str | None = None
    compile_success: bool | None = None
    compile_rounds: int | None = None


@dataclass
class RunRecord:
    config: RunConfig
    items: list[ItemResult] = field(default_factory=list)
    metrics: MetricsSummary | None = None
    compile_rate: float | None = None


class ResponseCache:
    """Append-only JSONL cache of backend responses."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        self._entries: dict[tuple[int, str, str], str] = {}
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if not line.strip():
                        continue
                    payload = json.loads(line)
                    key = (
                        payload["answer_id"],
                        payload["prompt_hash"],
                        payload["model"],
                    )
                    self._entries[key] = payload["raw_text"]

    def get(self, answer_id: int, prompt_hash: str, model: str) -> str | None:
        return self._entries.get((answer_id, prompt_hash, model))

    def put(self, answer_id: int, prompt_hash: str, model: str, raw_text: str) -> None:
        self._entries[(answer_id, prompt_hash, model)] = raw_text
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {
                        "answer_id": answer_id,
                        "prompt_hash": prompt_hash,
                        "model": model,
                        "raw_text": raw_text,
                    },
                    ensure_ascii=False,
                )
            )
            fh.write("\n")


def prompt_sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_ground_truth(path: str | os.PathLike, language: str) -> dict[int, ApiSignature]:
    """Ground truth file: one {answer_id, source} record per line."""
    truth: dict[int, ApiSignature] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            payload = json.loads(line)
            truth[payload["answer_id"]] = parse_method_signature(
                payload["source"], language
            )
    return truth


def _make_backend(cfg: RunConfig):
    if cfg.backend == "mock":
        return MockBackend(load_fixtures(cfg.fixtures_path))
    return LiveBackend()


def run_benchmark(
    cfg: RunConfig,
    backend=None,
    prompt_hook: Callable[[int, str], None] | None = None,
    functionality_oracle: equivalence.FunctionalityOracle | None = None,
    manual_resolutions: equivalence.Resolution | None = None,
) -> RunRecord:
    """Process every corpus item; item failures are recorded, never fatal.

    prompt_hook, when given, receives (answer_id, rendered prompt) for
    every item before the backend call; ablation tests use it to diff
    prompts across configurations. functionality_oracle and
    manual_resolutions feed the implementation-equivalence verdicts.
    """
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    contexts, line_errors = load_corpus(cfg.corpus_path)
    for bad in line_errors:
        logger.warning("corpus line %d skipped: %s", bad.line_number, bad.message)
    if backend is None:
        backend = _make_backend(cfg)
    cache = ResponseCache(out_dir / "cache.jsonl")
    truth = (
        load_ground_truth(cfg.ground_truth_path, cfg.language)
        if cfg.ground_truth_path
        else {}
    )
    record = RunRecord(config=cfg)
    pairs: list[equivalence.EquivalencePair] = []
    compiled = attempted_compiles = 0

    for ctx in contexts:
        item = ItemResult(answer_id=ctx.answer_id, status="ok")
        record.items.append(item)
        try:
            bundle = prompts.render_prompt(
                ctx,
                use_cot=cfg.use_cot,
                use_few_shot=cfg.use_few_shot,
                budget=cfg.budget,
            )
            rendered = bundle.rendered
            if prompt_hook is not None:
                prompt_hook(ctx.answer_id, rendered)
            digest = prompt_sha(rendered)
            item.prompt_hash = digest
            raw_text = cache.get(ctx.answer_id, digest, cfg.model_name)
            if raw_text is None:
                response = backend.complete(
                    CompletionRequest(
                        model_name=cfg.model_name,
                        prompt_text=rendered,
                        answer_id=ctx.answer_id,
                    )
                )
                if response.truncated:
                    raise Code2ApiError("backend reported a truncated completion")
                raw_text = response.raw_text
                cache.put(ctx.answer_id, digest, cfg.model_name, raw_text)
            fields = extractor.extract_fields(raw_text)
            api = extractor.parse_generated(
                fields.complete_code, cfg.language, ctx.answer_id, fields.steps_raw
            )
            item.method_name = api.method_name
            item.artifact_path = str(
                extractor.write_artifact(api, out_dir / "apis")
            )
            if cfg.compile_check:
                attempted_compiles += 1
                outcome = compilecheck.repair_loop(
                    api, backend, max_rounds=cfg.max_rounds
                )
                item.compile_success = outcome.success
                item.compile_rounds = outcome.rounds_used
                compiled += outcome.success
            if ctx.answer_id in truth:
                generated_sig = parse_method_signature(
                    api.complete_source, cfg.language
                )
                pair = equivalence.evaluate_pair(
                    truth[ctx.answer_id],
                    generated_sig,
                    functionality_oracle,
                    answer_id=ctx.answer_id,
                )
                pairs.append(pair)
                item.param_verdict = pair.param_verdict.value
                item.return_verdict = pair.return_verdict
                item.impl_verdict = pair.impl_verdict.value
        except Exception as exc:  # noqa: BLE001 - item isolation is the contract
            item.status = "error"
            item.error = f"{type(exc).__name__}: {exc}"
            logger.warning("item %d failed: %s", ctx.answer_id, item.error)

    if truth and pairs:
        record.metrics = equivalence.aggregate(pairs, manual_resolutions)
    elif truth:
        record.metrics = equivalence.aggregate([])
    if attempted_compiles:
        record.compile_rate = compiled / attempted_compiles
    return record


def format_percent(ratio: float | None) -> str:
    """One-decimal percent, the tables' rendering convention."""
    if ratio is None:
        return "n/a"
    return f"{ratio * 100:.1f}%"


def render_markdown(record: RunRecord) -> str:
    """Metrics table in the canonical column order, plus a compile-rate
    row when a compile check ran."""
    lines = ["# Benchmark report", ""]
    ok = sum(1 for item in record.items if item.status == "ok")
    failed = len(record.items) - ok
    lines.append(f"Items: {len(record.items)} ({ok} ok, {failed} failed)")
    lines.append("")
    metrics = record.metrics
    lines.append("| M-Acc | P-Acc | R-Acc | PR-Acc |")
    lines.append("| --- | --- | --- | --- |")
    if metrics is None or metrics.total == 0:
        lines.append("| n/a | n/a | n/a | n/a |")
    else:
        lines.append(
            "| "
            + " | ".join(
                format_percent(v)
                for v in (metrics.m_acc, metrics.p_acc, metrics.r_acc, metrics.pr_acc)
            )
            + " |"
        )
    lines.append("")
    if record.compile_rate is not None:
        lines.append("| Compilation rate |")
        lines.append("| --- |")
        lines.append(f"| {format_percent(record.compile_rate)} |")
        lines.append("")
    return "\n".join(lines)


def emit_report(
    record: RunRecord,
    path: str | os.PathLike,
    format: str = "markdown_table",
) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    if format == "markdown_table":
        target.write_text(render_markdown(record), encoding="utf-8")
    elif format == "line_records":
        with open(target, "w", encoding="utf-8") as fh:
            header = {
                "kind": "run",
                "config": dataclasses.asdict(record.config),
                "metrics": (
                    dataclasses.asdict(record.metrics) if record.metrics else None
                ),
                "compile_rate": record.compile_rate,
            }
            fh.write(json.dumps(header, ensure_ascii=False) + "\n")
            for item in record.items:
                payload = {"kind": "item", **dataclasses.asdict(item)}
                fh.write(json.dumps(payload, ensure_ascii=False) + "\n")
    else:
        raise ValueError(f"unknown report format {format!r}")
    return target


def load_run_record(path: str | os.PathLike) -> RunRecord:
    """Inverse of emit_report(format="line_records")."""
    record: RunRecord | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            payload = json.loads(line)
            kind = payload.pop("kind")
            if kind == "run":
                metrics = payload["metrics"]
                record = RunRecord(
                    config=RunConfig(**payload["config"]),
                    metrics=MetricsSummary(**metrics) if metrics else None,
                    compile_rate=payload["compile_rate"],
                )
            elif kind == "item" and record is not None:
                record.items.append(ItemResult(**payload))
    if record is None:
        raise ValueError("no run header found")
    return record
