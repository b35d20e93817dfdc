"""Benchmark orchestration: caching, isolation, ablation, reports.

A three-item synthetic corpus with hand-written fixture responses gives
metrics that can be checked against pencil-and-paper numbers.
"""

from __future__ import annotations

import json

import pytest

from code2api.backend import MockBackend
from code2api.corpus import SnippetContext, store_corpus
from code2api.equivalence import MetricsSummary
from code2api.evaluate import (
    ItemResult,
    ResponseCache,
    RunConfig,
    RunRecord,
    emit_report,
    format_percent,
    load_ground_truth,
    load_run_record,
    prompt_sha,
    render_markdown,
    run_benchmark,
)
from code2api.extractor import render_response
from code2api.prompts import default_cot, render_cot

GEN_101 = (
    "import java.util.List;\n"
    "\n"
    "public class Chatgpt {\n"
    "    public static int firstOf(int[] arr) {\n"
    "        int head = arr[0];\n"
    "        return head;\n"
    "    }\n"
    "}"
)
# ground truth for 101: same API, parameter renamed
TRUTH_101 = GEN_101.replace("arr", "values")

GEN_102 = (
    "public class Chatgpt {\n"
    "    public static String describe(String text) {\n"
    "        return text;\n"
    "    }\n"
    "}"
)
# ground truth for 102: same parameters, different return type
TRUTH_102 = (
    "public class Chatgpt {\n"
    "    public static int describe(String text) {\n"
    "        int count = text.length();\n"
    "        return count;\n"
    "    }\n"
    "}"
)

GEN_103 = (
    "public class Chatgpt {\n"
    "    public static boolean isEmpty(String s) {\n"
    "        return s.length() == 0;\n"
    "    }\n"
    "}"
)


def make_context(answer_id: int, language: str = "java") -> SnippetContext:
    return SnippetContext(
        question_id=answer_id - 100,
        answer_id=answer_id,
        question_title="How to get the first element of an array in Java?",
        question_body="I have an array and want its first element.",
        answer_body="Use index zero.",
        code_snippet="int head = values[0];",
        language=language,
        answer_score=5,
        view_count=1000,
        tags=[language],
        is_accepted=True,
    )


def write_corpus(path, answer_ids, language="java") -> None:
    store_corpus([make_context(a, language) for a in answer_ids], path)


def write_fixtures(path, mapping) -> None:
    path.write_text(
        json.dumps({str(k): v for k, v in mapping.items()}), encoding="utf-8"
    )


def write_truth(path, mapping) -> None:
    lines = [
        json.dumps({"answer_id": k, "source": v}) for k, v in mapping.items()
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@pytest.fixture()
def workspace(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    fixtures = tmp_path / "fixtures.json"
    truth = tmp_path / "truth.jsonl"
    write_corpus(corpus, [101, 102, 103])
    write_fixtures(
        fixtures,
        {
            101: render_response({4: "firstOf"}, GEN_101),
            102: render_response({4: "describe"}, GEN_102),
            103: render_response({4: "isEmpty"}, GEN_103),
        },
    )
    write_truth(truth, {101: TRUTH_101, 102: TRUTH_102})
    return tmp_path


def make_config(workspace, **overrides) -> RunConfig:
    fields = dict(
        corpus_path=str(workspace / "corpus.jsonl"),
        out_dir=str(workspace / "out"),
        ground_truth_path=str(workspace / "truth.jsonl"),
        backend="mock",
        fixtures_path=str(workspace / "fixtures.json"),
    )
    fields.update(overrides)
    return RunConfig(**fields)


class TestRunBenchmark:
    def test_three_item_run_hand_computed_metrics(self, workspace):
        cfg = make_config(workspace)
        record = run_benchmark(cfg, functionality_oracle=lambda l, r: True)

        assert [i.status for i in record.items] == ["ok", "ok", "ok"]
        assert [i.method_name for i in record.items] == [
            "firstOf",
            "describe",
            "isEmpty",
        ]
        # 101: equivalent modulo rename; 102: return type differs; 103: no truth
        m = record.metrics
        assert m.total == 2
        assert (m.p_count, m.r_count, m.m_count, m.pr_count) == (2, 1, 1, 2)
        assert m.pr_acc == pytest.approx(1.0)
        assert record.items[0].impl_verdict == "equivalent"
        assert record.items[1].impl_verdict == "not_equivalent"
        assert record.items[2].impl_verdict is None
        assert record.compile_rate is None

    def test_artifacts_written_under_canonical_names(self, workspace):
        cfg = make_config(workspace)
        record = run_benchmark(cfg)
        path = workspace / "out" / "apis" / "Code2API101.java"
        assert path.exists()
        assert path.read_text(encoding="utf-8") == GEN_101
        assert record.items[0].artifact_path == str(path)

    def test_second_run_resumes_from_cache(self, workspace):
        cfg = make_config(workspace)
        from code2api.backend import load_fixtures

        first_backend = MockBackend(load_fixtures(cfg.fixtures_path))
        first = run_benchmark(cfg, backend=first_backend)
        assert first_backend.call_count == 3

        second_backend = MockBackend(load_fixtures(cfg.fixtures_path))
        second = run_benchmark(cfg, backend=second_backend)
        assert second_backend.call_count == 0  # everything served from cache
        assert second.metrics == first.metrics
        assert [i.prompt_hash for i in second.items] == [
            i.prompt_hash for i in first.items
        ]

    def test_item_isolation(self, workspace):
        # remove 102's fixture: that item errors, the others still finish
        write_fixtures(
            workspace / "fixtures.json",
            {
                101: render_response({4: "firstOf"}, GEN_101),
                103: render_response({4: "isEmpty"}, GEN_103),
            },
        )
        record = run_benchmark(make_config(workspace))
        by_id = {i.answer_id: i for i in record.items}
        assert by_id[101].status == "ok"
        assert by_id[103].status == "ok"
        assert by_id[102].status == "error"
        assert "NotFound" in by_id[102].error
        assert record.metrics.total == 1  # only 101 still pairs with truth

    def test_truncated_response_is_item_error(self, workspace):
        from code2api.backend import CompletionResponse

        class TruncatingBackend:
            def complete(self, req):
                return CompletionResponse(raw_text="Complete code:\nint x;", truncated=True)

        record = run_benchmark(
            make_config(workspace), backend=TruncatingBackend()
        )
        assert all(i.status == "error" for i in record.items)
        assert all("truncated" in i.error for i in record.items)

    def test_unparseable_response_is_item_error(self, workspace):
        write_fixtures(
            workspace / "fixtures.json",
            {
                101: "no markers at all",
                102: render_response({4: "describe"}, GEN_102),
                103: render_response({4: "isEmpty"}, GEN_103),
            },
        )
        record = run_benchmark(make_config(workspace))
        by_id = {i.answer_id: i for i in record.items}
        assert by_id[101].status == "error"
        assert "MissingCompleteCode" in by_id[101].error
        assert by_id[102].status == "ok"

    def test_cot_ablation_removes_only_the_cot_block(self, workspace):
        full_prompts: dict[int, str] = {}
        bare_prompts: dict[int, str] = {}

        cfg_full = make_config(workspace, out_dir=str(workspace / "out_full"))
        run_benchmark(cfg_full, prompt_hook=lambda a, p: full_prompts.__setitem__(a, p))

        cfg_bare = make_config(
            workspace, out_dir=str(workspace / "out_bare"), use_cot=False
        )
        run_benchmark(cfg_bare, prompt_hook=lambda a, p: bare_prompts.__setitem__(a, p))

        cot_block = render_cot(default_cot("java"))
        for answer_id, full in full_prompts.items():
            assert cot_block in full
            assert full.replace(cot_block + "\n\n", "") == bare_prompts[answer_id]

    def test_compile_check_rate(self, tmp_path):
        corpus = tmp_path / "corpus.jsonl"
        fixtures = tmp_path / "fixtures.json"
        write_corpus(corpus, [201, 202], language="python")
        good = "def first(items):\n    return items[0]\n"
        bad = "def broken(x):\n    return (x\n"
        write_fixtures(fixtures, {201: render_response({}, good)})

        backend = MockBackend(
            {
                201: render_response({}, good),
                # generation, then an unhelpful repair answer
                202: [render_response({}, bad), render_response({}, bad)],
            }
        )
        cfg = RunConfig(
            corpus_path=str(corpus),
            out_dir=str(tmp_path / "out"),
            language="python",
            backend="mock",
            fixtures_path=str(fixtures),
            compile_check=True,
            max_rounds=1,
        )
        record = run_benchmark(cfg, backend=backend)
        by_id = {i.answer_id: i for i in record.items}
        assert by_id[201].compile_success is True
        assert by_id[201].compile_rounds == 0
        assert by_id[202].compile_success is False
        assert by_id[202].compile_rounds == 1
        assert record.compile_rate == pytest.approx(0.5)

    def test_config_validation(self, workspace):
        with pytest.raises(ValueError, match="unknown backend"):
            make_config(workspace, backend="quantum").validate()
        with pytest.raises(ValueError, match="fixtures_path"):
            make_config(workspace, fixtures_path=None).validate()


class TestGroundTruth:
    def test_loader_parses_signatures(self, tmp_path):
        path = tmp_path / "truth.jsonl"
        write_truth(path, {101: TRUTH_101})
        truth = load_ground_truth(path, "java")
        assert set(truth) == {101}
        assert truth[101].method_name == "firstOf"
        assert truth[101].params[0].name == "values"


class TestResponseCache:
    def test_put_get_and_reload(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        cache = ResponseCache(path)
        assert cache.get(1, "hash", "model") is None
        cache.put(1, "hash", "model", "text one")
        assert cache.get(1, "hash", "model") == "text one"

        reloaded = ResponseCache(path)
        assert reloaded.get(1, "hash", "model") == "text one"
        assert reloaded.get(1, "other", "model") is None

    def test_prompt_sha_is_stable(self):
        assert prompt_sha("abc") == prompt_sha("abc")
        assert prompt_sha("abc") != prompt_sha("abd")
        assert len(prompt_sha("abc")) == 64


def summary_for_table() -> MetricsSummary:
    return MetricsSummary(
        total=200,
        p_count=130,
        r_count=132,
        m_count=87,
        pr_count=173,
        p_acc=0.65,
        r_acc=0.66,
        m_acc=0.435,
        pr_acc=0.865,
    )


class TestReports:
    @pytest.mark.parametrize(
        "ratio, expected",
        [
            (None, "n/a"),
            (0.0, "0.0%"),
            (0.65, "65.0%"),
            (0.4349, "43.5%"),
            (1.0, "100.0%"),
        ],
    )
    def test_format_percent(self, ratio, expected):
        assert format_percent(ratio) == expected

    def test_markdown_row_order(self):
        record = RunRecord(
            config=RunConfig(corpus_path="c", out_dir="o"),
            items=[ItemResult(answer_id=1, status="ok")],
            metrics=summary_for_table(),
        )
        text = render_markdown(record)
        assert "| M-Acc | P-Acc | R-Acc | PR-Acc |" in text
        assert "| 43.5% | 65.0% | 66.0% | 86.5% |" in text
        assert "Items: 1 (1 ok, 0 failed)" in text
        assert "Compilation rate" not in text

    def test_markdown_na_guard(self):
        record = RunRecord(config=RunConfig(corpus_path="c", out_dir="o"))
        assert "| n/a | n/a | n/a | n/a |" in render_markdown(record)

    def test_markdown_compile_rate_row(self):
        record = RunRecord(
            config=RunConfig(corpus_path="c", out_dir="o"),
            metrics=summary_for_table(),
            compile_rate=0.5,
        )
        text = render_markdown(record)
        assert "| Compilation rate |" in text
        assert "| 50.0% |" in text

    def test_line_records_round_trip(self, tmp_path):
        record = RunRecord(
            config=RunConfig(corpus_path="c", out_dir="o"),
            items=[
                ItemResult(answer_id=1, status="ok", method_name="f"),
                ItemResult(answer_id=2, status="error", error="NotFound: no"),
            ],
            metrics=summary_for_table(),
            compile_rate=0.25,
        )
        path = emit_report(record, tmp_path / "run.jsonl", format="line_records")
        loaded = load_run_record(path)
        assert loaded.config == record.config
        assert loaded.metrics == record.metrics
        assert loaded.items == record.items
        assert loaded.compile_rate == 0.25

    def test_unknown_format_rejected(self, tmp_path):
        record = RunRecord(config=RunConfig(corpus_path="c", out_dir="o"))
        with pytest.raises(ValueError, match="unknown report format"):
            emit_report(record, tmp_path / "x", format="csv")

    def test_markdown_report_written(self, tmp_path):
        record = RunRecord(
            config=RunConfig(corpus_path="c", out_dir="o"),
            metrics=summary_for_table(),
        )
        path = emit_report(record, tmp_path / "report.md")
        assert "| 43.5% | 65.0% | 66.0% | 86.5% |" in path.read_text(
            encoding="utf-8"
        )
