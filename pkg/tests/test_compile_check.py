"""Compile checking and the bounded repair loop.

Real compiles run through the python toolchain so the whole machinery is
exercised without a JDK; javac-specific behavior (file naming, diagnostic
merging) is covered as pure string work on canned compiler output.
"""

from __future__ import annotations

import glob
import os
import sys
import tempfile

import pytest

from code2api.backend import MockBackend
from code2api.compilecheck import (
    ToolchainConfig,
    _prepare_java_source,
    compile_once,
    default_toolchain,
    load_toolchain_config,
    parse_diagnostics,
    repair_loop,
    repair_prompt,
)
from code2api.errors import CompileTimeout, ToolchainMissing, TransportError
from code2api.extractor import parse_generated, render_response
from code2api.prompts import role_directive

GOOD_PY = "def ok(x):\n    return x + 1\n"
BAD_PY = "def broken(x):\n    return (x\n"  # parses as a def, fails to compile
FIXED_PY = "def broken(x):\n    return x\n"


def scratch_dirs() -> set[str]:
    return set(glob.glob(os.path.join(tempfile.gettempdir(), "code2api_compile_*")))


class TestCompileOnce:
    def test_python_success(self):
        outcome = compile_once(GOOD_PY, "python")
        assert outcome.success is True
        assert outcome.diagnostics == []
        assert outcome.rounds_used == 0
        assert outcome.final_source == GOOD_PY
        assert outcome.toolchain_id == "py_compile"

    def test_python_failure_reports_verbatim_diagnostics(self):
        outcome = compile_once("def broken(:\n    return 1\n", "python")
        assert outcome.success is False
        assert len(outcome.diagnostics) == 1
        diag = outcome.diagnostics[0]
        assert diag.line == 1
        assert diag.message.startswith("SyntaxError:")
        assert diag.message in outcome.raw_output

    def test_empty_source_short_circuits(self):
        outcome = compile_once("   \n", "python")
        assert outcome.success is False
        assert outcome.rounds_used == 0
        assert "empty source" in outcome.raw_output
        assert "empty source" in outcome.diagnostics[0].message

    def test_empty_java_source_needs_no_toolchain(self):
        # runs even on a box without javac
        outcome = compile_once("", "java")
        assert outcome.success is False
        assert outcome.toolchain_id == "javac"

    def test_missing_toolchain(self):
        config = ToolchainConfig(
            toolchain_id="bogus",
            command=["definitely-not-a-compiler-xyz", "{file}"],
            diagnostic_pattern=r"(?P<line>\d+): (?P<message>.+)",
        )
        with pytest.raises(ToolchainMissing, match="definitely-not-a-compiler"):
            compile_once(GOOD_PY, "python", toolchain=config)

    def test_timeout(self):
        config = ToolchainConfig(
            toolchain_id="sleeper",
            command=[sys.executable, "-c", "import time; time.sleep(5)"],
            diagnostic_pattern=r"(?P<line>\d+): (?P<message>.+)",
            timeout=0.2,
        )
        with pytest.raises(CompileTimeout, match="sleeper"):
            compile_once(GOOD_PY, "python", toolchain=config)

    def test_unparsable_output_synthesized_diagnostic(self):
        config = ToolchainConfig(
            toolchain_id="kaboom",
            command=[sys.executable, "-c", "import sys; print('kaboom'); sys.exit(1)"],
            diagnostic_pattern=r"(?P<line>\d+)NEVERMATCHES(?P<message>.+)",
        )
        outcome = compile_once(GOOD_PY, "python", toolchain=config)
        assert outcome.success is False
        assert outcome.diagnostics[0].message == "kaboom"
        assert outcome.diagnostics[0].line is None

    def test_workspace_always_cleaned(self):
        before = scratch_dirs()
        compile_once(GOOD_PY, "python")
        compile_once("def broken(:\n", "python")
        compile_once("", "python")
        assert scratch_dirs() == before

    def test_artifact_file_name_uses_answer_id(self):
        # surfaced through the diagnostic file path in raw output
        outcome = compile_once("def broken(:\n", "python", answer_id=77)
        assert "code2api_77.py" in outcome.raw_output


class TestToolchainConfigFile:
    def test_load_round_trip(self, tmp_path):
        path = tmp_path / "toolchain.json"
        path.write_text(
            '{"toolchain_id": "echo", "command": ["echo", "{file}"], '
            '"diagnostic_pattern": "(?P<line>\\\\d+): (?P<message>.+)", '
            '"timeout": 5.0}',
            encoding="utf-8",
        )
        config = load_toolchain_config(path)
        assert config.toolchain_id == "echo"
        assert config.command == ["echo", "{file}"]
        assert config.timeout == 5.0
        assert config.merge_continuations is False


class TestPrepareJavaSource:
    def test_public_class_names_file(self):
        src = "public class Chatgpt {\n    int x;\n}\n"
        name, out = _prepare_java_source(src, 1)
        assert name == "Chatgpt.java"
        assert out == src

    def test_public_final_class(self):
        name, _out = _prepare_java_source("public final class Foo {}\n", 1)
        assert name == "Foo.java"

    def test_package_private_class(self):
        name, _out = _prepare_java_source("class Bar {\n}\n", 1)
        assert name == "Bar.java"

    def test_interface_without_class_uses_answer_id(self):
        name, out = _prepare_java_source("public interface Shape {\n}\n", 7)
        assert name == "Code2API7.java"
        assert out.startswith("public interface")

    def test_class_word_in_string_ignored(self):
        src = 'public class Real {\n    String s = "class Fake";\n}\n'
        name, _out = _prepare_java_source(src, 1)
        assert name == "Real.java"

    def test_bare_method_gets_class_shell(self):
        src = "public static int twice(int x) {\n    return 2 * x;\n}\n"
        name, out = _prepare_java_source(src, 3)
        assert name == "Code2APISnippet.java"
        assert out.startswith("public class Code2APISnippet {")
        assert "    public static int twice(int x) {" in out
        assert "run()" not in out

    def test_bare_statements_get_method_harness(self):
        src = "int x = 1;\nSystem.out.println(x);\n"
        name, out = _prepare_java_source(src, None)
        assert name == "Code2APISnippet.java"
        assert "public static void run() throws Exception {" in out
        assert "        int x = 1;" in out


JAVAC_OUTPUT = (
    "Code2API123.java:7: error: cannot find symbol\n"
    "        for (int i : ints){\n"
    "                     ^\n"
    "  symbol:   variable ints\n"
    "  location: class Chatgpt\n"
    "1 error\n"
)


class TestParseDiagnostics:
    def test_javac_merges_context_lines(self):
        diags = parse_diagnostics(JAVAC_OUTPUT, default_toolchain("java"))
        assert len(diags) == 1
        d = diags[0]
        assert d.line == 7
        assert d.message.startswith("cannot find symbol")
        assert "symbol:   variable ints" in d.message
        assert "1 error" not in d.message  # summary trimmed

    def test_javac_two_errors_split_cleanly(self):
        raw = (
            "A.java:1: error: ';' expected\n"
            "int x\n"
            "     ^\n"
            "A.java:3: error: cannot find symbol\n"
            "y = 2;\n"
            "^\n"
            "  symbol: variable y\n"
            "2 errors\n"
        )
        diags = parse_diagnostics(raw, default_toolchain("java"))
        assert [d.line for d in diags] == [1, 3]
        assert "cannot find symbol" not in diags[0].message
        assert "symbol: variable y" in diags[1].message

    def test_no_match_returns_empty(self):
        assert parse_diagnostics("ld: weird output", default_toolchain("java")) == []


class TestRepairPrompt:
    def test_contains_all_sections(self):
        outcome = compile_once("def broken(:\n", "python")
        prompt = repair_prompt("def broken(:", outcome.diagnostics, "python")
        assert prompt.startswith(role_directive("python"))
        assert "failed to compile" in prompt
        assert "Code:\ndef broken(:" in prompt
        assert "SyntaxError" in prompt
        assert "Please output the results in the following format:" in prompt
        assert "Specific steps:" in prompt


def make_api(source: str = BAD_PY, answer_id: int = 11):
    return parse_generated(source, "python", answer_id)


class TestRepairLoop:
    def test_clean_source_skips_backend(self):
        backend = MockBackend({})
        outcome = repair_loop(make_api(GOOD_PY), backend)
        assert outcome.success is True
        assert outcome.rounds_used == 0
        assert backend.call_count == 0

    def test_one_round_repair(self):
        backend = MockBackend({11: render_response({}, FIXED_PY)})
        outcome = repair_loop(make_api(), backend)
        assert outcome.success is True
        assert outcome.rounds_used == 1
        # extraction trims the outer newline around the code block
        assert outcome.final_source == FIXED_PY.rstrip("\n")
        assert backend.call_count == 1

    def test_never_fixed_stops_at_max_rounds(self):
        backend = MockBackend({11: render_response({}, BAD_PY)})
        outcome = repair_loop(make_api(), backend, max_rounds=3)
        assert outcome.success is False
        assert outcome.rounds_used == 3
        assert backend.call_count == 3

    def test_unextractable_response_consumes_a_round(self):
        backend = MockBackend(
            {11: ["I cannot help with that.", render_response({}, FIXED_PY)]}
        )
        outcome = repair_loop(make_api(), backend, max_rounds=3)
        assert outcome.success is True
        assert outcome.rounds_used == 2
        assert backend.call_count == 2

    def test_backend_error_carries_partial_outcome(self):
        backend = MockBackend(
            {
                11: [
                    TransportError("down"),
                    TransportError("down"),
                    TransportError("down"),
                ]
            }
        )
        with pytest.raises(TransportError) as excinfo:
            repair_loop(make_api(), backend)
        partial = excinfo.value.partial_outcome
        assert partial.success is False
        assert partial.diagnostics

    def test_max_rounds_validated(self):
        with pytest.raises(ValueError, match="max_rounds"):
            repair_loop(make_api(), MockBackend({}), max_rounds=0)

    def test_repair_uses_latest_source_each_round(self):
        still_bad = "def broken(x):\n    return (x +\n"
        prompts = []

        class SpyBackend(MockBackend):
            def complete(self, req):
                prompts.append(req.prompt_text)
                return super().complete(req)

        backend = SpyBackend(
            {11: [render_response({}, still_bad), render_response({}, FIXED_PY)]}
        )
        outcome = repair_loop(make_api(), backend, max_rounds=3)
        assert outcome.success is True
        assert outcome.rounds_used == 2
        assert "return (x\n" in prompts[0]
        assert still_bad.rstrip("\n") in prompts[1]
