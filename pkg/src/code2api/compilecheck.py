"""Compiler-backed validation of generated APIs and the bounded
error-feedback repair loop.

Toolchains are data, not code: a command template plus a diagnostic
regex, so new languages or compilers only need configuration.
"""

from __future__ import annotations

import json
import os
import re
import shutil
import subprocess
import sys
import tempfile
from dataclasses import dataclass

from .backend import DEFAULT_MODEL, CompletionRequest
from .errors import (
    BackendError,
    CompileTimeout,
    MissingCompleteCode,
    ToolchainMissing,
    WorkspaceError,
)
from .extractor import GeneratedApi, extract_fields
from .prompts import default_cot, render_format_constraints, role_directive

DEFAULT_MAX_ROUNDS = 3


@dataclass
class Diagnostic:
    line: int | None
    column: int | None
    message: str


@dataclass
class CompileOutcome:
    success: bool
    diagnostics: list[Diagnostic]
    rounds_used: int
    final_source: str
    toolchain_id: str
    raw_output: str = ""


@dataclass
class ToolchainConfig:
    toolchain_id: str
    command: list[str]  # argv template; {file} and {workdir} are substituted
    diagnostic_pattern: str  # named groups: line, col (optional), message
    timeout: float = 30.0
    # javac prints indented context lines after each error line
    merge_continuations: bool = False


_JAVA_PATTERN = (
    r"(?m)^(?P<file>[^\s:][^:\n]*\.java):(?P<line>\d+):"
    r"(?:\s*(?:error|warning):)?\s(?P<message>.+)$"
)
_PYTHON_PATTERN = (
    r'(?ms)^\s*File "(?P<file>[^"]+)", line (?P<line>\d+)'
    r".*?^(?P<message>\w+(?:Error|Warning):[^\n]*)$"
)


def default_toolchain(language: str) -> ToolchainConfig:
    if language == "java":
        return ToolchainConfig(
            toolchain_id="javac",
            command=["javac", "-d", "{workdir}", "{file}"],
            diagnostic_pattern=_JAVA_PATTERN,
            merge_continuations=True,
        )
    return ToolchainConfig(
        toolchain_id="py_compile",
        command=[sys.executable, "-m", "py_compile", "{file}"],
        diagnostic_pattern=_PYTHON_PATTERN,
    )


def load_toolchain_config(path: str | os.PathLike) -> ToolchainConfig:
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    return ToolchainConfig(**payload)


_SUMMARY_LINE_RE = re.compile(r"^\d+\s+(?:error|warning)s?\s*$")


def parse_diagnostics(raw_output: str, config: ToolchainConfig) -> list[Diagnostic]:
    """Structured diagnostics from raw compiler output.

    Every message is a verbatim slice of the raw output; with
    merge_continuations, the context lines up to the next diagnostic are
    kept in the message (javac's symbol/location lines).
    """
    pattern = re.compile(config.diagnostic_pattern)
    matches = list(pattern.finditer(raw_output))
    diagnostics = []
    for i, m in enumerate(matches):
        groups = m.groupdict()
        line = int(groups["line"]) if groups.get("line") else None
        column = int(groups["col"]) if groups.get("col") else None
        message = groups.get("message") or m.group(0)
        if config.merge_continuations:
            end = matches[i + 1].start() if i + 1 < len(matches) else len(raw_output)
            tail = raw_output[m.end() : end]
            tail_lines = tail.split("\n")
            while tail_lines and (
                not tail_lines[-1].strip()
                or _SUMMARY_LINE_RE.match(tail_lines[-1].strip())
            ):
                tail_lines.pop()
            if tail_lines:
                message = message + "\n".join(tail_lines)
        diagnostics.append(Diagnostic(line=line, column=column, message=message))
    return diagnostics


_TYPE_DECL_RE = re.compile(r"\b(class|interface|enum|record)\s+[A-Za-z_$]")
_PUBLIC_CLASS_RE = re.compile(r"\bpublic\s+(?:final\s+|abstract\s+)?class\s+([A-Za-z_$][\w$]*)")
_ANY_CLASS_RE = re.compile(r"\bclass\s+([A-Za-z_$][\w$]*)")
_METHOD_DECL_RE = re.compile(
    r"^\s*(?:(?:public|private|protected|static|final|synchronized)\s+)*"
    r"[\w<>\[\],.\s?]+?\s[\w$]+\s*\([^)]*\)\s*(?:throws\s[\w,.\s]+)?\s*\{",
)

_WRAP_CLASS = "Code2APISnippet"


def _prepare_java_source(source: str, answer_id: int | None) -> tuple[str, str]:
    """Return (file name, possibly wrapped source) for the javac rule that
    a public class must live in a file of the same name.

    Bare snippets (no type declaration) are wrapped in a scratch harness
    so the compiler surfaces missing-symbol errors instead of refusing the
    file outright. A top-level method declaration gets only a class shell;
    plain statements also get a method shell.
    """
    from . import sigparse

    masked = sigparse.mask_comments_and_strings(source, "java")
    if _TYPE_DECL_RE.search(masked):
        m = _PUBLIC_CLASS_RE.search(masked) or _ANY_CLASS_RE.search(masked)
        name = m.group(1) if m else f"Code2API{answer_id or 'Snippet'}"
        return f"{name}.java", source
    indented = "\n".join(
        ("        " + line) if line.strip() else line for line in source.split("\n")
    )
    if _METHOD_DECL_RE.match(masked):
        body = "\n".join(
            ("    " + line) if line.strip() else line for line in source.split("\n")
        )
        wrapped = f"public class {_WRAP_CLASS} {{\n{body}\n}}\n"
    else:
        wrapped = (
            f"public class {_WRAP_CLASS} {{\n"
            f"    public static void run() throws Exception {{\n"
            f"{indented}\n"
            f"    }}\n"
            f"}}\n"
        )
    return f"{_WRAP_CLASS}.java", wrapped


def compile_once(
    source: str,
    language: str,
    toolchain: ToolchainConfig | None = None,
    answer_id: int | None = None,
) -> CompileOutcome:
    """Write the source to a scratch workspace, run the toolchain, parse
    diagnostics. The scratch directory is unique and always removed.
    """
    config = toolchain or default_toolchain(language)
    if not source.strip():
        note = "empty source: nothing to compile"
        return CompileOutcome(
            success=False,
            diagnostics=[Diagnostic(line=None, column=None, message=note)],
            rounds_used=0,
            final_source=source,
            toolchain_id=config.toolchain_id,
            raw_output=note,
        )
    executable = config.command[0]
    if shutil.which(executable) is None:
        raise ToolchainMissing(f"{executable} not found on PATH")

    if language == "java":
        file_name, disk_source = _prepare_java_source(source, answer_id)
    else:
        file_name = f"code2api_{answer_id}.py" if answer_id else "snippet.py"
        disk_source = source

    try:
        workdir = tempfile.mkdtemp(prefix="code2api_compile_")
    except OSError as exc:
        raise WorkspaceError(f"cannot create scratch dir: {exc}") from exc
    try:
        target = os.path.join(workdir, file_name)
        try:
            with open(target, "w", encoding="utf-8") as fh:
                fh.write(disk_source)
        except OSError as exc:
            raise WorkspaceError(f"cannot write scratch file: {exc}") from exc
        argv = [
            arg.replace("{file}", target).replace("{workdir}", workdir)
            for arg in config.command
        ]
        try:
            proc = subprocess.run(
                argv,
                cwd=workdir,
                capture_output=True,
                text=True,
                timeout=config.timeout,
            )
        except subprocess.TimeoutExpired as exc:
            raise CompileTimeout(
                f"{config.toolchain_id} exceeded {config.timeout}s"
            ) from exc
        raw_output = (proc.stdout or "") + (proc.stderr or "")
        if proc.returncode == 0:
            return CompileOutcome(
                success=True,
                diagnostics=[],
                rounds_used=0,
                final_source=source,
                toolchain_id=config.toolchain_id,
                raw_output=raw_output,
            )
        diagnostics = parse_diagnostics(raw_output, config)
        if not diagnostics:
            diagnostics = [
                Diagnostic(line=None, column=None, message=raw_output.strip())
            ]
        return CompileOutcome(
            success=False,
            diagnostics=diagnostics,
            rounds_used=0,
            final_source=source,
            toolchain_id=config.toolchain_id,
            raw_output=raw_output,
        )
    finally:
        shutil.rmtree(workdir, ignore_errors=True)


def repair_prompt(source: str, diagnostics: list[Diagnostic], language: str) -> str:
    """Follow-up prompt: role, failure note, source, diagnostics, format."""
    plan = default_cot(language)
    diag_text = "\n".join(d.message for d in diagnostics)
    return (
        f"{role_directive(language)}\n\n"
        "The following code failed to compile. Fix it and output the "
        "corrected version.\n\n"
        f"Code:\n{source}\n\n"
        f"Compilation errors:\n{diag_text}\n\n"
        f"{render_format_constraints(len(plan.steps))}"
    )


def repair_loop(
    api: GeneratedApi,
    backend,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    toolchain: ToolchainConfig | None = None,
    model_name: str = DEFAULT_MODEL,
) -> CompileOutcome:
    """Compile; on failure, feed the diagnostics back to the backend and
    retry with the regenerated source, at most max_rounds times.

    Backend failures carry the last compile outcome as partial_outcome.
    """
    if max_rounds < 1:
        raise ValueError("max_rounds must be >= 1")
    outcome = compile_once(
        api.complete_source, api.language, toolchain, answer_id=api.answer_id
    )
    if outcome.success:
        return outcome
    source = api.complete_source
    for round_number in range(1, max_rounds + 1):
        prompt = repair_prompt(source, outcome.diagnostics, api.language)
        request = CompletionRequest(
            model_name=model_name,
            prompt_text=prompt,
            answer_id=api.answer_id,
        )
        try:
            response = backend.complete(request)
        except BackendError as exc:
            exc.partial_outcome = outcome
            raise
        try:
            fields = extract_fields(response.raw_text)
            source = fields.complete_code
        except MissingCompleteCode:
            outcome.rounds_used = round_number
            continue
        outcome = compile_once(source, api.language, toolchain, answer_id=api.answer_id)
        outcome.rounds_used = round_number
        if outcome.success:
            break
    return outcome
