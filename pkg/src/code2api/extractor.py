"""Structured extraction of model responses into GeneratedApi records.

The backend answers in a fixed two-field format ("Specific steps:" then
"Complete code:"); this module captures those fields, parses the code and
writes the source artifact under the canonical file name.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from . import sigparse
from .errors import MissingCompleteCode, NoMethodFound, UnbalancedBraces, Unparseable
from .sigparse import Param

_STEP_RE = re.compile(r"^\s*\**\s*Step\s*(\d+)\s*[-:.]\s*(.*?)\s*\**\s*$", re.IGNORECASE)
_COMPLETE_RE = re.compile(
    r"^\s*\**\s*Complete\s+code\s*\**\s*:?\s*\**\s*(.*)$", re.IGNORECASE
)
_FENCE_RE = re.compile(r"^\s*```[\w+-]*\s*$")

_NONE_ANSWER_RE = re.compile(r"^\s*(//\s*)?none\s*\.?\s*$", re.IGNORECASE)

_JAVA_IDENT_RE = re.compile(r"^[A-Za-z_$][A-Za-z0-9_$]*$")
_PY_IDENT_RE = re.compile(r"^\*{0,2}[A-Za-z_][A-Za-z0-9_]*$")


@dataclass
class ExtractedFields:
    steps_raw: dict[int, str]
    complete_code: str
    degraded: bool = False
    diagnostics: list[str] = field(default_factory=list)


def is_none_answer(text: str) -> bool:
    return bool(_NONE_ANSWER_RE.match(text))


def extract_fields(raw_text: str) -> ExtractedFields:
    """Capture per-step answers and the complete-code block.

    Tolerates leading/trailing prose, markdown bold adornment on markers
    and fenced code. Multiple complete-code markers keep the last block
    and flag a diagnostic. Missing steps are recoverable (degraded flag);
    missing code is not.
    """
    lines = raw_text.split("\n")
    marker_indexes = [
        i for i, line in enumerate(lines) if _COMPLETE_RE.match(line)
    ]
    if not marker_indexes:
        raise MissingCompleteCode("no 'Complete code:' marker in response")
    diagnostics: list[str] = []
    if len(marker_indexes) > 1:
        diagnostics.append(
            f"{len(marker_indexes)} complete-code markers; kept the last"
        )
    marker = marker_indexes[-1]

    steps_raw: dict[int, str] = {}
    for line in lines[:marker]:
        m = _STEP_RE.match(line)
        if m:
            steps_raw[int(m.group(1))] = m.group(2)

    inline = _COMPLETE_RE.match(lines[marker]).group(1).strip()
    code_lines = lines[marker + 1 :]
    if inline and not _FENCE_RE.match(inline):
        code_lines = [inline] + code_lines
    code = _strip_fences("\n".join(code_lines)).strip("\n")
    if not code.strip():
        raise MissingCompleteCode("complete-code block is empty")

    degraded = not steps_raw
    if degraded:
        diagnostics.append("no step answers found; fields come from source only")
    return ExtractedFields(
        steps_raw=steps_raw,
        complete_code=code,
        degraded=degraded,
        diagnostics=diagnostics,
    )


def _strip_fences(block: str) -> str:
    """Remove a surrounding markdown code fence, if present."""
    lines = block.split("\n")
    start = None
    for i, line in enumerate(lines):
        if line.strip():
            if _FENCE_RE.match(line):
                start = i
            break
    if start is None:
        return block
    for j in range(len(lines) - 1, start, -1):
        if _FENCE_RE.match(lines[j]):
            return "\n".join(lines[start + 1 : j])
    return "\n".join(lines[start + 1 :])


def render_response(steps_raw: dict[int, str], complete_code: str) -> str:
    """Inverse of extract_fields; also handy for building mock fixtures."""
    lines = ["Specific steps:"]
    for index in sorted(steps_raw):
        lines.append(f"Step {index}: {steps_raw[index]}")
    lines.append("Complete code:")
    lines.append(complete_code)
    return "\n".join(lines)


@dataclass
class GeneratedApi:
    answer_id: int
    language: str
    imports: list[str]
    wrapper_class: str | None
    modifiers: str
    method_name: str
    parameters: list[Param]
    return_type: str
    return_statements: list[str]
    throws: list[str]
    method_body: str
    complete_source: str
    steps_raw: dict[int, str] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)

    def validate(self) -> None:
        ident_re = _JAVA_IDENT_RE if self.language == "java" else _PY_IDENT_RE
        if not _JAVA_IDENT_RE.match(self.method_name) and not re.match(
            r"^[A-Za-z_]\w*$", self.method_name
        ):
            raise Unparseable(f"bad method name: {self.method_name!r}")
        names = [p.name for p in self.parameters]
        if len(names) != len(set(names)):
            raise Unparseable(f"duplicate parameter names: {names}")
        for name in names:
            if not ident_re.match(name):
                raise Unparseable(f"bad parameter name: {name!r}")
        if self.method_name not in self.complete_source:
            raise Unparseable("complete_source does not contain the method name")
        if self.language == "java" and not self.wrapper_class:
            raise Unparseable("Java API must have a wrapper class")
        if self.language == "python" and self.wrapper_class:
            raise Unparseable("Python API must not have a wrapper class")


_CLASS_RE = re.compile(r"\bclass\s+([A-Za-z_$][\w$]*)")


def parse_generated(
    complete_code: str,
    language: str,
    answer_id: int,
    steps_raw: dict[int, str] | None = None,
) -> GeneratedApi:
    """Build a GeneratedApi from the extracted code block.

    Every field is derived from the source; steps_raw is advisory and only
    produces Disagreement diagnostics when it contradicts the source.
    """
    if not complete_code.strip():
        raise Unparseable("empty source")
    try:
        sig = sigparse.parse_method_signature(complete_code, language)
    except (NoMethodFound, UnbalancedBraces) as exc:
        raise Unparseable(str(exc)) from exc

    wrapper = None
    modifiers = ""
    if language == "java":
        m = _CLASS_RE.search(
            sigparse.mask_comments_and_strings(complete_code, "java")
        )
        wrapper = m.group(1) if m else None
        modifiers = _method_modifiers(complete_code, sig.method_name)
    body = _method_body(complete_code, language, sig.method_name)

    diagnostics: list[str] = []
    steps_raw = dict(steps_raw or {})
    if steps_raw and language == "java":
        claimed_name = steps_raw.get(4, "").strip()
        if claimed_name and claimed_name != sig.method_name:
            diagnostics.append(
                f"Disagreement: step 4 says {claimed_name!r}, "
                f"source says {sig.method_name!r}; source wins"
            )

    api = GeneratedApi(
        answer_id=answer_id,
        language=language,
        imports=sig.imports,
        wrapper_class=wrapper,
        modifiers=modifiers,
        method_name=sig.method_name,
        parameters=sig.params,
        return_type=sig.return_type,
        return_statements=sig.return_statements,
        throws=sig.throws,
        method_body=body,
        complete_source=complete_code,
        steps_raw=steps_raw,
        diagnostics=diagnostics,
    )
    api.validate()
    return api


_MODIFIER_WORDS = (
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "strictfp",
)


def _method_modifiers(source: str, method_name: str) -> str:
    """Leading modifier keywords of the method declaration, source order."""
    masked = sigparse.mask_comments_and_strings(source, "java")
    m = re.search(r"\b" + re.escape(method_name) + r"\s*\(", masked)
    if not m:
        return ""
    j = m.start() - 1
    while j >= 0 and masked[j] not in ";{}":
        j -= 1
    head = re.sub(r"@\w+(\([^)]*\))?", " ", masked[j + 1 : m.start()])
    modifiers = []
    for token in head.split():
        if token in _MODIFIER_WORDS:
            modifiers.append(token)
        else:
            break
    return " ".join(modifiers)


def _method_body(source: str, language: str, method_name: str) -> str:
    masked = sigparse.mask_comments_and_strings(source, language)
    if language == "java":
        m = re.search(re.escape(method_name) + r"\s*\(", masked)
        if not m:
            return ""
        open_paren = masked.find("(", m.start())
        close_paren = sigparse._find_matching(masked, open_paren, "(", ")")
        brace = masked.find("{", close_paren)
        if brace == -1:
            return ""
        close = sigparse._find_matching(masked, brace, "{", "}")
        return source[brace + 1 : close] if close != -1 else source[brace + 1 :]
    m = re.search(r"^(async\s+)?def\s+" + re.escape(method_name), masked, re.MULTILINE)
    if not m:
        return ""
    colon = masked.find(":", m.end())
    newline = masked.find("\n", colon)
    if newline == -1:
        return source[colon + 1 :]
    body_lines = []
    for line in source[newline + 1 :].split("\n"):
        if line.strip() and line[0] not in " \t":
            break
        body_lines.append(line)
    return "\n".join(body_lines)


def artifact_name(answer_id: int, language: str) -> str:
    if language == "java":
        return f"Code2API{answer_id}.java"
    return f"code2api_{answer_id}.py"


def write_artifact(api: GeneratedApi, out_dir: str | os.PathLike) -> Path:
    """Write complete_source under the canonical name; returns the path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / artifact_name(api.answer_id, api.language)
    path.write_text(api.complete_source, encoding="utf-8")
    return path
