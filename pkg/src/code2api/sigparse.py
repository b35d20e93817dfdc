"""Lightweight method/function signature extraction for Java and Python.

Hand-written token scanning, not a full grammar: the input is generated
code, so the parser favors robustness over completeness. Comments and
string contents are masked before scanning so braces inside them cannot
confuse depth tracking.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import NoMethodFound, UnbalancedBraces, UnsupportedLanguage

UNANNOTATED = "unannotated"

_JAVA_MODIFIERS = {
    "public",
    "protected",
    "private",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "strictfp",
    "default",
}

_JAVA_NON_METHOD_KEYWORDS = {
    "if",
    "for",
    "while",
    "switch",
    "catch",
    "new",
    "return",
    "do",
    "try",
    "else",
    "throw",
    "super",
    "this",
    "assert",
}

_IDENT_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_PY_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Param:
    type_text: str
    name: str


@dataclass
class ApiSignature:
    language: str
    method_name: str
    params: list[Param]
    return_type: str
    return_statements: list[str] = field(default_factory=list)
    imports: list[str] = field(default_factory=list)
    throws: list[str] = field(default_factory=list)


# --- masking -----------------------------------------------------------------


def mask_comments_and_strings(source: str, language: str) -> str:
    """Replace comment text and string contents with spaces.

    Length and line structure are preserved so offsets stay valid. Quote
    characters are kept so strings remain visible as tokens.
    """
    if language == "java":
        return _mask_java(source)
    if language == "python":
        return _mask_python(source)
    raise UnsupportedLanguage(language)


def _blank(text: str) -> str:
    return "".join(ch if ch == "\n" else " " for ch in text)


def _mask_java(source: str) -> str:
    out = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        nxt = source[i + 1] if i + 1 < n else ""
        if ch == "/" and nxt == "/":
            end = source.find("\n", i)
            end = n if end == -1 else end
            out.append(_blank(source[i:end]))
            i = end
        elif ch == "/" and nxt == "*":
            end = source.find("*/", i + 2)
            end = n if end == -1 else end + 2
            out.append(_blank(source[i:end]))
            i = end
        elif ch in "\"'":
            quote = ch
            j = i + 1
            while j < n and source[j] != quote:
                if source[j] == "\\":
                    j += 1
                j += 1
            if j < n:
                out.append(quote + _blank(source[i + 1 : j]) + quote)
                i = j + 1
            else:  # unterminated: blank to EOF, no fake closing quote
                out.append(quote + _blank(source[i + 1 :]))
                i = n
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def _mask_python(source: str) -> str:
    out = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "#":
            end = source.find("\n", i)
            end = n if end == -1 else end
            out.append(_blank(source[i:end]))
            i = end
        elif ch in "\"'":
            triple = source[i : i + 3]
            if triple in ('"""', "'''"):
                end = source.find(triple, i + 3)
                if end == -1:  # unterminated: blank to EOF
                    out.append(triple + _blank(source[i + 3 :]))
                    i = n
                else:
                    out.append(triple + _blank(source[i + 3 : end]) + triple)
                    i = end + 3
            else:
                quote = ch
                j = i + 1
                while j < n and source[j] not in (quote, "\n"):
                    if source[j] == "\\":
                        j += 1
                    j += 1
                if j < n and source[j] == quote:
                    out.append(quote + _blank(source[i + 1 : j]) + quote)
                    i = j + 1
                else:
                    # unterminated: leave the newline (or EOF) to the main loop
                    j = min(j, n)
                    out.append(quote + _blank(source[i + 1 : j]))
                    i = j
        else:
            out.append(ch)
            i += 1
    return "".join(out)


# --- type normalization ------------------------------------------------------

_PACKAGE_PREFIX_RE = re.compile(r"\b(?:[a-z_][A-Za-z0-9_$]*\.)+(?=[A-Z])")
_PUNCT_SPACE_RE = re.compile(r"\s*([<>,\[\].])\s*")


def normalize_type(type_text: str, language: str = "java") -> str:
    """Canonical form of a type: collapsed whitespace, no package prefixes,
    no spaces around generics/array/varargs punctuation.

    Idempotent: normalizing a normalized type is a no-op.
    """
    text = " ".join(type_text.split())
    # collapse before stripping: a space hiding inside a dotted name would
    # otherwise expose a fresh prefix on the second pass
    text = _PUNCT_SPACE_RE.sub(r"\1", text)
    text = _PACKAGE_PREFIX_RE.sub("", text)
    return text.strip()


def normalize_statement(stmt: str) -> str:
    """Whitespace-collapsed statement text without a trailing semicolon."""
    text = " ".join(stmt.split())
    return text.rstrip(";").rstrip()


# --- shared scanning helpers ---------------------------------------------------


def _find_matching(source: str, open_idx: int, open_ch: str, close_ch: str) -> int:
    """Index of the bracket closing `source[open_idx]`, or -1."""
    depth = 0
    for i in range(open_idx, len(source)):
        if source[i] == open_ch:
            depth += 1
        elif source[i] == close_ch:
            depth -= 1
            if depth == 0:
                return i
    return -1


def _split_top_level(text: str, sep: str = ",") -> list[str]:
    """Split on `sep` at zero bracket depth."""
    parts: list[str] = []
    depth = 0
    current: list[str] = []
    for ch in text:
        if ch in "([{<":
            depth += 1
        elif ch in ")]}>":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    if current or parts:
        parts.append("".join(current))
    return [p for p in (p.strip() for p in parts) if p]


# --- imports -------------------------------------------------------------------

_JAVA_IMPORT_RE = re.compile(
    r"^\s*import\s+(?:static\s+)?([\w.$]+(?:\.\*)?)\s*;", re.MULTILINE
)
_PY_IMPORT_RE = re.compile(r"^\s*import\s+(.+)$", re.MULTILINE)
_PY_FROM_RE = re.compile(r"^\s*from\s+([\w.]+)\s+import\s+(.+)$", re.MULTILINE)


def extract_imports(source: str, language: str) -> list[str]:
    """Sorted, deduplicated import entries.

    Java entries are dotted type paths. Python entries are module names for
    plain imports and dotted `module.name` for from-imports; aliases are
    dropped.
    """
    masked = mask_comments_and_strings(source, language)
    found: set[str] = set()
    if language == "java":
        for m in _JAVA_IMPORT_RE.finditer(masked):
            found.add(m.group(1))
    elif language == "python":
        for m in _PY_IMPORT_RE.finditer(masked):
            for piece in m.group(1).split(","):
                name = piece.strip().split(" as ")[0].strip()
                if name and not name.startswith("("):
                    found.add(name)
        for m in _PY_FROM_RE.finditer(masked):
            module = m.group(1)
            names = m.group(2).strip().strip("()")
            for piece in names.split(","):
                name = piece.strip().split(" as ")[0].strip()
                if name:
                    found.add(f"{module}.{name}")
    else:
        raise UnsupportedLanguage(language)
    return sorted(found)


# --- return statements ---------------------------------------------------------

_RETURN_RE = re.compile(r"\breturn\b")


def extract_return_statements(body: str, language: str) -> list[str]:
    """Normalized return statements in textual order.

    A bare `return` is recorded as just the keyword. The body must already
    be the method/function body (masking is applied here).
    """
    masked = mask_comments_and_strings(body, language)
    statements: list[str] = []
    if language == "java":
        for m in _RETURN_RE.finditer(masked):
            start = m.end()
            depth = 0
            for i in range(start, len(masked)):
                ch = masked[i]
                if ch in "([{":
                    depth += 1
                elif ch in ")]}":
                    depth -= 1
                elif ch == ";" and depth == 0:
                    expr = body[start:i]
                    statements.append(normalize_statement("return " + expr.strip()))
                    break
    elif language == "python":
        for m in _RETURN_RE.finditer(masked):
            start = m.end()
            depth = 0
            i = start
            while i < len(masked):
                ch = masked[i]
                if ch in "([{":
                    depth += 1
                elif ch in ")]}":
                    depth -= 1
                elif ch == "\\" and i + 1 < len(masked) and masked[i + 1] == "\n":
                    i += 2
                    continue
                elif ch == "\n" and depth == 0:
                    break
                i += 1
            expr = body[start:i]
            statements.append(normalize_statement("return " + expr.strip()))
    else:
        raise UnsupportedLanguage(language)
    return statements


# --- Java parsing ----------------------------------------------------------------


def _java_wrapper_class(masked: str) -> tuple[str | None, int, int]:
    """Name and body span (open brace, close brace) of the first class."""
    m = re.search(r"\bclass\s+([A-Za-z_$][\w$]*)", masked)
    if not m:
        return None, 0, len(masked)
    brace = masked.find("{", m.end())
    if brace == -1:
        return m.group(1), 0, len(masked)
    close = _find_matching(masked, brace, "{", "}")
    if close == -1:
        raise UnbalancedBraces("class body never closes")
    return m.group(1), brace + 1, close


def _parse_java_params(raw: str) -> list[Param]:
    params: list[Param] = []
    for piece in _split_top_level(raw):
        piece = re.sub(r"@\w+(\([^)]*\))?\s*", "", piece)  # drop annotations
        piece = re.sub(r"\bfinal\b", "", piece).strip()
        ident_positions = list(_IDENT_RE.finditer(piece))
        if not ident_positions:
            continue
        last = ident_positions[-1]
        name = last.group(0)
        type_part = piece[: last.start()].strip()
        trailing = piece[last.end() :].strip()
        if trailing.startswith("["):  # C-style `int arr[]`
            type_part += trailing
        if not type_part:
            type_part = UNANNOTATED
        params.append(Param(normalize_type(type_part), name))
    return params


def _find_java_method(masked: str, body_start: int, body_end: int) -> list[dict]:
    """Candidate method declarations at class-body depth, in order."""
    results = []
    i = body_start
    depth = 0
    while i < body_end:
        ch = masked[i]
        if ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
        elif ch == "(" and depth == 0:
            open_paren = i
            before = masked[body_start:open_paren]
            m = re.search(r"([A-Za-z_$][\w$]*)\s*$", before)
            if m:
                name = m.group(1)
                if name not in _JAVA_NON_METHOD_KEYWORDS:
                    close_paren = _find_matching(masked, open_paren, "(", ")")
                    if close_paren == -1:
                        break
                    results.append(
                        {
                            "name": name,
                            "name_start": body_start + m.start(1),
                            "open_paren": open_paren,
                            "close_paren": close_paren,
                        }
                    )
                    i = close_paren
        i += 1
    return results


def _decl_details(source: str, masked: str, decl: dict, body_end: int) -> dict | None:
    """Fill in modifiers, return type, throws and body span for a candidate."""
    name_start = decl["name_start"]
    # walk back over the declaration head: stop at ; { } or start of class body
    j = name_start - 1
    while j >= 0 and masked[j] not in ";{}":
        j -= 1
    head_start = j + 1
    # masked text: comments in the head are already blanked
    head = masked[head_start:name_start]
    head = re.sub(r"@\w+(\([^)]*\))?", " ", head)
    tokens = head.split()
    modifiers = []
    while tokens and tokens[0] in _JAVA_MODIFIERS:
        modifiers.append(tokens.pop(0))
    # skip generic method type parameters like <T>
    rest = " ".join(tokens)
    if rest.startswith("<"):
        close = _find_matching(rest, 0, "<", ">")
        if close != -1:
            rest = rest[close + 1 :].strip()
    return_type = rest.strip()
    if not return_type:
        return None  # constructor or junk
    after_paren = masked.find("{", decl["close_paren"])
    semi = masked.find(";", decl["close_paren"])
    if after_paren == -1 or (semi != -1 and semi < after_paren):
        return None  # abstract/interface declaration, no body
    body_close = _find_matching(masked, after_paren, "{", "}")
    if body_close == -1:
        raise UnbalancedBraces(f"method {decl['name']} body never closes")
    throws_zone = masked[decl["close_paren"] + 1 : after_paren]
    throws: list[str] = []
    tm = re.search(r"\bthrows\b(.*)", throws_zone, re.DOTALL)
    if tm:
        throws = sorted(
            normalize_type(t) for t in _split_top_level(tm.group(1)) if t.strip()
        )
    return {
        "name": decl["name"],
        "modifiers": modifiers,
        "return_type": return_type,
        "params_raw": masked[decl["open_paren"] + 1 : decl["close_paren"]],
        "body": source[after_paren + 1 : body_close],
        "throws": throws,
    }


def parse_java_signature(source: str) -> ApiSignature:
    """Parse the first public method of the wrapper class.

    Falls back to the first method with a body when none is public.
    Constructors are skipped.
    """
    masked = mask_comments_and_strings(source, "java")
    class_name, body_start, body_end = _java_wrapper_class(masked)
    candidates = _find_java_method(masked, body_start, body_end)
    details = []
    for decl in candidates:
        if class_name is not None and decl["name"] == class_name:
            continue  # constructor
        info = _decl_details(source, masked, decl, body_end)
        if info is not None:
            details.append(info)
    if not details:
        raise NoMethodFound("no method declaration found")
    chosen = next(
        (d for d in details if "public" in d["modifiers"]), details[0]
    )
    return ApiSignature(
        language="java",
        method_name=chosen["name"],
        params=_parse_java_params(chosen["params_raw"]),
        return_type=normalize_type(chosen["return_type"]),
        return_statements=extract_return_statements(chosen["body"], "java"),
        imports=extract_imports(source, "java"),
        throws=chosen["throws"],
    )


# --- Python parsing ---------------------------------------------------------------

_PY_DEF_RE = re.compile(r"^(async\s+)?def\s+([A-Za-z_]\w*)\s*\(", re.MULTILINE)
_PY_RAISE_RE = re.compile(r"\braise\s+([A-Za-z_][\w.]*)")


def _parse_python_params(raw: str) -> list[Param]:
    params: list[Param] = []
    for piece in _split_top_level(raw):
        if piece in ("*", "/"):
            continue
        stars = ""
        while piece.startswith("*"):
            stars += "*"
            piece = piece[1:]
        # strip default
        eq_parts = _split_top_level(piece, "=")
        head = eq_parts[0] if eq_parts else piece
        if ":" in head:
            name_part, _, ann = head.partition(":")
            type_text = normalize_type(ann.strip(), "python") or UNANNOTATED
        else:
            name_part = head
            type_text = UNANNOTATED
        name = name_part.strip()
        if not name:
            continue
        params.append(Param(type_text, stars + name))
    return params


def parse_python_signature(source: str) -> ApiSignature:
    """Parse the first top-level function definition."""
    masked = mask_comments_and_strings(source, "python")
    chosen = next(_PY_DEF_RE.finditer(masked), None)
    if chosen is None:
        raise NoMethodFound("no top-level function definition found")
    name = chosen.group(2)
    open_paren = masked.find("(", chosen.end() - 1)
    close_paren = _find_matching(masked, open_paren, "(", ")")
    if close_paren == -1:
        raise UnbalancedBraces("parameter list never closes")
    params_raw = masked[open_paren + 1 : close_paren]
    # header colon: first `:` at zero bracket depth after the parameter list
    colon = -1
    depth = 0
    for i in range(close_paren + 1, len(masked)):
        ch = masked[i]
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif ch == ":" and depth == 0:
            colon = i
            break
        elif ch == "\n" and depth == 0:
            break
    return_type = UNANNOTATED
    if colon != -1 and "->" in masked[close_paren + 1 : colon]:
        ann = source[close_paren + 1 : colon].split("->", 1)[1].strip()
        return_type = normalize_type(ann, "python") or UNANNOTATED
    # body: rest of the header line (one-liners), then lines until dedent
    anchor = colon if colon != -1 else close_paren
    header_end = masked.find("\n", anchor)
    if header_end == -1:
        body = source[anchor + 1 :]
    else:
        body_lines = [source[anchor + 1 : header_end]]
        for line in source[header_end + 1 :].split("\n"):
            if line.strip() and line[0] not in " \t":
                break
            body_lines.append(line)
        body = "\n".join(body_lines)
    raises = sorted(
        {m.group(1).split(".")[-1] for m in _PY_RAISE_RE.finditer(
            mask_comments_and_strings(body, "python")
        )}
    )
    return ApiSignature(
        language="python",
        method_name=name,
        params=_parse_python_params(params_raw),
        return_type=return_type,
        return_statements=extract_return_statements(body, "python"),
        imports=extract_imports(source, "python"),
        throws=raises,
    )


def parse_method_signature(source: str, language: str) -> ApiSignature:
    if language == "java":
        return parse_java_signature(source)
    if language == "python":
        return parse_python_signature(source)
    raise UnsupportedLanguage(language)


# --- rendering ---------------------------------------------------------------------


def render_signature(sig: ApiSignature) -> str:
    """Minimal compilable-looking source for a signature.

    Re-parsing the rendered source yields an equal signature, which gives
    tests a cheap stability check.
    """
    if sig.language == "java":
        lines = [f"import {imp};" for imp in sig.imports]
        params = ", ".join(f"{p.type_text} {p.name}" for p in sig.params)
        throws = f" throws {', '.join(sig.throws)}" if sig.throws else ""
        lines.append("public class Chatgpt {")
        lines.append(
            f"    public static {sig.return_type} {sig.method_name}({params}){throws} {{"
        )
        for stmt in sig.return_statements:
            lines.append(f"        {stmt};")
        lines.append("    }")
        lines.append("}")
        return "\n".join(lines)
    if sig.language == "python":
        lines = []
        for imp in sig.imports:
            if "." in imp:
                module, _, name = imp.rpartition(".")
                lines.append(f"from {module} import {name}")
            else:
                lines.append(f"import {imp}")
        rendered_params = []
        for p in sig.params:
            if p.type_text == UNANNOTATED:
                rendered_params.append(p.name)
            else:
                stars = ""
                name = p.name
                while name.startswith("*"):
                    stars += "*"
                    name = name[1:]
                rendered_params.append(f"{stars}{name}: {p.type_text}")
        arrow = f" -> {sig.return_type}" if sig.return_type != UNANNOTATED else ""
        lines.append(f"def {sig.method_name}({', '.join(rendered_params)}){arrow}:")
        body = [f"    raise {exc}" for exc in sig.throws]
        body += [f"    {stmt}" for stmt in sig.return_statements]
        if not body:
            body = ["    pass"]
        lines.extend(body)
        return "\n".join(lines)
    raise UnsupportedLanguage(sig.language)
