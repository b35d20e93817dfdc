"""Stack Overflow data-dump ingestion and snippet corpus handling.

Reads the Posts.xml format from a StackExchange data dump, pairs questions
with their accepted answers, extracts code regions and builds a filtered
corpus of snippet contexts ready for prompting.
"""

from __future__ import annotations

import dataclasses
import json
import os
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator

from .errors import IngestError

LANGUAGES = ("java", "python")

# question titles that ask for a procedure, lowercased
_HOW_TO_MARKERS = ("how to", "how do i", "how can i")

_TAG_RE = re.compile(r"<([^<>]+)>")
_CODE_BLOCK_RE = re.compile(
    r"<pre[^>]*>\s*<code[^>]*>(.*?)</code>\s*</pre>",
    re.DOTALL | re.IGNORECASE,
)
_ANY_TAG_RE = re.compile(r"<[^<>]+>")
_NAMED_ENTITIES = {
    "lt": "<",
    "gt": ">",
    "amp": "&",
    "quot": '"',
    "apos": "'",
}
_ENTITY_RE = re.compile(r"&(#x?[0-9a-fA-F]+|lt|gt|amp|quot|apos);")


def decode_entities(text: str) -> str:
    """Decode the five core XML entities plus numeric character references.

    Single pass, so double-encoded text decodes exactly one level.
    """

    def _sub(match: re.Match) -> str:
        body = match.group(1)
        if body in _NAMED_ENTITIES:
            return _NAMED_ENTITIES[body]
        if body.startswith("#x") or body.startswith("#X"):
            return chr(int(body[2:], 16))
        return chr(int(body[1:], 10))

    return _ENTITY_RE.sub(_sub, text)


def extract_code_blocks(body_markup: str) -> list[str]:
    """Return the decoded contents of every ``<pre><code>`` region, in order."""
    return [decode_entities(m).strip("\n") for m in _CODE_BLOCK_RE.findall(body_markup)]


def to_plain_text(body_markup: str) -> str:
    """Strip markup tags and decode entities, preserving code region content.

    Tags are removed before entity decoding so that decoded angle brackets
    in the text are never mistaken for markup.
    """
    no_tags = _ANY_TAG_RE.sub("", body_markup)
    return decode_entities(no_tags).strip()


@dataclass
class RawPost:
    post_id: int
    post_type: int  # 1 = question, 2 = answer
    parent_id: int | None
    title: str
    body: str
    score: int
    view_count: int
    tags: list[str]
    accepted_answer_id: int | None


@dataclass
class SnippetContext:
    question_id: int
    answer_id: int
    question_title: str
    question_body: str
    answer_body: str
    code_snippet: str
    language: str
    answer_score: int
    view_count: int
    tags: list[str] = field(default_factory=list)
    is_accepted: bool = False

    def validate(self) -> None:
        if self.question_id <= 0 or self.answer_id <= 0:
            raise ValueError("post ids must be positive")
        if self.language not in LANGUAGES:
            raise ValueError(f"unsupported language: {self.language!r}")
        if not self.question_title.strip():
            raise ValueError("question_title must be non-empty")
        if not self.code_snippet.strip():
            raise ValueError("code_snippet must be non-empty")


@dataclass
class FilterCriteria:
    language_tag: str = "java"
    require_how_to_title: bool = True
    min_answer_score: int = 2
    require_single_code_block: bool = True
    max_view_rank: int = 20000


@dataclass
class DumpStats:
    rows_seen: int = 0
    rows_yielded: int = 0
    rows_skipped: int = 0  # malformed rows
    rows_ignored: int = 0  # post types we do not consume


def _parse_tags(raw: str) -> list[str]:
    return _TAG_RE.findall(raw)


def _row_to_post(attrib: dict) -> RawPost | None:
    """Convert one row's attributes to a RawPost, or None if malformed."""
    try:
        post_id = int(attrib["Id"])
        post_type = int(attrib["PostTypeId"])
    except (KeyError, ValueError):
        return None
    body = attrib.get("Body")
    if body is None:
        return None
    if post_type == 1:
        title = attrib.get("Title")
        if title is None:
            return None
        parent_id = None
    elif post_type == 2:
        title = ""
        try:
            parent_id = int(attrib["ParentId"])
        except (KeyError, ValueError):
            return None
    else:
        # other post types are not malformed, just not ours
        raise _NotOurs
    try:
        score = int(attrib.get("Score", "0"))
        view_count = int(attrib.get("ViewCount", "0"))
    except ValueError:
        return None
    accepted_raw = attrib.get("AcceptedAnswerId")
    accepted = int(accepted_raw) if accepted_raw and accepted_raw.isdigit() else None
    return RawPost(
        post_id=post_id,
        post_type=post_type,
        parent_id=parent_id,
        title=title,
        body=body,
        score=score,
        view_count=view_count,
        tags=_parse_tags(attrib.get("Tags", "")),
        accepted_answer_id=accepted,
    )


class _NotOurs(Exception):
    pass


def parse_data_dump(
    source: str | os.PathLike | IO[bytes],
    language_tag: str | None = None,
    stats: DumpStats | None = None,
) -> Iterator[RawPost]:
    """Stream question and answer rows out of a Posts.xml dump.

    Questions are kept only when tagged with `language_tag` (all questions
    when the tag is None); answers always pass through so callers can pair
    them with the questions they retained. Memory stays bounded because each
    element is cleared as soon as it is consumed. Malformed rows are skipped
    and counted in `stats`.
    """
    if stats is None:
        stats = DumpStats()

    close_after = False
    if isinstance(source, (str, os.PathLike)):
        if os.path.getsize(source) == 0:
            return
        stream: IO[bytes] = open(source, "rb")
        close_after = True
    else:
        stream = source

    try:
        for _event, elem in ET.iterparse(stream, events=("end",)):
            if elem.tag != "row":
                continue
            stats.rows_seen += 1
            try:
                post = _row_to_post(elem.attrib)
            except _NotOurs:
                stats.rows_ignored += 1
                elem.clear()
                continue
            elem.clear()
            if post is None:
                stats.rows_skipped += 1
                continue
            if (
                post.post_type == 1
                and language_tag is not None
                and language_tag not in post.tags
            ):
                stats.rows_ignored += 1
                continue
            stats.rows_yielded += 1
            yield post
    except ET.ParseError as exc:
        raise IngestError(f"unreadable dump: {exc}") from exc
    finally:
        if close_after:
            stream.close()


def is_how_to_title(title: str) -> bool:
    lowered = title.lower()
    return any(marker in lowered for marker in _HOW_TO_MARKERS)


def extract_context(
    question: RawPost, answer: RawPost, language: str
) -> SnippetContext:
    """Build a SnippetContext from a question/answer pair.

    The answer must actually belong to the question. The snippet is the
    longest code region of the answer; ties keep the earlier block.
    """
    if answer.parent_id != question.post_id:
        raise ValueError(
            f"answer {answer.post_id} does not belong to question {question.post_id}"
        )
    blocks = extract_code_blocks(answer.body)
    if not blocks:
        from .errors import NoCodeSnippet

        raise NoCodeSnippet(f"answer {answer.post_id} has no code region")
    snippet = max(blocks, key=len)
    ctx = SnippetContext(
        question_id=question.post_id,
        answer_id=answer.post_id,
        question_title=question.title,
        question_body=to_plain_text(question.body),
        answer_body=to_plain_text(answer.body),
        code_snippet=snippet,
        language=language,
        answer_score=answer.score,
        view_count=question.view_count,
        tags=list(question.tags),
        is_accepted=question.accepted_answer_id == answer.post_id,
    )
    ctx.validate()
    return ctx


def filter_candidates(
    ctx: SnippetContext,
    criteria: FilterCriteria,
    all_answer_code_block_count: int,
    view_rank: int | None = None,
) -> bool:
    """True iff every enabled criterion passes.

    `view_rank` is 1-based among candidate questions ordered by view count;
    None means the rank criterion is not applied (single-item checks).
    """
    if criteria.require_how_to_title and not is_how_to_title(ctx.question_title):
        return False
    if ctx.answer_score < criteria.min_answer_score:
        return False
    if criteria.require_single_code_block and all_answer_code_block_count != 1:
        return False
    if view_rank is not None and view_rank > criteria.max_view_rank:
        return False
    return True


def compute_view_ranks(contexts: Iterable[SnippetContext]) -> dict[int, int]:
    """1-based rank per question by descending view count, ties by question id."""
    ordered = sorted(contexts, key=lambda c: (-c.view_count, c.question_id))
    return {ctx.question_id: i + 1 for i, ctx in enumerate(ordered)}


def build_corpus(
    source: str | os.PathLike | IO[bytes],
    criteria: FilterCriteria,
    language: str,
    stats: DumpStats | None = None,
) -> list[SnippetContext]:
    """Run the full ingest pipeline: parse, pair, extract, filter, rank.

    Pairs each retained question with its accepted answer. Per-item criteria
    are applied first; the view-rank cutoff is applied over the survivors.
    """
    questions: dict[int, RawPost] = {}
    survivors: list[SnippetContext] = []
    for post in parse_data_dump(source, criteria.language_tag, stats=stats):
        if post.post_type == 1:
            if post.accepted_answer_id is not None:
                questions[post.post_id] = post
            continue
        question = questions.get(post.parent_id or -1)
        if question is None or question.accepted_answer_id != post.post_id:
            continue
        blocks = extract_code_blocks(post.body)
        if not blocks:
            continue
        ctx = extract_context(question, post, language)
        if filter_candidates(ctx, criteria, len(blocks)):
            survivors.append(ctx)
    ranks = compute_view_ranks(survivors)
    ranked = [
        ctx for ctx in survivors if ranks[ctx.question_id] <= criteria.max_view_rank
    ]
    ranked.sort(key=lambda c: ranks[c.question_id])
    return ranked


@dataclass
class CorpusLineError:
    line_number: int
    message: str


def store_corpus(contexts: Iterable[SnippetContext], path: str | os.PathLike) -> int:
    """Write one JSON object per line; returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for ctx in contexts:
            fh.write(json.dumps(dataclasses.asdict(ctx), ensure_ascii=False))
            fh.write("\n")
            count += 1
    return count


def load_corpus(
    path: str | os.PathLike,
) -> tuple[list[SnippetContext], list[CorpusLineError]]:
    """Read a corpus file, collecting bad lines instead of failing."""
    contexts: list[SnippetContext] = []
    errors: list[CorpusLineError] = []
    known = {f.name for f in dataclasses.fields(SnippetContext)}
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                payload = json.loads(line)
                if not isinstance(payload, dict):
                    raise ValueError("record is not an object")
                unknown = set(payload) - known
                if unknown:
                    raise ValueError(f"unknown fields: {sorted(unknown)}")
                ctx = SnippetContext(**payload)
                ctx.validate()
            except (json.JSONDecodeError, TypeError, ValueError) as exc:
                errors.append(CorpusLineError(line_number, str(exc)))
                continue
            contexts.append(ctx)
    return contexts, errors
