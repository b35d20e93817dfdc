"""HTTP facade for single-snippet APIzation.

POST /v1/apize takes either an inline snippet context or a Stack Overflow
URL, runs prompt -> backend -> extraction, and returns the structured API.
GET /v1/health is a constant liveness probe. The app factory takes
injectable backend and SO clients so tests run fully offline.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import json
import os
import re
import threading
from dataclasses import dataclass

import httpx
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import __version__, compilecheck, extractor, prompts
from .backend import DEFAULT_MODEL, CompletionRequest, LiveBackend, load_config
from .corpus import SnippetContext, extract_code_blocks, to_plain_text
from .errors import BackendError, Code2ApiError, OverBudget

SO_API_BASE = "https://api.stackexchange.com/2.3"
DEFAULT_DEADLINE = 60.0
# browser extensions are the expected cross-origin caller
DEFAULT_ORIGIN_REGEX = r"^(chrome|moz)-extension://.*$"


@dataclass
class ServiceSettings:
    model: str = DEFAULT_MODEL
    deadline: float = DEFAULT_DEADLINE
    allowed_origin_regex: str = DEFAULT_ORIGIN_REGEX
    so_api_key: str = ""


def load_settings() -> ServiceSettings:
    return ServiceSettings(
        model=os.environ.get("CODE2API_MODEL", DEFAULT_MODEL),
        deadline=float(os.environ.get("CODE2API_DEADLINE", DEFAULT_DEADLINE)),
        allowed_origin_regex=os.environ.get(
            "CODE2API_ALLOWED_ORIGIN_REGEX", DEFAULT_ORIGIN_REGEX
        ),
        so_api_key=os.environ.get("CODE2API_SO_KEY", ""),
    )


_QUESTION_URL_RE = re.compile(r"/questions/(\d+)")
_ANSWER_URL_RE = re.compile(r"/a/(\d+)")
_ANSWER_FRAGMENT_RE = re.compile(r"#answer-(\d+)")


class SoClient:
    """Minimal reader for the public Stack Exchange question API."""

    def __init__(
        self,
        client: httpx.Client | None = None,
        api_key: str = "",
        site: str = "stackoverflow",
    ):
        self._client = client or httpx.Client(base_url=SO_API_BASE, timeout=30)
        self.api_key = api_key
        self.site = site

    def _get(self, path: str, **params) -> dict:
        params.setdefault("site", self.site)
        params.setdefault("filter", "withbody")
        if self.api_key:
            params["key"] = self.api_key
        response = self._client.get(path, params=params)
        if response.status_code != 200:
            raise LookupError(f"SO API returned {response.status_code}")
        return response.json()

    def fetch_context(self, url: str, language: str) -> SnippetContext:
        """Resolve an SO question/answer URL into a SnippetContext.

        Questions use their accepted answer, falling back to the
        top-scored one. Raises LookupError when the post or a code
        snippet cannot be found.
        """
        answer_id = None
        m = _ANSWER_URL_RE.search(url) or _ANSWER_FRAGMENT_RE.search(url)
        if m:
            answer_id = int(m.group(1))
        qm = _QUESTION_URL_RE.search(url)
        if answer_id is not None:
            payload = self._get(f"/answers/{answer_id}")
            if not payload.get("items"):
                raise LookupError(f"answer {answer_id} not found")
            answer = payload["items"][0]
            question_id = answer["question_id"]
        elif qm:
            question_id = int(qm.group(1))
            answer = None
        else:
            raise LookupError(f"unrecognized Stack Overflow URL: {url}")

        payload = self._get(f"/questions/{question_id}")
        if not payload.get("items"):
            raise LookupError(f"question {question_id} not found")
        question = payload["items"][0]

        if answer is None:
            payload = self._get(f"/questions/{question_id}/answers", sort="votes")
            answers = payload.get("items", [])
            if not answers:
                raise LookupError(f"question {question_id} has no answers")
            accepted = [a for a in answers if a.get("is_accepted")]
            answer = accepted[0] if accepted else answers[0]
            answer_id = answer["answer_id"]

        blocks = extract_code_blocks(answer["body"])
        if not blocks:
            raise LookupError(f"answer {answer_id} has no code snippet")
        ctx = SnippetContext(
            question_id=question_id,
            answer_id=answer_id,
            question_title=to_plain_text(question["title"]),
            question_body=to_plain_text(question["body"]),
            answer_body=to_plain_text(answer["body"]),
            code_snippet=max(blocks, key=len),
            language=language,
            answer_score=answer.get("score", 0),
            view_count=question.get("view_count", 0),
            tags=question.get("tags", []),
            is_accepted=bool(answer.get("is_accepted", False)),
        )
        ctx.validate()
        return ctx


class ApizeRequest(BaseModel):
    language: str = "java"
    question_title: str | None = None
    question_body: str | None = None
    answer_body: str | None = None
    code_snippet: str | None = None
    url: str | None = None
    answer_id: int = 0
    compile_check: bool = False


def create_app(
    backend=None,
    so_client: SoClient | None = None,
    settings: ServiceSettings | None = None,
) -> FastAPI:
    settings = settings or load_settings()
    app = FastAPI(title="code2api", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=settings.allowed_origin_regex,
        allow_methods=["*"],
        allow_headers=["*"],
    )
    state = {
        "backend": backend,
        "so_client": so_client,
        "cache": {},
        "lock": threading.Lock(),
        "pool": concurrent.futures.ThreadPoolExecutor(max_workers=8),
    }

    def _backend():
        if state["backend"] is None:
            state["backend"] = LiveBackend(load_config())
        return state["backend"]

    def _so_client() -> SoClient:
        if state["so_client"] is None:
            state["so_client"] = SoClient(api_key=settings.so_api_key)
        return state["so_client"]

    def _pipeline(ctx: SnippetContext, compile_check: bool) -> dict:
        bundle = prompts.render_prompt(ctx)
        response = _backend().complete(
            CompletionRequest(
                model_name=settings.model,
                prompt_text=bundle.rendered,
                answer_id=ctx.answer_id,
            )
        )
        fields = extractor.extract_fields(response.raw_text)
        api = extractor.parse_generated(
            fields.complete_code, ctx.language, ctx.answer_id, fields.steps_raw
        )
        body: dict = {
            "method_name": api.method_name,
            "parameters": [
                {"type": p.type_text, "name": p.name} for p in api.parameters
            ],
            "return_type": api.return_type,
            "imports": api.imports,
            "throws": api.throws,
            "complete_source": api.complete_source,
            "steps": {str(k): v for k, v in api.steps_raw.items()},
            "diagnostics": list(fields.diagnostics) + list(api.diagnostics),
        }
        if compile_check:
            outcome = compilecheck.repair_loop(api, _backend())
            body["compile"] = {
                "success": outcome.success,
                "rounds_used": outcome.rounds_used,
                "diagnostics": [dataclasses.asdict(d) for d in outcome.diagnostics],
            }
            body["complete_source"] = outcome.final_source
        return body

    @app.post("/v1/apize")
    def apize(request: ApizeRequest):
        inline_fields = (
            request.question_title,
            request.question_body,
            request.answer_body,
            request.code_snippet,
        )
        has_inline = any(value is not None for value in inline_fields)
        if has_inline and request.url:
            raise HTTPException(
                status_code=400, detail="provide inline context or url, not both"
            )
        if not has_inline and not request.url:
            raise HTTPException(
                status_code=400, detail="provide inline context or url"
            )
        if has_inline and not all(
            value is not None and value.strip() for value in inline_fields
        ):
            raise HTTPException(
                status_code=400,
                detail="inline context needs question_title, question_body, "
                "answer_body and code_snippet",
            )
        if request.language not in ("java", "python"):
            raise HTTPException(
                status_code=400, detail=f"unsupported language {request.language!r}"
            )

        cache_key = hashlib.sha256(
            json.dumps(request.model_dump(), sort_keys=True).encode("utf-8")
        ).hexdigest()
        with state["lock"]:
            cached = state["cache"].get(cache_key)
        if cached is not None:
            return cached

        if request.url:
            try:
                ctx = _so_client().fetch_context(request.url, request.language)
            except LookupError as exc:
                raise HTTPException(status_code=404, detail=str(exc)) from exc
        else:
            ctx = SnippetContext(
                question_id=max(request.answer_id, 1),
                answer_id=request.answer_id or 1,
                question_title=request.question_title,
                question_body=request.question_body,
                answer_body=request.answer_body,
                code_snippet=request.code_snippet,
                language=request.language,
                answer_score=0,
                view_count=0,
            )
            try:
                ctx.validate()
            except ValueError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc

        future = state["pool"].submit(_pipeline, ctx, request.compile_check)
        try:
            body = future.result(timeout=settings.deadline)
        except concurrent.futures.TimeoutError:
            future.cancel()
            raise HTTPException(
                status_code=504, detail=f"deadline of {settings.deadline}s exceeded"
            ) from None
        except OverBudget as exc:
            raise HTTPException(status_code=413, detail=str(exc)) from exc
        except BackendError as exc:
            raise HTTPException(
                status_code=502, detail=f"backend failure: {exc}"
            ) from exc
        except Code2ApiError as exc:
            raise HTTPException(
                status_code=502, detail=f"pipeline failure: {exc}"
            ) from exc

        with state["lock"]:
            state["cache"][cache_key] = body
        return body

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "model": settings.model, "version": __version__}

    return app
