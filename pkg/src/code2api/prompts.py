"""Six-part prompt assembly: role designation, chain of thought, worked
examples, test input, and format constraints, plus few-shot selection and
token budgeting.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from importlib import resources
from itertools import combinations

from .corpus import SnippetContext
from .errors import BankFormatError, OverBudget, UnsupportedLanguage

DEFAULT_TOKEN_LIMIT = 4096
COMPLETION_RESERVE = 700
DEFAULT_BUDGET = DEFAULT_TOKEN_LIMIT - COMPLETION_RESERVE
DEFAULT_FEW_SHOT_K = 5
DEFAULT_WRAPPER_CLASS = "Chatgpt"

_ROLE_DIRECTIVES = {
    "java": (
        "Give you a context including a question title, a question post and "
        "an answer post, your task is to transform the Java code snippet "
        "within the answer post into Java method based on the context."
    ),
    "python": (
        "Give you a context including a question title, a question post and "
        "an answer post, your task is to transform the Python code snippet "
        "within the answer post into Python function based on the context."
    ),
}

_ORDINALS = (
    "one", "two", "three", "four", "five",
    "six", "seven", "eight", "nine", "ten",
)

# answers that mean "this step produced nothing"
_NONE_ANSWERS = {"", "none", "// none", "//none"}


def estimate_tokens(text: str) -> int:
    """Heuristic token count: one token per 4 characters, rounded up."""
    return (len(text) + 3) // 4


def role_directive(language: str) -> str:
    try:
        return _ROLE_DIRECTIVES[language]
    except KeyError:
        raise UnsupportedLanguage(language) from None


@dataclass
class CotPlan:
    language: str
    steps: list[str]

    def validate(self) -> None:
        if not self.steps:
            raise ValueError("steps must be non-empty")
        if "complete code" not in self.steps[-1].lower():
            raise ValueError("final step must output the complete code")


def default_cot(language: str, wrapper_class: str = DEFAULT_WRAPPER_CLASS) -> CotPlan:
    """The stock reasoning plan for a language.

    Java wraps the method in a public class; Python emits a bare top-level
    function, so there is no wrapper step.
    """
    if language == "java":
        steps = [
            "Recover import statements based on the code snippet. "
            "If necessary, it can be none.",
            f"Define a public class {wrapper_class} that will be used to "
            "wrap the method.",
            'Create "public static" modifier for the method.',
            "Create the method name based on the context or the code "
            "snippet itself.",
            "Infer parameter list based on the code snippet. "
            "If necessary, it can be none.",
            "Infer return statements based on the code snippet. "
            "If necessary, it can be none.",
            "Infer throws statements based on the code snippet. "
            "If necessary, it can be none.",
            "Output the complete code based on the above results.",
        ]
    elif language == "python":
        steps = [
            "Recover import statements based on the code snippet. "
            "If necessary, it can be none.",
            "Create the function name based on the context or the code "
            "snippet itself.",
            "Infer parameter list based on the code snippet. "
            "If necessary, it can be none.",
            "Infer return statements based on the code snippet. "
            "If necessary, it can be none.",
            "Infer raise statements based on the code snippet. "
            "If necessary, it can be none.",
            'Define the function signature with the "def" keyword; '
            "a top-level function is enough.",
            "Output the complete code based on the above results.",
        ]
    else:
        raise UnsupportedLanguage(language)
    plan = CotPlan(language=language, steps=steps)
    plan.validate()
    return plan


@dataclass
class FewShotExample:
    context: SnippetContext
    worked_steps: list[str]
    complete_code: str


def _is_none_answer(answer: str) -> bool:
    return answer.strip().lower() in _NONE_ANSWERS


def answered_steps(example: FewShotExample) -> set[int]:
    """1-based indices of steps the example answers with real content."""
    return {
        i + 1
        for i, answer in enumerate(example.worked_steps)
        if not _is_none_answer(answer)
    }


def _validate_example(
    example: FewShotExample, language: str, record: int
) -> None:
    expected_steps = len(default_cot(language).steps) - 1
    if len(example.worked_steps) != expected_steps:
        raise BankFormatError(
            "worked_steps",
            f"record {record}: expected {expected_steps} worked steps, "
            f"got {len(example.worked_steps)}",
        )
    lines = example.context.code_snippet.count("\n") + 1
    if not 3 <= lines <= 10:
        raise BankFormatError(
            "code_snippet",
            f"record {record}: snippet must be 3 to 10 lines, got {lines}",
        )
    if not example.complete_code.strip():
        raise BankFormatError("complete_code", f"record {record}: empty")
    try:
        example.context.validate()
    except ValueError as exc:
        raise BankFormatError("context", f"record {record}: {exc}") from exc
    if example.context.language != language:
        raise BankFormatError(
            "language",
            f"record {record}: bank is {language}, "
            f"example is {example.context.language}",
        )


def load_bank(
    path: str | os.PathLike | None = None, language: str = "java"
) -> list[FewShotExample]:
    """Load a few-shot bank, validating every record.

    With no path, the packaged default bank for the language is used.
    Bank lines are corpus records extended with worked_steps and
    complete_code fields.
    """
    if path is None:
        ref = resources.files("code2api.data") / f"fewshot_{language}.jsonl"
        text = ref.read_text(encoding="utf-8")
    else:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    ctx_fields = {f.name for f in dataclasses.fields(SnippetContext)}
    bank: list[FewShotExample] = []
    for record, line in enumerate(text.splitlines()):
        if not line.strip():
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise BankFormatError("line", f"record {record}: {exc}") from exc
        for required in ("worked_steps", "complete_code"):
            if required not in payload:
                raise BankFormatError(required, f"record {record}: missing")
        ctx_payload = {k: v for k, v in payload.items() if k in ctx_fields}
        try:
            context = SnippetContext(**ctx_payload)
        except TypeError as exc:
            raise BankFormatError("context", f"record {record}: {exc}") from exc
        example = FewShotExample(
            context=context,
            worked_steps=list(payload["worked_steps"]),
            complete_code=payload["complete_code"],
        )
        _validate_example(example, language, record)
        bank.append(example)
    return bank


def _subset_score(subset: tuple[FewShotExample, ...]) -> tuple:
    coverage = len(set().union(*(answered_steps(e) for e in subset)))
    line_counts = {e.context.code_snippet.count("\n") + 1 for e in subset}
    ids = tuple(sorted(e.context.answer_id for e in subset))
    # negated ids: ties prefer the lexicographically smallest id tuple
    return coverage, len(line_counts), tuple(-i for i in ids)


def select_few_shot(bank: list[FewShotExample], k: int) -> list[FewShotExample]:
    """Pick the k examples maximizing step coverage, then snippet-length
    diversity, ties broken toward smaller answer ids. Result keeps bank
    order. Exhaustive over subsets, so banks are expected to stay small.
    """
    if k == 0:
        return []
    if k > len(bank):
        raise ValueError(f"k={k} exceeds bank size {len(bank)}")
    best = max(combinations(bank, k), key=_subset_score)
    chosen = set(map(id, best))
    return [e for e in bank if id(e) in chosen]


@dataclass
class PromptBundle:
    role_directive: str
    cot_text: str
    examples_text: str
    test_input_text: str
    format_constraints_text: str
    token_estimate: int
    use_cot: bool
    use_few_shot: bool

    @property
    def rendered(self) -> str:
        parts = [
            self.role_directive,
            self.cot_text,
            self.examples_text,
            self.test_input_text,
            self.format_constraints_text,
        ]
        return "\n\n".join(p for p in parts if p)


def _ordinal(i: int) -> str:
    return _ORDINALS[i - 1] if i <= len(_ORDINALS) else str(i)


def _context_block(ctx: SnippetContext) -> str:
    return (
        f"Question title:\n{ctx.question_title}\n"
        f"Question post:\n{ctx.question_body}\n"
        f"Answer post:\n{ctx.answer_body}\n"
        f"Code snippet in the answer post:\n{ctx.code_snippet}"
    )


def _example_output_block(example: FewShotExample) -> str:
    lines = ["Specific steps:"]
    for i, answer in enumerate(example.worked_steps, start=1):
        lines.append(f"Step {i}: {answer}")
    lines.append("Complete code:")
    lines.append(example.complete_code)
    return "\n".join(lines)


def render_cot(cot: CotPlan) -> str:
    lines = ["To solve the problem, do the following:"]
    for i, step in enumerate(cot.steps, start=1):
        lines.append(f"Step {i} - {step}")
    return "\n".join(lines)


def render_examples(examples: list[FewShotExample]) -> str:
    blocks = []
    for i, example in enumerate(examples, start=1):
        blocks.append(
            f"Example {_ordinal(i)}:\n{_context_block(example.context)}"
            f"\n\n{_example_output_block(example)}"
        )
    return "Here are some examples:\n" + "\n\n".join(blocks)


def render_format_constraints(n_steps: int) -> str:
    return (
        "Please output the results in the following format:\n"
        f"Specific steps: <the results of step 1-{n_steps - 1}>\n"
        f"Complete code: <the result of step {n_steps}>"
    )


def render_prompt(
    ctx: SnippetContext,
    cot: CotPlan | None = None,
    examples: list[FewShotExample] | None = None,
    *,
    use_cot: bool = True,
    use_few_shot: bool = True,
    budget: int = DEFAULT_BUDGET,
) -> PromptBundle:
    """Assemble the full prompt for one snippet context.

    cot defaults to the language's stock plan; examples default to the
    packaged bank selection. Raises OverBudget when the token estimate
    exceeds the budget.
    """
    ctx.validate()
    if cot is None:
        cot = default_cot(ctx.language)
    if examples is None and use_few_shot:
        bank = load_bank(language=ctx.language)
        examples = select_few_shot(bank, min(DEFAULT_FEW_SHOT_K, len(bank)))
    bundle = PromptBundle(
        role_directive=role_directive(ctx.language),
        cot_text=render_cot(cot) if use_cot else "",
        examples_text=render_examples(examples) if use_few_shot else "",
        test_input_text=(
            "Now, give you the following context:\n" + _context_block(ctx)
        ),
        format_constraints_text=render_format_constraints(len(cot.steps)),
        token_estimate=0,
        use_cot=use_cot,
        use_few_shot=use_few_shot,
    )
    bundle.token_estimate = estimate_tokens(bundle.rendered)
    if bundle.token_estimate > budget:
        raise OverBudget(bundle.token_estimate, budget)
    return bundle
