"""API pair equivalence relations and corpus metric aggregation.

A pair relates a human-written ground-truth API (left) to a generated one
(right). Three relations are computed: parameter equivalence, return
equivalence, and implementation equivalence. Parameter and implementation
verdicts are tri-state because the referent and functionality checks can
be inconclusive without a human.
"""

from __future__ import annotations

import enum
import json
import logging
import os
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable

from .sigparse import (
    UNANNOTATED,
    ApiSignature,
    normalize_statement,
    normalize_type,
    parse_method_signature,
)

logger = logging.getLogger(__name__)


class Verdict(enum.Enum):
    EQUIVALENT = "equivalent"
    NOT_EQUIVALENT = "not_equivalent"
    NEEDS_MANUAL = "needs_manual"


# boxed Java scalar types and their primitive counterparts; pairs differing
# only by boxing are ambiguous, not equal
_UNBOX = {
    "Integer": "int",
    "Long": "long",
    "Double": "double",
    "Float": "float",
    "Boolean": "boolean",
    "Character": "char",
    "Byte": "byte",
    "Short": "short",
}

FunctionalityOracle = Callable[[ApiSignature, ApiSignature], "bool | None"]


@dataclass
class EquivalencePair:
    left: ApiSignature
    right: ApiSignature
    param_verdict: Verdict
    return_verdict: bool
    impl_verdict: Verdict
    manual_notes: str = ""
    answer_id: int | None = None


def _canonical_types(sig: ApiSignature) -> list[str]:
    return [normalize_type(p.type_text, sig.language) for p in sig.params]


def _types_match(left_types: list[str], right_types: list[str]) -> bool:
    """Multiset match where `unannotated` pairs with any type."""
    if len(left_types) != len(right_types):
        return False
    lc, rc = Counter(left_types), Counter(right_types)
    common = lc & rc
    lc -= common
    rc -= common
    l_wild = lc.pop(UNANNOTATED, 0)
    r_wild = rc.pop(UNANNOTATED, 0)
    l_concrete = sum(lc.values())
    r_concrete = sum(rc.values())
    return l_concrete <= r_wild and r_concrete <= l_wild


def params_equivalent(left: ApiSignature, right: ApiSignature) -> Verdict:
    """Parameter-list equivalence.

    Equivalent when both lists are empty, or the canonical type multisets
    match and the referent check passes. Identifier names need not match:
    the referent check accepts matching name multisets or unique positional
    use (no repeated type on either side). Pairs that match only after
    unboxing, or whose referents stay ambiguous, are NeedsManual.
    """
    if not left.params and not right.params:
        return Verdict.EQUIVALENT
    if len(left.params) != len(right.params):
        return Verdict.NOT_EQUIVALENT
    lt, rt = _canonical_types(left), _canonical_types(right)
    if not _types_match(lt, rt):
        unboxed_l = [_UNBOX.get(t, t) for t in lt]
        unboxed_r = [_UNBOX.get(t, t) for t in rt]
        if _types_match(unboxed_l, unboxed_r):
            return Verdict.NEEDS_MANUAL
        return Verdict.NOT_EQUIVALENT
    left_names = Counter(p.name for p in left.params)
    right_names = Counter(p.name for p in right.params)
    if left_names == right_names:
        return Verdict.EQUIVALENT
    if max(Counter(lt).values()) <= 1 and max(Counter(rt).values()) <= 1:
        # each type appears once per side, so the pairing is forced
        return Verdict.EQUIVALENT
    return Verdict.NEEDS_MANUAL


def _void_like(sig: ApiSignature) -> bool:
    rt = normalize_type(sig.return_type, sig.language)
    if rt in ("void", "None"):
        return True
    if sig.language == "python" and rt == UNANNOTATED:
        return all(normalize_statement(s) == "return" for s in sig.return_statements)
    return False


def returns_equivalent(left: ApiSignature, right: ApiSignature) -> bool:
    """True iff both are void-like, or the return types are compatible and
    the normalized return statement lists are identical.
    """
    if _void_like(left) and _void_like(right):
        return True
    lt = normalize_type(left.return_type, left.language)
    rt = normalize_type(right.return_type, right.language)
    if lt != rt and UNANNOTATED not in (lt, rt):
        return False
    left_stmts = [normalize_statement(s) for s in left.return_statements]
    right_stmts = [normalize_statement(s) for s in right.return_statements]
    return left_stmts == right_stmts


def impl_equivalent(
    pair: EquivalencePair, functionality_oracle: FunctionalityOracle | None = None
) -> Verdict:
    """Implementation equivalence, gated by the sub-verdicts.

    The functionality oracle is an injection point (test-based or a manual
    adjudication table); with none supplied, pairs that pass both
    sub-checks are NeedsManual.
    """
    if pair.param_verdict is Verdict.NOT_EQUIVALENT or not pair.return_verdict:
        return Verdict.NOT_EQUIVALENT
    if pair.param_verdict is Verdict.NEEDS_MANUAL:
        return Verdict.NEEDS_MANUAL
    if functionality_oracle is None:
        return Verdict.NEEDS_MANUAL
    outcome = functionality_oracle(pair.left, pair.right)
    if outcome is None:
        return Verdict.NEEDS_MANUAL
    return Verdict.EQUIVALENT if outcome else Verdict.NOT_EQUIVALENT


def evaluate_pair(
    left: ApiSignature,
    right: ApiSignature,
    functionality_oracle: FunctionalityOracle | None = None,
    answer_id: int | None = None,
) -> EquivalencePair:
    pair = EquivalencePair(
        left=left,
        right=right,
        param_verdict=params_equivalent(left, right),
        return_verdict=returns_equivalent(left, right),
        impl_verdict=Verdict.NOT_EQUIVALENT,
        answer_id=answer_id,
    )
    pair.impl_verdict = impl_equivalent(pair, functionality_oracle)
    return pair


@dataclass
class MetricsSummary:
    total: int
    p_count: int
    r_count: int
    m_count: int
    pr_count: int
    p_acc: float
    r_acc: float
    m_acc: float
    pr_acc: float


Resolution = dict[tuple[int, str], Verdict]


def _resolve(
    verdict: Verdict,
    pair: EquivalencePair,
    fieldname: str,
    resolutions: Resolution,
    strict: bool,
) -> Verdict:
    if verdict is not Verdict.NEEDS_MANUAL:
        return verdict
    key = (pair.answer_id, fieldname)
    if pair.answer_id is not None and key in resolutions:
        return resolutions[key]
    if strict:
        raise ValueError(
            f"unresolved NeedsManual verdict for answer_id={pair.answer_id} "
            f"field={fieldname}"
        )
    logger.warning(
        "NeedsManual verdict for answer_id=%s field=%s counted as "
        "not equivalent (no resolution supplied)",
        pair.answer_id,
        fieldname,
    )
    return Verdict.NOT_EQUIVALENT


def aggregate(
    pairs: Iterable[EquivalencePair],
    manual_resolutions: Resolution | None = None,
    strict: bool = False,
) -> MetricsSummary:
    """Fold pair verdicts into the four corpus metrics.

    NeedsManual verdicts are settled by the resolution map; without one,
    strict mode raises and lenient mode counts them as not equivalent with
    a warning. An impl verdict can only count when its own pair's param
    and return checks hold, which keeps m_count <= min(p_count, r_count)
    even under contradictory resolutions.
    """
    resolutions = manual_resolutions or {}
    total = p = r = m = pr = 0
    for pair in pairs:
        total += 1
        param = _resolve(pair.param_verdict, pair, "params", resolutions, strict)
        impl = _resolve(pair.impl_verdict, pair, "impl", resolutions, strict)
        param_ok = param is Verdict.EQUIVALENT
        return_ok = pair.return_verdict
        impl_ok = impl is Verdict.EQUIVALENT and param_ok and return_ok
        p += param_ok
        r += return_ok
        m += impl_ok
        pr += param_ok or return_ok
    if total == 0:
        return MetricsSummary(0, 0, 0, 0, 0, 0.0, 0.0, 0.0, 0.0)
    return MetricsSummary(
        total=total,
        p_count=p,
        r_count=r,
        m_count=m,
        pr_count=pr,
        p_acc=p / total,
        r_acc=r / total,
        m_acc=m / total,
        pr_acc=pr / total,
    )


# --- external file formats -----------------------------------------------------


@dataclass
class PairSpec:
    answer_id: int
    left_source_path: str
    right_source_path: str
    language: str


def load_pairs_file(path: str | os.PathLike) -> list[PairSpec]:
    """One record per line: {answer_id, left_source_path, right_source_path,
    language}."""
    specs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            payload = json.loads(line)
            specs.append(PairSpec(**payload))
    return specs


def evaluate_pairs_file(
    path: str | os.PathLike,
    functionality_oracle: FunctionalityOracle | None = None,
) -> list[EquivalencePair]:
    pairs = []
    base = os.path.dirname(os.fspath(path))
    for spec in load_pairs_file(path):
        def _read(rel: str) -> str:
            candidate = rel if os.path.isabs(rel) else os.path.join(base, rel)
            with open(candidate, "r", encoding="utf-8") as fh:
                return fh.read()

        left = parse_method_signature(_read(spec.left_source_path), spec.language)
        right = parse_method_signature(_read(spec.right_source_path), spec.language)
        pairs.append(
            evaluate_pair(left, right, functionality_oracle, spec.answer_id)
        )
    return pairs


def load_manual_resolutions(path: str | os.PathLike) -> Resolution:
    """One record per line: {answer_id, field, verdict, note}."""
    resolutions: Resolution = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            payload = json.loads(line)
            resolutions[(payload["answer_id"], payload["field"])] = Verdict(
                payload["verdict"]
            )
    return resolutions
