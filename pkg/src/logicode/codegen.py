"""Program generation: prompt -> backend -> extraction -> classification.

Every attempt lands in exactly one bucket: success (parses, type-checks,
covers every rule), error (syntax or type failure; checked first), or
missing (clean but incomplete coverage). Model misbehavior is data here,
never an exception.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Sequence

from . import checklang, llm
from .prompt import build_prompt
from .rules import RuleSet

OUTCOME_SUCCESS = "success"
OUTCOME_ERROR = "error"
OUTCOME_MISSING = "missing"

_FENCE_RE = re.compile(r"```[^\n`]*\n(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class GenerationOutcome:
    category: str
    attempt_index: int
    raw_response: str
    extracted_source: str | None
    outcome: str
    diagnostics: tuple[str, ...] = ()
    program: checklang.Program | None = None

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "attempt_index": self.attempt_index,
            "outcome": self.outcome,
            "diagnostics": list(self.diagnostics),
            "extracted_source": self.extracted_source,
            "raw_response": self.raw_response,
        }


@dataclass(frozen=True)
class CampaignResult:
    category: str
    outcomes: tuple[GenerationOutcome, ...]
    rates: dict

    def first_success(self) -> GenerationOutcome | None:
        for outcome in self.outcomes:
            if outcome.outcome == OUTCOME_SUCCESS:
                return outcome
        return None


def extract_source(response_text: str) -> str:
    """First fenced code block, else the whole response."""
    m = _FENCE_RE.search(response_text)
    if m:
        return m.group(1)
    return response_text.strip()


def classify_source(
    source: str, rules: RuleSet, vocabulary: Sequence[str] | None = None
) -> tuple[str, tuple[str, ...], checklang.Program | None]:
    """Pure classification of an extracted source against a rule set."""
    try:
        program = checklang.parse(source)
    except checklang.ParseError as exc:
        return OUTCOME_ERROR, (f"syntax: {exc}",), None
    report = checklang.validate(program, rules, vocabulary)
    if report.type_errors:
        return OUTCOME_ERROR, tuple(f"type: {e}" for e in report.type_errors), None
    if report.missing:
        return (
            OUTCOME_MISSING,
            tuple(f"missing coverage for rule {r!r}" for r in report.missing),
            None,
        )
    return OUTCOME_SUCCESS, tuple(report.warnings), program


def generate_program(
    rules: RuleSet,
    backend,
    template_id: str = "v1",
    attempt_index: int = 0,
    model: str = "gpt-4",
    temperature: float = 0.7,
    max_tokens: int = 4096,
    vocabulary: Sequence[str] | None = None,
) -> GenerationOutcome:
    """One generation attempt. Only backend faults propagate."""
    bundle = build_prompt(rules, template_id)
    request = llm.user_request(bundle.rendered, model, temperature, max_tokens)
    response = llm.complete(backend, request)
    source = extract_source(response.content)
    outcome, diagnostics, program = classify_source(source, rules, vocabulary)
    return GenerationOutcome(
        category=rules.category,
        attempt_index=attempt_index,
        raw_response=response.content,
        extracted_source=source,
        outcome=outcome,
        diagnostics=diagnostics,
        program=program,
    )


def run_generation_campaign(
    rules: RuleSet,
    backend,
    n_attempts: int,
    template_id: str = "v1",
    model: str = "gpt-4",
    temperature: float = 0.7,
    max_tokens: int = 4096,
    vocabulary: Sequence[str] | None = None,
) -> CampaignResult:
    """n independent attempts; rates are plain counts over n."""
    if n_attempts < 1:
        raise ValueError("n_attempts must be >= 1")
    outcomes = tuple(
        generate_program(
            rules,
            backend,
            template_id=template_id,
            attempt_index=i,
            model=model,
            temperature=temperature,
            max_tokens=max_tokens,
            vocabulary=vocabulary,
        )
        for i in range(n_attempts)
    )
    counts = {OUTCOME_SUCCESS: 0, OUTCOME_ERROR: 0, OUTCOME_MISSING: 0}
    for outcome in outcomes:
        counts[outcome.outcome] += 1
    rates = {
        "n": n_attempts,
        "success": counts[OUTCOME_SUCCESS] / n_attempts,
        "error": counts[OUTCOME_ERROR] / n_attempts,
        "missing": counts[OUTCOME_MISSING] / n_attempts,
        "counts": counts,
    }
    return CampaignResult(category=rules.category, outcomes=outcomes, rates=rates)


def write_outcome_log(path, outcomes: Sequence[GenerationOutcome]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for outcome in outcomes:
            fh.write(json.dumps(outcome.to_dict(), sort_keys=True) + "\n")
