"""Deterministic prompt assembly from versioned template files.

A template is a directory of named text parts plus a layout with
``{{slot}}`` placeholders. Templates are data, not code: editing one
changes its content hash, which is stamped into every downstream report.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .checklang import API_REFERENCE, GRAMMAR_EBNF
from .errors import LogicodeError
from .rules import RuleSet

MAX_PROMPT_BYTES = 16 * 1024

# The generated program's output contract; the layout must state it.
OUTPUT_CONTRACT = (
    "Each check yields a boolean verdict and, when it fires, one reason "
    "string; the image is abnormal when any check fires."
)

COVERS_CONTRACT = (
    "Write exactly one check per rule and set its covers clause to that "
    "rule's identifier, so coverage can be verified mechanically."
)

JUDGE_CONTRACT = "The first line of your reply must be exactly MATCH or MISMATCH."


class PromptError(LogicodeError):
    """Prompt assembly failed (bad template or degenerate input)."""


class UnknownTemplate(PromptError):
    """Requested template id is not shipped."""


@dataclass(frozen=True)
class PromptBundle:
    template_id: str
    template_hash: str
    task_interpretation: str
    function_structuring: str
    knowledge_integration: str
    prompt_engineering: str
    rule_sentences: tuple[str, ...]
    language_spec: str
    rendered: str


def _template_root():
    return resources.files("logicode").joinpath("data/templates")


def _read_part(template_id: str, part: str) -> str:
    node = _template_root().joinpath(template_id).joinpath(f"{part}.txt")
    try:
        return node.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UnknownTemplate(f"template {template_id!r} has no part {part!r}") from None


def template_exists(template_id: str) -> bool:
    return _template_root().joinpath(template_id).is_dir()


def template_hash(template_id: str) -> str:
    """Content hash over all files of one template directory."""
    root = _template_root().joinpath(template_id)
    if not root.is_dir():
        raise UnknownTemplate(f"unknown prompt template {template_id!r}")
    h = hashlib.sha256()
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        h.update(entry.name.encode("utf-8"))
        h.update(entry.read_text(encoding="utf-8").encode("utf-8"))
    return h.hexdigest()[:16]


def _substitute(layout: str, slots: dict[str, str], template_id: str) -> str:
    rendered = layout
    for name, value in slots.items():
        rendered = rendered.replace("{{" + name + "}}", value)
    if "{{" in rendered:
        start = rendered.index("{{")
        raise PromptError(
            f"template {template_id!r} has an unfilled slot near: "
            f"{rendered[start:start + 40]!r}"
        )
    return rendered


def build_prompt(rules: RuleSet, template_id: str) -> PromptBundle:
    """Render the generation prompt for one rule set."""
    if not template_exists(template_id):
        raise UnknownTemplate(f"unknown prompt template {template_id!r}")
    if not rules.rules:
        raise PromptError("refusing to build a prompt for an empty rule set")

    task_interpretation = _read_part(template_id, "task_interpretation").strip()
    function_structuring = _read_part(template_id, "function_structuring").strip()
    knowledge_integration = _read_part(template_id, "knowledge_integration").strip()
    prompt_engineering = _read_part(template_id, "prompt_engineering").strip()
    layout = _read_part(template_id, "layout")

    language_spec = (
        "Grammar (EBNF):\n"
        + GRAMMAR_EBNF
        + "\n"
        + API_REFERENCE
        + "\n"
        + COVERS_CONTRACT
        + "\n"
    )
    sentences = tuple(rules.natural_language)
    rule_lines = []
    for rule, sentence in zip(rules.rules, sentences):
        rule_lines.append(f"- [{rule.rule_id}] {sentence}")

    rendered = _substitute(
        layout,
        {
            "category": rules.category,
            "task_interpretation": task_interpretation,
            "function_structuring": function_structuring,
            "knowledge_integration": knowledge_integration,
            "prompt_engineering": prompt_engineering,
            "rule_sentences": "\n".join(rule_lines),
            "language_spec": language_spec,
        },
        template_id,
    )
    # whitespace-insensitive: templates may wrap the sentence across lines
    if " ".join(OUTPUT_CONTRACT.split()) not in " ".join(rendered.split()):
        raise PromptError(
            f"template {template_id!r} does not state the output contract"
        )
    for sentence in sentences:
        if sentence not in rendered:
            raise PromptError(f"rule sentence missing from rendered prompt: {sentence!r}")
    if len(rendered.encode("utf-8")) > MAX_PROMPT_BYTES:
        raise PromptError(
            f"rendered prompt exceeds {MAX_PROMPT_BYTES} bytes "
            f"({len(rendered.encode('utf-8'))})"
        )
    return PromptBundle(
        template_id=template_id,
        template_hash=template_hash(template_id),
        task_interpretation=task_interpretation,
        function_structuring=function_structuring,
        knowledge_integration=knowledge_integration,
        prompt_engineering=prompt_engineering,
        rule_sentences=sentences,
        language_spec=language_spec,
        rendered=rendered,
    )


def build_judge_prompt(
    predicted_reasons, ground_truth_reasons, template_id: str = "judge_v1"
) -> str:
    """Render the reasoning-judgement prompt with both reason lists verbatim."""
    root = _template_root().joinpath(f"{template_id}.txt")
    try:
        layout = root.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UnknownTemplate(f"unknown judge template {template_id!r}") from None

    def as_lines(reasons) -> str:
        if not reasons:
            return "- (none)"
        return "\n".join(f"- {r}" for r in reasons)

    rendered = _substitute(
        layout,
        {
            "predicted_reasons": as_lines(predicted_reasons),
            "ground_truth_reasons": as_lines(ground_truth_reasons),
        },
        template_id,
    )
    if JUDGE_CONTRACT not in rendered:
        raise PromptError(f"judge template {template_id!r} lacks the verdict contract")
    return rendered


def judge_template_hash(template_id: str = "judge_v1") -> str:
    node = _template_root().joinpath(f"{template_id}.txt")
    try:
        text = node.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UnknownTemplate(f"unknown judge template {template_id!r}") from None
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
