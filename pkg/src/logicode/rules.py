"""Per-category logical rule sets and the reference rule evaluator.

Rules are expert-authored constraints with typed parameters. The evaluator
here is the ground-truth semantics that generated check programs are
compared against: bounds are inclusive, measured values render at two
decimals, and a rule whose subject is absent from the store is skipped with
a warning (except presence_required, which is exactly the absence check).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from .dataset import ANOMALY_TYPES, format_reason
from .errors import LogicodeError
from .facts import AXES, PALETTE, FactStore
from .reports import PREDICTED_ABNORMAL, PREDICTED_NORMAL, AnalysisReport

KINDS = (
    "count_equals",
    "count_in_range",
    "length_in_range",
    "area_in_range",
    "order_matches",
    "attribute_match",
    "presence_required",
)

# Attributes the matching rule may key on. Only the derived palette color is
# supported today; raw annotation attributes would need a fact query of
# their own.
MATCH_ATTRIBUTES = ("color_name",)


class RuleError(LogicodeError):
    """A rule file or rule set fails its structural checks."""

    def __init__(self, message: str, problems: list[str] | None = None):
        super().__init__(message)
        self.problems = problems or [message]


@dataclass(frozen=True)
class Rule:
    rule_id: str
    anomaly_type: str
    kind: str
    subject: str | tuple[str, str]
    params: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class RuleSet:
    category: str
    rules: tuple[Rule, ...]
    natural_language: tuple[str, ...]


@dataclass(frozen=True)
class Verdict:
    """Outcome of one rule on one store."""

    fired: bool
    reason: str | None = None
    skipped: bool = False
    warning: str | None = None


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def lint_rule(rule: Rule) -> list[str]:
    """All structural problems with one rule (empty list = clean)."""
    p: list[str] = []
    rid = rule.rule_id or "<unnamed>"
    if not rule.rule_id:
        p.append("rule without rule_id")
    if rule.anomaly_type not in ANOMALY_TYPES:
        p.append(f"{rid}: unknown anomaly_type {rule.anomaly_type!r}")
    if rule.kind not in KINDS:
        p.append(f"{rid}: unknown kind {rule.kind!r}")
        return p
    params = rule.params
    if rule.kind == "attribute_match":
        if not (isinstance(rule.subject, tuple) and len(rule.subject) == 2):
            p.append(f"{rid}: attribute_match subject must be a (source, target) pair")
    elif not isinstance(rule.subject, str) or not rule.subject:
        p.append(f"{rid}: subject must be an object name")

    def need_bounds():
        bounds = params.get("bounds")
        if (
            not isinstance(bounds, (list, tuple))
            or len(bounds) != 2
            or not all(isinstance(b, (int, float)) and not isinstance(b, bool) for b in bounds)
        ):
            p.append(f"{rid}: bounds must be [min, max]")
        elif bounds[0] > bounds[1]:
            p.append(f"{rid}: bounds min {bounds[0]} > max {bounds[1]}")

    if rule.kind == "count_equals":
        expected = params.get("expected")
        if not isinstance(expected, int) or isinstance(expected, bool) or expected < 0:
            p.append(f"{rid}: expected count must be an integer >= 0")
    elif rule.kind == "count_in_range":
        need_bounds()
        bounds = params.get("bounds")
        if isinstance(bounds, (list, tuple)) and any(
            isinstance(b, (int, float)) and b < 0 for b in bounds
        ):
            p.append(f"{rid}: count bounds must be >= 0")
    elif rule.kind in ("length_in_range", "area_in_range"):
        need_bounds()
    elif rule.kind == "order_matches":
        if params.get("axis") not in AXES:
            p.append(f"{rid}: axis must be one of {AXES}")
        expected = params.get("expected")
        if (
            not isinstance(expected, (list, tuple))
            or not expected
            or not all(isinstance(e, str) for e in expected)
        ):
            p.append(f"{rid}: expected order must be a non-empty list of color names")
        elif any(e not in PALETTE for e in expected):
            p.append(f"{rid}: expected order uses colors outside the palette")
    elif rule.kind == "attribute_match":
        if params.get("attribute") not in MATCH_ATTRIBUTES:
            p.append(f"{rid}: attribute must be one of {MATCH_ATTRIBUTES}")
        mapping = params.get("mapping")
        if not isinstance(mapping, Mapping) or not mapping:
            p.append(f"{rid}: mapping must be a non-empty object")
        elif not all(
            isinstance(k, str) and isinstance(v, int) and not isinstance(v, bool) and v >= 0
            for k, v in mapping.items()
        ):
            p.append(f"{rid}: mapping must map color names to counts >= 0")
    return p


def lint_ruleset(ruleset: RuleSet, attribute_vocabulary: Sequence[str] | None = None) -> list[str]:
    problems: list[str] = []
    seen: set[str] = set()
    for rule in ruleset.rules:
        if rule.rule_id in seen:
            problems.append(f"duplicate rule_id {rule.rule_id!r}")
        seen.add(rule.rule_id)
        problems.extend(lint_rule(rule))
        if (
            attribute_vocabulary is not None
            and rule.kind == "attribute_match"
            and rule.params.get("attribute") not in attribute_vocabulary
        ):
            problems.append(
                f"{rule.rule_id}: attribute {rule.params.get('attribute')!r} "
                "not declared by the scene"
            )
    if len(ruleset.rules) != len(ruleset.natural_language):
        problems.append(
            f"{len(ruleset.rules)} rules but {len(ruleset.natural_language)} "
            "natural-language sentences"
        )
    return problems


def subject_names(rule: Rule) -> tuple[str, ...]:
    if isinstance(rule.subject, tuple):
        return rule.subject
    return (rule.subject,)


def evaluate_rule(rule: Rule, store: FactStore) -> Verdict:
    """Reference semantics for one rule; see the module docstring."""
    kind = rule.kind
    params = rule.params

    if kind == "count_equals":
        subject = rule.subject
        expected = params["expected"]
        n = store.count(subject)
        if n == expected:
            return Verdict(fired=False)
        return Verdict(
            fired=True,
            reason=format_reason(rule.anomaly_type, f"expected {expected} {subject}, found {n}"),
        )

    if kind == "count_in_range":
        subject = rule.subject
        lo, hi = params["bounds"]
        n = store.count(subject)
        if lo <= n <= hi:
            return Verdict(fired=False)
        return Verdict(
            fired=True,
            reason=format_reason(
                rule.anomaly_type, f"{subject} count {n} outside [{lo}, {hi}]"
            ),
        )

    if kind == "presence_required":
        subject = rule.subject
        if store.count(subject) > 0:
            return Verdict(fired=False)
        return Verdict(
            fired=True,
            reason=format_reason(rule.anomaly_type, f"expected >=1 {subject}, found 0"),
        )

    if kind in ("length_in_range", "area_in_range"):
        subject = rule.subject
        objs = store.find(subject)
        if not objs:
            return Verdict(
                fired=False,
                skipped=True,
                warning=f"{rule.rule_id}: no {subject!r} in store, evaluation skipped",
            )
        measure = "length" if kind == "length_in_range" else "area"
        value = objs[0].length if kind == "length_in_range" else objs[0].area
        lo, hi = params["bounds"]
        if lo <= value <= hi:
            return Verdict(fired=False)
        return Verdict(
            fired=True,
            reason=format_reason(
                rule.anomaly_type,
                f"{subject} {measure} {_fmt(value)} outside [{_fmt(lo)}, {_fmt(hi)}]",
            ),
        )

    if kind == "order_matches":
        subject = rule.subject
        expected = list(params["expected"])
        observed = [o.color_name for o in store.order(subject, params["axis"])]
        if len(observed) != len(expected):
            return Verdict(
                fired=False,
                skipped=True,
                warning=(
                    f"{rule.rule_id}: found {len(observed)} {subject!r} but the "
                    f"expected order has {len(expected)}, evaluation skipped"
                ),
            )
        if observed == expected:
            return Verdict(fired=False)
        return Verdict(
            fired=True,
            reason=format_reason(
                rule.anomaly_type,
                f"{subject} order [{', '.join(observed)}] "
                f"expected [{', '.join(expected)}]",
            ),
        )

    if kind == "attribute_match":
        source, target = rule.subject
        mapping = params["mapping"]
        sources = store.find(source)
        if not sources:
            return Verdict(
                fired=False,
                skipped=True,
                warning=f"{rule.rule_id}: no {source!r} in store, evaluation skipped",
            )
        value = sources[0].color_name
        n = store.count(target)
        if value in mapping and mapping[value] == n:
            return Verdict(fired=False)
        return Verdict(
            fired=True,
            reason=format_reason(
                rule.anomaly_type,
                f"{source} color {value} does not match {target} count {n}",
            ),
        )

    raise RuleError(f"{rule.rule_id}: unknown kind {kind!r}")


def evaluate_ruleset(ruleset: RuleSet, store: FactStore) -> AnalysisReport:
    """Evaluate every rule in order; abnormal when any rule fires."""
    reasons: list[str] = []
    warnings: list[str] = []
    for rule in ruleset.rules:
        verdict = evaluate_rule(rule, store)
        if verdict.fired:
            reasons.append(verdict.reason)
        if verdict.warning:
            warnings.append(verdict.warning)
    return AnalysisReport(
        image_id=store.image_id,
        predicted=PREDICTED_ABNORMAL if reasons else PREDICTED_NORMAL,
        reasons=tuple(reasons),
        warnings=tuple(warnings),
    )


def sentence_for_rule(rule: Rule) -> str:
    """Plain-English statement of a rule, used in prompt assembly."""
    params = rule.params
    if rule.kind == "count_equals":
        return f"There must be exactly {params['expected']} {rule.subject} object(s)."
    if rule.kind == "count_in_range":
        lo, hi = params["bounds"]
        return f"The number of {rule.subject} objects must be between {lo} and {hi}."
    if rule.kind == "presence_required":
        return f"At least one {rule.subject} must be present."
    if rule.kind == "length_in_range":
        lo, hi = params["bounds"]
        return f"The {rule.subject} length must lie within [{_fmt(lo)}, {_fmt(hi)}] pixels."
    if rule.kind == "area_in_range":
        lo, hi = params["bounds"]
        return (
            f"The {rule.subject} area must lie within [{_fmt(lo)}, {_fmt(hi)}] square pixels."
        )
    if rule.kind == "order_matches":
        expected = ", ".join(params["expected"])
        return (
            f"Sorted along the {params['axis']}-axis, the {rule.subject} "
            f"colors must be [{expected}]."
        )
    if rule.kind == "attribute_match":
        source, target = rule.subject
        pairs = ", ".join(f"{k} -> {v}" for k, v in sorted(params["mapping"].items()))
        return f"The {source} color determines the required {target} count ({pairs})."
    raise RuleError(f"{rule.rule_id}: unknown kind {rule.kind!r}")


def ruleset_with_sentences(category: str, rules: Sequence[Rule]) -> RuleSet:
    return RuleSet(
        category=category,
        rules=tuple(rules),
        natural_language=tuple(sentence_for_rule(r) for r in rules),
    )


def rule_to_dict(rule: Rule) -> dict[str, Any]:
    subject: Any = list(rule.subject) if isinstance(rule.subject, tuple) else rule.subject
    return {
        "rule_id": rule.rule_id,
        "anomaly_type": rule.anomaly_type,
        "kind": rule.kind,
        "subject": subject,
        "params": {k: v for k, v in sorted(rule.params.items())},
    }


def ruleset_to_dict(ruleset: RuleSet) -> dict[str, Any]:
    return {
        "category": ruleset.category,
        "rules": [rule_to_dict(r) for r in ruleset.rules],
        "natural_language": list(ruleset.natural_language),
    }


def rule_from_dict(doc: Mapping[str, Any]) -> Rule:
    try:
        subject = doc["subject"]
        if isinstance(subject, list):
            if len(subject) != 2:
                raise RuleError(f"subject pair must have 2 names, got {subject!r}")
            subject = (subject[0], subject[1])
        params = dict(doc.get("params", {}))
        bounds = params.get("bounds")
        if isinstance(bounds, list):
            params["bounds"] = tuple(bounds)
        expected = params.get("expected")
        if isinstance(expected, list):
            params["expected"] = tuple(expected)
        return Rule(
            rule_id=doc["rule_id"],
            anomaly_type=doc["anomaly_type"],
            kind=doc["kind"],
            subject=subject,
            params=params,
        )
    except KeyError as exc:
        raise RuleError(f"rule missing field {exc.args[0]!r}") from exc


def ruleset_from_dict(doc: Mapping[str, Any]) -> RuleSet:
    for key in ("category", "rules", "natural_language"):
        if key not in doc:
            raise RuleError(f"rule file missing field {key!r}")
    return RuleSet(
        category=doc["category"],
        rules=tuple(rule_from_dict(r) for r in doc["rules"]),
        natural_language=tuple(doc["natural_language"]),
    )


def load_ruleset(path: str | Path) -> RuleSet:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RuleError(f"{path}: invalid JSON ({exc})") from exc
    ruleset = ruleset_from_dict(doc)
    problems = lint_ruleset(ruleset)
    if problems:
        raise RuleError(f"{path}: {len(problems)} problem(s); first: {problems[0]}", problems)
    return ruleset


def save_ruleset(ruleset: RuleSet, path: str | Path) -> None:
    payload = json.dumps(ruleset_to_dict(ruleset), sort_keys=True, indent=2)
    Path(path).write_text(payload + "\n", encoding="utf-8")


def ruleset_hash(ruleset: RuleSet) -> str:
    canonical = json.dumps(ruleset_to_dict(ruleset), sort_keys=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]
