"""Per-image analysis verdicts shared by the rule evaluator, the check
interpreter and the execution runner."""

from __future__ import annotations

from dataclasses import dataclass

PREDICTED_NORMAL = "normal"
PREDICTED_ABNORMAL = "abnormal"
PREDICTED_FAILED = "evaluation_failed"


@dataclass(frozen=True)
class AnalysisReport:
    """Verdict for one image: a label plus the reasons that fired.

    ``timings`` holds (fact_build_s, evaluate_s) when measured; it is
    runtime-only and never serialized so report files stay byte-stable.
    """

    image_id: str
    predicted: str
    reasons: tuple[str, ...] = ()
    warnings: tuple[str, ...] = ()
    error: str | None = None
    timings: tuple[float, float] | None = None

    def __post_init__(self):
        if self.predicted == PREDICTED_NORMAL and self.reasons:
            raise ValueError(f"{self.image_id}: normal verdict with reasons")
        if self.predicted == PREDICTED_ABNORMAL and not self.reasons:
            raise ValueError(f"{self.image_id}: abnormal verdict without reasons")

    @property
    def reason_string(self) -> str:
        return "; ".join(self.reasons)

    def to_dict(self) -> dict:
        doc = {
            "image_id": self.image_id,
            "predicted": self.predicted,
            "reasons": list(self.reasons),
            "reason_string": self.reason_string,
        }
        if self.warnings:
            doc["warnings"] = list(self.warnings)
        if self.error is not None:
            doc["error"] = self.error
        return doc


def report_from_dict(doc: dict) -> AnalysisReport:
    return AnalysisReport(
        image_id=doc["image_id"],
        predicted=doc["predicted"],
        reasons=tuple(doc.get("reasons", ())),
        warnings=tuple(doc.get("warnings", ())),
        error=doc.get("error"),
    )
