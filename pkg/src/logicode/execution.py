"""Run one check program over a dataset split, one report per image.

Per-image failures (degenerate polygons, runtime evaluation faults) become
evaluation_failed reports and never abort the run. Reports are ordered by
image_id regardless of worker count, so runs are reproducible.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

from . import checklang
from .dataset import DatasetManifest, ImageRecord, dataset_id
from .facts import FactError, FactStore, build_facts
from .reports import PREDICTED_FAILED, AnalysisReport, report_from_dict


@dataclass(frozen=True)
class RunRecord:
    """One detection run with full provenance."""

    program_hash: str
    prompt_template_hash: str
    rules_hash: str
    backend_id: str
    dataset_id: str
    split: str
    reports: tuple[AnalysisReport, ...]

    def to_dict(self) -> dict:
        return {
            "program_hash": self.program_hash,
            "prompt_template_hash": self.prompt_template_hash,
            "rules_hash": self.rules_hash,
            "backend_id": self.backend_id,
            "dataset_id": self.dataset_id,
            "split": self.split,
            "reports": [r.to_dict() for r in self.reports],
        }


def run_record_from_dict(doc: dict) -> RunRecord:
    return RunRecord(
        program_hash=doc["program_hash"],
        prompt_template_hash=doc["prompt_template_hash"],
        rules_hash=doc["rules_hash"],
        backend_id=doc["backend_id"],
        dataset_id=doc["dataset_id"],
        split=doc["split"],
        reports=tuple(report_from_dict(r) for r in doc["reports"]),
    )


def save_run_record(run: RunRecord, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(run.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def load_run_record(path: str | Path) -> RunRecord:
    return run_record_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def analyze_record(
    record: ImageRecord,
    evaluator: Callable[[FactStore], AnalysisReport],
) -> AnalysisReport:
    """Build facts and evaluate; all faults collapse to evaluation_failed."""
    t0 = time.perf_counter()
    try:
        store = build_facts(record)
    except FactError as exc:
        return AnalysisReport(
            image_id=record.image_id,
            predicted=PREDICTED_FAILED,
            error=f"fact build failed: {exc}",
        )
    t1 = time.perf_counter()
    try:
        report = evaluator(store)
    except (checklang.EvaluationError, FactError) as exc:
        return AnalysisReport(
            image_id=record.image_id,
            predicted=PREDICTED_FAILED,
            error=str(exc),
            timings=(t1 - t0, time.perf_counter() - t1),
        )
    return AnalysisReport(
        image_id=report.image_id,
        predicted=report.predicted,
        reasons=report.reasons,
        warnings=report.warnings,
        error=report.error,
        timings=(t1 - t0, time.perf_counter() - t1),
    )


def run_detection(
    program: checklang.Program | None,
    manifest: DatasetManifest,
    split: str,
    *,
    rules_hash: str,
    prompt_template_hash: str,
    backend_id: str,
    workers: int = 1,
    evaluator: Callable[[FactStore], AnalysisReport] | None = None,
) -> RunRecord:
    """Evaluate the program on every image of a split.

    ``evaluator`` may swap in another backend with the same contract (used
    by the foreign-runtime shim, in which case ``program`` may be None);
    default is the embedded interpreter.
    """
    if evaluator is None:
        if program is None:
            raise ValueError("run_detection needs a program or an evaluator")
        def evaluator(store: FactStore) -> AnalysisReport:
            return checklang.evaluate(program, store)

    records = sorted(
        (r for r in manifest.records if r.split == split), key=lambda r: r.image_id
    )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            reports = tuple(pool.map(lambda r: analyze_record(r, evaluator), records))
    else:
        reports = tuple(analyze_record(r, evaluator) for r in records)

    return RunRecord(
        program_hash=checklang.program_hash(program) if program is not None else "external",
        prompt_template_hash=prompt_template_hash,
        rules_hash=rules_hash,
        backend_id=backend_id,
        dataset_id=dataset_id(manifest),
        split=split,
        reports=reports,
    )
