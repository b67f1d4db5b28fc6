import json

import pytest

from logicode import execution, synth
from logicode.checklang import compile_reference
from logicode.dataset import DatasetManifest, ImageRecord, ObjectAnnotation
from logicode.rules import ruleset_hash

RULESET = synth.TEMPLATES["connector-scene"].ruleset
PROGRAM = compile_reference(RULESET)


def make_manifest(n=40, seed=9):
    config = synth.SynthConfig(
        n=n, rates={"quantity": 0.25, "size": 0.25, "position": 0.25, "matching": 0.25}
    )
    return synth.generate_synthetic(config, seed)


def detect(manifest, split="test", **kwargs):
    return execution.run_detection(
        PROGRAM,
        manifest,
        split,
        rules_hash=ruleset_hash(RULESET),
        prompt_template_hash="tmplhash",
        backend_id="oracle",
        **kwargs,
    )


class TestRunDetection:
    def test_oracle_program_matches_ground_truth(self):
        manifest = make_manifest()
        run = detect(manifest)
        truth = {r.image_id: r.label for r in manifest.records}
        assert len(run.reports) == 40
        for report in run.reports:
            assert report.predicted == truth[report.image_id]

    def test_reports_sorted_by_image_id(self):
        run = detect(make_manifest())
        ids = [r.image_id for r in run.reports]
        assert ids == sorted(ids)

    def test_degenerate_record_is_isolated(self):
        manifest = make_manifest(n=5)
        bad = ImageRecord(
            image_id="zz_bad",
            category="synthetic_connector_scene",
            split="test",
            label="normal",
            reasons=(),
            image_size=(100, 100),
            objects=(
                ObjectAnnotation("o", "cable", ((0.0, 0.0), (1.0, 1.0), (2.0, 2.0))),
            ),
        )
        merged = DatasetManifest(records=manifest.records + (bad,))
        run = detect(merged)
        by_id = {r.image_id: r for r in run.reports}
        assert by_id["zz_bad"].predicted == "evaluation_failed"
        assert "fact build failed" in by_id["zz_bad"].error
        ok = [r for r in run.reports if r.image_id != "zz_bad"]
        assert all(r.predicted != "evaluation_failed" for r in ok)

    def test_empty_split(self):
        manifest = make_manifest(n=3)
        run = detect(manifest, split="train")
        assert run.reports == ()

    def test_workers_do_not_change_results(self):
        manifest = make_manifest(n=25, seed=4)
        sequential = detect(manifest)
        parallel = detect(manifest, workers=4)
        assert [r.to_dict() for r in sequential.reports] == [
            r.to_dict() for r in parallel.reports
        ]

    def test_provenance_present(self):
        run = detect(make_manifest(n=3))
        assert run.program_hash and run.rules_hash and run.dataset_id
        assert run.backend_id == "oracle" and run.split == "test"

    def test_timings_in_memory_not_in_file(self, tmp_path):
        run = detect(make_manifest(n=3))
        assert all(r.timings is not None for r in run.reports)
        path = tmp_path / "run.json"
        execution.save_run_record(run, path)
        doc = json.loads(path.read_text())
        assert "timings" not in json.dumps(doc)

    def test_save_load_round_trip(self, tmp_path):
        run = detect(make_manifest(n=6))
        path = tmp_path / "run.json"
        execution.save_run_record(run, path)
        again = execution.load_run_record(path)
        assert again.program_hash == run.program_hash
        assert [r.to_dict() for r in again.reports] == [r.to_dict() for r in run.reports]

    def test_replay_reproducibility(self, tmp_path):
        manifest = make_manifest(n=10, seed=2)
        a, b = detect(manifest), detect(manifest)
        pa, pb = tmp_path / "a.json", tmp_path / "b.json"
        execution.save_run_record(a, pa)
        execution.save_run_record(b, pb)
        assert pa.read_bytes() == pb.read_bytes()
