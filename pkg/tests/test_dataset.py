import json

import pytest

from logicode import dataset, synth
from logicode.dataset import (
    DatasetManifest,
    ImageRecord,
    InvariantError,
    ObjectAnnotation,
    SchemaError,
    load_manifest,
    parse_reason,
    record_from_dict,
    record_to_dict,
    validate_record,
    write_manifest,
)
from logicode.facts import build_facts
from logicode.rules import evaluate_ruleset


def make_record(image_id="img_0", label="normal", reasons=(), objects=None, split="test"):
    if objects is None:
        objects = (
            ObjectAnnotation(
                object_id="obj_0",
                name="cable",
                polygon=((10.0, 10.0), (50.0, 10.0), (50.0, 20.0), (10.0, 20.0)),
                attributes={"color_rgb": [255, 0, 0]},
            ),
        )
    return ImageRecord(
        image_id=image_id,
        category="synthetic_connector_scene",
        split=split,
        label=label,
        reasons=tuple(reasons),
        image_size=(100, 100),
        objects=tuple(objects),
    )


class TestReasonGrammar:
    @pytest.mark.parametrize(
        "reason,expected_type",
        [
            ("Quantity Anomaly: expected 1 cable, found 2", "Quantity Anomaly"),
            ("Size Anomaly: too long", "Size Anomaly"),
            ("Position Anomaly: out of order", "Position Anomaly"),
            ("Matching Anomaly: color mismatch", "Matching Anomaly"),
        ],
    )
    def test_valid(self, reason, expected_type):
        atype, text = parse_reason(reason)
        assert atype == expected_type
        assert text

    @pytest.mark.parametrize(
        "reason",
        ["Quantity Anomaly:", "Weird Anomaly: x", "no separator", "Quantity Anomaly x"],
    )
    def test_invalid(self, reason):
        with pytest.raises(InvariantError):
            parse_reason(reason)


class TestRecordValidation:
    def test_clean_record(self):
        assert validate_record(make_record()) == []

    def test_normal_with_reasons(self):
        rec = make_record(label="normal", reasons=("Quantity Anomaly: x",))
        assert any("inconsistent" in v for v in validate_record(rec))

    def test_abnormal_without_reasons(self):
        rec = make_record(label="abnormal")
        assert any("inconsistent" in v for v in validate_record(rec))

    def test_vertex_outside_bounds(self):
        obj = ObjectAnnotation(
            "o", "cable", ((10.0, 10.0), (150.0, 10.0), (150.0, 20.0), (10.0, 20.0))
        )
        assert any("outside" in v for v in validate_record(make_record(objects=(obj,))))

    def test_duplicate_object_id(self):
        base = make_record().objects[0]
        rec = make_record(objects=(base, base))
        assert any("duplicate object_id" in v for v in validate_record(rec))

    def test_too_few_points(self):
        obj = ObjectAnnotation("o", "cable", ((0.0, 0.0), (1.0, 1.0)))
        assert any("points" in v for v in validate_record(make_record(objects=(obj,))))

    def test_zero_area(self):
        obj = ObjectAnnotation("o", "cable", ((0.0, 0.0), (1.0, 1.0), (2.0, 2.0)))
        assert any("zero area" in v for v in validate_record(make_record(objects=(obj,))))

    def test_self_intersection(self):
        # bowtie
        obj = ObjectAnnotation(
            "o", "cable", ((0.0, 0.0), (10.0, 10.0), (10.0, 0.0), (0.0, 10.0))
        )
        assert any("self-intersects" in v for v in validate_record(make_record(objects=(obj,))))


class TestSchema:
    def test_round_trip_dict(self):
        rec = make_record(label="abnormal", reasons=("Size Anomaly: cable too long",))
        again = record_from_dict(record_to_dict(rec))
        assert again == ImageRecord(
            image_id=rec.image_id,
            category=rec.category,
            split=rec.split,
            label=rec.label,
            reasons=tuple(sorted(rec.reasons)),
            image_size=rec.image_size,
            objects=rec.objects,
        )

    @pytest.mark.parametrize("missing", ["image_id", "category", "label", "objects"])
    def test_missing_field(self, missing):
        doc = record_to_dict(make_record())
        del doc[missing]
        with pytest.raises(SchemaError, match=missing):
            record_from_dict(doc)

    def test_wrong_type(self):
        doc = record_to_dict(make_record())
        doc["reasons"] = "nope"
        with pytest.raises(SchemaError):
            record_from_dict(doc)

    def test_bad_polygon_point(self):
        doc = record_to_dict(make_record())
        doc["objects"][0]["polygon"][0] = [1.0]
        with pytest.raises(SchemaError, match="polygon"):
            record_from_dict(doc)


class TestManifestIO:
    def test_load_two_images(self, tmp_path):
        manifest = DatasetManifest(records=(make_record("a"), make_record("b")))
        write_manifest(manifest, tmp_path)
        loaded = load_manifest(tmp_path)
        assert len(loaded.records) == 2
        assert [r.image_id for r in loaded.records] == ["a", "b"]

    def test_round_trip_semantic_equality(self, tmp_path):
        manifest = DatasetManifest(
            records=(
                make_record("b", label="abnormal", reasons=("Quantity Anomaly: missing",)),
                make_record("a"),
            )
        )
        write_manifest(manifest, tmp_path / "one")
        loaded = load_manifest(tmp_path / "one")
        write_manifest(loaded, tmp_path / "two")
        first = sorted((tmp_path / "one").glob("*.json"))
        second = sorted((tmp_path / "two").glob("*.json"))
        assert [p.name for p in first] == [p.name for p in second]
        for p1, p2 in zip(first, second):
            assert p1.read_bytes() == p2.read_bytes()

    def test_normal_with_reasons_raises(self, tmp_path):
        doc = record_to_dict(make_record())
        doc["reasons"] = ["Quantity Anomaly: x"]
        (tmp_path / "img_0.json").write_text(json.dumps(doc))
        (tmp_path / "manifest.json").write_text(json.dumps({"files": ["img_0.json"]}))
        with pytest.raises(InvariantError):
            load_manifest(tmp_path)

    def test_schema_error_collects_all(self, tmp_path):
        (tmp_path / "x.json").write_text("{}")
        (tmp_path / "y.json").write_text("not json")
        (tmp_path / "manifest.json").write_text(json.dumps({"files": ["x.json", "y.json"]}))
        with pytest.raises(SchemaError) as err:
            load_manifest(tmp_path)
        assert len(err.value.violations) == 2

    def test_missing_index(self, tmp_path):
        with pytest.raises(SchemaError, match="manifest index"):
            load_manifest(tmp_path)

    def test_duplicate_image_id(self, tmp_path):
        doc = record_to_dict(make_record("dup"))
        (tmp_path / "a.json").write_text(json.dumps(doc))
        (tmp_path / "b.json").write_text(json.dumps(doc))
        (tmp_path / "manifest.json").write_text(json.dumps({"files": ["a.json", "b.json"]}))
        with pytest.raises(InvariantError, match="duplicate image_id"):
            load_manifest(tmp_path)


class TestSynthetic:
    def test_no_injection_all_normal(self):
        manifest = synth.generate_synthetic(synth.SynthConfig(n=10), seed=1)
        assert len(manifest.records) == 10
        assert all(r.label == "normal" and not r.reasons for r in manifest.records)

    def test_quantity_rate_one(self):
        config = synth.SynthConfig(n=20, rates={"quantity": 1.0})
        manifest = synth.generate_synthetic(config, seed=2)
        for rec in manifest.records:
            cables = [o for o in rec.objects if o.name == "cable"]
            assert len(cables) in (0, 2)
            assert rec.label == "abnormal"
            assert any(r.startswith("Quantity Anomaly:") for r in rec.reasons)

    def test_determinism_byte_identical(self, tmp_path):
        config = synth.SynthConfig(
            n=15, rates={"quantity": 0.3, "size": 0.3, "position": 0.3, "matching": 0.3}
        )
        write_manifest(synth.generate_synthetic(config, seed=5), tmp_path / "a")
        write_manifest(synth.generate_synthetic(config, seed=5), tmp_path / "b")
        for p1 in sorted((tmp_path / "a").glob("*.json")):
            p2 = tmp_path / "b" / p1.name
            assert p1.read_bytes() == p2.read_bytes()

    def test_all_four_types_reachable(self):
        config = synth.SynthConfig(
            n=80, rates={"quantity": 0.25, "size": 0.25, "position": 0.25, "matching": 0.25}
        )
        manifest = synth.generate_synthetic(config, seed=3)
        types = {r.split(":")[0] for rec in manifest.records for r in rec.reasons}
        assert types == set(dataset.ANOMALY_TYPES)

    def test_generator_soundness(self):
        config = synth.SynthConfig(
            n=60, rates={"quantity": 0.2, "size": 0.2, "position": 0.2, "matching": 0.2}
        )
        manifest = synth.generate_synthetic(config, seed=4)
        ruleset = synth.TEMPLATES["connector-scene"].ruleset
        for rec in manifest.records:
            report = evaluate_ruleset(ruleset, build_facts(rec))
            assert report.predicted == rec.label
            assert {r.split(":")[0] for r in report.reasons} == {
                r.split(":")[0] for r in rec.reasons
            }

    def test_records_validate(self):
        config = synth.SynthConfig(
            n=30, train_n=5, rates={"quantity": 0.5, "size": 0.5, "position": 0.5, "matching": 0.5}
        )
        manifest = synth.generate_synthetic(config, seed=6)
        assert len(manifest.records) == 35
        for rec in manifest.records:
            assert validate_record(rec) == []

    @pytest.mark.parametrize(
        "config",
        [
            synth.SynthConfig(template="no-such-scene"),
            synth.SynthConfig(rates={"quantity": 1.5}),
            synth.SynthConfig(rates={"gravity": 0.5}),
            synth.SynthConfig(n=-1),
        ],
    )
    def test_config_errors(self, config):
        with pytest.raises(dataset.ConfigError):
            synth.generate_synthetic(config, seed=0)
