"""Drive the primary pipeline's detection runner with a shim-backed
evaluator: verbatim Python replaces the embedded interpreter through the
documented evaluator hook, and verdicts still match ground truth."""

import textwrap

from logicode import execution, synth
from logicode.facts import fact_table
from logicode.reports import AnalysisReport
from logicode_pyshim import shim_evaluate

# Reference implementation of the whole connector-scene rule set, reasons
# in rule order with the exact template wording.
FULL_SOURCE = textwrap.dedent(
    '''
    def analyze_image(image_path):
        img = Image(image_path)
        reasons = []

        n_cable = img.count("cable")
        if n_cable != 1:
            reasons.append(f"Quantity Anomaly: expected 1 cable, found {n_cable}")
        n_conn = img.count("connector")
        if n_conn != 3:
            reasons.append(f"Quantity Anomaly: expected 3 connector, found {n_conn}")

        if n_cable >= 1:
            length = img.size(img.find("cable")[0])["length"]
            if not (90.0 <= length <= 110.0):
                reasons.append(
                    f"Size Anomaly: cable length {length:.2f} outside [90.00, 110.00]"
                )

        expected = ["red", "green", "blue"]
        ids = img.order("connector", "x")
        if len(ids) == len(expected):
            observed = [img.color(i)["name"] for i in ids]
            if observed != expected:
                reasons.append(
                    "Position Anomaly: connector order ["
                    + ", ".join(observed)
                    + "] expected [red, green, blue]"
                )

        mapping = {"orange": 2, "purple": 4, "yellow": 3}
        if n_cable >= 1:
            value = img.color(img.find("cable")[0])["name"]
            if mapping.get(value) != n_conn:
                reasons.append(
                    f"Matching Anomaly: cable color {value} "
                    f"does not match connector count {n_conn}"
                )

        return (len(reasons) > 0, "; ".join(reasons))
    '''
)


def shim_backed_evaluator(store) -> AnalysisReport:
    result = shim_evaluate(FULL_SOURCE, fact_table(store), timeout_s=15.0)
    return AnalysisReport(
        image_id=result["image_id"],
        predicted=result["predicted"],
        reasons=tuple(result["reasons"]),
        error=result["error"],
    )


def test_detection_run_through_the_shim():
    config = synth.SynthConfig(
        n=20, rates={"quantity": 0.3, "size": 0.3, "position": 0.3, "matching": 0.3}
    )
    manifest = synth.generate_synthetic(config, seed=17)
    run = execution.run_detection(
        None,  # program unused: the evaluator hook replaces the interpreter
        manifest,
        "test",
        rules_hash="parity",
        prompt_template_hash="parity",
        backend_id="pyshim",
        evaluator=shim_backed_evaluator,
    )
    truth = {r.image_id: r for r in manifest.records}
    assert len(run.reports) == 20
    for report in run.reports:
        record = truth[report.image_id]
        assert report.predicted == record.label, report.image_id
        if report.predicted == "abnormal":
            assert tuple(sorted(report.reasons)) == record.reasons, report.image_id
