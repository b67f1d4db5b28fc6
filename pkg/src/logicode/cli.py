"""Command-line entry point wiring the whole pipeline.

Subcommands mirror the pipeline stages; ``e2e`` drives them end to end
from one JSON (or TOML, where the interpreter supports it) config file.
Exit codes: 0 ok, 2 configuration, 3 backend, 4 data.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bench, checklang, codegen, dataset, execution, facts, llm, rules, synth
from .errors import LogicodeError
from .prompt import PromptError, UnknownTemplate, build_prompt, template_hash

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_DATA = 4

_CONFIG_ERRORS = (dataset.ConfigError, UnknownTemplate, PromptError, ValueError)
_BACKEND_ERRORS = (llm.TransportError, llm.AuthError, llm.CassetteMiss)
_DATA_ERRORS = (
    dataset.SchemaError,
    dataset.InvariantError,
    rules.RuleError,
    facts.FactError,
    bench.MissingGroundTruth,
    checklang.ParseError,
)


class _NoSuccessfulGeneration(LogicodeError):
    """Campaign produced no program classified as success."""


def _load_ruleset_arg(args) -> rules.RuleSet:
    if getattr(args, "rules", None):
        return rules.load_ruleset(args.rules)
    name = getattr(args, "template_rules", None)
    if name:
        if name not in synth.TEMPLATES:
            raise dataset.ConfigError(f"unknown scene template {name!r}")
        return synth.TEMPLATES[name].ruleset
    raise dataset.ConfigError("one of --rules or --template-rules is required")


def _vocabulary_for(ruleset: rules.RuleSet) -> tuple[str, ...] | None:
    template = synth.template_for_category(ruleset.category)
    if template:
        return template.object_names
    names: set[str] = set()
    for rule in ruleset.rules:
        names.update(rules.subject_names(rule))
    return tuple(sorted(names)) or None


def _build_backend(kind: str, *, cassette=None, record=None, ruleset=None):
    if kind == "oracle":
        return llm.OracleStubBackend(ruleset)
    if kind == "replay":
        if not cassette:
            raise dataset.ConfigError("replay backend needs a cassette path")
        return llm.ReplayBackend(cassette)
    if kind == "live":
        return llm.live_backend_from_env(record_path=record)
    raise dataset.ConfigError(f"unknown backend kind {kind!r}")


# ----------------------------------------------------------------- dataset


def _cmd_dataset_synth(args) -> int:
    rates = {
        "quantity": args.rate_quantity,
        "size": args.rate_size,
        "position": args.rate_position,
        "matching": args.rate_matching,
    }
    config = synth.SynthConfig(
        template=args.template, n=args.n, rates=rates, train_n=args.train_n
    )
    manifest = synth.generate_synthetic(config, args.seed)
    dataset.write_manifest(manifest, args.out)
    counts = manifest.counts()
    total = sum(counts.values())
    abnormal = sum(1 for r in manifest.records if r.label == "abnormal")
    print(f"wrote {total} records ({abnormal} abnormal) to {args.out}")
    return EXIT_OK


def _cmd_dataset_validate(args) -> int:
    try:
        manifest = dataset.load_manifest(args.root)
    except (dataset.SchemaError, dataset.InvariantError) as exc:
        for violation in exc.violations:
            print(f"violation: {violation}", file=sys.stderr)
        return EXIT_DATA
    counts = manifest.counts()
    for (split, category), n in sorted(counts.items()):
        print(f"{split}/{category}: {n}")
    print(f"ok: {len(manifest.records)} records")
    return EXIT_OK


# ------------------------------------------------------------------- rules


def _cmd_rules_lint(args) -> int:
    try:
        ruleset = rules.load_ruleset(args.file)
    except rules.RuleError as exc:
        for problem in exc.problems:
            print(f"problem: {problem}", file=sys.stderr)
        return EXIT_DATA
    print(f"ok: {len(ruleset.rules)} rules for category {ruleset.category}")
    return EXIT_OK


# ------------------------------------------------------------------- facts


def _cmd_facts_dump(args) -> int:
    record = dataset.load_record(Path(args.record))
    violations = dataset.validate_record(record)
    if violations:
        raise dataset.InvariantError(
            f"{len(violations)} invariant violation(s); first: {violations[0]}", violations
        )
    store = facts.build_facts(record)
    print(facts.dump_fact_table(store))
    return EXIT_OK


# ------------------------------------------------------------------ prompt


def _cmd_prompt_render(args) -> int:
    ruleset = _load_ruleset_arg(args)
    bundle = build_prompt(ruleset, args.template)
    if args.out:
        Path(args.out).write_text(bundle.rendered, encoding="utf-8")
        print(f"wrote prompt ({bundle.template_hash}) to {args.out}")
    else:
        print(bundle.rendered)
    return EXIT_OK


# ----------------------------------------------------------------- codegen


def _cmd_codegen_run(args) -> int:
    ruleset = _load_ruleset_arg(args)
    backend = _build_backend(
        args.backend, cassette=args.cassette, record=args.record, ruleset=ruleset
    )
    campaign = codegen.run_generation_campaign(
        ruleset,
        backend,
        args.n,
        template_id=args.template,
        model=args.model,
        temperature=args.temperature,
        vocabulary=_vocabulary_for(ruleset),
    )
    codegen.write_outcome_log(args.out, campaign.outcomes)
    rates = campaign.rates
    print(
        f"{campaign.category}: success {rates['success']:.3f} "
        f"error {rates['error']:.3f} missing {rates['missing']:.3f} (n={rates['n']})"
    )
    if args.program_out:
        first = campaign.first_success()
        if first is None:
            raise _NoSuccessfulGeneration("no successful generation to write")
        Path(args.program_out).write_text(
            checklang.pretty_print(first.program), encoding="utf-8"
        )
        print(f"wrote program to {args.program_out}")
    return EXIT_OK


# -------------------------------------------------------------------- exec


def _cmd_exec_run(args) -> int:
    ruleset = _load_ruleset_arg(args)
    source = Path(args.program).read_text(encoding="utf-8")
    program = checklang.parse(source)
    report = checklang.validate(program, ruleset, _vocabulary_for(ruleset))
    if report.type_errors:
        for problem in report.type_errors:
            print(f"type error: {problem}", file=sys.stderr)
        return EXIT_DATA
    if report.missing:
        print(f"program does not cover rules: {', '.join(report.missing)}", file=sys.stderr)
        return EXIT_DATA
    manifest = dataset.load_manifest(args.data)
    run = execution.run_detection(
        program,
        manifest,
        args.split,
        rules_hash=rules.ruleset_hash(ruleset),
        prompt_template_hash=template_hash(args.prompt_template),
        backend_id=args.backend_id,
        workers=args.workers,
    )
    execution.save_run_record(run, args.out)
    n_failed = sum(1 for r in run.reports if r.predicted == "evaluation_failed")
    print(f"wrote {len(run.reports)} reports ({n_failed} failed) to {args.out}")
    return EXIT_OK


# ------------------------------------------------------------------- bench


def _cmd_bench_score(args) -> int:
    manifest = dataset.load_manifest(args.data)
    scores = [
        bench.score_binary(execution.load_run_record(path), manifest) for path in args.run
    ]
    report = bench.average_runs(scores)
    doc = {
        "metrics": report.to_dict(),
        "counts": [s.counts.to_dict() for s in scores],
    }
    if args.out:
        bench.save_json(doc, args.out)
    rendered = bench.render_metrics(report.averages)
    print(
        f"{report.category}: accuracy {rendered['accuracy']} precision "
        f"{rendered['precision']} recall {rendered['recall']} f1 {rendered['f1']}"
    )
    return EXIT_OK


def _cmd_bench_judge(args) -> int:
    manifest = dataset.load_manifest(args.data)
    run = execution.load_run_record(args.run[0])
    ruleset = None
    if args.rules or args.template_rules:
        ruleset = _load_ruleset_arg(args)
    backend = _build_backend(args.backend, cassette=args.cassette, ruleset=ruleset)
    report = bench.judge_reasoning(
        run, manifest, backend, template_id=args.judge_template, model=args.model
    )
    if args.out:
        bench.save_json(report.to_dict(), args.out)
    accuracy = bench.fmt3(report.accuracy) if report.accuracy is not None else "n/a"
    print(
        f"reasoning accuracy {accuracy} "
        f"({report.matches} match / {report.mismatches} mismatch / "
        f"{report.unparseable} unparseable)"
    )
    return EXIT_OK


def _cmd_bench_report(args) -> int:
    metrics_doc = json.loads(Path(args.metrics).read_text(encoding="utf-8"))
    sections = ["# Benchmark report", ""]
    m = metrics_doc["metrics"]
    report = bench.MetricsReport(
        category=m["category"],
        n_runs=m["n_runs"],
        per_run=tuple(m["per_run"]),
        averages=m["averages"],
    )
    sections += ["## Binary classification", "", bench.metrics_markdown([report]), ""]
    if args.judge:
        judge_doc = json.loads(Path(args.judge).read_text(encoding="utf-8"))
        sections += [
            "## Reasoning accuracy (LLM judge)",
            "",
            f"- accuracy: {judge_doc.get('rendered', 'n/a')}",
            f"- matches: {judge_doc['matches']}, mismatches: {judge_doc['mismatches']}, "
            f"unparseable: {judge_doc['unparseable']}",
            "",
        ]
    if args.human:
        manifest = dataset.load_manifest(args.data)
        human = bench.import_human_eval(args.human, [r.image_id for r in manifest.records])
        sections += [
            "## Reasoning accuracy (human)",
            "",
            f"- accuracy: {bench.fmt3(human.accuracy)} over {len(human.per_rater)} raters",
            "",
        ]
    text = "\n".join(sections)
    Path(args.out).write_text(text, encoding="utf-8")
    print(f"wrote {args.out}")
    return EXIT_OK


# --------------------------------------------------------------------- e2e


def _load_config(path: str) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    if path.endswith(".toml"):
        try:
            import tomllib
        except ImportError as exc:
            raise dataset.ConfigError(
                "TOML configs need Python >= 3.11; use JSON here"
            ) from exc
        return tomllib.loads(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise dataset.ConfigError(f"{path}: invalid JSON ({exc})") from exc


def _config_get(doc: dict, key: str, kind, default=None, required=False):
    if key not in doc:
        if required:
            raise dataset.ConfigError(f"config missing field {key!r}")
        return default
    value = doc[key]
    if not isinstance(value, kind):
        raise dataset.ConfigError(f"config field {key!r} has type {type(value).__name__}")
    return value


def _e2e_dataset(doc: dict, seed: int, out: Path) -> dataset.DatasetManifest:
    spec = _config_get(doc, "dataset", dict, required=True)
    if "synth" in spec:
        synth_doc = spec["synth"]
        config = synth.SynthConfig(
            template=synth_doc.get("template", "connector-scene"),
            n=synth_doc.get("n", 100),
            rates=synth_doc.get("rates", {}),
            train_n=synth_doc.get("train_n", 0),
        )
        manifest = synth.generate_synthetic(config, synth_doc.get("seed", seed))
        dataset.write_manifest(manifest, out / "dataset")
        return manifest
    if "root" in spec:
        return dataset.load_manifest(spec["root"])
    raise dataset.ConfigError("config dataset needs 'synth' or 'root'")


def _e2e_rules(doc: dict) -> rules.RuleSet:
    spec = _config_get(doc, "rules", dict, required=True)
    if "template" in spec:
        name = spec["template"]
        if name not in synth.TEMPLATES:
            raise dataset.ConfigError(f"unknown scene template {name!r}")
        return synth.TEMPLATES[name].ruleset
    if "path" in spec:
        return rules.load_ruleset(spec["path"])
    raise dataset.ConfigError("config rules needs 'template' or 'path'")


def _e2e_backend(doc: dict, ruleset) -> object:
    spec = _config_get(doc, "backend", dict, default={"kind": "oracle"})
    return _build_backend(
        spec.get("kind", "oracle"),
        cassette=spec.get("cassette"),
        record=spec.get("record"),
        ruleset=ruleset,
    )


def run_e2e(config_path: str, out_dir: str) -> int:
    doc = _load_config(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    seed = _config_get(doc, "seed", int, default=0)
    split = _config_get(doc, "split", str, default="test")
    template_id = _config_get(doc, "prompt_template", str, default="v1")
    n_runs = _config_get(doc, "runs", int, default=1)
    run_variance = _config_get(doc, "run_variance", str, default="regenerate")
    if run_variance not in ("regenerate", "reexecute"):
        raise dataset.ConfigError(f"bad run_variance {run_variance!r}")
    gen_doc = _config_get(doc, "generation", dict, default={})
    n_attempts = gen_doc.get("n", 1)
    model = gen_doc.get("model", "gpt-4")
    temperature = gen_doc.get("temperature", 0.7)
    max_tokens = gen_doc.get("max_tokens", 4096)
    workers = _config_get(doc, "workers", int, default=1)

    manifest = _e2e_dataset(doc, seed, out)
    ruleset = _e2e_rules(doc)
    problems = rules.lint_ruleset(ruleset)
    if problems:
        raise rules.RuleError(
            f"rule set fails lint; first: {problems[0]}", problems
        )
    backend = _e2e_backend(doc, ruleset)
    vocabulary = _vocabulary_for(ruleset)
    rules_hash = rules.ruleset_hash(ruleset)
    prompt_hash = template_hash(template_id)

    all_outcomes: list[codegen.GenerationOutcome] = []
    scores: list[bench.BinaryScore] = []
    rates_per_run: list[dict] = []
    last_run = None
    program = None
    for r in range(n_runs):
        if program is None or run_variance == "regenerate":
            campaign = codegen.run_generation_campaign(
                ruleset,
                backend,
                n_attempts,
                template_id=template_id,
                model=model,
                temperature=temperature,
                max_tokens=max_tokens,
                vocabulary=vocabulary,
            )
            all_outcomes.extend(campaign.outcomes)
            rates_per_run.append(campaign.rates)
            success = campaign.first_success()
            if success is None:
                raise _NoSuccessfulGeneration(
                    f"run {r}: no attempt out of {n_attempts} was classified success"
                )
            program = success.program
        run_record = execution.run_detection(
            program,
            manifest,
            split,
            rules_hash=rules_hash,
            prompt_template_hash=prompt_hash,
            backend_id=getattr(backend, "backend_id", "unknown"),
            workers=workers,
        )
        execution.save_run_record(run_record, out / f"run_{r}.json")
        scores.append(bench.score_binary(run_record, manifest))
        last_run = run_record

    codegen.write_outcome_log(out / "outcomes.jsonl", all_outcomes)
    metrics = bench.average_runs(scores)
    metrics_doc = {
        "metrics": metrics.to_dict(),
        "counts": [s.counts.to_dict() for s in scores],
        "generation_rates": rates_per_run,
        "provenance": {
            "rules_hash": rules_hash,
            "prompt_template_hash": prompt_hash,
            "program_hash": last_run.program_hash,
            "backend_id": last_run.backend_id,
            "dataset_id": last_run.dataset_id,
        },
    }
    bench.save_json(metrics_doc, out / "metrics.json")

    judge_doc = _config_get(doc, "judge", dict, default={})
    judge_section = ""
    if judge_doc.get("enabled", False):
        judge_backend_doc = judge_doc.get("backend")
        judge_backend = (
            _build_backend(
                judge_backend_doc.get("kind", "oracle"),
                cassette=judge_backend_doc.get("cassette"),
                record=judge_backend_doc.get("record"),
                ruleset=ruleset,
            )
            if judge_backend_doc
            else backend
        )
        judge_report = bench.judge_reasoning(
            last_run,
            manifest,
            judge_backend,
            template_id=judge_doc.get("template", "judge_v1"),
            model=judge_doc.get("model", model),
            temperature=judge_doc.get("temperature", 0.0),
        )
        bench.save_json(judge_report.to_dict(), out / "judge.json")
        accuracy = (
            bench.fmt3(judge_report.accuracy) if judge_report.accuracy is not None else "n/a"
        )
        judge_section = (
            "\n## Reasoning accuracy (LLM judge)\n\n"
            f"- accuracy: {accuracy}\n"
            f"- matches: {judge_report.matches}, mismatches: {judge_report.mismatches}, "
            f"unparseable: {judge_report.unparseable}\n"
        )

    rates_by_category = {metrics.category: rates_per_run[-1]} if rates_per_run else {}
    report_text = (
        "# Pipeline report\n\n"
        "## Provenance\n\n"
        + "\n".join(f"- {k}: {v}" for k, v in sorted(metrics_doc["provenance"].items()))
        + "\n\n## Binary classification\n\n"
        + bench.metrics_markdown([metrics])
        + "\n\n## Generation outcomes\n\n"
        + (bench.rates_markdown(rates_by_category) if rates_by_category else "(reused program)")
        + "\n"
        + judge_section
    )
    (out / "report.md").write_text(report_text, encoding="utf-8")
    rendered = bench.render_metrics(metrics.averages)
    print(
        f"e2e ok: accuracy {rendered['accuracy']} precision {rendered['precision']} "
        f"recall {rendered['recall']} f1 {rendered['f1']} -> {out}"
    )
    return EXIT_OK


def _cmd_e2e(args) -> int:
    return run_e2e(args.config, args.out)


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logicode", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_dataset = sub.add_parser("dataset", help="dataset synthesis and validation")
    dataset_sub = p_dataset.add_subparsers(dest="subcommand", required=True)
    p_synth = dataset_sub.add_parser("synth", help="generate a synthetic dataset")
    p_synth.add_argument("--template", default="connector-scene")
    p_synth.add_argument("--n", type=int, required=True)
    p_synth.add_argument("--seed", type=int, required=True)
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--train-n", type=int, default=0)
    for kind in synth.INJECTION_KINDS:
        p_synth.add_argument(f"--rate-{kind}", type=float, default=0.0)
    p_synth.set_defaults(func=_cmd_dataset_synth)
    p_validate = dataset_sub.add_parser("validate", help="validate a dataset root")
    p_validate.add_argument("root")
    p_validate.set_defaults(func=_cmd_dataset_validate)

    p_rules = sub.add_parser("rules", help="rule file tools")
    rules_sub = p_rules.add_subparsers(dest="subcommand", required=True)
    p_lint = rules_sub.add_parser("lint", help="lint a rule file")
    p_lint.add_argument("file")
    p_lint.set_defaults(func=_cmd_rules_lint)

    p_facts = sub.add_parser("facts", help="fact extraction tools")
    facts_sub = p_facts.add_subparsers(dest="subcommand", required=True)
    p_dump = facts_sub.add_parser("dump", help="print the canonical fact table")
    p_dump.add_argument("record")
    p_dump.set_defaults(func=_cmd_facts_dump)

    p_prompt = sub.add_parser("prompt", help="prompt assembly")
    prompt_sub = p_prompt.add_subparsers(dest="subcommand", required=True)
    p_render = prompt_sub.add_parser("render", help="render the generation prompt")
    _add_rules_args(p_render)
    p_render.add_argument("--template", default="v1")
    p_render.add_argument("--out")
    p_render.set_defaults(func=_cmd_prompt_render)

    p_codegen = sub.add_parser("codegen", help="program generation")
    codegen_sub = p_codegen.add_subparsers(dest="subcommand", required=True)
    p_gen = codegen_sub.add_parser("run", help="run a generation campaign")
    _add_rules_args(p_gen)
    _add_backend_args(p_gen)
    p_gen.add_argument("--n", type=int, default=1)
    p_gen.add_argument("--template", default="v1")
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--program-out")
    p_gen.set_defaults(func=_cmd_codegen_run)

    p_exec = sub.add_parser("exec", help="program execution")
    exec_sub = p_exec.add_subparsers(dest="subcommand", required=True)
    p_run = exec_sub.add_parser("run", help="run a program over a split")
    p_run.add_argument("--program", required=True)
    p_run.add_argument("--data", required=True)
    p_run.add_argument("--split", default="test")
    p_run.add_argument("--out", required=True)
    _add_rules_args(p_run)
    p_run.add_argument("--prompt-template", default="v1")
    p_run.add_argument("--backend-id", default="external")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.set_defaults(func=_cmd_exec_run)

    p_bench = sub.add_parser("bench", help="benchmark scoring and reports")
    bench_sub = p_bench.add_subparsers(dest="subcommand", required=True)
    p_score = bench_sub.add_parser("score", help="binary classification metrics")
    p_score.add_argument("--run", action="append", required=True)
    p_score.add_argument("--data", required=True)
    p_score.add_argument("--out")
    p_score.set_defaults(func=_cmd_bench_score)
    p_judge = bench_sub.add_parser("judge", help="LLM reasoning accuracy")
    p_judge.add_argument("--run", action="append", required=True)
    p_judge.add_argument("--data", required=True)
    _add_backend_args(p_judge)
    _add_rules_args(p_judge, required=False)
    p_judge.add_argument("--judge-template", default="judge_v1")
    p_judge.add_argument("--out")
    p_judge.set_defaults(func=_cmd_bench_judge)
    p_report = bench_sub.add_parser("report", help="assemble the markdown report")
    p_report.add_argument("--metrics", required=True)
    p_report.add_argument("--judge")
    p_report.add_argument("--human")
    p_report.add_argument("--data")
    p_report.add_argument("--out", required=True)
    p_report.set_defaults(func=_cmd_bench_report)

    p_e2e = sub.add_parser("e2e", help="full offline pipeline from a config file")
    p_e2e.add_argument("--config", required=True)
    p_e2e.add_argument("--out", required=True)
    p_e2e.set_defaults(func=_cmd_e2e)

    return parser


def _add_rules_args(parser, required: bool = True) -> None:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--rules", help="rule file (JSON)")
    group.add_argument("--template-rules", help="built-in scene template name")


def _add_backend_args(parser) -> None:
    parser.add_argument("--backend", choices=("oracle", "replay", "live"), default="oracle")
    parser.add_argument("--cassette", help="cassette path for replay")
    parser.add_argument("--record", help="record live responses into this cassette")
    parser.add_argument("--model", default="gpt-4")
    parser.add_argument("--temperature", type=float, default=0.7)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _BACKEND_ERRORS as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except _NoSuccessfulGeneration as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except _DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
