"""Command-line entry point: generate -> execute -> grade -> classify, plus campaign and verify.

Stages read and write JSONL so they compose; flag names stay compatible with
the original evaluation scripts (--input_file, --timeout, --answer_field, ...).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from orbench import benchmarks, grading, prompts, sandbox, solver, strategies, taxonomy, toolindex
from orbench.gateway import Cassette, CassetteMode, Gateway, HttpTransport, ReplayMiss

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UPSTREAM = 3
EXIT_REPLAY_MISS = 4


class ConfigError(ValueError):
    pass


class UpstreamError(ValueError):
    pass


def _parse_config_value(raw: str):
    raw = raw.strip()
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    lowered = raw.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        pass
    return raw


def load_config_file(path: str | Path) -> dict:
    """key = value lines; '#' comments; flags given on the command line win."""
    values = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{line_no}: expected key = value")
        key, raw = line.split("=", 1)
        values[key.strip()] = _parse_config_value(raw)
    return values


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input_file", type=str, default=None)
    parser.add_argument("--output_file", type=str, default=None)
    parser.add_argument("--verbose", action="store_true", default=False)
    parser.add_argument("--question_field", type=str, default=None)
    parser.add_argument("--answer_field", type=str, default=None)
    parser.add_argument("--numerical_err_tolerance", type=float, default=0.05)
    parser.add_argument("--config", type=str, default=None, help="key = value config file")


def _add_gateway_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", type=str, default="deepseek-reasoner")
    parser.add_argument("--base_url", type=str, default=None)
    parser.add_argument("--api_key_env", type=str, default="OPENAI_API_KEY")
    parser.add_argument("--cassette", type=str, default=None)
    parser.add_argument("--cassette_mode", type=str, default="replay",
                        choices=[m.value for m in CassetteMode])
    parser.add_argument("--strategy", type=str, default=strategies.Strategy.BASELINE.value,
                        choices=[s.value for s in strategies.Strategy])
    parser.add_argument("--benchmark", type=str, default=benchmarks.Benchmark.NL4OPT.value,
                        choices=[b.value for b in benchmarks.Benchmark])
    parser.add_argument("--exemplars", type=str, default=None,
                        help="exemplar pack (JSONL with question/math_model/code)")
    parser.add_argument("--stubs", type=str, nargs="*", default=None,
                        help="interface stub files for the tool index")
    parser.add_argument("--judge_rounds", type=int, default=1)
    parser.add_argument("--fsl_base", type=str, default=strategies.FslBase.ON_JUDGE.value,
                        choices=[b.value for b in strategies.FslBase])
    parser.add_argument("--max_tool_calls", type=int, default=8)


def _add_sandbox_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--timeout", type=int, default=600)
    parser.add_argument("--max_workers", type=int, default=16)
    parser.add_argument("--interpreter", type=str, default=sys.executable)
    parser.add_argument("--shim_path", type=str, default=None,
                        help="module search path injected into executed scripts")
    parser.add_argument("--scratch_dir", type=str, default=None)
    parser.add_argument("--legacy_state_spelling", action="store_true", default=False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbench")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="render prompts and collect model answers")
    _add_common_flags(p)
    _add_gateway_flags(p)

    p = sub.add_parser("execute", help="run extracted scripts and record execution states")
    _add_common_flags(p)
    _add_sandbox_flags(p)
    p.add_argument("--code_field", type=str, default=None,
                   help="JSON key holding the answer text; default: first key containing 'coptpy_code'")

    p = sub.add_parser("grade", help="compare executed optima against stored answers")
    _add_common_flags(p)
    p.add_argument("--majority_voting", action="store_true", default=False)

    p = sub.add_parser("classify", help="label executed records with failure categories")
    _add_common_flags(p)
    p.add_argument("--overrides", type=str, default=None)
    p.add_argument("--benchmark", type=str, default=None)

    p = sub.add_parser("report", help="print the per-benchmark label distribution")
    _add_common_flags(p)
    p.add_argument("--benchmark", type=str, default=None)

    p = sub.add_parser("verify", help="check stored answers against hand-encoded exact models")
    _add_common_flags(p)
    p.set_defaults(numerical_err_tolerance=1e-6)  # verification wants exactness, not grading slack
    p.add_argument("--models_dir", type=str, required=True)
    p.add_argument("--benchmark", type=str, default=benchmarks.Benchmark.NL4OPT.value,
                   choices=[b.value for b in benchmarks.Benchmark])

    p = sub.add_parser("campaign", help="sampled end-to-end run for one strategy")
    _add_common_flags(p)
    _add_gateway_flags(p)
    _add_sandbox_flags(p)
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--repetitions", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output_dir", type=str, required=True)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    if "--config" in argv:
        path = argv[argv.index("--config") + 1]
        values = load_config_file(path)
        for action in parser._subparsers._group_actions[0].choices.values():  # noqa: SLF001
            known = {a.dest for a in action._actions}  # noqa: SLF001
            action.set_defaults(**{k: v for k, v in values.items() if k in known})
    return argv


def _require_input(args, field: str = "input_file") -> Path:
    value = getattr(args, field, None)
    if not value:
        raise ConfigError(f"--{field} is required for this command")
    path = Path(value)
    if not path.exists():
        raise UpstreamError(f"input file not found: {path}")
    return path


def _validate(args) -> None:
    if getattr(args, "timeout", 1) <= 0:
        raise ConfigError("--timeout must be positive")
    if getattr(args, "max_workers", 1) < 1:
        raise ConfigError("--max_workers must be >= 1")
    tol = getattr(args, "numerical_err_tolerance", 0.05)
    if not 0.0 <= tol < 1.0:
        raise ConfigError("--numerical_err_tolerance must be in [0, 1)")
    if getattr(args, "fraction", 0.1) is not None and hasattr(args, "fraction"):
        if not 0.0 < args.fraction <= 1.0:
            raise ConfigError("--fraction must be in (0, 1]")


def _build_gateway(args) -> Gateway:
    cassette = None
    if args.cassette:
        mode = CassetteMode(args.cassette_mode)
        if mode == CassetteMode.REPLAY:
            path = Path(args.cassette)
            if not path.exists():
                raise UpstreamError(f"cassette not found: {path}")
            cassette = Cassette.load(path, mode)
        else:
            cassette = Cassette(mode)
    transport = HttpTransport(args.base_url, args.api_key_env) if args.base_url else None
    if transport is None and (cassette is None or cassette.mode != CassetteMode.REPLAY):
        raise ConfigError("need --base_url or a cassette in replay mode")
    return Gateway(transport=transport, model_id=args.model, cassette=cassette)


def _pipeline_config(args) -> strategies.PipelineConfig:
    exemplars = prompts.load_exemplars(args.exemplars) if args.exemplars else []
    sandbox_config = sandbox.SandboxConfig(
        interpreter=getattr(args, "interpreter", sys.executable),
        timeout=float(getattr(args, "timeout", 600)),
        scratch_dir=getattr(args, "scratch_dir", None),
        module_path=getattr(args, "shim_path", None),
        legacy_state_spelling=getattr(args, "legacy_state_spelling", False),
    )
    return strategies.PipelineConfig(
        sandbox=sandbox_config,
        tolerance=args.numerical_err_tolerance,
        exemplars=exemplars,
        judge_rounds=args.judge_rounds,
        fsl_base=strategies.FslBase(args.fsl_base),
        max_tool_calls=args.max_tool_calls,
    )


def _tool_index(args) -> toolindex.SignatureIndex:
    stub_paths = args.stubs if args.stubs else [toolindex.bundled_stub_path()]
    return toolindex.build_index(stub_paths)


def _load_instances(args) -> list[benchmarks.BenchmarkInstance]:
    path = _require_input(args)
    fields = {}
    if args.question_field:
        fields["question_field"] = args.question_field
    if args.answer_field:
        fields["answer_field"] = args.answer_field
    try:
        return benchmarks.load_benchmark(path, benchmarks.Benchmark(args.benchmark), **fields)
    except benchmarks.BenchmarkLoadError as exc:
        raise UpstreamError(f"{path}: {exc}") from exc


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fd:
        for line_no, line in enumerate(fd, 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise UpstreamError(f"{path}:{line_no}: invalid JSON ({exc.msg})") from exc
    return records


def cmd_generate(args) -> int:
    instances = _load_instances(args)
    gateway = _build_gateway(args)
    config = _pipeline_config(args)
    strategy = strategies.Strategy(args.strategy)
    index = _tool_index(args) if strategy == strategies.Strategy.TOOL_CALLING else None
    if not args.output_file:
        raise ConfigError("--output_file is required")
    with open(args.output_file, "w", encoding="utf-8") as fw:
        for instance in instances:
            generations, flags = strategies.generate_answer(strategy, instance, gateway,
                                                            config, index)
            final = generations[-1] if generations else None
            row = {
                "id": instance.id,
                "benchmark": instance.benchmark.value,
                "strategy": strategy.value,
                "en_question": instance.question,
                "en_answer": instance.ground_truth,
                "q2mc_en_prompt": final.prompt if final else "",
                "judge": final.content if final else "",
                "reasoning_content": final.reasoning if final else None,
                "generated_coptpy_code": final.content if final else "",
                "flags": flags,
            }
            fw.write(json.dumps(row, ensure_ascii=False) + "\n")
            if args.verbose:
                print(f"{instance.id}: {len(row['generated_coptpy_code'])} chars")
    if args.cassette and args.cassette_mode == CassetteMode.RECORD.value:
        gateway.cassette.save(args.cassette)
    return EXIT_OK


def cmd_execute(args) -> int:
    path = _require_input(args)
    if not args.output_file:
        raise ConfigError("--output_file is required")
    records = _read_jsonl(path)

    def code_field_for(record: dict) -> str:
        if args.code_field:
            if args.code_field not in record:
                raise UpstreamError(f"record lacks code field {args.code_field!r}")
            return args.code_field
        for key in record:
            if "coptpy_code" in key:
                return key
        raise UpstreamError("record has no key containing 'coptpy_code'")

    config = sandbox.SandboxConfig(
        interpreter=args.interpreter,
        timeout=float(args.timeout),
        scratch_dir=args.scratch_dir,
        module_path=args.shim_path,
        legacy_state_spelling=args.legacy_state_spelling,
    )
    items = [(str(i), record[code_field_for(record)]) for i, record in enumerate(records)]
    results = dict(sandbox.run_batch(items, config, max_workers=args.max_workers))
    with open(args.output_file, "w", encoding="utf-8") as fw:
        ordered = sorted(results, key=int)
        # no-code rows first, mirroring the two-pass evaluation flow
        no_code = [i for i in ordered if results[i].state == sandbox.STATE_NO_CODE]
        executed = [i for i in ordered if results[i].state != sandbox.STATE_NO_CODE]
        for item_id in no_code + executed:
            record = dict(records[int(item_id)])
            execution = results[item_id]
            record["execution_result"] = execution.raw_output
            record["execution_best_solution"] = execution.best_solution
            record["execution_state"] = execution.state
            fw.write(json.dumps(record, ensure_ascii=False) + "\n")
            if args.verbose:
                print(f"{item_id}: {execution.state.splitlines()[0]}")
    return EXIT_OK


def cmd_grade(args) -> int:
    path = _require_input(args)
    question_field = args.question_field or benchmarks.QUESTION_FIELD
    answer_field = args.answer_field or benchmarks.ANSWER_FIELD
    records = _read_jsonl(path)

    by_question: dict[str, list] = {}
    truths: dict[str, str] = {}
    for record in records:
        if question_field not in record or answer_field not in record:
            raise UpstreamError(f"records need {question_field!r} and {answer_field!r}")
        question = str(record[question_field])
        truth = str(record[answer_field])
        if question in truths and truths[question] != truth:
            raise UpstreamError(f"conflicting ground truths for one question: {question[:60]!r}")
        truths[question] = truth
        by_question.setdefault(question, []).append(record.get("execution_best_solution"))

    grades = [
        grading.grade_instance(question, preds, truths[question], args.numerical_err_tolerance)
        for question, preds in by_question.items()
    ]
    metrics = grading.compute_metrics(grades, majority=args.majority_voting)
    target = args.output_file or str(path)
    written = grading.write_metrics(metrics, target)
    print(json.dumps(metrics.to_dict(), indent=4))
    if args.verbose:
        for grade in grades:
            print(f"match={grade.matched} gt={grade.ground_truth} preds={grade.predictions}")
    print(f"metrics written to {written}")
    return EXIT_OK


def _classified_items(args) -> list[taxonomy.ClassifiedInstance]:
    path = _require_input(args)
    answer_field = args.answer_field or benchmarks.ANSWER_FIELD
    records = _read_jsonl(path)
    items = []
    for i, record in enumerate(records):
        state = record.get("execution_state", sandbox.STATE_NO_CODE)
        matched = grading.compare(record.get("execution_best_solution"),
                                  str(record.get(answer_field, "")),
                                  args.numerical_err_tolerance)
        label = taxonomy.classify_text(state, record.get("error_output", ""), matched)
        items.append(taxonomy.ClassifiedInstance(
            instance_id=str(record.get("id", i)),
            benchmark=str(record.get("benchmark", args.benchmark or "all")),
            label=label,
        ))
    return items


def cmd_classify(args) -> int:
    items = _classified_items(args)
    if args.overrides:
        overrides_path = Path(args.overrides)
        if not overrides_path.exists():
            raise UpstreamError(f"overrides file not found: {overrides_path}")
        items = taxonomy.apply_overrides(items, taxonomy.load_overrides(overrides_path))
    report = taxonomy.report_distribution(items)
    if not args.output_file:
        raise ConfigError("--output_file is required")
    report.write_csv(args.output_file)
    print(report.render_text())
    return EXIT_OK


def cmd_report(args) -> int:
    report = taxonomy.report_distribution(_classified_items(args))
    print(report.render_text())
    return EXIT_OK


def cmd_verify(args) -> int:
    instances = _load_instances(args)
    models_dir = Path(args.models_dir)
    if not models_dir.exists():
        raise UpstreamError(f"models directory not found: {models_dir}")
    models = solver.load_model_dir(models_dir)
    for instance in instances:
        verdict = solver.verify_ground_truth(instance, models.get(instance.id),
                                             args.numerical_err_tolerance)
        print(f"{instance.id}: {verdict}")
    return EXIT_OK


def cmd_campaign(args) -> int:
    instances = _load_instances(args)
    gateway = _build_gateway(args)
    config = _pipeline_config(args)
    strategy = strategies.Strategy(args.strategy)
    index = _tool_index(args) if strategy == strategies.Strategy.TOOL_CALLING else None
    plan = benchmarks.SamplePlan(fraction=args.fraction, repetitions=args.repetitions,
                                 seed=args.seed)
    records, metrics = strategies.run_campaign(instances, plan, strategy, gateway, config,
                                               index, max_workers=args.max_workers)

    output_dir = Path(args.output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    stem = f"{args.benchmark}_{strategy.value}"
    records_path = output_dir / f"{stem}_records.jsonl"
    strategies.write_records(records, records_path)
    grading.write_metrics(metrics, records_path)
    items = [taxonomy.ClassifiedInstance(r.instance_id, r.benchmark, r.label) for r in records]
    taxonomy.report_distribution(items).write_csv(output_dir / f"{stem}_counts.csv")

    if args.cassette and args.cassette_mode == CassetteMode.RECORD.value:
        gateway.cassette.save(args.cassette)
    print(json.dumps(metrics.to_dict(), indent=4))
    if args.verbose:
        print(taxonomy.report_distribution(items).render_text())
    return EXIT_OK


_COMMANDS = {
    "generate": cmd_generate,
    "execute": cmd_execute,
    "grade": cmd_grade,
    "classify": cmd_classify,
    "report": cmd_report,
    "verify": cmd_verify,
    "campaign": cmd_campaign,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        _validate(args)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UpstreamError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_UPSTREAM
    except ReplayMiss as exc:
        print(f"replay miss: {exc}", file=sys.stderr)
        return EXIT_REPLAY_MISS
    except (benchmarks.EmptyDataset, grading.InconsistentArity) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_UPSTREAM


if __name__ == "__main__":
    raise SystemExit(main())
