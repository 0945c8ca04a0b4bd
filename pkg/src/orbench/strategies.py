"""Per-instance pipelines for the baseline and the four mitigation strategies.

Every strategy ends in the same tail: extract code from the final answer,
execute it in the sandbox, grade the printed optimum, and attach a taxonomy
label, so campaign rows stay comparable across strategies.
"""

from __future__ import annotations

import concurrent.futures
import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from orbench import prompts, taxonomy
from orbench.benchmarks import BenchmarkInstance, SamplePlan, sample_subsets
from orbench.gateway import Gateway, GenerationRecord, RetriesExhausted
from orbench.grading import (DEFAULT_TOLERANCE, GradeRecord, Metrics, compute_metrics,
                             grade_instance)
from orbench.sandbox import ExecutionRecord, SandboxConfig, execute_answer
from orbench.toolindex import SignatureIndex, lookup, render_tool_result


class Strategy(str, Enum):
    BASELINE = "Baseline"
    JUDGE = "Judge"
    JUDGE_PLUS_FSL = "JudgePlusFSL"
    TOOL_CALLING = "ToolCalling"
    MULTI_AGENT = "MultiAgent"


class FslBase(str, Enum):
    ON_BASELINE = "OnBaseline"
    ON_JUDGE = "OnJudge"


@dataclass
class PipelineConfig:
    sandbox: SandboxConfig = field(default_factory=SandboxConfig)
    tolerance: float = DEFAULT_TOLERANCE
    strict_compare: bool = False
    exemplars: list[prompts.Exemplar] = field(default_factory=list)
    judge_rounds: int = 1
    fsl_base: FslBase = FslBase.ON_JUDGE
    max_tool_calls: int = 8
    pass_reasoning: bool = False


@dataclass
class PipelineRecord:
    instance_id: str
    benchmark: str
    strategy: Strategy
    question: str
    ground_truth: str
    generations: list[GenerationRecord]
    execution: ExecutionRecord
    grade: GradeRecord
    label: taxonomy.Label
    flags: list[str] = field(default_factory=list)


def _reference_record(instance: BenchmarkInstance, strategy: Strategy) -> GenerationRecord:
    # The stored prior answer enters the pipeline as a pseudo-generation.
    return GenerationRecord(
        prompt="",
        system_text="",
        content=instance.reference_solution or "",
        model_id="reference",
        strategy=strategy.value,
    )


def _complete(gateway: Gateway, prompt: str, system_text: str, strategy: Strategy,
              flags: list[str]) -> GenerationRecord:
    try:
        return gateway.complete(prompt, system_text, strategy=strategy.value)
    except RetriesExhausted as exc:
        flags.append(f"generation_failed: {exc.last_error}")
        return GenerationRecord(prompt=prompt, system_text=system_text, content="",
                                model_id=gateway.model_id, strategy=strategy.value,
                                attempt_count=gateway.max_retries + 1)


def _finish(instance: BenchmarkInstance, strategy: Strategy, generations: list[GenerationRecord],
            config: PipelineConfig, flags: list[str]) -> PipelineRecord:
    content = generations[-1].content if generations else ""
    execution = execute_answer(content, config.sandbox)
    grade = grade_instance(instance.id, [execution.best_solution], instance.ground_truth,
                           config.tolerance, config.strict_compare)
    label = taxonomy.classify(execution, grade)
    return PipelineRecord(
        instance_id=instance.id,
        benchmark=instance.benchmark.value,
        strategy=strategy,
        question=instance.question,
        ground_truth=instance.ground_truth,
        generations=generations,
        execution=execution,
        grade=grade,
        label=label,
        flags=flags,
    )


def _generate_baseline(instance, gateway, config, flags) -> list[GenerationRecord]:
    generation = _complete(gateway, prompts.render_baseline(instance.question),
                           prompts.DEFAULT_SYSTEM_TEXT, Strategy.BASELINE, flags)
    return [generation]


def _generate_judge(instance, gateway, config, flags,
                    prior_answer: str | None = None) -> list[GenerationRecord]:
    prior = prior_answer if prior_answer is not None else instance.reference_solution
    if prior is None:
        prior = ""
        flags.append("missing_prior_answer")
    prior_record = _reference_record(instance, Strategy.JUDGE)
    prior_record.content = prior
    generations = [prior_record]
    latest = prior
    for _ in range(config.judge_rounds):
        verdict = _complete(gateway, prompts.render_judge(instance.question, latest),
                            prompts.DEFAULT_SYSTEM_TEXT, Strategy.JUDGE, flags)
        generations.append(verdict)
        latest = verdict.content
    return generations


def _generate_fsl(instance, gateway, config, flags,
                  prior_answer: str | None = None) -> list[GenerationRecord]:
    if config.fsl_base == FslBase.ON_BASELINE:
        generation = _complete(gateway, prompts.render_fsl(config.exemplars, instance.question),
                               prompts.DEFAULT_SYSTEM_TEXT, Strategy.JUDGE_PLUS_FSL, flags)
        return [generation]
    prior = prior_answer if prior_answer is not None else instance.reference_solution
    if prior is None:
        prior = ""
        flags.append("missing_prior_answer")
    prior_record = _reference_record(instance, Strategy.JUDGE_PLUS_FSL)
    prior_record.content = prior
    verdict = _complete(gateway, prompts.render_judge(instance.question, prior),
                        prompts.DEFAULT_SYSTEM_TEXT, Strategy.JUDGE_PLUS_FSL, flags)
    regen = _complete(
        gateway,
        prompts.render_fsl_over_judge(config.exemplars, instance.question, verdict.content),
        prompts.DEFAULT_SYSTEM_TEXT, Strategy.JUDGE_PLUS_FSL, flags)
    return [prior_record, verdict, regen]


def _generate_multi_agent(instance, gateway, config, flags) -> list[GenerationRecord]:
    math_turn = _complete(gateway, prompts.render_mathematician(instance.question),
                          prompts.MATHEMATICIAN_SYSTEM_TEXT, Strategy.MULTI_AGENT, flags)
    payload = math_turn.content
    if config.pass_reasoning and math_turn.reasoning:
        payload = f"{math_turn.reasoning}\n\n{payload}"
    if not payload.strip():
        flags.append("empty_math_model")
    code_turn = _complete(gateway, prompts.render_coder(payload),
                          prompts.CODER_SYSTEM_TEXT, Strategy.MULTI_AGENT, flags)
    return [math_turn, code_turn]


def _generate_tool_calling(instance, gateway, config, flags,
                           index: SignatureIndex) -> list[GenerationRecord]:
    def handler(name: str) -> str:
        return render_tool_result(lookup(index, name))

    prompt = prompts.render_tool_calling(instance.question)
    try:
        generation = gateway.complete_with_tools(
            prompt, handler, system_text=prompts.DEFAULT_SYSTEM_TEXT,
            strategy=Strategy.TOOL_CALLING.value, max_tool_calls=config.max_tool_calls)
    except RetriesExhausted as exc:
        flags.append(f"generation_failed: {exc.last_error}")
        generation = GenerationRecord(prompt=prompt, system_text=prompts.DEFAULT_SYSTEM_TEXT,
                                      content="", model_id=gateway.model_id,
                                      strategy=Strategy.TOOL_CALLING.value)
    if generation.tool_budget_exhausted:
        flags.append("tool_budget_exhausted")
    return [generation]


def generate_answer(strategy: Strategy, instance: BenchmarkInstance, gateway: Gateway,
                    config: PipelineConfig | None = None,
                    index: SignatureIndex | None = None,
                    prior_answer: str | None = None) -> tuple[list[GenerationRecord], list[str]]:
    """Generation phase only: model turns for one instance, no sandbox execution."""
    config = config or PipelineConfig()
    flags: list[str] = []
    if strategy == Strategy.BASELINE:
        generations = _generate_baseline(instance, gateway, config, flags)
    elif strategy == Strategy.JUDGE:
        generations = _generate_judge(instance, gateway, config, flags, prior_answer)
    elif strategy == Strategy.JUDGE_PLUS_FSL:
        generations = _generate_fsl(instance, gateway, config, flags, prior_answer)
    elif strategy == Strategy.MULTI_AGENT:
        generations = _generate_multi_agent(instance, gateway, config, flags)
    elif strategy == Strategy.TOOL_CALLING:
        if index is None:
            raise ValueError("tool calling needs a signature index")
        generations = _generate_tool_calling(instance, gateway, config, flags, index)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return generations, flags


def run_baseline(instance: BenchmarkInstance, gateway: Gateway,
                 config: PipelineConfig | None = None) -> PipelineRecord:
    config = config or PipelineConfig()
    generations, flags = generate_answer(Strategy.BASELINE, instance, gateway, config)
    return _finish(instance, Strategy.BASELINE, generations, config, flags)


def run_judge(instance: BenchmarkInstance, gateway: Gateway,
              config: PipelineConfig | None = None,
              prior_answer: str | None = None) -> PipelineRecord:
    """Review-and-regenerate rounds over a prior answer (stored reference by default)."""
    config = config or PipelineConfig()
    generations, flags = generate_answer(Strategy.JUDGE, instance, gateway, config,
                                         prior_answer=prior_answer)
    return _finish(instance, Strategy.JUDGE, generations, config, flags)


def run_fsl(instance: BenchmarkInstance, gateway: Gateway,
            config: PipelineConfig | None = None,
            prior_answer: str | None = None) -> PipelineRecord:
    """Few-shot prompting over the raw question or over the judge-reviewed flow."""
    config = config or PipelineConfig()
    generations, flags = generate_answer(Strategy.JUDGE_PLUS_FSL, instance, gateway, config,
                                         prior_answer=prior_answer)
    return _finish(instance, Strategy.JUDGE_PLUS_FSL, generations, config, flags)


def run_multi_agent(instance: BenchmarkInstance, gateway: Gateway,
                    config: PipelineConfig | None = None) -> PipelineRecord:
    """Mathematician turn emits the model text; the coder turn sees only that text."""
    config = config or PipelineConfig()
    generations, flags = generate_answer(Strategy.MULTI_AGENT, instance, gateway, config)
    return _finish(instance, Strategy.MULTI_AGENT, generations, config, flags)


def run_tool_calling(instance: BenchmarkInstance, gateway: Gateway, index: SignatureIndex,
                     config: PipelineConfig | None = None) -> PipelineRecord:
    config = config or PipelineConfig()
    generations, flags = generate_answer(Strategy.TOOL_CALLING, instance, gateway, config, index)
    return _finish(instance, Strategy.TOOL_CALLING, generations, config, flags)


def run_strategy(strategy: Strategy, instance: BenchmarkInstance, gateway: Gateway,
                 config: PipelineConfig | None = None,
                 index: SignatureIndex | None = None) -> PipelineRecord:
    config = config or PipelineConfig()
    generations, flags = generate_answer(strategy, instance, gateway, config, index)
    return _finish(instance, strategy, generations, config, flags)


def run_campaign(instances: list[BenchmarkInstance], plan: SamplePlan, strategy: Strategy,
                 gateway: Gateway, config: PipelineConfig | None = None,
                 index: SignatureIndex | None = None,
                 max_workers: int = 1) -> tuple[list[PipelineRecord], Metrics]:
    """Run one strategy over every sampled subset and average pass@1 across repetitions.

    Records keep subset order regardless of worker count, so replayed
    campaigns serialize identically.
    """
    config = config or PipelineConfig()
    subsets = sample_subsets(instances, plan)
    all_records: list[PipelineRecord] = []
    repetition_scores: list[float] = []
    for subset in subsets:
        if max_workers > 1:
            with concurrent.futures.ThreadPoolExecutor(max_workers=max_workers) as pool:
                records = list(pool.map(
                    lambda inst: run_strategy(strategy, inst, gateway, config, index), subset))
        else:
            records = [run_strategy(strategy, inst, gateway, config, index) for inst in subset]
        repetition_scores.append(sum(1 for r in records if r.grade.matched) / len(records))
        all_records.extend(records)

    grades = [r.grade for r in all_records]
    metrics = compute_metrics(grades, states=[r.execution.state for r in all_records])
    n = metrics.n
    metrics.pass_at_k = {f"pass@{n}": sum(repetition_scores) / len(repetition_scores)}
    return all_records, metrics


def _generation_to_dict(generation: GenerationRecord) -> dict:
    return {
        "prompt": generation.prompt,
        "system_text": generation.system_text,
        "reasoning": generation.reasoning,
        "content": generation.content,
        "model_id": generation.model_id,
        "strategy": generation.strategy,
        "attempt_count": generation.attempt_count,
        "tool_transcript": [[t.query, t.result] for t in generation.tool_transcript],
    }


def record_to_dict(record: PipelineRecord) -> dict:
    """JSONL row: the original record schema plus harness fields; no volatile timings."""
    final = record.generations[-1] if record.generations else None
    return {
        "id": record.instance_id,
        "benchmark": record.benchmark,
        "strategy": record.strategy.value,
        "en_question": record.question,
        "en_answer": record.ground_truth,
        "q2mc_en_prompt": final.prompt if final else "",
        "judge": final.content if final else "",
        "reasoning_content": final.reasoning if final else None,
        "execution_result": record.execution.raw_output,
        "execution_best_solution": record.execution.best_solution,
        "execution_state": record.execution.state,
        "matched": record.grade.matched,
        "tolerance": record.grade.tolerance,
        "label": record.label.value,
        "flags": record.flags,
        "generations": [_generation_to_dict(g) for g in record.generations],
    }


def write_records(records, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fw:
        for record in records:
            fw.write(json.dumps(record_to_dict(record), ensure_ascii=False) + "\n")
