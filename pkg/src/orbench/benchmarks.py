"""Loading, validating, sampling, and round-tripping benchmark instances stored as JSONL."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

QUESTION_FIELD = "en_question"
ANSWER_FIELD = "en_answer"
REFERENCE_FIELD = "en_math_model_coptpy_code"
ID_FIELD = "id"

NO_SOLUTION = "No Best Solution"


class Benchmark(str, Enum):
    INDUSTRY_OR = "IndustryOR"
    EASY_LP = "EasyLP"
    COMPLEX_OR = "ComplexOR"
    NL4OPT = "NL4OPT"


class BenchmarkLoadError(ValueError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class MissingField(BenchmarkLoadError):
    def __init__(self, line_no: int, fieldname: str):
        self.fieldname = fieldname
        super().__init__(line_no, f"missing required field {fieldname!r}")


class MalformedLine(BenchmarkLoadError):
    pass


class EmptyDataset(ValueError):
    pass


@dataclass(frozen=True)
class BenchmarkInstance:
    """One natural-language optimization problem with its stored optimal value."""

    id: str
    benchmark: Benchmark
    question: str
    ground_truth: str
    reference_solution: str | None = None
    extras: dict = field(default_factory=dict)


def _valid_ground_truth(token: str) -> bool:
    if token == NO_SOLUTION:
        return True
    try:
        return math.isfinite(float(token))
    except ValueError:
        return False


def parse_line(line: str, benchmark: Benchmark, line_no: int = 0, *,
               question_field: str = QUESTION_FIELD, answer_field: str = ANSWER_FIELD,
               reference_field: str = REFERENCE_FIELD, id_field: str = ID_FIELD) -> BenchmarkInstance:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise MalformedLine(line_no, f"not valid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict):
        raise MalformedLine(line_no, "line is not a JSON object")

    if question_field not in obj or not str(obj[question_field]).strip():
        raise MissingField(line_no, question_field)
    if answer_field not in obj:
        raise MissingField(line_no, answer_field)

    ground_truth = str(obj[answer_field]).strip()
    if not _valid_ground_truth(ground_truth):
        raise MalformedLine(line_no, f"answer {ground_truth!r} is neither a finite number nor {NO_SOLUTION!r}")

    instance_id = str(obj[id_field]) if id_field in obj else f"{benchmark.value}-{line_no:04d}"
    consumed = {question_field, answer_field, reference_field, id_field}
    return BenchmarkInstance(
        id=instance_id,
        benchmark=benchmark,
        question=str(obj[question_field]),
        ground_truth=ground_truth,
        reference_solution=obj.get(reference_field),
        extras={k: v for k, v in obj.items() if k not in consumed},
    )


def instance_to_dict(instance: BenchmarkInstance, *, question_field: str = QUESTION_FIELD,
                     answer_field: str = ANSWER_FIELD, reference_field: str = REFERENCE_FIELD,
                     id_field: str = ID_FIELD) -> dict:
    out = {
        id_field: instance.id,
        question_field: instance.question,
        answer_field: instance.ground_truth,
    }
    if instance.reference_solution is not None:
        out[reference_field] = instance.reference_solution
    out.update(instance.extras)
    return out


def load_benchmark(path: str | Path, benchmark: Benchmark, **field_names) -> list[BenchmarkInstance]:
    """Parse one instance per JSONL line, in file order; any bad line aborts the load."""
    instances = []
    with open(path, encoding="utf-8") as fd:
        for line_no, line in enumerate(fd, start=1):
            if not line.strip():
                continue
            instances.append(parse_line(line, benchmark, line_no, **field_names))
    return instances


def save_benchmark(instances, path: str | Path, **field_names) -> None:
    with open(path, "w", encoding="utf-8") as fw:
        for instance in instances:
            fw.write(json.dumps(instance_to_dict(instance, **field_names), ensure_ascii=False) + "\n")


@dataclass(frozen=True)
class SamplePlan:
    """Repeated sub-sampling without replacement from a seeded stream."""

    fraction: float
    repetitions: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.fraction <= 1.0:
            raise ValueError(f"fraction must be in (0, 1], got {self.fraction}")
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")


def subset_size(fraction: float, population: int) -> int:
    """Round half-up, floored at one instance."""
    return max(1, math.floor(fraction * population + 0.5))


def sample_subsets(instances: list[BenchmarkInstance], plan: SamplePlan) -> list[list[BenchmarkInstance]]:
    """Draw ``plan.repetitions`` subsets without replacement, preserving dataset order."""
    if not instances:
        raise EmptyDataset("cannot sample from an empty dataset")
    size = subset_size(plan.fraction, len(instances))
    rng = random.Random(plan.seed)
    subsets = []
    for _ in range(plan.repetitions):
        picked = sorted(rng.sample(range(len(instances)), size))
        subsets.append([instances[i] for i in picked])
    return subsets


def load_manifest(path: str | Path | None = None) -> dict:
    """Expected instance counts per benchmark, shipped as data rather than constants."""
    if path is None:
        text = resources.files("orbench").joinpath("data/benchmark_manifest.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return json.loads(text)


def expected_count(benchmark: Benchmark, manifest: dict | None = None) -> int | None:
    manifest = manifest if manifest is not None else load_manifest()
    return manifest.get(benchmark.value)
