"""Prompt templates and rendering for every generation strategy.

Templates are plain-text package data with a single substitution placeholder;
rendering is pure string work so identical inputs always produce identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from pathlib import Path

DEFAULT_SYSTEM_TEXT = "You are a helpful assistant"
MATHEMATICIAN_SYSTEM_TEXT = "You are an expert mathematician specializing in operations research."
CODER_SYSTEM_TEXT = "You are a Python expert specializing in optimization using Coptpy."

QUESTION_PLACEHOLDER = "{Question}"
MODEL_PLACEHOLDER = "{MathModel}"


class TemplateName(str, Enum):
    BASELINE = "baseline"
    JUDGE = "judge"
    FEW_SHOT = "few_shot"
    MATHEMATICIAN = "mathematician"
    CODER = "coder"
    TOOL_CALLING = "tool_calling"


_PLACEHOLDERS = {
    TemplateName.BASELINE: QUESTION_PLACEHOLDER,
    TemplateName.JUDGE: QUESTION_PLACEHOLDER,
    TemplateName.TOOL_CALLING: QUESTION_PLACEHOLDER,
    TemplateName.MATHEMATICIAN: QUESTION_PLACEHOLDER,
    TemplateName.CODER: MODEL_PLACEHOLDER,
}

_SYSTEM_TEXTS = {
    TemplateName.MATHEMATICIAN: MATHEMATICIAN_SYSTEM_TEXT,
    TemplateName.CODER: CODER_SYSTEM_TEXT,
}


@dataclass(frozen=True)
class PromptTemplate:
    name: TemplateName
    body: str
    system_text: str


@dataclass(frozen=True)
class Exemplar:
    """One worked example: question, mathematical model, and solver code."""

    question: str
    math_model: str
    code: str

    def __post_init__(self) -> None:
        for part, value in (("question", self.question), ("math_model", self.math_model),
                            ("code", self.code)):
            if not value.strip():
                raise ValueError(f"exemplar {part} must be non-empty")


class TemplateError(ValueError):
    pass


@lru_cache(maxsize=None)
def load_template(name: TemplateName) -> PromptTemplate:
    body = resources.files("orbench").joinpath(f"data/templates/{name.value}.txt").read_text("utf-8")
    placeholder = _PLACEHOLDERS[name]
    if body.count(placeholder) != 1:
        raise TemplateError(f"template {name.value} must contain exactly one {placeholder}")
    return PromptTemplate(name, body, _SYSTEM_TEXTS.get(name, DEFAULT_SYSTEM_TEXT))


def _render(name: TemplateName, payload: str) -> str:
    template = load_template(name)
    return template.body.replace(_PLACEHOLDERS[name], payload).strip()


def render_baseline(question: str) -> str:
    return _render(TemplateName.BASELINE, question)


def render_tool_calling(question: str) -> str:
    return _render(TemplateName.TOOL_CALLING, question)


def render_judge(question: str, prior_answer: str) -> str:
    """Judge prompt over the question concatenated with the answer under review."""
    return _render(TemplateName.JUDGE, f"{question.strip()} {prior_answer.strip()} ")


def render_mathematician(question: str) -> str:
    return _render(TemplateName.MATHEMATICIAN, question)


def render_coder(math_model: str) -> str:
    return _render(TemplateName.CODER, math_model)


def format_exemplar(exemplar: Exemplar) -> str:
    return (
        f"Question:\n{exemplar.question.strip()}\n"
        f"Mathematical Model:\n{exemplar.math_model.strip()}\n"
        f"Code:\n{exemplar.code.strip()}"
    )


def _prepend_exemplars(exemplars, rendered: str) -> str:
    blocks = [format_exemplar(e) for e in exemplars]
    return "\n\n".join(blocks + [rendered])


def render_fsl(exemplars, question: str) -> str:
    """Worked examples ahead of the target question; no exemplars degenerates to baseline."""
    exemplars = list(exemplars)
    if not exemplars:
        return render_baseline(question)
    return _prepend_exemplars(exemplars, render_baseline(question))


def render_fsl_over_judge(exemplars, question: str, prior_answer: str) -> str:
    """Worked examples ahead of a judge pass over an already-reviewed answer."""
    exemplars = list(exemplars)
    if not exemplars:
        return render_judge(question, prior_answer)
    return _prepend_exemplars(exemplars, render_judge(question, prior_answer))


def load_exemplars(path: str | Path) -> list[Exemplar]:
    """Exemplar pack: JSONL with question/math_model/code keys."""
    exemplars = []
    with open(path, encoding="utf-8") as fd:
        for line in fd:
            if not line.strip():
                continue
            obj = json.loads(line)
            exemplars.append(Exemplar(obj["question"], obj["math_model"], obj["code"]))
    return exemplars


def bundled_exemplar_path(benchmark_name: str) -> Path | None:
    candidate = resources.files("orbench").joinpath(f"data/exemplars/{benchmark_name.lower()}.jsonl")
    with resources.as_file(candidate) as path:
        return path if path.exists() else None
