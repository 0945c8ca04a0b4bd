"""Deterministic fake chat model used to record the campaign cassette and drive strategy tests.

Every fixture question carries a ``(case Pnn)`` token; the responder keys its
scripted answers on that token plus the prompt's strategy markers.  Answers are
self-contained scripts (no solver import) so the sandbox can run them anywhere.
"""

from __future__ import annotations

import re
from pathlib import Path

from orbench.benchmarks import Benchmark, load_benchmark
from orbench.gateway import TransportReply

MODEL_ID = "replay-model"
CAMPAIGN_SEED = 42

FIXTURES_DIR = Path(__file__).parent / "fixtures"
MINI_BENCHMARK = FIXTURES_DIR / "benchmarks" / "mini_nl4opt.jsonl"
CAMPAIGN_CASSETTE = FIXTURES_DIR / "cassettes" / "campaign.jsonl"

_TAG_RE = re.compile(r"\(case (P\d+)\)")


def solved_script(value) -> str:
    """Minimal script exposing the model/COPT names the sentinel footer needs."""
    return (
        "class COPT:\n"
        "    OPTIMAL = 1\n"
        "\n"
        "class SolvedModel:\n"
        "    status = COPT.OPTIMAL\n"
        f"    objval = {value}\n"
        "\n"
        "model = SolvedModel()\n"
    )


def unsolved_script() -> str:
    return (
        "class COPT:\n"
        "    OPTIMAL = 1\n"
        "\n"
        "class UnsolvedModel:\n"
        "    status = 0\n"
        "    objval = None\n"
        "\n"
        "model = UnsolvedModel()\n"
    )


def fenced(script: str, lead: str = "Here is the model and the code.") -> str:
    return f"{lead}\n\n```python\n{script}```\n"


def correct_answer(ground_truth: str) -> str:
    if ground_truth == "No Best Solution":
        return fenced(unsolved_script())
    return fenced(solved_script(float(ground_truth)))


def wrong_value_answer(ground_truth: str) -> str:
    value = float(ground_truth) * 2 + 10
    return fenced(solved_script(value), lead="The optimum is computed below.")


def no_code_answer() -> str:
    return "I am unable to produce a program for this question."


def syntax_error_answer() -> str:
    return fenced("def objective(:\n    pass\n")


def attribute_error_answer() -> str:
    script = (
        "class CoptError(Exception):\n"
        "    pass\n"
        "\n"
        "class COPT:\n"
        "    OPTIMAL = 1\n"
        "\n"
        "class Model:\n"
        "    status = COPT.OPTIMAL\n"
        "    objval = 0.0\n"
        "    def __getattr__(self, name):\n"
        "        raise CoptError(f\"Invalid attribute name '{name}'\")\n"
        "\n"
        "model = Model()\n"
        "model.update()\n"
    )
    return fenced(script)


def logical_error_answer() -> str:
    script = (
        "class Counter:\n"
        "    pass\n"
        "\n"
        "y = Counter()\n"
        "print(f\"buses used: {y.y}\")\n"
    )
    return fenced(script)


# answers that differ from the default correct one, per (strategy marker, case id);
# every entry takes the ground truth so value-dependent answers stay uniform
BASELINE_OUTCOMES = {
    "P04": lambda gt: no_code_answer(),
    "P05": lambda gt: syntax_error_answer(),
    "P06": lambda gt: attribute_error_answer(),
    "P08": wrong_value_answer,
    "P09": lambda gt: logical_error_answer(),
}
JUDGE_OUTCOMES = {"P05": lambda gt: syntax_error_answer(), "P08": wrong_value_answer}
FSL_OUTCOMES = {"P08": wrong_value_answer}
TOOL_OUTCOMES = {"P06": lambda gt: attribute_error_answer()}
CODER_OUTCOMES = {"P03": wrong_value_answer}

EXPECTED_PASS_AT_1 = {
    "Baseline": 0.5,
    "Judge": 0.8,
    "JudgePlusFSL": 0.9,
    "ToolCalling": 0.9,
    "MultiAgent": 0.8,
}


def load_mini_benchmark():
    return load_benchmark(MINI_BENCHMARK, Benchmark.NL4OPT)


class FixtureResponder:
    """Callable transport: inspects the conversation and replies from the outcome tables."""

    def __init__(self, instances=None):
        instances = instances if instances is not None else load_mini_benchmark()
        self.truth = {}
        for instance in instances:
            match = _TAG_RE.search(instance.question)
            if match:
                self.truth[match.group(1)] = instance.ground_truth

    def _tag(self, messages) -> str | None:
        joined = "\n".join(m["content"] for m in messages)
        matches = _TAG_RE.findall(joined)
        return matches[-1] if matches else None

    def _answer(self, table, tag) -> str:
        maker = table.get(tag, correct_answer)
        return maker(self.truth[tag])

    def __call__(self, messages, model_id: str) -> TransportReply:
        prompt = messages[-1]["content"]
        tag = self._tag(messages)
        reasoning = f"scripted reasoning for {tag}" if tag else "scripted reasoning"

        if prompt.startswith("TOOL_RESULT:"):
            return TransportReply(self._answer(TOOL_OUTCOMES, tag), reasoning)

        if "Lookup the documentation and signatures" in prompt:
            if tag == "P01" and "TOOL_RESULT:" not in "".join(m["content"] for m in messages):
                return TransportReply("TOOL: addVar", reasoning)
            return TransportReply(self._answer(TOOL_OUTCOMES, tag), reasoning)

        if "formulate an appropriate mathematical model" in prompt:
            if tag == "P02":
                return TransportReply("", reasoning)
            return TransportReply(
                f"Linear program with objective and constraints for this question. (case {tag})",
                reasoning)

        if "Convert the following mathematical model" in prompt:
            if tag is None:
                return TransportReply("No model was provided, so no code can be written.",
                                      reasoning)
            return TransportReply(self._answer(CODER_OUTCOMES, tag), reasoning)

        if "Evaluate the responses and judge the correctness" in prompt:
            if prompt.startswith("Question:"):  # exemplars precede the judge body
                return TransportReply(self._answer(FSL_OUTCOMES, tag), reasoning)
            return TransportReply(self._answer(JUDGE_OUTCOMES, tag), reasoning)

        return TransportReply(self._answer(BASELINE_OUTCOMES, tag), reasoning)
