"""Failure classification for graded executions, with override support and distribution reports."""

from __future__ import annotations

import csv
import json
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from orbench.grading import GradeRecord
from orbench.sandbox import ExecutionRecord


class Label(str, Enum):
    ATTRIBUTE_ERROR = "Attribute Error"
    SYNTAX_ERROR = "Syntax Error"
    LOGICAL_ERROR = "Logical Error"
    RESULTS_NOT_OPTIMAL = "Results not Optimal"
    OPTIMAL_SOLUTION = "Optimal Solution"


LABEL_ORDER = (
    Label.ATTRIBUTE_ERROR,
    Label.SYNTAX_ERROR,
    Label.LOGICAL_ERROR,
    Label.RESULTS_NOT_OPTIMAL,
    Label.OPTIMAL_SOLUTION,
)

_SYNTAX_MARKERS = ("SyntaxError", "invalid syntax")
_INVALID_MEMBER_RE = re.compile(r"Invalid attribute name '([^']+)'")
_PY_ATTRIBUTE_RE = re.compile(r"AttributeError: '(\w+)' object has no attribute '(\w+)'")
_SOLVER_CLASSES = {"Model", "Envr", "Var", "LinExpr", "Constraint"}

_SUCCESS_PREFIXES = ("Execution Successful", "Execution Suceessful")


class UnknownInstanceId(KeyError):
    pass


@dataclass(frozen=True)
class OverrideEntry:
    instance_id: str
    label: Label
    note: str = ""


@dataclass(frozen=True)
class ClassifiedInstance:
    instance_id: str
    benchmark: str
    label: Label
    source: str = "computed"
    note: str = ""


def _self_accessor(name: str, text: str) -> bool:
    # y.y-style reads: the hallucinated member repeats the receiver's own name.
    return re.search(rf"\b{re.escape(name)}\.{re.escape(name)}\b", text) is not None


def classify_text(state: str, error_output: str = "", matched: bool = False) -> Label:
    """Decision ladder from grade outcome and failure text to one taxonomy label."""
    if matched:
        return Label.OPTIMAL_SOLUTION
    if any(state.startswith(p) for p in _SUCCESS_PREFIXES):
        return Label.RESULTS_NOT_OPTIMAL
    text = f"{state}\n{error_output}"
    if any(marker in text for marker in _SYNTAX_MARKERS):
        return Label.SYNTAX_ERROR
    invalid = _INVALID_MEMBER_RE.search(text)
    if invalid:
        return Label.LOGICAL_ERROR if _self_accessor(invalid.group(1), text) else Label.ATTRIBUTE_ERROR
    missing = _PY_ATTRIBUTE_RE.search(text)
    if missing and missing.group(1) in _SOLVER_CLASSES:
        return Label.LOGICAL_ERROR if _self_accessor(missing.group(2), text) else Label.ATTRIBUTE_ERROR
    return Label.LOGICAL_ERROR


def classify(execution: ExecutionRecord, grade: GradeRecord) -> Label:
    return classify_text(execution.state, execution.error_output, grade.matched)


def load_overrides(path: str | Path) -> list[OverrideEntry]:
    """Override file: JSONL of {id, label, note}."""
    overrides = []
    with open(path, encoding="utf-8") as fd:
        for line in fd:
            if not line.strip():
                continue
            obj = json.loads(line)
            overrides.append(OverrideEntry(str(obj["id"]), Label(obj["label"]), obj.get("note", "")))
    return overrides


def apply_overrides(items: list[ClassifiedInstance], overrides) -> list[ClassifiedInstance]:
    """Replace computed labels with annotator decisions, keeping provenance."""
    by_id = {item.instance_id: i for i, item in enumerate(items)}
    out = list(items)
    for entry in overrides:
        if entry.instance_id not in by_id:
            raise UnknownInstanceId(entry.instance_id)
        i = by_id[entry.instance_id]
        out[i] = replace(out[i], label=entry.label, source="override", note=entry.note)
    return out


@dataclass
class DistributionReport:
    counts: dict[str, Counter] = field(default_factory=dict)  # benchmark -> label counts

    def total(self, benchmark: str | None = None) -> int:
        if benchmark is not None:
            return sum(self.counts.get(benchmark, Counter()).values())
        return sum(sum(c.values()) for c in self.counts.values())

    def accuracy(self, benchmark: str | None = None) -> float | None:
        total = self.total(benchmark)
        if total == 0:
            return None
        if benchmark is not None:
            optimal = self.counts[benchmark][Label.OPTIMAL_SOLUTION.value]
        else:
            optimal = sum(c[Label.OPTIMAL_SOLUTION.value] for c in self.counts.values())
        return optimal / total

    def render_text(self) -> str:
        headers = ["benchmark"] + [label.value for label in LABEL_ORDER] + ["accuracy"]

        def cell(count: int, total: int) -> str:
            return f"{count} ({count / total:.1%})" if total else str(count)

        rows = []
        for benchmark in sorted(self.counts):
            acc = self.accuracy(benchmark)
            total = self.total(benchmark)
            rows.append(
                [benchmark]
                + [cell(self.counts[benchmark][label.value], total) for label in LABEL_ORDER]
                + [f"{acc:.1%}" if acc is not None else "-"]
            )
        if len(self.counts) > 1:
            acc = self.accuracy()
            total = self.total()
            rows.append(
                ["(all)"]
                + [cell(sum(c[label.value] for c in self.counts.values()), total)
                   for label in LABEL_ORDER]
                + [f"{acc:.1%}" if acc is not None else "-"]
            )
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
                  for i, h in enumerate(headers)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        for row in rows:
            lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
        return "\n".join(lines)

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fw:
            writer = csv.writer(fw)
            writer.writerow(["benchmark", "label", "count"])
            for benchmark in sorted(self.counts):
                for label in LABEL_ORDER:
                    writer.writerow([benchmark, label.value, self.counts[benchmark][label.value]])


def report_distribution(items, group_by_benchmark: bool = True) -> DistributionReport:
    report = DistributionReport()
    for item in items:
        benchmark = item.benchmark if group_by_benchmark else "all"
        report.counts.setdefault(benchmark, Counter())[item.label.value] += 1
    return report
