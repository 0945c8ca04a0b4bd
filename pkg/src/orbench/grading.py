"""Answer comparison under rounding tolerance, pass@k, majority voting, and metrics files."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

NO_SOLUTION = "No Best Solution"
DEFAULT_TOLERANCE = 0.05


class DomainError(ValueError):
    """pass@k arguments outside 0 <= c <= n, 1 <= k <= n."""


class InconsistentArity(ValueError):
    """Grade records disagree on the number of generations per instance."""


def compare(pred: str | float | None, ground_truth: str, tolerance: float = DEFAULT_TOLERANCE,
            strict: bool = False) -> bool:
    """Decide whether a predicted optimum matches the stored answer.

    Both sides are rounded to the nearest integer (half-to-even) before the
    relative-error test unless ``strict`` is set; a ground truth of zero falls
    back to an absolute test.  Missing or unparseable predictions never match.
    """
    ground_truth = str(ground_truth).strip()
    if pred is None:
        return False
    pred = str(pred).strip()
    if ground_truth == NO_SOLUTION:
        return pred == ground_truth
    try:
        gt_value = float(ground_truth)
    except ValueError:
        return False
    if pred == NO_SOLUTION:
        return False
    try:
        pred_value = float(pred)
    except ValueError:
        return False
    if not strict:
        gt_value = round(gt_value)
        pred_value = round(pred_value)
    if gt_value == 0:
        return abs(pred_value) <= tolerance
    return abs((pred_value - gt_value) / gt_value) <= tolerance


def pass_at_k(n: int, c: int, k: int) -> float:
    """Probability that at least one of k draws (from n samples, c correct) is correct.

    Computed as 1 - C(n-c, k)/C(n, k) in product form to avoid overflow.
    """
    if not (isinstance(n, int) and isinstance(c, int) and isinstance(k, int)):
        raise DomainError("pass@k arguments must be integers")
    if not (0 <= c <= n and 1 <= k <= n):
        raise DomainError(f"invalid pass@k arguments n={n} c={c} k={k}")
    if c == 0:
        return 0.0
    if n - c < k:
        return 1.0
    all_fail = 1.0
    for i in range(k):
        all_fail *= (n - c - i) / (n - i)
    return 1.0 - all_fail


def majority_vote(preds):
    """Most frequent value, ties broken by first occurrence; None entries are dropped."""
    items = [p for p in preds if p is not None]
    if not items:
        return None
    counts = Counter(items)
    max_count = max(counts.values())
    for value, count in counts.items():
        if count == max_count:
            return value
    return None  # unreachable


def normalize_prediction(token):
    """Round numeric-looking tokens to ints for voting; keep everything else verbatim."""
    if token is None:
        return None
    try:
        return round(float(token))
    except (TypeError, ValueError):
        return token


@dataclass
class GradeRecord:
    instance_id: str
    predictions: list[str | None]
    ground_truth: str
    matched: bool
    tolerance: float = DEFAULT_TOLERANCE


def grade_instance(instance_id: str, predictions, ground_truth: str,
                   tolerance: float = DEFAULT_TOLERANCE, strict: bool = False) -> GradeRecord:
    predictions = list(predictions)
    matched = any(compare(p, ground_truth, tolerance, strict) for p in predictions)
    return GradeRecord(instance_id, predictions, str(ground_truth), matched, tolerance)


@dataclass
class Metrics:
    pass_at_k: dict[str, float]
    n: int
    mj_at_k: dict[str, float] | None = None
    state_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = dict(self.pass_at_k)
        if self.mj_at_k:
            out.update(self.mj_at_k)
        return out


def compute_metrics(grades: list[GradeRecord], majority: bool = False,
                    states=None) -> Metrics:
    """Aggregate per-instance grades into pass@n (and optionally mj@n) accuracies."""
    if not grades:
        raise InconsistentArity("no grade records to aggregate")
    arities = {len(g.predictions) for g in grades}
    if len(arities) != 1:
        raise InconsistentArity(f"mixed generation counts per instance: {sorted(arities)}")
    n = arities.pop()
    accuracy = sum(1 for g in grades if g.matched) / len(grades)
    metrics = Metrics(pass_at_k={f"pass@{n}": accuracy}, n=n)
    if majority:
        hits = 0
        for g in grades:
            voted = majority_vote([normalize_prediction(p) for p in g.predictions if p is not None])
            if voted is not None and compare(str(voted), g.ground_truth, g.tolerance):
                hits += 1
        metrics.mj_at_k = {f"mj@{n}": hits / len(grades)}
    if states is not None:
        from orbench import sandbox

        counts: Counter = Counter(sandbox.state_pattern(s) for s in states)
        metrics.state_counts = dict(counts)
    return metrics


def metrics_path_for(output_file: str | Path) -> Path:
    """Companion metrics path: swap a .json/.jsonl suffix for .metrics.json."""
    name = str(output_file)
    if name.endswith(".jsonl"):
        return Path(name[: -len(".jsonl")] + ".metrics.json")
    if name.endswith(".json"):
        return Path(name[: -len(".json")] + ".metrics.json")
    return Path(name + ".metrics.json")


def write_metrics(metrics: Metrics, output_file: str | Path) -> Path:
    path = metrics_path_for(output_file)
    path.write_text(json.dumps(metrics.to_dict(), indent=4), encoding="utf-8")
    return path
