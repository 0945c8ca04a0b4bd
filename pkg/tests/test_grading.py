import itertools
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orbench.grading import (DomainError, InconsistentArity, Metrics, compare, compute_metrics,
                             grade_instance, majority_vote, metrics_path_for,
                             normalize_prediction, pass_at_k, write_metrics)


class TestCompare:
    def test_within_relative_tolerance(self):
        assert compare("104", "100", 0.05)

    def test_outside_relative_tolerance(self):
        assert not compare("106", "100", 0.05)

    def test_no_solution_token_matches_exactly(self):
        assert compare("No Best Solution", "No Best Solution")
        assert not compare("No Best Solution", "100")
        assert not compare("100", "No Best Solution")

    def test_zero_ground_truth_uses_absolute_test(self):
        assert compare("0.4", "0", 0.05)  # rounds to 0
        assert not compare("1.6", "0", 0.05)  # rounds to 2

    def test_rounding_is_half_to_even(self):
        assert compare("104.5", "100", 0.05)  # rounds to 104
        assert not compare("105.5", "100", 0.05)  # rounds to 106

    def test_unparseable_and_missing_predictions(self):
        assert not compare(None, "100")
        assert not compare("abc", "100")
        assert not compare("", "100")

    def test_sign_symmetry(self):
        assert compare("-104", "-100", 0.05)
        assert compare("96", "100", 0.05) == compare("104", "100", 0.05)

    def test_strict_mode_skips_rounding(self):
        assert compare("0.5", "0.5", 0.0, strict=True)
        assert not compare("0.4", "0.5", 0.05, strict=True)
        assert compare("0.4", "0.5", 0.2, strict=True)

    def test_non_finite_predictions_never_match(self):
        assert not compare("inf", "100", 0.05, strict=True)
        assert not compare("nan", "100", 0.05, strict=True)

    @given(st.floats(-1e6, 1e6), st.text(alphabet=" \t", max_size=4),
           st.text(alphabet=" \t", max_size=4))
    def test_whitespace_invariance(self, value, left, right):
        padded = f"{left}{value}{right}"
        assert compare(padded, "100", 0.05) == compare(str(value), "100", 0.05)


def brute_force_pass_at_k(n: int, c: int, k: int) -> float:
    universe = range(n)
    correct = set(range(c))
    subsets = list(itertools.combinations(universe, k))
    hits = sum(1 for subset in subsets if correct & set(subset))
    return hits / len(subsets)


class TestPassAtK:
    def test_all_correct(self):
        assert pass_at_k(1, 1, 1) == 1.0

    def test_spot_value_five_choose_one(self):
        assert pass_at_k(5, 2, 1) == pytest.approx(0.4, abs=1e-12)

    def test_spot_value_ten_choose_five(self):
        assert pass_at_k(10, 3, 5) == pytest.approx(11 / 12, abs=1e-12)

    def test_matches_enumeration_small(self):
        for n in range(1, 9):
            for c in range(n + 1):
                for k in range(1, n + 1):
                    assert pass_at_k(n, c, k) == pytest.approx(
                        brute_force_pass_at_k(n, c, k), abs=1e-9)

    def test_boundaries(self):
        assert pass_at_k(7, 0, 3) == 0.0
        assert pass_at_k(7, 1, 7) == 1.0
        assert pass_at_k(7, 7, 1) == 1.0

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            pass_at_k(5, 6, 1)
        with pytest.raises(DomainError):
            pass_at_k(5, 2, 0)
        with pytest.raises(DomainError):
            pass_at_k(5, -1, 1)
        with pytest.raises(DomainError):
            pass_at_k(5, 2, 6)

    @settings(max_examples=60)
    @given(st.integers(1, 12))
    def test_monotone_in_c_and_k(self, n):
        for k in range(1, n + 1):
            values = [pass_at_k(n, c, k) for c in range(n + 1)]
            assert values == sorted(values)
        for c in range(n + 1):
            values = [pass_at_k(n, c, k) for k in range(1, n + 1)]
            assert values == sorted(values)


class TestMajorityVote:
    def test_strict_majority(self):
        assert majority_vote([3, 3, 2]) == 3

    def test_tie_prefers_first_occurrence(self):
        assert majority_vote([2, 3]) == 2
        assert majority_vote([3, 2, 2, 3]) == 3

    def test_empty_and_none_only(self):
        assert majority_vote([]) is None
        assert majority_vote([None, None]) is None

    def test_none_entries_dropped(self):
        assert majority_vote([None, 5, None, 5, 4]) == 5

    @given(st.lists(st.integers(0, 3), min_size=1, max_size=20))
    def test_stable_under_appending_less_frequent_value(self, values):
        winner = majority_vote(values)
        counts = {v: values.count(v) for v in values}
        newcomer = max(counts) + 1  # occurs zero times so far
        extended = values + [newcomer] * max(0, counts[winner] - 1)
        assert majority_vote(extended) == winner

    def test_normalize_prediction(self):
        assert normalize_prediction("104.4") == 104
        assert normalize_prediction("No Best Solution") == "No Best Solution"
        assert normalize_prediction(None) is None


class TestComputeMetrics:
    def _grades(self, flags, preds=None):
        grades = []
        for i, matched in enumerate(flags):
            predictions = preds[i] if preds else ["1" if matched else "9"]
            grades.append(grade_instance(f"i{i}", predictions, "1", 0.05))
        return grades

    def test_pass_at_one_is_mean_of_indicators(self):
        grades = self._grades([True] * 4 + [False] * 6)
        metrics = compute_metrics(grades)
        assert metrics.pass_at_k == {"pass@1": 0.4}

    def test_all_matched(self):
        metrics = compute_metrics(self._grades([True] * 3))
        assert metrics.pass_at_k == {"pass@1": 1.0}

    def test_majority_voting_key(self):
        preds = [["104", "1", "1"], ["9", "9", "1"], [None, None, None]]
        grades = [grade_instance(f"i{i}", p, "1", 0.05) for i, p in enumerate(preds)]
        metrics = compute_metrics(grades, majority=True)
        assert metrics.pass_at_k["pass@3"] == pytest.approx(2 / 3)
        assert metrics.mj_at_k["mj@3"] == pytest.approx(1 / 3)

    def test_inconsistent_arity(self):
        grades = [grade_instance("a", ["1"], "1"), grade_instance("b", ["1", "2"], "1")]
        with pytest.raises(InconsistentArity):
            compute_metrics(grades)
        with pytest.raises(InconsistentArity):
            compute_metrics([])

    def test_state_counts(self):
        grades = self._grades([True, False])
        metrics = compute_metrics(grades, states=[
            "Execution Successful and Best Solution Found",
            "Execution Failed: boom\nTraceback",
        ])
        assert metrics.state_counts == {
            "Execution Successful and Best Solution Found": 1,
            "Execution Failed: <message>": 1,
        }


class TestMetricsFile:
    def test_path_derivation(self):
        assert str(metrics_path_for("run.jsonl")).endswith("run.metrics.json")
        assert str(metrics_path_for("run.json")).endswith("run.metrics.json")
        assert str(metrics_path_for("run.txt")).endswith("run.txt.metrics.json")

    def test_write_metrics(self, tmp_path):
        metrics = Metrics(pass_at_k={"pass@1": 0.6}, n=1)
        out = write_metrics(metrics, tmp_path / "run.jsonl")
        payload = json.loads(out.read_text())
        assert payload == {"pass@1": 0.6}
