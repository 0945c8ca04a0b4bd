"""Evaluation harness for LLM-generated optimization code.

Subpackages cover the full pipeline: benchmark loading, prompt rendering,
model-gateway record/replay, sandboxed script execution, tolerance grading,
failure taxonomy, a tool-signature index, strategy orchestration, and an
exact LP/MILP oracle for verifying stored answers.
"""

__version__ = "0.1.0"
