"""Deterministic evaluation suite for driving-scene video generation.

Scores generation quality, reconstruction fidelity, action following, and
downstream-task utility from precomputed perception artifacts, plus
human-preference statistics.  No model inference happens at evaluation time.
"""
from .engine import RunConfig, run_evaluation, validate_artifacts
from .interchange import (
    EvaluationManifest,
    TensorFile,
    load_manifest,
    read_tensor,
    write_tensor,
)
from .report import ENGINE_VERSION, MetricReport, canonical_json, emit_report

__version__ = ENGINE_VERSION

__all__ = [
    "ENGINE_VERSION",
    "EvaluationManifest",
    "MetricReport",
    "RunConfig",
    "TensorFile",
    "canonical_json",
    "emit_report",
    "load_manifest",
    "read_tensor",
    "run_evaluation",
    "validate_artifacts",
    "write_tensor",
    "__version__",
]
