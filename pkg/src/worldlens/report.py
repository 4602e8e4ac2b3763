"""Report assembly and emission (canonical JSON, CSV, markdown, radar data)."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from . import errors

ENGINE_VERSION = "0.1.0"

# Versioned radar normalization table.  Lower-is-better dimensions are
# direction-normalized as 1 - clamp(score / scale); higher-is-better as
# clamp(score / scale).  Raw values always remain in the report.
NORMALIZATION_VERSION = "v1"
NORMALIZATION = {
    "G1": ("higher", 1.0),
    "G2": ("higher", 1.0),
    "G3": ("higher", 1.0),
    "G4": ("lower", 50.0),
    "G5": ("higher", 1.0),
    "G6": ("higher", 1.0),
    "G7": ("lower", 1000.0),
    "G8": ("higher", 100.0),
    "R1": ("higher", 50.0),          # PSNR dB
    "R1_lpips": ("lower", 1.0),
    "R2": ("lower", 1.0),            # AbsRel
    "R3": ("higher", 100.0),
    "R4": ("lower", 1000.0),
    "A1": ("lower", 5.0),            # meters
    "A2": ("higher", 1.0),
    "A3": ("higher", 1.0),
    "A4": ("higher", 1.0),
    "D1": ("higher", 1.0),
    "D2": ("higher", 1.0),
    "D3": ("higher", 1.0),
    "D4": ("higher", 1.0),
    "H": ("higher", 10.0),
}

ASPECTS = [
    ("Generation", ("G1", "G2", "G3", "G4", "G5", "G6", "G7", "G8")),
    ("Reconstruction", ("R1", "R2", "R3", "R4")),
    ("Action", ("A1", "A2", "A3", "A4")),
    ("Downstream", ("D1", "D2", "D3", "D4")),
    ("Human", ("H",)),
]


@dataclass
class MetricReport:
    meta: dict
    scores: dict = field(default_factory=dict)      # metric -> {name: value}
    per_video: dict = field(default_factory=dict)   # metric -> {video: value}
    warnings: list = field(default_factory=list)


def _round_floats(obj):
    """6 significant digits on every float for cross-platform byte determinism."""
    if isinstance(obj, float):
        return float(f"{obj:.6g}")
    if isinstance(obj, dict):
        return {str(k): _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    return obj


def report_to_dict(report: MetricReport) -> dict:
    return {
        "meta": report.meta,
        "scores": report.scores,
        "per_video": report.per_video,
        "warnings": sorted(report.warnings),
    }


def canonical_json(report: MetricReport) -> str:
    return json.dumps(_round_floats(report_to_dict(report)),
                      sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _flat_scores(report: MetricReport):
    rows = []
    for metric in sorted(report.scores):
        entry = report.scores[metric]
        if isinstance(entry, dict):
            for name in sorted(entry):
                value = entry[name]
                if isinstance(value, (int, float)):
                    rows.append((metric, name, float(value)))
        elif isinstance(entry, (int, float)):
            rows.append((metric, "score", float(entry)))
    return rows


def _primary_value(report, metric):
    """The headline scalar for a metric, used by csv/radar output."""
    entry = report.scores.get(metric)
    if entry is None:
        return None
    if isinstance(entry, (int, float)):
        return float(entry)
    for key in ("total", "score", "fvd", "nds", "amota", "m_ray_iou", "miou",
                "abs_rel", "psnr", "ads", "pdms", "route_completion",
                "displacement_error", "average", "mean"):
        if key in entry and isinstance(entry[key], (int, float)):
            return float(entry[key])
    for name in sorted(entry):
        if isinstance(entry[name], (int, float)):
            return float(entry[name])
    return None


def to_csv(report: MetricReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["model", "dimension", "statistic", "value"])
    model = report.meta.get("run_id", "run")
    for metric, name, value in _flat_scores(report):
        writer.writerow([model, metric, name, f"{value:.6g}"])
    return buf.getvalue()


def to_markdown(report: MetricReport) -> str:
    lines = [f"# Evaluation report: {report.meta.get('run_id', 'run')}", ""]
    for aspect, metrics in ASPECTS:
        present = [m for m in metrics if m in report.scores]
        if not present:
            continue
        lines.append(f"## Aspect: {aspect}")
        lines.append("")
        lines.append("| Dimension | Statistic | Value |")
        lines.append("|---|---|---:|")
        for metric in present:
            for m, name, value in _flat_scores(report):
                if m == metric:
                    lines.append(f"| {metric} | {name} | {value:.6g} |")
        lines.append("")
    if report.warnings:
        lines.append("## Warnings")
        lines.append("")
        for w in sorted(report.warnings):
            lines.append(f"- {w}")
        lines.append("")
    return "\n".join(lines)


def radar_axis(metric: str, value: float) -> float:
    direction, scale = NORMALIZATION[metric]
    clamped = min(1.0, max(0.0, value / scale))
    return 1.0 - clamped if direction == "lower" else clamped


def to_radar(report: MetricReport) -> dict:
    axes = {}
    for metric in sorted(report.scores):
        if metric not in NORMALIZATION:
            continue
        value = _primary_value(report, metric)
        if value is None:
            continue
        axes[metric] = radar_axis(metric, value)
    return {
        "normalization_version": NORMALIZATION_VERSION,
        "run_id": report.meta.get("run_id", "run"),
        "axes": axes,
    }


def emit_report(report: MetricReport, fmt: str, out_dir):
    """Write the report in the requested format; returns the file path."""
    from pathlib import Path

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        if fmt == "json":
            path = out_dir / "report.json"
            path.write_text(canonical_json(report), encoding="utf-8")
        elif fmt == "csv":
            path = out_dir / "report.csv"
            path.write_text(to_csv(report), encoding="utf-8")
        elif fmt in ("md", "markdown"):
            path = out_dir / "report.md"
            path.write_text(to_markdown(report), encoding="utf-8")
        elif fmt in ("radar", "radar-data"):
            path = out_dir / "radar.json"
            path.write_text(json.dumps(_round_floats(to_radar(report)),
                                       sort_keys=True, indent=2) + "\n",
                            encoding="utf-8")
        else:
            raise errors.WorldLensError(f"unknown report format {fmt!r}")
    except OSError as exc:
        raise errors.IoFailure(str(exc)) from exc
    return path
