"""Human-preference annotation records: validation, statistics, group
reconciliation, and agent-training export."""
from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass

import numpy as np

from . import errors

DIMENSIONS = (
    "overall_realism",
    "vehicle_realism",
    "pedestrian_realism",
    "physical_plausibility",
    "consistency_3d4d",
    "behavioral_safety",
)

GROUPS = ("A", "B")

# fixed 50-word stop list for rationale keyword counts (no stemming)
STOP_WORDS = frozenset("""
a an and are as at be but by for from has have in is it its of on or that the
this to was were will with not no so if then than too very can could should
would do does did i he she they we you my
""".split())

assert len(STOP_WORDS) == 50


@dataclass
class ScoreRecord:
    video_id: str
    model_id: str
    dimension: str
    group_id: str
    score: int
    rationale: str
    duration_seconds: float | None = None


@dataclass
class DimensionStats:
    min: float
    max: float
    mean: float
    std: float
    median: float
    q25: float
    q75: float


@dataclass
class SftSample:
    video_id: str
    dimension: str
    score: float
    reason: str


def validate_record(r: ScoreRecord):
    """Return the full list of invariant violations (empty when valid)."""
    violations = []
    if not isinstance(r.score, int) or not 1 <= r.score <= 10:
        violations.append("ScoreOutOfRange")
    if not r.rationale or not r.rationale.strip():
        violations.append("EmptyRationale")
    if r.dimension not in DIMENSIONS:
        violations.append("UnknownDimension")
    if r.group_id not in GROUPS:
        violations.append("UnknownGroup")
    return violations


def dimension_stats(records, dimension, model) -> DimensionStats:
    """Order statistics of matching scores; interpolated quantiles, N-1 std."""
    scores = np.array([r.score for r in records
                       if r.dimension == dimension and r.model_id == model],
                      dtype=np.float64)
    if scores.size == 0:
        raise errors.NoRecords(f"no records for ({model}, {dimension})")
    std = float(np.std(scores, ddof=1)) if scores.size > 1 else 0.0
    return DimensionStats(
        min=float(scores.min()),
        max=float(scores.max()),
        mean=float(scores.mean()),
        std=std,
        median=float(np.percentile(scores, 50)),
        q25=float(np.percentile(scores, 25)),
        q75=float(np.percentile(scores, 75)),
    )


def reconcile_groups(records, threshold: int):
    """Items whose group-A and group-B scores diverge by >= threshold.

    Scores are averaged per group per (video, model, dimension); output is
    sorted by (video, model, dimension).
    """
    grouped = {}
    for r in records:
        key = (r.video_id, r.model_id, r.dimension)
        grouped.setdefault(key, {}).setdefault(r.group_id, []).append(r.score)

    divergences = []
    for key in sorted(grouped):
        by_group = grouped[key]
        if "A" not in by_group or "B" not in by_group:
            continue
        a = float(np.mean(by_group["A"]))
        b = float(np.mean(by_group["B"]))
        if abs(a - b) >= threshold:
            divergences.append({
                "video_id": key[0],
                "model_id": key[1],
                "dimension": key[2],
                "score_a": a,
                "score_b": b,
                "gap": abs(a - b),
            })
    return divergences


def export_sft(records):
    """Yield SftSamples for validated records; integer scores become x.0."""
    for r in records:
        violations = validate_record(r)
        if violations:
            raise errors.UnvalidatedRecord(f"{r.video_id}: {violations}")
        score = round(float(r.score) * 2.0) / 2.0
        score = min(10.0, max(1.0, score))
        yield SftSample(video_id=r.video_id, dimension=r.dimension,
                        score=score, reason=r.rationale)


def serialize_sft(samples):
    """Newline-delimited JSON; each line has exactly the keys score and reason."""
    lines = []
    for s in samples:
        lines.append(json.dumps({"score": s.score, "reason": s.reason},
                                ensure_ascii=False))
    return "\n".join(lines) + ("\n" if lines else "")


def rationale_keywords(records, top=50):
    """Raw token frequency counts over rationales after lowercasing and
    stop-word removal."""
    counts = Counter()
    for r in records:
        for token in re.findall(r"[a-z0-9']+", r.rationale.lower()):
            if token not in STOP_WORDS:
                counts[token] += 1
    return counts.most_common(top)


def load_records(path):
    """Ingest newline-delimited JSON score records."""
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise errors.ParseError(f"{path}:{line_no}: {exc}") from exc
            records.append(ScoreRecord(
                video_id=doc["video_id"],
                model_id=doc["model_id"],
                dimension=doc["dimension"],
                group_id=doc["group_id"],
                score=int(doc["score"]),
                rationale=doc["rationale"],
                duration_seconds=doc.get("duration_seconds"),
            ))
    return records
