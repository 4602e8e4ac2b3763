"""Extractor implementations.

Each extractor converts a decoded clip into interchange artifacts in an
output directory and appends a provenance entry.  The ``builtin`` backend
computes deterministic image-statistics features so pipelines can be
exercised end to end without model weights; the ``pretrained`` backend
requires local weights and raises ModelUnavailable when they are absent.

Adapters never compute metrics; the boundary is strictly artifacts out.
"""
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ModelUnavailable, UnknownExtractor
from .video import load_clip, resize
from .wlt import write_wlt

VERSION = "0.1.0"

EMBED_DIM = 16

# Default working resolutions (width x height) per extractor.
DEFAULT_RESOLUTIONS = {
    "object-classifier": (256, 128),
    "reid": (256, 128),
    "dino": (224, 224),
    "clip": (224, 224),
    "depth-feature": (224, 224),
    "segmenter": (224, 224),
    "cross-view-matcher": (224, 224),
    "i3d": (224, 224),
    "lpips": (544, 304),
    "musiq": (544, 304),
}

EXTRACTOR_NAMES = tuple(sorted(DEFAULT_RESOLUTIONS))


@dataclass
class AdapterJob:
    video_path: str
    extractor: str
    out_dir: str
    device: str = "cpu"
    backend: str = "builtin"
    resolution: tuple = None
    video_id: str = None
    class_count: int = 3
    camera_pair: tuple = ("CAM_FRONT", "CAM_FRONT_RIGHT")
    condition: str = "front_center_interp"
    weights: str = None

    def validate(self):
        if self.extractor not in DEFAULT_RESOLUTIONS:
            raise UnknownExtractor(self.extractor)


# --------------------------------------------------------------------------
# builtin image statistics
# --------------------------------------------------------------------------

def _gray(frame):
    return frame.astype(np.float64).mean(axis=2)


def _frame_embedding(frame, dim=EMBED_DIM):
    """Grayscale histogram embedding with unit L2 norm."""
    gray = _gray(frame)
    hist, _ = np.histogram(gray, bins=dim, range=(0.0, 256.0))
    vec = hist.astype(np.float64) + 1.0
    return (vec / np.linalg.norm(vec)).astype(np.float32)


def _embedding_rows(frames, width, height, normalized=True):
    rows = []
    for f in range(frames.shape[0]):
        frame = resize(frames[f], height, width)
        if normalized:
            rows.append(_frame_embedding(frame))
        else:
            gray = _gray(frame)
            cells = gray.reshape(4, gray.shape[0] // 4, 4, gray.shape[1] // 4)
            rows.append(cells.mean(axis=(1, 3)).ravel().astype(np.float32))
    return np.stack(rows)


def _confidence(frame):
    """Contrast-based realism proxy in (0, 1)."""
    return float(1.0 / (1.0 + np.exp(-_gray(frame).std() / 32.0 + 1.0)))


def _sharpness_score(frame):
    """Gradient-energy quality proxy in [0, 100]."""
    gray = _gray(frame)
    g = np.abs(np.diff(gray, axis=0)).mean() + np.abs(np.diff(gray, axis=1)).mean()
    return float(min(100.0, g))


def _merge_json(path, update):
    doc = json.loads(path.read_text()) if path.exists() else None
    if isinstance(update, list):
        doc = (doc or []) + update
    else:
        doc = doc or {}
        for key, value in update.items():
            if isinstance(value, list) and isinstance(doc.get(key), list):
                doc[key] = doc[key] + value
            else:
                doc[key] = value
    path.write_text(json.dumps(doc, indent=2, sort_keys=True))


def _record_provenance(out_dir, job, artifacts):
    path = out_dir / "provenance.json"
    entry = {
        "extractor": job.extractor,
        "version": VERSION,
        "backend": job.backend,
        "resolution": list(job.resolution),
        "input": Path(job.video_path).name,
        "artifacts": sorted(artifacts),
    }
    _merge_json(path, [entry])


# --------------------------------------------------------------------------
# per-extractor emitters (builtin backend)
# --------------------------------------------------------------------------

def _emit_object_classifier(job, frames, out_dir):
    records = []
    for f in range(frames.shape[0]):
        frame = resize(frames[f], job.resolution[1], job.resolution[0])
        records.append({"video_id": job.video_id, "frame_index": f,
                        "track_id": 1, "class_id": "vehicle",
                        "confidence": _confidence(frame)})
    _merge_json(out_dir / "confidences.json", records)
    return ["confidences.json"]


def _emit_reid(job, frames, out_dir):
    emb = _embedding_rows(frames, *job.resolution)
    name = f"{job.video_id}_t1.wlt"
    write_wlt(emb, out_dir / name)
    doc = {"tracks": [{"track_id": 1, "class_id": "vehicle",
                       "confidences": [1.0] * frames.shape[0],
                       "embeddings": name}]}
    (out_dir / f"{job.video_id}.json").write_text(json.dumps(doc, indent=2))
    return [name, f"{job.video_id}.json"]


def _emit_features(job, frames, out_dir, normalized):
    emb = _embedding_rows(frames, *job.resolution, normalized=normalized)
    name = f"{job.video_id}.wlt"
    write_wlt(emb, out_dir / name)
    return [name]


def _emit_segmenter(job, frames, out_dir):
    masks = []
    for f in range(frames.shape[0]):
        gray = _gray(resize(frames[f], job.resolution[1], job.resolution[0]))
        labels = np.floor(gray / 256.0 * job.class_count)
        masks.append(np.clip(labels, 0, job.class_count - 1).astype(np.uint16))
    name = f"{job.video_id}.wlt"
    write_wlt(np.stack(masks), out_dir / name)
    return [name]


def _emit_cross_view_matcher(job, frames, out_dir):
    records = []
    for f in range(frames.shape[0]):
        emb = _frame_embedding(frames[f]).astype(np.float64)
        nxt = _frame_embedding(frames[min(f + 1, frames.shape[0] - 1)]).astype(np.float64)
        conf = float(np.clip(emb @ nxt, 0.0, 1.0))
        records.append({"video_id": job.video_id, "frame_index": f,
                        "camera_pair": list(job.camera_pair),
                        "confidences": [conf]})
    _merge_json(out_dir / "matches.json", records)
    return ["matches.json"]


def _emit_i3d(job, frames, out_dir):
    emb = _embedding_rows(frames, *job.resolution, normalized=False)
    name = f"{job.video_id}.wlt"
    write_wlt(emb, out_dir / name)
    return [name]


def _emit_lpips(job, frames, out_dir):
    scores = []
    for f in range(frames.shape[0] - 1):
        diff = np.abs(frames[f + 1].astype(np.float64)
                      - frames[f].astype(np.float64)).mean() / 255.0
        scores.append(float(np.clip(2.0 * diff, 0.0, 2.0)))
    if not scores:
        scores = [0.0]
    _merge_json(out_dir / "lpips.json", {job.video_id: scores})
    return ["lpips.json"]


def _emit_musiq(job, frames, out_dir):
    scores = [_sharpness_score(resize(frames[f], job.resolution[1],
                                      job.resolution[0]))
              for f in range(frames.shape[0])]
    _merge_json(out_dir / "quality.json", {job.condition: scores})
    return ["quality.json"]


_EMITTERS = {
    "object-classifier": _emit_object_classifier,
    "reid": _emit_reid,
    "dino": lambda job, frames, out: _emit_features(job, frames, out, True),
    "clip": lambda job, frames, out: _emit_features(job, frames, out, True),
    "depth-feature": lambda job, frames, out: _emit_features(job, frames, out, False),
    "segmenter": _emit_segmenter,
    "cross-view-matcher": _emit_cross_view_matcher,
    "i3d": _emit_i3d,
    "lpips": _emit_lpips,
    "musiq": _emit_musiq,
}


def extract(job: AdapterJob):
    """Run one extractor over one clip; returns the artifact names written."""
    job.validate()
    if job.resolution is None:
        job.resolution = DEFAULT_RESOLUTIONS[job.extractor]
    if job.backend == "pretrained":
        if not job.weights or not Path(job.weights).exists():
            raise ModelUnavailable(
                f"{job.extractor}: pretrained backend needs local weights")
        raise ModelUnavailable(
            f"{job.extractor}: no pretrained runtime in this build")
    if job.backend != "builtin":
        raise ModelUnavailable(f"unknown backend {job.backend!r}")

    frames = load_clip(job.video_path)
    if job.video_id is None:
        job.video_id = Path(job.video_path).stem
    out_dir = Path(job.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    artifacts = _EMITTERS[job.extractor](job, frames, out_dir)
    _record_provenance(out_dir, job, artifacts)
    return artifacts
