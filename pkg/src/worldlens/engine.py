"""Evaluation orchestration: artifact loading, metric dispatch, validation.

Per-video work runs on a thread pool; every reduction happens single-threaded
in sorted video-id order so reports are byte-identical regardless of the
worker count.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import action, downstream, errors, generation, interchange, preference, reconstruction
from .report import ENGINE_VERSION, MetricReport


@dataclass
class RunConfig:
    manifest_path: str
    metrics: list = field(default_factory=list)  # empty = all with artifacts
    workers: int = 1
    out_dir: str = "."

    def validate(self):
        if self.workers < 1:
            raise errors.ManifestError("worker count must be >= 1")


def _config_hash(config: RunConfig, manifest) -> str:
    doc = json.dumps({
        "run_id": manifest.run_id,
        "metrics": sorted(config.metrics) if config.metrics else "all",
        "engine": ENGINE_VERSION,
    }, sort_keys=True)
    return hashlib.sha256(doc.encode()).hexdigest()[:16]


def _map_videos(fn, videos, workers):
    """Apply fn to each video entry; results keyed by video id, reduced sorted."""
    if workers <= 1:
        results = {v.id: fn(v) for v in videos}
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {v.id: pool.submit(fn, v) for v in videos}
        results = {vid: fut.result() for vid, fut in futures.items()}
    return {vid: results[vid] for vid in sorted(results)}


# --------------------------------------------------------------------------
# artifact loading helpers
# --------------------------------------------------------------------------

def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_embeddings(path):
    t = interchange.read_tensor(path)
    if t.dtype != "f32" or len(t.shape) != 2:
        raise errors.InvariantViolation(f"{path}: embeddings must be 2-D f32")
    return t.data.astype(np.float64)


def _load_confidence_records(path):
    doc = _load_json(path)
    return [generation.ConfidenceRecord(
        video_id=r["video_id"], frame_index=int(r["frame_index"]),
        track_id=int(r["track_id"]), class_id=r["class_id"],
        confidence=float(r["confidence"])) for r in doc]


def _load_episodes(path):
    doc = _load_json(path)
    return [action.EpisodeSubScores(
        nc=float(e["nc"]), dac=float(e["dac"]), ep=float(e["ep"]),
        ttc=float(e["ttc"]), comfort=float(e["comfort"]),
        d_completed=float(e["d_completed"]), d_total=float(e["d_total"]))
        for e in doc]


def _load_tracking_log(doc):
    frames = [downstream.TrackingFrame(
        gt=[(g[0], float(g[1]), float(g[2])) for g in f["gt"]],
        pred=[(p[0], float(p[1]), float(p[2]), float(p[3])) for p in f["pred"]])
        for f in doc["frames"]]
    return downstream.TrackingLog(
        frames=frames,
        distance_threshold=float(doc.get("distance_threshold",
                                         downstream.AMOTA_MATCH_DISTANCE)))


# --------------------------------------------------------------------------
# metric runners
# --------------------------------------------------------------------------

def _run_g1(manifest, art, config):
    records = _load_confidence_records(art["confidences"])
    classes = manifest.classes.get("objects", sorted({r.class_id for r in records}))
    per_class, total, weighted, per_video = generation.subject_fidelity(records, classes)
    scores = {"total": total, "total_instance_weighted": weighted}
    scores.update({f"class_{c}": v for c, v in sorted(per_class.items())})
    return scores, per_video


def _run_g2(manifest, art, config):
    thresholds = manifest.thresholds

    def load_video(v):
        doc = _load_json(art["tracks_dir"] / f"{v.id}.json")
        tracks = {}
        for tr in doc["tracks"]:
            emb = _load_embeddings(art["tracks_dir"] / tr["embeddings"])
            confs = np.asarray(tr.get("confidences", [1.0] * emb.shape[0]))
            cutoff = thresholds.get(tr.get("class_id", ""), 0.0)
            keep = confs >= cutoff
            if keep.sum() >= 2:
                tracks[tr["track_id"]] = emb[keep]
        return tracks

    videos = _map_videos(load_video, manifest.videos, config.workers)
    total, per_video = generation.subject_coherence(videos)
    return {"total": total, "thresholds": dict(sorted(thresholds.items()))}, per_video


def _consistency_runner(manifest, art, config):
    def load_video(v):
        gen = _load_embeddings(art["features_dir"] / f"{v.id}.wlt")
        ref = _load_embeddings(art["features_dir"] / f"{v.gt_id}.wlt")
        return generation.consistency_score(gen, ref)

    results = _map_videos(load_video, manifest.videos, config.workers)
    per_video = {vid: results[vid][0] for vid in results}
    order = sorted(per_video)
    total = float(np.mean([per_video[v] for v in order]))
    acm = float(np.mean([results[v][1].acm for v in order]))
    tji = float(np.mean([results[v][1].tji for v in order]))
    mrs = float(np.mean([results[v][1].mrs for v in order]))
    return {"total": total, "acm": acm, "tji": tji, "mrs": mrs}, per_video


def _run_g4(manifest, art, config):
    def load_video(v):
        return _load_embeddings(art["features_dir"] / f"{v.id}.wlt")

    videos = _map_videos(load_video, manifest.videos, config.workers)
    total, per_video = generation.depth_discrepancy(videos)
    return {"total": total}, per_video


def _run_g6(manifest, art, config):
    class_count = int(manifest.classes.get("semantic_count", 0))
    radius = int(art.get("erosion_radius", 1))

    def load_video(v):
        t = interchange.read_tensor(art["masks_dir"] / f"{v.id}.wlt")
        masks = interchange.LabelMaskSequence(labels=t.data, class_count=class_count)
        masks.validate()
        return generation.semantic_consistency_video(masks.labels, class_count, radius)

    comps = _map_videos(load_video, manifest.videos, config.workers)
    order = sorted(comps)
    scores = {
        "total": float(np.mean([comps[v].score for v in order])),
        "lfr": float(np.mean([comps[v].lfr for v in order])),
        "sac": float(np.mean([comps[v].sac for v in order])),
        "cds": float(np.mean([comps[v].cds for v in order])),
        "erosion_radius": radius,
    }
    return scores, {v: comps[v].score for v in order}


def _run_g7(manifest, art, config):
    real = _load_embeddings(art["real"])
    gen = _load_embeddings(art["gen"])
    fvd, warn = generation.perceptual_discrepancy(real, gen)
    scores = {"fvd": fvd}
    if warn:
        scores["singular_covariance_warning"] = True
    return scores, {}


def _run_g8(manifest, art, config):
    matches = interchange.load_match_records(art["matches"])
    frames = manifest.videos[0].frames if manifest.videos else 0
    total = generation.cross_view_consistency(
        matches, manifest.camera_pairs, frames, manifest.video_ids())
    return {"total": total}, {}


def _run_r1(manifest, art, config):
    lpips_doc = _load_json(art["lpips"]) if "lpips" in art else {}

    def load_video(v):
        pred = interchange.read_tensor(art["renders_dir"] / f"{v.id}_pred.wlt").data
        ref = interchange.read_tensor(art["renders_dir"] / f"{v.id}_ref.wlt").data
        return [(pred[i], ref[i]) for i in range(pred.shape[0])]

    per = _map_videos(load_video, manifest.videos, config.workers)
    pairs = [p for vid in sorted(per) for p in per[vid]]
    lpips_vals = [x for vid in sorted(per) for x in lpips_doc.get(vid, [])] or None
    psnr_mean, ssim_mean, lpips_mean = reconstruction.photometric_report(pairs, lpips_vals)
    scores = {"psnr": psnr_mean, "ssim": ssim_mean}
    if lpips_mean is not None:
        scores["lpips"] = lpips_mean
    else:
        scores["lpips_absent"] = True
    return scores, {}


def _run_r2(manifest, art, config):
    def load_video(v):
        pred = interchange.read_tensor(art["depth_dir"] / f"{v.id}_pred.wlt").data
        gt = interchange.read_tensor(art["depth_dir"] / f"{v.id}_gt.wlt").data
        mask = interchange.read_tensor(art["depth_dir"] / f"{v.id}_mask.wlt").data
        return reconstruction.geometric_report(pred, gt, mask)

    reports = _map_videos(load_video, manifest.videos, config.workers)
    order = sorted(reports)
    scores = {name: float(np.mean([getattr(reports[v], name) for v in order]))
              for name in ("abs_rel", "rmse", "delta1", "delta2", "delta3")}
    return scores, {v: reports[v].abs_rel for v in order}


def _run_r3(manifest, art, config):
    doc = _load_json(art["quality"])
    flat = {}
    for name, entry in doc.items():
        if isinstance(entry, dict):
            flat[name] = [x for vid in sorted(entry) for x in entry[vid]]
        else:
            flat[name] = list(entry)
    means, average = reconstruction.novel_view_quality(flat)
    scores = dict(sorted(means.items()))
    scores["average"] = average
    return scores, {}


def _run_r4(manifest, art, config):
    feats = {}
    for name in reconstruction.TRAJECTORY_CONDITIONS:
        real = _load_embeddings(art["features_dir"] / f"{name}_real.wlt")
        gen = _load_embeddings(art["features_dir"] / f"{name}_gen.wlt")
        feats[name] = (real, gen)
    fvds, average, warn = reconstruction.novel_view_discrepancy(feats)
    scores = dict(sorted(fvds.items()))
    scores["average"] = average
    if warn:
        scores["singular_covariance_warning"] = True
    return scores, {}


def _run_a1(manifest, art, config):
    doc = _load_json(art["trajectories"])
    gens, gts = [], []
    for vid in sorted(doc):
        entry = doc[vid]
        gen = interchange.TrajectorySet(np.asarray(entry["gen"], dtype=np.float32))
        gt = interchange.TrajectorySet(np.asarray(entry["gt"], dtype=np.float32))
        gen.validate()
        gt.validate()
        gens.append(gen.waypoints)
        gts.append(gt.waypoints)
    return {"displacement_error": action.displacement_error(gens, gts)}, {}


def _run_a2(manifest, art, config):
    agg = action.aggregate_episodes(_load_episodes(art["episodes"]))
    return {"pdms": agg["pdms"]}, {}


def _run_a3(manifest, art, config):
    agg = action.aggregate_episodes(_load_episodes(art["episodes"]))
    return {"route_completion": agg["route_completion"]}, {}


def _run_a4(manifest, art, config):
    agg = action.aggregate_episodes(_load_episodes(art["episodes"]))
    return {"ads": agg["ads"], "pdms": agg["pdms"],
            "route_completion": agg["route_completion"]}, {}


def _run_d1(manifest, art, config):
    class_count = int(manifest.classes.get("bev_count", 0))

    def load_video(v):
        pred = interchange.read_tensor(art["bev_dir"] / f"{v.id}_pred.wlt").data
        gt = interchange.read_tensor(art["bev_dir"] / f"{v.id}_gt.wlt").data
        return downstream.bev_miou(pred, gt, class_count)

    results = _map_videos(load_video, manifest.videos, config.workers)
    order = sorted(results)
    per_video = {v: results[v][1] for v in order}
    scores = {"miou": float(np.mean([per_video[v] for v in order]))}
    return scores, per_video


def _run_d2(manifest, art, config):
    doc = _load_json(art["detection"])
    summary = downstream.DetectionSummary(
        m_ap=float(doc["m_ap"]), m_ate=float(doc["m_ate"]),
        m_ase=float(doc["m_ase"]), m_aoe=float(doc["m_aoe"]),
        m_ave=float(doc["m_ave"]), m_aae=float(doc["m_aae"]))
    return {"nds": downstream.nds(summary), "m_ap": summary.m_ap,
            "protocol": "nuScenes detection score composition"}, {}


def _run_d3(manifest, art, config):
    doc = _load_json(art["tracking"])
    per_video = {}
    for vid in sorted(doc["videos"]):
        result = downstream.amota(_load_tracking_log(doc["videos"][vid]))
        per_video[vid] = result.amota
    order = sorted(per_video)
    return {"amota": float(np.mean([per_video[v] for v in order])),
            "protocol": "nuScenes tracking sweep, 40 recall points, 2 m matching"}, \
        per_video


def _run_d4(manifest, art, config):
    rays = interchange.load_ray_set(art["rays"])

    def load_video(v):
        pred = interchange.load_voxel_grid(art["occ_dir"] / f"{v.id}_pred.wlt",
                                           art["occ_dir"] / f"{v.id}_geom.json")
        gt = interchange.load_voxel_grid(art["occ_dir"] / f"{v.id}_gt.wlt",
                                         art["occ_dir"] / f"{v.id}_geom.json")
        return downstream.ray_iou(pred, gt, rays)

    results = _map_videos(load_video, manifest.videos, config.workers)
    order = sorted(results)
    scores = {"m_ray_iou": float(np.mean([results[v].m_ray_iou for v in order]))}
    for delta in downstream.RAY_IOU_DELTAS:
        scores[f"ray_iou_at_{delta:g}m"] = float(
            np.mean([results[v].per_delta[delta] for v in order]))
    return scores, {v: results[v].m_ray_iou for v in order}


def _run_h(manifest, art, config):
    records = preference.load_records(art["records"])
    scores = {}
    models = sorted({r.model_id for r in records})
    for model in models:
        for dim in preference.DIMENSIONS:
            try:
                stats = preference.dimension_stats(records, dim, model)
            except errors.NoRecords:
                continue
            scores[f"{model}.{dim}.mean"] = stats.mean
            scores[f"{model}.{dim}.std"] = stats.std
            scores[f"{model}.{dim}.median"] = stats.median
    return scores, {}


_RUNNERS = {
    "G1": _run_g1,
    "G2": _run_g2,
    "G3": _consistency_runner,
    "G4": _run_g4,
    "G5": _consistency_runner,
    "G6": _run_g6,
    "G7": _run_g7,
    "G8": _run_g8,
    "R1": _run_r1,
    "R2": _run_r2,
    "R3": _run_r3,
    "R4": _run_r4,
    "A1": _run_a1,
    "A2": _run_a2,
    "A3": _run_a3,
    "A4": _run_a4,
    "D1": _run_d1,
    "D2": _run_d2,
    "D3": _run_d3,
    "D4": _run_d4,
    "H": _run_h,
}


def run_evaluation(config: RunConfig) -> MetricReport:
    """Evaluate the selected metrics; per-video failures degrade to warnings."""
    config.validate()
    manifest = interchange.load_manifest(config.manifest_path)

    selected = sorted(config.metrics) if config.metrics else sorted(manifest.artifacts)
    if not selected:
        raise errors.NoMetricsSelected("no metrics selected or available")

    report = MetricReport(meta={
        "engine_version": ENGINE_VERSION,
        "run_id": manifest.run_id,
        "config_hash": _config_hash(config, manifest),
        "metrics": selected,
    })

    for metric in selected:
        if metric not in _RUNNERS:
            raise errors.NoMetricsSelected(f"unknown metric {metric!r}")
        art = manifest.artifacts.get(metric)
        if art is None:
            report.warnings.append(f"{metric}: no artifacts in manifest, skipped")
            continue
        try:
            scores, per_video = _RUNNERS[metric](manifest, art, config)
        except errors.WorldLensError as exc:
            report.warnings.append(f"{metric}: {type(exc).__name__}: {exc}")
            continue
        report.scores[metric] = scores
        if per_video:
            report.per_video[metric] = per_video
    return report


# --------------------------------------------------------------------------
# artifact validation (no metric computation)
# --------------------------------------------------------------------------

def _check_tensor(path, diagnostics, expect_dtype=None, expect_ndim=None):
    try:
        t = interchange.read_tensor(path)
    except errors.WorldLensError as exc:
        diagnostics.append(f"BadTensor: {path}: {exc}")
        return None
    if expect_dtype and t.dtype != expect_dtype:
        diagnostics.append(f"DtypeMismatch: {path}: {t.dtype} != {expect_dtype}")
    if expect_ndim and len(t.shape) != expect_ndim:
        diagnostics.append(f"RankMismatch: {path}: ndim {len(t.shape)}")
    return t


def _check_normalized(path, diagnostics):
    t = _check_tensor(path, diagnostics, expect_dtype="f32", expect_ndim=2)
    if t is None:
        return
    norms = np.linalg.norm(t.data.astype(np.float64), axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-4):
        diagnostics.append(f"NormalizationMismatch: {path}")


def validate_artifacts(manifest: interchange.EvaluationManifest):
    """Check every referenced artifact's invariants; returns diagnostics."""
    diagnostics = []
    arts = manifest.artifacts

    if "G1" in arts:
        try:
            for r in _load_confidence_records(arts["G1"]["confidences"]):
                if not 0.0 <= r.confidence <= 1.0:
                    diagnostics.append(f"ConfidenceOutOfRange: G1 {r.video_id}")
        except (errors.WorldLensError, KeyError, ValueError) as exc:
            diagnostics.append(f"BadRecords: G1: {exc}")

    for metric in ("G3", "G5"):
        if metric in arts:
            for v in manifest.videos:
                for vid in (v.id, v.gt_id):
                    _check_normalized(arts[metric]["features_dir"] / f"{vid}.wlt",
                                      diagnostics)

    if "G4" in arts:
        for v in manifest.videos:
            _check_tensor(arts["G4"]["features_dir"] / f"{v.id}.wlt", diagnostics,
                          expect_dtype="f32", expect_ndim=2)

    if "G2" in arts:
        for v in manifest.videos:
            try:
                doc = _load_json(arts["G2"]["tracks_dir"] / f"{v.id}.json")
                for tr in doc["tracks"]:
                    _check_normalized(arts["G2"]["tracks_dir"] / tr["embeddings"],
                                      diagnostics)
            except (OSError, KeyError, json.JSONDecodeError) as exc:
                diagnostics.append(f"BadRecords: G2 {v.id}: {exc}")

    if "G6" in arts:
        class_count = int(manifest.classes.get("semantic_count", 0))
        for v in manifest.videos:
            t = _check_tensor(arts["G6"]["masks_dir"] / f"{v.id}.wlt", diagnostics,
                              expect_dtype="u16", expect_ndim=3)
            if t is not None and t.data.size and int(t.data.max()) >= class_count:
                diagnostics.append(f"LabelOutOfRange: G6 {v.id}")

    if "G7" in arts:
        for key in ("real", "gen"):
            _check_tensor(arts["G7"][key], diagnostics, expect_dtype="f32",
                          expect_ndim=2)

    if "G8" in arts:
        try:
            matches = interchange.load_match_records(arts["G8"]["matches"])
            declared = {tuple(p) for p in manifest.camera_pairs}
            declared |= {(b, a) for a, b in declared}
            for rec in matches.records:
                if tuple(rec.camera_pair) not in declared:
                    diagnostics.append(f"UnknownPair: G8 {rec.camera_pair}")
        except errors.WorldLensError as exc:
            diagnostics.append(f"BadRecords: G8: {exc}")

    if "R1" in arts:
        for v in manifest.videos:
            for side in ("pred", "ref"):
                _check_tensor(arts["R1"]["renders_dir"] / f"{v.id}_{side}.wlt",
                              diagnostics, expect_dtype="f32", expect_ndim=4)

    if "R2" in arts:
        for v in manifest.videos:
            gt = _check_tensor(arts["R2"]["depth_dir"] / f"{v.id}_gt.wlt",
                               diagnostics, expect_dtype="f32", expect_ndim=3)
            mask = _check_tensor(arts["R2"]["depth_dir"] / f"{v.id}_mask.wlt",
                                 diagnostics, expect_ndim=3)
            _check_tensor(arts["R2"]["depth_dir"] / f"{v.id}_pred.wlt",
                          diagnostics, expect_dtype="f32", expect_ndim=3)
            if gt is not None and mask is not None:
                if not np.isin(mask.data, (0, 1)).all():
                    diagnostics.append(f"MaskNotBinary: R2 {v.id}")
                elif np.any(gt.data[mask.data != 0] <= 0):
                    diagnostics.append(f"NonPositiveGtDepth: R2 {v.id}")

    if "D1" in arts:
        class_count = int(manifest.classes.get("bev_count", 0))
        for v in manifest.videos:
            for side in ("pred", "gt"):
                t = _check_tensor(arts["D1"]["bev_dir"] / f"{v.id}_{side}.wlt",
                                  diagnostics, expect_dtype="u16", expect_ndim=3)
                if t is not None and t.data.size and int(t.data.max()) >= class_count:
                    diagnostics.append(f"LabelOutOfRange: D1 {v.id} {side}")

    if "D4" in arts:
        try:
            interchange.load_ray_set(arts["D4"]["rays"])
        except errors.WorldLensError as exc:
            diagnostics.append(f"BadRays: {exc}")
        for v in manifest.videos:
            try:
                pred = interchange.load_voxel_grid(
                    arts["D4"]["occ_dir"] / f"{v.id}_pred.wlt",
                    arts["D4"]["occ_dir"] / f"{v.id}_geom.json")
                gt = interchange.load_voxel_grid(
                    arts["D4"]["occ_dir"] / f"{v.id}_gt.wlt",
                    arts["D4"]["occ_dir"] / f"{v.id}_geom.json")
                if pred.labels.shape != gt.labels.shape:
                    diagnostics.append(f"GridMismatch: D4 {v.id}")
            except errors.WorldLensError as exc:
                diagnostics.append(f"BadGrid: D4 {v.id}: {exc}")

    if "H" in arts:
        try:
            for r in preference.load_records(arts["H"]["records"]):
                for violation in preference.validate_record(r):
                    diagnostics.append(f"{violation}: H {r.video_id}")
        except errors.WorldLensError as exc:
            diagnostics.append(f"BadRecords: H: {exc}")

    return diagnostics
