"""Downstream-task scorers (D.1-D.4).

BEV map mIoU, nuScenes-style detection score composition, AMOTA over
tracking logs, and RayIoU over occupancy voxel grids.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import errors
from ._kernels import ray_march, voxel_entry_distance

RAY_IOU_DELTAS = (1.0, 2.0, 4.0)
AMOTA_RECALL_POINTS = 40
AMOTA_MATCH_DISTANCE = 2.0


@dataclass
class DetectionSummary:
    m_ap: float
    m_ate: float
    m_ase: float
    m_aoe: float
    m_ave: float
    m_aae: float

    def validate(self):
        if not 0.0 <= self.m_ap <= 1.0:
            raise errors.OutOfRange(f"mAP={self.m_ap}")
        for name in ("m_ate", "m_ase", "m_aoe", "m_ave", "m_aae"):
            if getattr(self, name) < 0:
                raise errors.OutOfRange(f"{name}={getattr(self, name)}")


@dataclass
class TrackingFrame:
    gt: list    # [(gt_id, x, y)]
    pred: list  # [(track_id, x, y, confidence)]


@dataclass
class TrackingLog:
    frames: list
    distance_threshold: float = AMOTA_MATCH_DISTANCE


@dataclass
class AmotaResult:
    amota: float
    motar_per_threshold: list  # [(recall_target, motar or None)]
    mota: float
    recall: float


# --------------------------------------------------------------------------
# D.1 BEV map mIoU
# --------------------------------------------------------------------------

def bev_miou(pred, gt, class_count):
    """Per-frame class-mean IoU, averaged over frames.

    Classes whose union is empty in a frame are excluded from that frame's
    mean.  Returns (per_class_iou, miou).
    """
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise errors.ShapeMismatch(f"{pred.shape} vs {gt.shape}")

    frame_scores = []
    class_sums = np.zeros(class_count)
    class_counts = np.zeros(class_count)
    for i in range(pred.shape[0]):
        ious = []
        for c in range(class_count):
            p = pred[i] == c
            g = gt[i] == c
            union = int(np.count_nonzero(p | g))
            if union == 0:
                continue
            iou = int(np.count_nonzero(p & g)) / union
            ious.append(iou)
            class_sums[c] += iou
            class_counts[c] += 1
        if ious:
            frame_scores.append(float(np.mean(ious)))
    if not frame_scores:
        raise errors.ShapeMismatch("no class present in any frame")
    per_class = {c: float(class_sums[c] / class_counts[c])
                 for c in range(class_count) if class_counts[c] > 0}
    return per_class, float(np.mean(frame_scores))


# --------------------------------------------------------------------------
# D.2 nuScenes detection score
# --------------------------------------------------------------------------

def nds(d: DetectionSummary) -> float:
    """(1/10) * [5 * mAP + sum over errors of (1 - min(1, err))]."""
    d.validate()
    err_terms = sum(1.0 - min(1.0, e)
                    for e in (d.m_ate, d.m_ase, d.m_aoe, d.m_ave, d.m_aae))
    return 0.1 * (5.0 * d.m_ap + err_terms)


# --------------------------------------------------------------------------
# D.3 AMOTA
# --------------------------------------------------------------------------

def _sweep_counts(log: TrackingLog, conf_threshold):
    """Greedy center-distance matching across all frames at one threshold."""
    tp = fp = fn = ids = 0
    last_track = {}
    for frame in log.frames:
        preds = [p for p in frame.pred if p[3] >= conf_threshold]
        preds.sort(key=lambda p: (-p[3], p[0]))
        unmatched_gt = {g[0]: (g[1], g[2]) for g in frame.gt}
        for track_id, px, py, _conf in preds:
            best_id = None
            best_d = log.distance_threshold
            for gid, (gx, gy) in unmatched_gt.items():
                dist = ((px - gx) ** 2 + (py - gy) ** 2) ** 0.5
                if dist < best_d:
                    best_d = dist
                    best_id = gid
            if best_id is None:
                fp += 1
            else:
                tp += 1
                prev = last_track.get(best_id)
                if prev is not None and prev != track_id:
                    ids += 1
                last_track[best_id] = track_id
                del unmatched_gt[best_id]
        fn += len(unmatched_gt)
    return tp, fp, fn, ids


def amota(log: TrackingLog, recall_points=AMOTA_RECALL_POINTS) -> AmotaResult:
    """Recall-threshold-averaged tracking accuracy.

    Sweeps confidence thresholds; for each recall target r = i/n, uses the
    highest threshold achieving recall >= r and evaluates MOTAR at the
    achieved recall, clamped to [0, 1].  Unachievable targets are excluded
    from the mean (AMOTA is 0 when no target is achievable).
    """
    total_gt = sum(len(f.gt) for f in log.frames)
    if total_gt == 0:
        raise errors.NoGroundTruth("log has no ground-truth objects")

    confidences = sorted({p[3] for f in log.frames for p in f.pred}, reverse=True)
    sweep = []
    for c in confidences:
        tp, fp, fn, ids = _sweep_counts(log, c)
        sweep.append((c, tp / total_gt, tp, fp, fn, ids))

    motar_rows = []
    achieved = []
    for i in range(1, recall_points + 1):
        target = i / recall_points
        hit = None
        for c, recall, tp, fp, fn, ids in sweep:  # thresholds descending
            if recall >= target:
                hit = (recall, tp, fp, fn, ids)
                break
        if hit is None:
            motar_rows.append((target, None))
            continue
        recall, tp, fp, fn, ids = hit
        motar = 1.0 - (ids + fp + fn - (1.0 - recall) * total_gt) / (recall * total_gt)
        motar = min(1.0, max(0.0, motar))
        motar_rows.append((target, motar))
        achieved.append(motar)

    amota_value = float(np.mean(achieved)) if achieved else 0.0

    if sweep:
        c, recall, tp, fp, fn, ids = sweep[-1]  # lowest threshold: all predictions
        mota = max(0.0, 1.0 - (ids + fp + fn) / total_gt)
        max_recall = max(row[1] for row in sweep)
    else:
        mota = 0.0
        max_recall = 0.0
    return AmotaResult(amota=amota_value, motar_per_threshold=motar_rows,
                       mota=mota, recall=max_recall)


# --------------------------------------------------------------------------
# D.4 RayIoU
# --------------------------------------------------------------------------

@dataclass
class RayIouResult:
    per_delta: dict                  # delta -> class-mean IoU
    per_delta_class: dict            # delta -> {class: IoU}
    m_ray_iou: float
    hits: list = field(repr=False, default_factory=list)


def _grid_hit(grid, origin, direction, max_range):
    hit, ix, iy, iz = ray_march(grid.labels, origin, direction,
                                grid.origin, grid.voxel_size, max_range)
    if not hit:
        return None
    t_entry = voxel_entry_distance(origin, direction, grid.origin,
                                   grid.voxel_size, (ix, iy, iz))
    return int(grid.labels[ix, iy, iz]), t_entry + 0.5 * grid.voxel_size


def ray_iou(pred, gt, rays, deltas=RAY_IOU_DELTAS) -> RayIouResult:
    """Frontmost-voxel agreement along query rays under depth tolerances.

    The hit depth is the voxel entry distance plus half a voxel.  A ray is a
    class-c TP when both grids hit class c within the tolerance; class
    mismatches or out-of-tolerance depths count FN for the reference class
    and FP for the predicted class.
    """
    if (pred.labels.shape != gt.labels.shape
            or not np.allclose(pred.origin, gt.origin)
            or pred.voxel_size != gt.voxel_size):
        raise errors.GridMismatch("grids must share dims, origin, and voxel size")

    hits = []
    for i in range(rays.origins.shape[0]):
        o = rays.origins[i]
        d = rays.directions[i]
        rng = float(rays.max_ranges[i])
        hits.append((_grid_hit(pred, o, d, rng), _grid_hit(gt, o, d, rng)))

    per_delta = {}
    per_delta_class = {}
    for delta in deltas:
        tp = {}
        fp = {}
        fn = {}
        for p_hit, g_hit in hits:
            if p_hit is None and g_hit is None:
                continue
            if p_hit is not None and g_hit is not None:
                pc, pd = p_hit
                gc, gd = g_hit
                if pc == gc and abs(pd - gd) <= delta:
                    tp[gc] = tp.get(gc, 0) + 1
                else:
                    fn[gc] = fn.get(gc, 0) + 1
                    fp[pc] = fp.get(pc, 0) + 1
            elif g_hit is not None:
                fn[g_hit[0]] = fn.get(g_hit[0], 0) + 1
            else:
                fp[p_hit[0]] = fp.get(p_hit[0], 0) + 1
        classes = sorted(set(tp) | set(fp) | set(fn))
        if not classes:
            per_delta[delta] = 1.0 if all(p is None and g is None for p, g in hits) else 0.0
            per_delta_class[delta] = {}
            continue
        ious = {c: tp.get(c, 0) / (tp.get(c, 0) + fp.get(c, 0) + fn.get(c, 0))
                for c in classes}
        per_delta_class[delta] = ious
        per_delta[delta] = float(np.mean(list(ious.values())))

    return RayIouResult(per_delta=per_delta, per_delta_class=per_delta_class,
                        m_ray_iou=float(np.mean([per_delta[d] for d in deltas])),
                        hits=hits)
